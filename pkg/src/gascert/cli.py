"""Command-line front end.

Subcommands::

    gascert connective <cfg>                  aggregate sufficiency test
    gascert riccati    <cfg>                  per-subsystem Riccati certificates
    gascert smallgain  <cfg>                  loop-gain product diagnostic
    gascert simulate   <cfg> --mode {dec,dist} --out <csv>

Exit codes: 0 pass/certified/finite, 1 usage or input/solver error,
2 condition failed, 3 divergence.  Reports go to stdout as deterministic
JSON (sorted keys, 17-digit floats).  The environment variable
GASCERT_SEED is reserved; every computation here is deterministic and no
randomness is used.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .config import digest, dump_report, load_config
from .connective import analyze
from .exceptions import GascertError
from .numerics import hinf_gain
from .riccati import certify
from .sim import export_csv, metrics, simulate

_TOOL = f"gascert {__version__}"


def _base_report(method, data):
    return {"method": method, "tool": _TOOL, "input_sha256": digest(data)}


def cmd_connective(args):
    net, _, data = load_config(args.config)
    kwargs = {}
    if args.tol is not None:
        kwargs["lyap_rtol"] = args.tol
    report = analyze(net, **kwargs)
    doc = _base_report("connective", data)
    doc["verdict"] = "pass" if report.passed else "fail"
    doc["conditions"] = {
        "diagonal_dominance": report.cond_diag,
        "norm_exceeds_offsets": report.cond_norm,
        "aggregate_stable": report.M_stable,
    }
    doc["aggregate_matrix"] = report.M
    doc["offsets"] = report.offsets
    doc["subsystems"] = {
        sid: {
            "P": report.P[sid],
            "lambda_min_P": report.lambda_min_P[sid],
            "lambda_max_P": report.lambda_max_P[sid],
            "lambda_min_Q": report.lambda_min_Q[sid],
            "decay_rate": report.alpha[sid],
            "diagonally_dominant": bool(report.cond_diag_rows[k]),
        }
        for k, sid in enumerate(report.ids)
    }
    sys.stdout.write(dump_report(doc))
    return 0 if report.passed else 2


def cmd_riccati(args):
    net, _, data = load_config(args.config)
    cert = certify(net, tol=args.tol)
    doc = _base_report("riccati", data)
    doc["verdict"] = "certified" if cert.certified else "not-certified"
    doc["failing"] = cert.failing
    doc["subsystems"] = {
        c.sid: {
            "neighbors": c.n_neighbors,
            "coupling_energy": c.coupling_energy,
            "distance": c.distance,
            "margin": c.margin,
            "epsilon": c.epsilon,
            "are_residual": c.are_residual,
            "P": c.P,
            "reason": c.reason,
        }
        for c in cert.subsystems
    }
    sys.stdout.write(dump_report(doc))
    return 0 if cert.certified else 2


def cmd_smallgain(args):
    net, _, data = load_config(args.config)
    ids = sorted(net.ids)
    edge_map = {}
    for e in net.edges:
        edge_map[(e.src, e.dst)] = e

    def path_gain(e):
        # worst-case transfer gain of one coupling path through the
        # source's target dynamics
        if e is None:
            return 0.0, 0.0
        Am = net.desired[e.src]
        if e.A is not None:
            return hinf_gain(e.A, Am), e.gain()
        # bound-only edge: submultiplicative bound through the resolvent
        return e.norm_bound * hinf_gain(np.eye(Am.shape[0]), Am), e.gain()

    pairs = []
    worst_h, worst_raw = 0.0, 0.0
    all_pass = True
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            i, j = ids[a], ids[b]
            fwd = edge_map.get((j, i))
            back = edge_map.get((i, j))
            if fwd is None and back is None:
                continue
            h1, r1 = path_gain(fwd)
            h2, r2 = path_gain(back)
            hprod, rprod = h1 * h2, r1 * r2
            passed = bool(hprod < 1.0)
            all_pass = all_pass and passed
            worst_h = max(worst_h, hprod)
            worst_raw = max(worst_raw, rprod)
            pairs.append({"pair": [i, j], "hinf_product": hprod,
                          "raw_gain_product": rprod, "pass": passed})
    doc = _base_report("small-gain", data)
    doc["verdict"] = "pass" if all_pass else "fail"
    doc["hinf_product"] = worst_h
    doc["raw_gain_product"] = worst_raw
    doc["pairs"] = pairs
    sys.stdout.write(dump_report(doc))
    return 0 if all_pass else 2


def cmd_simulate(args):
    net, scenario, data = load_config(args.config)
    if scenario is None:
        raise GascertError("config has no scenario section; nothing to simulate")
    mode = {"dec": "decentralized", "dist": "distributed"}[args.mode]
    cert = certify(net)
    trace = simulate(net, scenario, mode=mode,
                     certificate=cert if cert.certified else None)
    export_csv(trace, args.out)
    doc = _base_report("simulate", data)
    doc["mode"] = mode
    doc["certified"] = cert.certified
    doc["samples"] = int(trace.t.size)
    doc["trace"] = args.out
    doc["metrics"] = metrics(trace)
    sys.stdout.write(dump_report(doc))
    return 3 if trace.diverged else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gascert",
        description="Stability certification and simulation for networks of "
                    "linear MIMO subsystems under adaptive control.",
    )
    parser.add_argument("--version", action="version", version=_TOOL)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="network configuration document (JSON)")
        p.add_argument("--tol", type=float, default=None,
                       help="override the solver tolerance where the command uses one")
        p.set_defaults(fn=fn)
        return p

    add("connective", cmd_connective, "run the aggregate sufficiency test")
    add("riccati", cmd_riccati, "certify via per-subsystem Riccati equations")
    add("smallgain", cmd_smallgain, "loop-gain product diagnostic for coupled pairs")
    p = add("simulate", cmd_simulate, "simulate the closed-loop network")
    p.add_argument("--mode", choices=["dec", "dist"], default="dist",
                   help="predictor architecture: decentralized or distributed")
    p.add_argument("--out", required=True, help="trace CSV output path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except GascertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
