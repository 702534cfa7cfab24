"""Network configuration documents and report serialization.

Configs are JSON.  Matrices are nested row-major arrays.  Subsystems give
raw (A, B, C, D, E) blocks; A may be null for an unknown plant.  The
reference model is either an explicit augmented matrix or gain blocks
{"A_nominal", "K_x", "K_xi"}, shared at top level or per subsystem.
Edges carry raw coupling blocks (augmented internally), or a bound-only
declaration with a spectral-norm bound.

Reports are emitted by a small deterministic serializer: keys sorted,
floats at 17 significant digits, so byte-identical inputs give
byte-identical reports.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .control import build_reference_model
from .exceptions import ConfigError
from .model import AugmentedSubsystem, Interconnection, NetworkModel, Tuning, augment_edge
from .sim import Scenario, Schedule

__all__ = [
    "digest",
    "dump_report",
    "load_config",
    "parse_config",
]


def _require(obj, key, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    if key not in obj:
        raise ConfigError(f"{path}.{key}: missing required field")
    return obj[key]


def _matrix(value, path, allow_null=False):
    if value is None:
        if allow_null:
            return None
        raise ConfigError(f"{path}: matrix must not be null")
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: not a numeric nested array ({exc})") from None
    if M.ndim == 1:
        M = M.reshape(-1, 1) if M.size else M.reshape(0, 0)
    if M.ndim != 2:
        raise ConfigError(f"{path}: expected a 2-D nested array, got ndim={M.ndim}")
    if M.size and not np.all(np.isfinite(M)):
        raise ConfigError(f"{path}: matrix has non-finite entries")
    return M


def _scalar(value, path):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number")
    return float(value)


def _reference_model(spec, sub, path):
    if isinstance(spec, list):
        return _matrix(spec, path)
    if isinstance(spec, dict):
        A_nom = _matrix(_require(spec, "A_nominal", path), f"{path}.A_nominal")
        K_x = _matrix(_require(spec, "K_x", path), f"{path}.K_x")
        K_xi = _matrix(_require(spec, "K_xi", path), f"{path}.K_xi")
        try:
            return build_reference_model(A_nom, sub["B"], sub["C"], K_x, K_xi)
        except Exception as exc:
            raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}: expected a matrix or gain blocks")


def _tuning(spec, path):
    Q = _matrix(_require(spec, "Q", path), f"{path}.Q")
    gamma = _scalar(_require(spec, "gamma", path), f"{path}.gamma")
    theta_max = _scalar(_require(spec, "theta_max", path), f"{path}.theta_max")
    eps0 = _scalar(_require(spec, "eps0", path), f"{path}.eps0")
    try:
        return Tuning(Q=Q, gamma=gamma, theta_max=theta_max, eps0=eps0)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _schedule(spec, path):
    if isinstance(spec, list):
        return Schedule.constant(np.asarray(spec, dtype=float))
    times = _require(spec, "times", path)
    values = _require(spec, "values", path)
    try:
        return Schedule(times=np.asarray(times, dtype=float),
                        values=np.asarray(values, dtype=float))
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _scenario(spec, subs_by_id, path):
    horizon = _scalar(_require(spec, "horizon", path), f"{path}.horizon")
    dt = _scalar(_require(spec, "dt", path), f"{path}.dt")
    kwargs = {"horizon": horizon, "dt": dt}
    for key in ("references", "disturbances"):
        entry = spec.get(key, {})
        if not isinstance(entry, dict):
            raise ConfigError(f"{path}.{key}: expected an object keyed by subsystem id")
        kwargs[key] = {sid: _schedule(v, f"{path}.{key}.{sid}") for sid, v in entry.items()}
    for key in ("theta", "theta_hat0"):
        entry = spec.get(key, {})
        kwargs[key] = {sid: _matrix(v, f"{path}.{key}.{sid}") for sid, v in entry.items()}
    for key in ("x0", "xhat0"):
        entry = spec.get(key, {})
        out = {}
        for sid, v in entry.items():
            vec = np.asarray(v, dtype=float).ravel()
            if not np.all(np.isfinite(vec)):
                raise ConfigError(f"{path}.{key}.{sid}: non-finite entries")
            out[sid] = vec
        kwargs[key] = out
    for key in ("references", "disturbances", "theta", "theta_hat0", "x0", "xhat0"):
        for sid in kwargs[key]:
            if sid not in subs_by_id:
                raise ConfigError(f"{path}.{key}.{sid}: unknown subsystem id")
    for key in ("x0", "xhat0"):
        for sid, vec in kwargs[key].items():
            dim = subs_by_id[sid]["n"] + subs_by_id[sid]["q"]
            if vec.shape[0] != dim:
                raise ConfigError(
                    f"{path}.{key}.{sid}: expected {dim} entries, got {vec.shape[0]}"
                )
    for key in ("theta", "theta_hat0"):
        for sid, mat in kwargs[key].items():
            want = (subs_by_id[sid]["n"] + subs_by_id[sid]["q"],
                    subs_by_id[sid]["B"].shape[1])
            if mat.shape != want:
                raise ConfigError(
                    f"{path}.{key}.{sid}: expected shape {want}, got {mat.shape}"
                )
    try:
        return Scenario(**kwargs)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(doc):
    """Build (NetworkModel, Scenario-or-None) from a parsed JSON document."""
    subs_spec = _require(doc, "subsystems", "config")
    if not isinstance(subs_spec, list) or not subs_spec:
        raise ConfigError("config.subsystems: expected a non-empty array")
    shared_rm = doc.get("reference_model")
    shared_tuning = doc.get("tuning")
    subsystems, desired, tuning, baseline = [], {}, {}, {}
    raw = {}
    for k, sub in enumerate(subs_spec):
        path = f"config.subsystems[{k}]"
        sid = _require(sub, "id", path)
        if not isinstance(sid, str) or not sid:
            raise ConfigError(f"{path}.id: expected a non-empty string")
        B = _matrix(_require(sub, "B", path), f"{path}.B")
        C = _matrix(_require(sub, "C", path), f"{path}.C")
        A = _matrix(sub.get("A"), f"{path}.A", allow_null=True)
        D = _matrix(sub.get("D"), f"{path}.D", allow_null=True)
        E = _matrix(sub.get("E"), f"{path}.E", allow_null=True)
        raw[sid] = {"B": B, "C": C, "n": B.shape[0], "q": C.shape[0]}
        try:
            aug = AugmentedSubsystem.from_raw(sid, B, C, A=A, D=D, E=E)
        except Exception as exc:
            raise ConfigError(f"{path}: {exc}") from None
        subsystems.append(aug)
        rm_spec = sub.get("reference_model", shared_rm)
        if rm_spec is None:
            raise ConfigError(f"{path}.reference_model: missing (no shared default)")
        desired[sid] = _reference_model(rm_spec, raw[sid], f"{path}.reference_model")
        tn_spec = sub.get("tuning", shared_tuning)
        if tn_spec is None:
            raise ConfigError(f"{path}.tuning: missing (no shared default)")
        tuning[sid] = _tuning(tn_spec, f"{path}.tuning")
        if sub.get("baseline_gain") is not None:
            baseline[sid] = _matrix(sub["baseline_gain"], f"{path}.baseline_gain")
    edges = []
    for k, edge in enumerate(doc.get("edges", [])):
        path = f"config.edges[{k}]"
        src = _require(edge, "from", path)
        dst = _require(edge, "to", path)
        for sid, role in ((src, "from"), (dst, "to")):
            if sid not in raw:
                raise ConfigError(f"{path}.{role}: unknown subsystem id {sid!r}")
        bound_only = bool(edge.get("bound_only", False))
        norm_bound = edge.get("norm_bound")
        if norm_bound is not None:
            norm_bound = _scalar(norm_bound, f"{path}.norm_bound")
        A_edge = None
        if edge.get("A") is not None:
            A_raw = _matrix(edge["A"], f"{path}.A")
            want = (raw[dst]["n"], raw[src]["n"])
            if A_raw.shape != want:
                raise ConfigError(f"{path}.A: shape {A_raw.shape} does not match "
                                  f"destination x source raw dims {want}")
            A_edge = augment_edge(A_raw, raw[dst]["q"], raw[src]["q"])
        elif not bound_only:
            raise ConfigError(f"{path}.A: missing required field")
        try:
            edges.append(Interconnection(src=src, dst=dst, A=A_edge,
                                         bound_only=bound_only, norm_bound=norm_bound))
        except Exception as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        net = NetworkModel(subsystems=subsystems, edges=edges, desired=desired,
                           tuning=tuning, baseline=baseline)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"config: {exc}") from None
    scenario = None
    if doc.get("scenario") is not None:
        scenario = _scenario(doc["scenario"], raw, "config.scenario")
    return net, scenario


def load_config(path):
    """Read and parse a config file; returns (net, scenario, raw bytes)."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: not valid JSON ({exc})") from None
    net, scenario = parse_config(doc)
    return net, scenario, data


def digest(data: bytes):
    """Hex digest identifying the exact input document."""
    return hashlib.sha256(data).hexdigest()


def _to_jsonable(x):
    if isinstance(x, np.ndarray):
        return [_to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    return x


def _emit(x, out, indent):
    pad = "  " * indent
    if x is None:
        out.append("null")
    elif isinstance(x, bool):
        out.append("true" if x else "false")
    elif isinstance(x, int):
        out.append(str(x))
    elif isinstance(x, float):
        if not np.isfinite(x):
            raise ValueError("reports must not contain non-finite numbers")
        out.append(f"{x:.17g}")
    elif isinstance(x, str):
        out.append(json.dumps(x))
    elif isinstance(x, dict):
        if not x:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(x)
        for i, k in enumerate(keys):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _emit(x[k], out, indent + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(x, (list, tuple)):
        if not x:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(x):
            out.append(pad + "  ")
            _emit(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(x) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(x).__name__}")


def dump_report(report: dict):
    """Serialize a report deterministically (sorted keys, 17-digit floats)."""
    out = []
    _emit(_to_jsonable(report), out, 0)
    out.append("\n")
    return "".join(out)
