"""Fixed-step time-domain simulation of the coupled adaptive network.

The joint ODE (plants in uncertainty form, state predictors, estimate
dynamics) is advanced with classical RK4 at a fixed step, so a run is a
pure function of its inputs: identical inputs give bit-identical traces.
Two architectures are supported:

* ``decentralized`` - local predictors, normalized adaptation law;
* ``distributed``   - predictors exchange their states along the coupling
  graph and the projection-based law is used.

Plants are integrated as ``desired + B theta'`` (the uncertainty form),
so the scenario's true ``theta`` is the single source of plant-model
mismatch.  Outputs are ``C_aug @ x`` (feedthrough is carried in the model
but excluded from tracking error).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import control
from .exceptions import DimensionError
from .model import NetworkModel
from .numerics import solve_lyapunov

__all__ = [
    "NetworkState",
    "Scenario",
    "Schedule",
    "SimTrace",
    "export_csv",
    "metrics",
    "simulate",
    "step",
]

@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant signal: value k holds on [times[k], times[k+1])."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[0] != times.shape[0]:
            raise DimensionError(
                f"schedule has {times.shape[0]} breakpoints but {values.shape[0]} rows"
            )
        if times.size == 0:
            raise ValueError("schedule needs at least one breakpoint")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("schedule breakpoints must be strictly increasing")
        if times[0] != 0.0:
            raise ValueError("schedules start at t = 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value):
        return cls(times=[0.0], values=[np.atleast_1d(np.asarray(value, dtype=float))])

    def at(self, t):
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.values[max(k, 0)]

    @property
    def width(self):
        return self.values.shape[1]


@dataclass
class Scenario:
    """Simulation scenario: horizon, step, input schedules, truth, and
    initial conditions.  Missing entries default to zeros."""

    horizon: float
    dt: float
    references: dict = field(default_factory=dict)
    disturbances: dict = field(default_factory=dict)
    theta: dict = field(default_factory=dict)
    x0: dict = field(default_factory=dict)
    xhat0: dict = field(default_factory=dict)
    theta_hat0: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.horizon < 0.0:
            raise ValueError("horizon must be non-negative")


@dataclass
class NetworkState:
    """Snapshot of the joint simulation state."""

    xbar: dict
    xhat: dict
    theta_hat: dict


@dataclass
class SimTrace:
    """Time-indexed record of one run.

    Per-subsystem arrays are keyed by id; ``lyapunov`` is the certificate
    Lyapunov value (error energy plus weighted estimate error) when a
    certificate was supplied, else None.  A diverged run is truncated at
    the first non-finite sample and flagged, not discarded.
    """

    ids: list
    t: np.ndarray
    xbar: dict
    xhat: dict
    theta_hat: dict
    u_bl: dict
    u_mrac: dict
    output: dict
    reference: dict
    error_norm: dict
    lyapunov: np.ndarray | None
    diverged: bool
    diverged_at: float | None
    mode: str


class _Dynamics:
    """Precomputed structure for the joint right-hand side."""

    def __init__(self, net: NetworkModel, scenario: Scenario, mode, certificate=None):
        if mode not in ("decentralized", "distributed"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.ids = list(net.ids)
        self.subs = [net.subsystem(sid) for sid in self.ids]
        index = {sid: k for k, sid in enumerate(self.ids)}
        self.A_m = [net.desired[sid] for sid in self.ids]
        self.B = [s.B for s in self.subs]
        self.FE = [s.F @ s.E for s in self.subs]
        self.C = [s.C for s in self.subs]
        self.K_bl = [net.baseline[sid] for sid in self.ids]
        self.in_edges = [
            [(index[e.src], self._edge_matrix(e)) for e in net.in_edges(sid)]
            for sid in self.ids
        ]
        self.gamma = [net.tuning[sid].gamma for sid in self.ids]
        self.theta_max = [net.tuning[sid].theta_max for sid in self.ids]
        self.eps0 = [net.tuning[sid].eps0 for sid in self.ids]
        self.theta_true = []
        for k, sid in enumerate(self.ids):
            th = scenario.theta.get(sid)
            shape = (self.subs[k].dim, self.subs[k].m)
            th = np.zeros(shape) if th is None else np.asarray(th, dtype=float)
            if th.shape != shape:
                raise DimensionError(
                    f"subsystem {sid}: true theta has shape {th.shape}, expected {shape}"
                )
            self.theta_true.append(th)
        self.P = []
        for k, sid in enumerate(self.ids):
            Pk = certificate.P(sid) if certificate is not None else None
            if Pk is None:
                Pk = solve_lyapunov(self.A_m[k], net.tuning[sid].Q)
            self.P.append(Pk)
        self.ref = [self._schedule(scenario.references.get(sid), self.subs[k].q, sid, "reference")
                    for k, sid in enumerate(self.ids)]
        self.dist = [self._schedule(scenario.disturbances.get(sid), self.subs[k].r, sid, "disturbance")
                     for k, sid in enumerate(self.ids)]
        # flat layout: per subsystem, [xbar | xhat | vec(theta_hat)]
        self.off = []
        pos = 0
        for s in self.subs:
            p, m = s.dim, s.m
            self.off.append((pos, pos + p, pos + 2 * p, pos + 2 * p + p * m))
            pos += 2 * p + p * m
        self.size = pos

    @staticmethod
    def _edge_matrix(e):
        if e.A is None:
            raise ValueError(
                f"edge {e.src}->{e.dst}: bound-only edge has no matrix to simulate"
            )
        return e.A

    @staticmethod
    def _schedule(sched, width, sid, kind):
        if sched is None:
            return Schedule(times=[0.0], values=np.zeros((1, width)))
        if not isinstance(sched, Schedule):
            sched = Schedule.constant(sched)
        if sched.width != width:
            raise DimensionError(
                f"subsystem {sid}: {kind} schedule is {sched.width}-wide, expected {width}"
            )
        return sched

    def pack(self, state: NetworkState):
        z = np.zeros(self.size)
        for k, sid in enumerate(self.ids):
            a, b, c, d = self.off[k]
            p, m = self.subs[k].dim, self.subs[k].m
            z[a:b] = np.asarray(state.xbar.get(sid, np.zeros(p)), dtype=float)
            z[b:c] = np.asarray(state.xhat.get(sid, np.zeros(p)), dtype=float)
            th = state.theta_hat.get(sid)
            th = np.zeros((p, m)) if th is None else np.asarray(th, dtype=float)
            z[c:d] = th.reshape(-1)
        return z

    def unpack(self, z):
        xbar, xhat, theta = {}, {}, {}
        for k, sid in enumerate(self.ids):
            a, b, c, d = self.off[k]
            p, m = self.subs[k].dim, self.subs[k].m
            xbar[sid] = z[a:b].copy()
            xhat[sid] = z[b:c].copy()
            theta[sid] = z[c:d].reshape(p, m).copy()
        return NetworkState(xbar=xbar, xhat=xhat, theta_hat=theta)

    def rhs(self, t, z):
        xbars, xhats, thetas = [], [], []
        for k in range(len(self.ids)):
            a, b, c, d = self.off[k]
            p, m = self.subs[k].dim, self.subs[k].m
            xbars.append(z[a:b])
            xhats.append(z[b:c])
            thetas.append(z[c:d].reshape(p, m))
        dz = np.empty_like(z)
        for k in range(len(self.ids)):
            a, b, c, d = self.off[k]
            s = self.subs[k]
            x, xh, th = xbars[k], xhats[k], thetas[k]
            dbar = np.concatenate([self.dist[k].at(t), self.ref[k].at(t)])
            forced = self.FE[k] @ dbar
            u = control.mrac_control(th, x)
            coupling = np.zeros(s.dim)
            for j, A_ij in self.in_edges[k]:
                coupling += A_ij @ xbars[j]
            dz[a:b] = (self.A_m[k] @ x + self.B[k] @ (u + self.theta_true[k].T @ x)
                       + forced + coupling)
            if self.mode == "distributed":
                terms = [(A_ij, xhats[j]) for j, A_ij in self.in_edges[k]]
                dz[b:c] = control.predictor_rate(
                    self.A_m[k], self.B[k], xh, u, th, x, forced,
                    mode="distributed", neighbor_terms=terms)
                rate = control.update_projection(
                    xh - x, self.P[k], self.B[k], x, self.gamma[k], th,
                    self.theta_max[k], self.eps0[k])
            else:
                dz[b:c] = control.predictor_rate(
                    self.A_m[k], self.B[k], xh, u, th, x, forced,
                    mode="decentralized")
                rate = control.update_normalized(
                    xh - x, self.P[k], self.B[k], xh, self.gamma[k])
            dz[c:d] = rate.reshape(-1)
        return dz

    def rk4_step(self, t, z, dt):
        k1 = self.rhs(t, z)
        k2 = self.rhs(t + 0.5 * dt, z + 0.5 * dt * k1)
        k3 = self.rhs(t + 0.5 * dt, z + 0.5 * dt * k2)
        k4 = self.rhs(t + dt, z + dt * k3)
        return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def lyapunov(self, z):
        v = 0.0
        for k in range(len(self.ids)):
            a, b, c, d = self.off[k]
            p, m = self.subs[k].dim, self.subs[k].m
            err = z[b:c] - z[a:b]
            dth = z[c:d].reshape(p, m) - self.theta_true[k]
            v += float(err @ self.P[k] @ err)
            v += float(np.sum(dth * dth)) / self.gamma[k]
        return v


def step(net, state: NetworkState, scenario: Scenario, t, dt,
         mode="distributed", certificate=None) -> NetworkState:
    """Advance the joint state by one RK4 step of length ``dt``."""
    dyn = _Dynamics(net, scenario, mode, certificate)
    z = dyn.pack(state)
    z_next = dyn.rk4_step(float(t), z, float(dt))
    if not np.all(np.isfinite(z_next)):
        raise FloatingPointError(f"state diverged during the step at t={t}")
    return dyn.unpack(z_next)


def simulate(net, scenario: Scenario, mode="distributed",
             certificate=None) -> SimTrace:
    """Run the scenario over its horizon and record the full trace.

    The Lyapunov series is recorded when a certificate is supplied (its
    per-subsystem weights are used both by the distributed adaptation law
    and by the diagnostic).  Divergence truncates the trace and sets the
    flag; it is not an exception.
    """
    dyn = _Dynamics(net, scenario, mode, certificate)
    n_steps = int(round(scenario.horizon / scenario.dt))
    t_grid = np.arange(n_steps + 1) * scenario.dt
    xbar = {sid: np.zeros((n_steps + 1, dyn.subs[k].dim)) for k, sid in enumerate(dyn.ids)}
    xhat = {sid: np.zeros((n_steps + 1, dyn.subs[k].dim)) for k, sid in enumerate(dyn.ids)}
    theta = {sid: np.zeros((n_steps + 1, dyn.subs[k].dim, dyn.subs[k].m))
             for k, sid in enumerate(dyn.ids)}
    u_bl = {sid: np.zeros((n_steps + 1, dyn.subs[k].m)) for k, sid in enumerate(dyn.ids)}
    u_mrac = {sid: np.zeros((n_steps + 1, dyn.subs[k].m)) for k, sid in enumerate(dyn.ids)}
    output = {sid: np.zeros((n_steps + 1, 2 * dyn.subs[k].q)) for k, sid in enumerate(dyn.ids)}
    reference = {sid: np.zeros((n_steps + 1, dyn.subs[k].q)) for k, sid in enumerate(dyn.ids)}
    err_norm = {sid: np.zeros(n_steps + 1) for sid in dyn.ids}
    has_cert = certificate is not None
    lyap = np.zeros(n_steps + 1) if has_cert else None

    z = dyn.pack(NetworkState(
        xbar={sid: scenario.x0.get(sid) for sid in dyn.ids if scenario.x0.get(sid) is not None},
        xhat={sid: scenario.xhat0.get(sid) for sid in dyn.ids if scenario.xhat0.get(sid) is not None},
        theta_hat={sid: scenario.theta_hat0.get(sid) for sid in dyn.ids
                   if scenario.theta_hat0.get(sid) is not None},
    ))

    def record(i, t):
        for k, sid in enumerate(dyn.ids):
            a, b, c, d = dyn.off[k]
            p, m = dyn.subs[k].dim, dyn.subs[k].m
            x = z[a:b]
            xh = z[b:c]
            th = z[c:d].reshape(p, m)
            xbar[sid][i] = x
            xhat[sid][i] = xh
            theta[sid][i] = th
            u_bl[sid][i] = control.baseline_control(dyn.K_bl[k], x)
            u_mrac[sid][i] = control.mrac_control(th, x)
            output[sid][i] = dyn.C[k] @ x
            reference[sid][i] = dyn.ref[k].at(t)
            err_norm[sid][i] = np.linalg.norm(xh - x)
        if has_cert:
            lyap[i] = dyn.lyapunov(z)

    record(0, 0.0)
    diverged = False
    diverged_at = None
    last = n_steps
    # states beyond 1e150 count as divergent: the recorded quadratics
    # (Lyapunov value, control signals) would overflow
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            z = dyn.rk4_step(t_grid[i], z, scenario.dt)
            if not np.all(np.isfinite(z)) or np.max(np.abs(z)) >= 1e150:
                diverged = True
                diverged_at = float(t_grid[i + 1])
                last = i
                break
            record(i + 1, t_grid[i + 1])

    n_keep = last + 1

    def trim(d):
        return {sid: arr[:n_keep] for sid, arr in d.items()}

    return SimTrace(
        ids=list(dyn.ids),
        t=t_grid[:n_keep],
        xbar=trim(xbar), xhat=trim(xhat), theta_hat=trim(theta),
        u_bl=trim(u_bl), u_mrac=trim(u_mrac),
        output=trim(output), reference=trim(reference),
        error_norm=trim(err_norm),
        lyapunov=lyap[:n_keep] if has_cert else None,
        diverged=diverged, diverged_at=diverged_at, mode=mode,
    )


def metrics(trace: SimTrace):
    """Summary figures of a trace.

    Per subsystem: peak prediction-error norm, settling time of the
    tracked outputs into a 2 percent band, and final tracking error.
    Global: final Lyapunov value and the largest increase between
    consecutive samples (both None without a certificate), plus the
    divergence marker.
    """
    per = {}
    for sid in trace.ids:
        q = trace.reference[sid].shape[1]
        entry = {"max_error_norm": float(np.max(trace.error_norm[sid]))
                 if trace.error_norm[sid].size else 0.0}
        if q == 0 or trace.t.size == 0:
            entry["settling_time"] = 0.0
            entry["steady_state_error"] = 0.0
        else:
            y = trace.output[sid][:, :q]
            r = trace.reference[sid]
            err = np.max(np.abs(y - r), axis=1)
            r_final = r[-1]
            scale = max(float(np.max(np.abs(r_final))),
                        float(np.max(np.abs(y - r_final[None, :]))))
            if scale == 0.0:
                entry["settling_time"] = 0.0
            else:
                band = 0.02 * scale
                above = np.nonzero(err > band)[0]
                if above.size == 0:
                    entry["settling_time"] = 0.0
                elif above[-1] + 1 >= trace.t.size:
                    entry["settling_time"] = None
                else:
                    entry["settling_time"] = float(trace.t[above[-1] + 1])
            entry["steady_state_error"] = float(np.max(np.abs(y[-1] - r[-1])))
        per[sid] = entry
    out = {"per_subsystem": per, "diverged": trace.diverged}
    if trace.lyapunov is not None and trace.lyapunov.size:
        out["final_lyapunov"] = float(trace.lyapunov[-1])
        dv = np.diff(trace.lyapunov)
        out["max_lyapunov_increase"] = float(np.max(dv)) if dv.size else 0.0
    else:
        out["final_lyapunov"] = None
        out["max_lyapunov_increase"] = None
    return out


def export_csv(trace: SimTrace, stream):
    """Write the trace in long form: ``time,subsystem,series,index,value``.

    One row per sample element, floats rendered with 17 significant
    digits; row order is fixed (time, then subsystem in model order, then
    series, then element index), so identical traces serialize to
    identical bytes.
    """
    own = isinstance(stream, (str, os.PathLike))
    fh = open(stream, "w", newline="") if own else stream
    try:
        fh.write("time,subsystem,series,index,value\n")
        for i, t in enumerate(trace.t):
            ts = f"{t:.17g}"
            for sid in trace.ids:
                rows = (
                    ("state", trace.xbar[sid][i]),
                    ("predictor", trace.xhat[sid][i]),
                    ("estimate", trace.theta_hat[sid][i].reshape(-1)),
                    ("u_bl", trace.u_bl[sid][i]),
                    ("u_mrac", trace.u_mrac[sid][i]),
                    ("output", trace.output[sid][i]),
                    ("reference", trace.reference[sid][i]),
                    ("error_norm", np.atleast_1d(trace.error_norm[sid][i])),
                )
                for series, vec in rows:
                    for j, v in enumerate(vec):
                        fh.write(f"{ts},{sid},{series},{j},{v:.17g}\n")
            if trace.lyapunov is not None:
                fh.write(f"{ts},network,lyapunov,0,{trace.lyapunov[i]:.17g}\n")
    finally:
        if own:
            fh.close()
