"""Distributed stability certification via per-subsystem Riccati equations.

Each subsystem is certified independently: its incoming coupling energy is
summed, the distance from its target dynamics to instability is computed
by bisection, and when the distance exceeds the coupling level a slack
margin is picked and the Riccati equation solved.  The network is
certified when every subsystem passes; failures are collected, never
raised mid-run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GascertError, StabilityError
from .model import NetworkModel
from .numerics import distance_to_instability, solve_are, solve_lyapunov, spectral_norm

__all__ = [
    "GasCertificate",
    "SubsystemCertificate",
    "certify",
    "epsilon_margin",
    "interconnection_energy",
    "stability_margin",
]


def interconnection_energy(net: NetworkModel, sid, symmetric=False):
    """Total incoming coupling energy: sum of squared edge gains.

    Each incoming edge contributes the square of its spectral norm (the
    largest eigenvalue of ``A_ij' A_ij``); bound-only edges contribute
    their declared worst-case bound squared.  With ``symmetric=True`` the
    bound is read as direction-independent: when the reverse edge exists,
    the larger of the two gains is used.
    """
    if sid not in net.ids:
        raise ValueError(f"unknown subsystem id {sid!r}")
    total = 0.0
    for e in net.in_edges(sid):
        gain = e.gain()
        if symmetric:
            for back in net.out_edges(sid):
                if back.dst == e.src:
                    gain = max(gain, back.gain())
        total += gain * gain
    return total


def stability_margin(A_m, n_neighbors, coupling_energy, tol=1e-9):
    """Margin ``gamma - sqrt(N * Xi2)`` of the distance condition.

    Positive means the subsystem can absorb its declared coupling;
    the certificate requires strict positivity.
    """
    if coupling_energy < 0.0:
        raise ValueError("coupling energy must be non-negative")
    gamma = distance_to_instability(A_m, max(int(n_neighbors), 1), tol)
    return gamma - np.sqrt(max(int(n_neighbors), 0) * coupling_energy)


def epsilon_margin(A_m, n_neighbors, coupling_energy, distance=None, tol=1e-9):
    """Slack added to the coupling energy in the Riccati equation.

    Half the available gap: ``eps = (gamma^2 / N - Xi2) / 2``, which keeps
    the augmented Hamiltonian hyperbolic whenever the margin is positive
    (then ``N (Xi2 + eps) < gamma^2``).  A decoupled subsystem (N = 0) has
    no gap to split; the convention there is ``eps = gamma^2 / 2``.

    Raises
    ------
    StabilityError
        If the margin is not positive (no admissible slack exists).
    """
    N = int(n_neighbors)
    gamma = (
        distance
        if distance is not None
        else distance_to_instability(A_m, max(N, 1), tol)
    )
    if N == 0:
        return 0.5 * gamma * gamma
    if gamma - np.sqrt(N * coupling_energy) <= 0.0:
        raise StabilityError("margin is not positive: no admissible slack exists")
    return 0.5 * (gamma * gamma / N - coupling_energy)


@dataclass(frozen=True)
class SubsystemCertificate:
    """Per-subsystem certification record."""

    sid: str
    n_neighbors: int
    coupling_energy: float
    distance: float
    margin: float
    epsilon: float | None
    P: np.ndarray | None
    are_residual: float | None
    ok: bool
    reason: str | None = None


@dataclass
class GasCertificate:
    """Network-wide verdict with per-subsystem records (sorted by id)."""

    subsystems: list
    certified: bool

    @property
    def failing(self):
        return [c.sid for c in self.subsystems if not c.ok]

    def record(self, sid) -> SubsystemCertificate:
        for c in self.subsystems:
            if c.sid == sid:
                return c
        raise KeyError(sid)

    def P(self, sid):
        return self.record(sid).P


def certify(net: NetworkModel, tol=None, symmetric=False) -> GasCertificate:
    """Certify the network subsystem by subsystem.

    For each subsystem: coupling energy, distance to instability (bisection
    tolerance ``tol``, default ``1e-12 * max(1, ||A_m||_2)``), margin, and
    on a positive margin the slack pick and the Riccati solve.  Failures
    are recorded per subsystem; the run never aborts early.
    """
    records = []
    for sid in sorted(net.ids):
        A_m = net.desired[sid]
        N = net.neighbor_count(sid)
        xi2 = interconnection_energy(net, sid, symmetric=symmetric)
        tol_i = tol if tol is not None else 1e-12 * max(1.0, spectral_norm(A_m))
        gamma = distance_to_instability(A_m, max(N, 1), tol_i)
        margin = gamma - np.sqrt(N * xi2)
        if margin <= 0.0:
            records.append(SubsystemCertificate(
                sid=sid, n_neighbors=N, coupling_energy=xi2, distance=gamma,
                margin=margin, epsilon=None, P=None, are_residual=None,
                ok=False, reason="margin is not positive"))
            continue
        eps = epsilon_margin(A_m, N, xi2, distance=gamma)
        try:
            if N == 0:
                P = solve_lyapunov(A_m, eps * np.eye(A_m.shape[0]))
                residual = float(np.linalg.norm(
                    A_m.T @ P + P @ A_m + eps * np.eye(A_m.shape[0])))
            else:
                sol = solve_are(A_m, N, xi2 + eps)
                P, residual = sol.P, sol.residual_norm
        except GascertError as exc:
            records.append(SubsystemCertificate(
                sid=sid, n_neighbors=N, coupling_energy=xi2, distance=gamma,
                margin=margin, epsilon=eps, P=None, are_residual=None,
                ok=False, reason=str(exc)))
            continue
        records.append(SubsystemCertificate(
            sid=sid, n_neighbors=N, coupling_energy=xi2, distance=gamma,
            margin=margin, epsilon=eps, P=P, are_residual=residual, ok=True))
    return GasCertificate(subsystems=records,
                          certified=bool(all(c.ok for c in records)))
