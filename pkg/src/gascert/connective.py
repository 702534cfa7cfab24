"""Aggregate (connective) stability analysis.

Per-subsystem Lyapunov data is condensed into a comparison system: a
Metzler matrix ``M`` of decay/coupling rates plus an offset vector from
adaptation.  Diagonal dominance of ``M`` and the norm-vs-offset condition
are sufficient for global asymptotic stability of the interconnected
closed loop.  A small-gain diagnostic for coupled pairs lives here too,
since its failure is what motivates the Riccati route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .model import NetworkModel
from .numerics import eigenvalues, hinf_gain, solve_lyapunov, spectral_norm

__all__ = [
    "ConnectiveReport",
    "SmallGainResult",
    "adaptation_offsets",
    "analyze",
    "check_conditions",
    "comparison_matrix",
    "homogeneous_condition",
    "small_gain_check",
    "theta_max_bound",
    "transient_bound",
]


def theta_max_bound(theta_l1_bound):
    """Estimate bound ``4 * b**2`` from a 1-norm bound on the uncertainty."""
    if theta_l1_bound < 0.0:
        raise ValueError("the 1-norm bound must be non-negative")
    return 4.0 * float(theta_l1_bound) ** 2


def _lam_extremes(S):
    w = np.linalg.eigvalsh(0.5 * (S + S.T))
    return float(w[0]), float(w[-1])


def comparison_matrix(net: NetworkModel, P: dict):
    """Aggregate comparison matrix ``M``.

    ``M[i][i] = -lam_min(Q_i) / (2 lam_max(P_i))`` and, for each edge
    j -> i, ``M[i][j] = lam_max(P_i) ||A_ij|| / sqrt(lam_min(P_i)
    lam_min(P_j))``; zero elsewhere.  Off-diagonals are non-negative, so
    ``M`` is Metzler with negative diagonal.
    """
    ids = net.ids
    index = {sid: k for k, sid in enumerate(ids)}
    lam = {}
    for sid in ids:
        if sid not in P:
            raise ValueError(f"subsystem {sid}: missing Lyapunov solution")
        lam[sid] = _lam_extremes(P[sid])
        if lam[sid][0] <= 0.0:
            raise ValueError(f"subsystem {sid}: P is not positive definite")
    M = np.zeros((len(ids), len(ids)))
    for sid in ids:
        lmin_P, lmax_P = lam[sid]
        lmin_Q = _lam_extremes(net.tuning[sid].Q)[0]
        M[index[sid], index[sid]] = -lmin_Q / (2.0 * lmax_P)
        for e in net.in_edges(sid):
            lmin_Pj = lam[e.src][0]
            M[index[sid], index[e.src]] += (
                lmax_P / np.sqrt(lmin_P * lmin_Pj) * e.gain()
            )
    return M


def adaptation_offsets(net: NetworkModel, P: dict, theta_max=None):
    """Offset vector (the diagonal of the aggregate offset term).

    For subsystem i::

        Phi_i = theta_max * ( lam_min(Q_i) / (2 Gamma_i lam_max(P_i))
                - sum over out-edges i->j of
                  lam_max(P_i) ||A_ji|| / (Gamma_j sqrt(lam_min(P_i) lam_min(P_j))) )

    ``theta_max`` overrides the per-subsystem tuning value when given.
    Large adaptive gains make every entry arbitrarily small.
    """
    ids = net.ids
    lam = {sid: _lam_extremes(P[sid]) for sid in ids}
    out = np.zeros(len(ids))
    for k, sid in enumerate(ids):
        lmin_P, lmax_P = lam[sid]
        lmin_Q = _lam_extremes(net.tuning[sid].Q)[0]
        gamma_i = net.tuning[sid].gamma
        tmax = net.tuning[sid].theta_max if theta_max is None else float(theta_max)
        term = lmin_Q / (2.0 * gamma_i * lmax_P)
        for e in net.out_edges(sid):
            gamma_j = net.tuning[e.dst].gamma
            lmin_Pj = lam[e.dst][0]
            term -= lmax_P * e.gain() / (gamma_j * np.sqrt(lmin_P * lmin_Pj))
        out[k] = tmax * term
    return out


def diagonal_dominance_rows(M):
    """Row-wise verdicts of ``|M[i][i]| > sum_j!=i M[i][j]`` (strict)."""
    M = np.asarray(M, dtype=float)
    off = M - np.diag(np.diag(M))
    return np.abs(np.diag(M)) > np.sum(off, axis=1)


def check_conditions(M, offsets):
    """Evaluate the two sufficiency conditions plus stability of ``M``.

    Returns ``(cond_diag, cond_norm, M_stable)``: row-wise diagonal
    dominance, induced-1-norm of ``M`` exceeding the largest offset
    magnitude, and all eigenvalues of ``M`` in the open left half-plane.
    """
    M = np.asarray(M, dtype=float)
    offsets = np.asarray(offsets, dtype=float).ravel()
    if M.shape[0] != M.shape[1]:
        raise DimensionError("M must be square")
    if offsets.shape[0] != M.shape[0]:
        raise DimensionError("offset vector length must match M")
    cond_diag = bool(np.all(diagonal_dominance_rows(M)))
    norm1 = float(np.max(np.sum(np.abs(M), axis=0))) if M.size else 0.0
    cond_norm = bool(norm1 > np.max(np.abs(offsets))) if offsets.size else True
    M_stable = bool(np.max(eigenvalues(M).real) < 0.0)
    return cond_diag, cond_norm, M_stable


def homogeneous_condition(lmin_Q, lmax_P, lmin_P, n_neighbors, gain):
    """Shortcut test for identical subsystems:

    ``lam_min(Q) / (2 lam_max(P)) > (lam_max(P)/lam_min(P)) * N * ||A_ij||``
    """
    if min(lmin_Q, lmax_P, lmin_P) <= 0.0:
        raise ValueError("eigenvalue inputs must be positive")
    if n_neighbors < 0 or gain < 0.0:
        raise ValueError("neighbour count and gain must be non-negative")
    return bool(lmin_Q / (2.0 * lmax_P) > (lmax_P / lmin_P) * n_neighbors * gain)


def transient_bound(P, Q, theta_max, gamma, v0, t):
    """Exponential decay rate and transient error bound.

    Returns ``(alpha, rho)`` with ``alpha = lam_min(Q)/lam_max(P)`` and::

        rho(t) = sqrt( (v0 - theta_max/gamma) exp(-alpha t) / lam_min(P)
                       + theta_max / (gamma lam_min(P)) )

    ``t`` may be a scalar or an array.  A negative radicand (possible only
    for inconsistent inputs) raises, since the bound would be complex.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    lmin_P, lmax_P = _lam_extremes(np.asarray(P, dtype=float))
    lmin_Q = _lam_extremes(np.asarray(Q, dtype=float))[0]
    if lmin_P <= 0.0 or lmin_Q <= 0.0:
        raise ValueError("P and Q must be positive definite")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be non-negative")
    alpha = lmin_Q / lmax_P
    tail = theta_max / gamma
    radicand = (v0 - tail) * np.exp(-alpha * t) / lmin_P + tail / lmin_P
    if np.any(radicand < 0.0):
        raise ValueError("transient bound is complex for these inputs")
    rho = np.sqrt(radicand)
    return alpha, rho if rho.ndim else float(rho)


@dataclass(frozen=True)
class SmallGainResult:
    hinf_product: float
    raw_gain_product: float
    passed: bool


def small_gain_check(A12, A21, A_m):
    """Loop-gain product test for one coupled pair.

    ``hinf_product`` multiplies the peak frequency-response gains of the
    two coupling paths through the target dynamics; ``raw_gain_product``
    is the product of the plain spectral norms (the quick desk check).
    The verdict uses the frequency-domain product: pass iff it is < 1.
    """
    h12 = hinf_gain(A12, A_m)
    h21 = hinf_gain(A21, A_m)
    raw = spectral_norm(A12) * spectral_norm(A21)
    product = h12 * h21
    return SmallGainResult(hinf_product=product, raw_gain_product=raw,
                           passed=bool(product < 1.0))


@dataclass
class ConnectiveReport:
    """Everything the aggregate test produced, per subsystem and global."""

    ids: list
    P: dict
    lambda_min_P: dict
    lambda_max_P: dict
    lambda_min_Q: dict
    alpha: dict
    M: np.ndarray
    offsets: np.ndarray
    cond_diag_rows: np.ndarray
    cond_diag: bool
    cond_norm: bool
    M_stable: bool
    passed: bool


def analyze(net: NetworkModel, theta_max=None, lyap_rtol=1e-10) -> ConnectiveReport:
    """Run the full aggregate pipeline on a network.

    Solves one Lyapunov equation per subsystem (independent solves), then
    assembles the comparison matrix, the offset vector, and the verdicts.
    """
    P = {}
    lam_min_P, lam_max_P, lam_min_Q, alpha = {}, {}, {}, {}
    for sid in net.ids:
        Pi = solve_lyapunov(net.desired[sid], net.tuning[sid].Q, rtol=lyap_rtol)
        P[sid] = Pi
        lo, hi = _lam_extremes(Pi)
        lam_min_P[sid], lam_max_P[sid] = lo, hi
        lam_min_Q[sid] = _lam_extremes(net.tuning[sid].Q)[0]
        alpha[sid] = lam_min_Q[sid] / hi
    M = comparison_matrix(net, P)
    offsets = adaptation_offsets(net, P, theta_max=theta_max)
    cond_diag, cond_norm, M_stable = check_conditions(M, offsets)
    return ConnectiveReport(
        ids=list(net.ids),
        P=P,
        lambda_min_P=lam_min_P,
        lambda_max_P=lam_max_P,
        lambda_min_Q=lam_min_Q,
        alpha=alpha,
        M=M,
        offsets=offsets,
        cond_diag_rows=diagonal_dominance_rows(M),
        cond_diag=cond_diag,
        cond_norm=cond_norm,
        M_stable=M_stable,
        passed=bool(cond_diag and cond_norm and M_stable),
    )
