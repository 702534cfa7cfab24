"""Dense real-matrix kernels that the rest of the package builds on.

Spectra, norms, Lyapunov and Riccati solves, Hamiltonian hyperbolicity
tests, a bisection routine for the distance to instability, and a
frequency-sweep H-infinity gain.  All functions are pure: they keep no
state and are safe to call concurrently on shared read-only inputs.
Intended problem sizes are small (n up to a few tens); everything is
dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import DimensionError, SolverError, StabilityError

__all__ = [
    "AreSolution",
    "as_matrix",
    "distance_to_instability",
    "eigenvalues",
    "hamiltonian",
    "hinf_gain",
    "is_hurwitz",
    "is_hyperbolic",
    "solve_are",
    "solve_lyapunov",
    "spectral_norm",
]


def as_matrix(M, name="matrix", square=False):
    """Coerce input to a 2-D float array with finite entries.

    Scalars become 1x1 matrices, 1-D arrays become row vectors.
    """
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={A.ndim}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def eigenvalues(A):
    """Full spectrum of a square matrix, with multiplicity.

    Parameters
    ----------
    A : (n, n) array_like
        Real square matrix.

    Returns
    -------
    (n,) complex ndarray
        Eigenvalues sorted deterministically by (real part, imag part).

    Raises
    ------
    DimensionError
        If ``A`` is not square.
    SolverError
        If the underlying QR iteration fails to converge.
    """
    A = as_matrix(A, "A", square=True)
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigenvalue iteration did not converge: {exc}") from exc
    return w[np.lexsort((w.imag, w.real))]


def spectral_norm(A):
    """Largest singular value of ``A`` (induced 2-norm)."""
    A = as_matrix(A, "A")
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def is_hurwitz(A):
    """True iff every eigenvalue of ``A`` has strictly negative real part."""
    return bool(np.max(eigenvalues(A).real) < 0.0)


def solve_lyapunov(A, Q, rtol=1e-10):
    """Solve the continuous Lyapunov equation ``A'P + PA + Q = 0``.

    Parameters
    ----------
    A : (n, n) array_like
        Hurwitz matrix.
    Q : (n, n) array_like
        Symmetric positive definite weight.
    rtol : float
        Residual acceptance: the Frobenius residual must not exceed
        ``rtol * (||A||_F ||P||_F + ||Q||_F)``.

    Returns
    -------
    (n, n) ndarray
        The symmetric positive definite solution.

    Raises
    ------
    StabilityError
        If ``A`` is not Hurwitz (no positive definite solution exists).
    SolverError
        If the computed solution violates the residual bound or fails the
        definiteness check.
    """
    A = as_matrix(A, "A", square=True)
    Q = as_matrix(Q, "Q", square=True)
    if Q.shape != A.shape:
        raise DimensionError(f"Q must match A: {Q.shape} vs {A.shape}")
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(Q).max()))):
        raise ValueError("Q must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T))) <= 0.0:
        raise ValueError("Q must be positive definite")
    if not is_hurwitz(A):
        raise StabilityError(
            "A is not Hurwitz: the Lyapunov equation has no positive definite solution"
        )
    P = sla.solve_continuous_lyapunov(A.T, -Q)
    P = 0.5 * (P + P.T)
    scale = np.linalg.norm(A) * np.linalg.norm(P) + np.linalg.norm(Q)
    residual = np.linalg.norm(A.T @ P + P @ A + Q)
    if residual > rtol * scale:
        raise SolverError(
            f"Lyapunov residual {residual:.3e} exceeds {rtol:.1e} * scale ({rtol * scale:.3e})"
        )
    if np.min(np.linalg.eigvalsh(P)) <= 0.0:
        raise SolverError("Lyapunov solution is not positive definite")
    return P


def hamiltonian(Am, N, q):
    """Assemble the 2n x 2n block matrix ``[[Am, N*I], [-q*I, -Am']]``.

    ``N`` is the neighbour count entering the quadratic term and ``q`` the
    scalar weight of the constant term (coupling energy, optionally plus a
    margin).  ``N = 0`` is accepted and gives the block-triangular
    degenerate form.
    """
    Am = as_matrix(Am, "Am", square=True)
    if N < 0:
        raise ValueError("N must be a non-negative count")
    if q < 0.0:
        raise ValueError("q must be non-negative")
    n = Am.shape[0]
    eye = np.eye(n)
    return np.block([[Am, float(N) * eye], [-float(q) * eye, -Am.T]])


def is_hyperbolic(H, tol):
    """True iff no eigenvalue of ``H`` lies within ``tol`` of the imaginary axis.

    The verdict is ``min_k |Re lambda_k| > tol`` (strict).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    w = eigenvalues(H)
    return bool(np.min(np.abs(w.real)) > tol)


@dataclass(frozen=True)
class AreSolution:
    """Stabilizing Riccati solution with its quality figures.

    Attributes
    ----------
    P : (n, n) ndarray
        Symmetric positive definite solution.
    residual_norm : float
        Frobenius norm of ``A'P + PA + N P^2 + q I``.
    closed_loop_spectrum : (n,) complex ndarray
        Eigenvalues of ``A + N P`` (all in the open left half-plane),
        sorted by (real, imag).
    """

    P: np.ndarray
    residual_norm: float
    closed_loop_spectrum: np.ndarray


def solve_are(Am, N, q, eig_tol_scale=1e-8):
    """Solve ``Am'P + P Am + N P^2 + q I = 0`` for the stabilizing P.

    The solution is extracted from the stable invariant subspace of the
    Hamiltonian ``[[Am, N*I], [-q*I, -Am']]``: with an ordered real Schur
    form putting the left-half-plane eigenvalues first, the leading block
    columns ``[U; V]`` span that subspace and ``P = V U^{-1}``.

    Parameters
    ----------
    Am : (n, n) array_like
        Hurwitz matrix.
    N : int
        Non-negative count scaling the quadratic term.
    q : float
        Non-negative constant-term weight.
    eig_tol_scale : float
        Hyperbolicity tolerance relative to the Hamiltonian spectral norm.

    Raises
    ------
    StabilityError
        If ``Am`` is not Hurwitz, or the Hamiltonian has imaginary-axis
        eigenvalues (distance condition violated: no solution exists).
    SolverError
        If the invariant subspace is ill-conditioned or the result
        violates the residual/definiteness contract.
    """
    Am = as_matrix(Am, "Am", square=True)
    n = Am.shape[0]
    if not is_hurwitz(Am):
        raise StabilityError("Am is not Hurwitz")
    H = hamiltonian(Am, N, q)
    eig_tol = eig_tol_scale * max(spectral_norm(H), 1e-300)
    if not is_hyperbolic(H, eig_tol):
        raise StabilityError(
            "Hamiltonian has imaginary-axis eigenvalues: the distance "
            "condition is violated and the Riccati equation has no "
            "stabilizing solution"
        )
    T, Z, sdim = sla.schur(H, output="real", sort="lhp")
    if sdim != n:
        raise SolverError(
            f"stable invariant subspace has dimension {sdim}, expected {n}"
        )
    U = Z[:n, :n]
    V = Z[n:, :n]
    try:
        P = np.linalg.solve(U.T, V.T).T
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"invariant-subspace basis is singular: {exc}") from exc
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(Am.T @ P + P @ Am + float(N) * P @ P + q * np.eye(n)))
    bound = 1e-8 * max(1.0, float(np.linalg.norm(P)) ** 2)
    if residual > bound:
        raise SolverError(
            f"Riccati residual {residual:.3e} exceeds tolerance {bound:.3e} "
            "(ill-conditioned invariant subspace)"
        )
    if np.min(np.linalg.eigvalsh(P)) <= 0.0:
        raise SolverError("Riccati solution is not positive definite")
    closed = eigenvalues(Am + float(N) * P)
    if np.max(closed.real) >= 0.0:
        raise SolverError("closed-loop matrix Am + N*P is not stable")
    return AreSolution(P=P, residual_norm=residual, closed_loop_spectrum=closed)


def distance_to_instability(Am, N=1, tol=1e-9):
    """Distance from a Hurwitz matrix to the nearest marginally unstable one.

    Computes ``min over real w of sigma_min(Am - j w I)`` by bisection on
    the candidate level ``sigma``: the test Hamiltonian
    ``[[Am, N*I], [-(sigma^2/N)*I, -Am']]`` has an imaginary-axis
    eigenvalue exactly when some singular value of ``Am - j w I`` equals
    ``sigma`` for some ``w``, i.e. when ``sigma`` is at or above the
    distance.  An imaginary-axis eigenvalue therefore shrinks the upper
    bound, otherwise the lower bound rises.  The bracket starts at
    ``[0, ||Am||_2]`` and runs ``ceil(log2(width/tol))`` iterations.

    The result is independent of ``N`` (the block scalings cancel in the
    characteristic polynomial); the parameter is kept so callers can pass
    their neighbour count unchanged.

    Returns the midpoint of the final bracket, within ``tol`` of the true
    distance.
    """
    Am = as_matrix(Am, "Am", square=True)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if N < 1:
        N = 1
    if not is_hurwitz(Am):
        raise StabilityError("Am is not Hurwitz: the distance to instability is zero")
    lo = 0.0
    hi = spectral_norm(Am)
    iterations = max(1, math.ceil(math.log2(max(hi - lo, tol) / tol)))
    for _ in range(iterations):
        sigma = 0.5 * (lo + hi)
        H = hamiltonian(Am, N, sigma * sigma / float(N))
        eig_tol = 1e-8 * max(spectral_norm(H), 1e-300)
        if not is_hyperbolic(H, eig_tol):
            hi = sigma
        else:
            lo = sigma
    return 0.5 * (lo + hi)


def _golden_max(f, lo, hi, iterations=90):
    """Golden-section maximization of a unimodal scalar function."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd)


def hinf_gain(M, Am, grid_points=400):
    """Peak frequency-response gain ``sup_w sigma_max(M (jwI - Am)^{-1})``.

    Evaluated on a logarithmic grid over ``[1e-3, 1e3] * ||Am||_2``
    augmented with ``w = 0`` and eigenvalue-anchored frequencies (so slow
    modes far below the norm scale are not missed), then refined by
    golden-section search around the grid maximum.  Target accuracy is
    about 1e-3 relative, which is adequate for the small-gain diagnostic.

    Raises
    ------
    StabilityError
        If ``Am`` is not Hurwitz (the gain is unbounded).
    """
    Am = as_matrix(Am, "Am", square=True)
    M = as_matrix(M, "M")
    n = Am.shape[0]
    if M.shape[1] != n:
        raise DimensionError(f"M has {M.shape[1]} columns, expected {n}")
    w_eig = eigenvalues(Am)
    if np.max(w_eig.real) >= 0.0:
        raise StabilityError("Am is not Hurwitz: the H-infinity gain is unbounded")
    eye = np.eye(n)

    def gain(w):
        return float(np.linalg.svd(M @ np.linalg.inv(1j * w * eye - Am), compute_uv=False)[0])

    norm = spectral_norm(Am)
    anchors = []
    fan = np.array([0.1, 0.3, 1.0, 3.0, 10.0])
    for lam in w_eig:
        for a in (abs(lam), abs(lam.imag)):
            if a > 0.0:
                anchors.extend(a * fan)
    grid = np.unique(
        np.concatenate(
            [[0.0], np.geomspace(1e-3 * norm, 1e3 * norm, grid_points), anchors]
        )
    )
    vals = np.array([gain(w) for w in grid])
    k = int(np.argmax(vals))
    lo = grid[k - 1] if k > 0 else 0.0
    hi = grid[k + 1] if k + 1 < len(grid) else grid[k] * 4.0
    refined = _golden_max(gain, lo, hi)
    return max(float(vals[k]), refined)
