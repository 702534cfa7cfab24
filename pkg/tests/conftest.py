"""Shared test helpers: random stable matrices and independent oracles.

The oracles here deliberately avoid the code paths they check: the
distance oracle scans a dense frequency grid, the Hurwitz oracle for
3x3 matrices runs the Routh conditions on cofactor-expanded
characteristic-polynomial coefficients, and ranks cross-check against
numpy's own heuristic.
"""

from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

CONFIG_DIR = Path(__file__).resolve().parent.parent / "demos" / "configs"


def random_hurwitz(rng, n, scale=1.0):
    """Random Hurwitz matrix: shift a random matrix left of the axis."""
    A = rng.normal(size=(n, n)) * scale
    margin = rng.uniform(0.2, 2.0) * scale
    shift = np.max(np.linalg.eigvals(A).real)
    return A - (shift + margin) * np.eye(n)


def grid_distance_oracle(A, points=2000):
    """Brute-force min over w of sigma_min(A - jwI): dense grid + refine."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    eye = np.eye(n)

    def smin(w):
        return np.linalg.svd(A - 1j * w * eye, compute_uv=False)[-1]

    hi = 2.0 * np.linalg.norm(A, 2)
    grid = np.linspace(0.0, hi, points)
    vals = np.array([smin(w) for w in grid])
    k = int(np.argmin(vals))
    lo_w = grid[max(k - 1, 0)]
    hi_w = grid[min(k + 1, points - 1)]
    res = minimize_scalar(smin, bounds=(lo_w, hi_w), method="bounded",
                          options={"xatol": 1e-12})
    return min(float(vals[k]), float(res.fun))


def char_poly_3x3(A):
    """Characteristic polynomial s^3 + a2 s^2 + a1 s + a0 by cofactors."""
    A = np.asarray(A, dtype=float)
    tr = A[0, 0] + A[1, 1] + A[2, 2]
    minors = (
        A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        + A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
        + A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
    )
    det = (
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )
    return -tr, minors, -det


def routh_hurwitz_3x3(A):
    """Routh verdict for a 3x3 matrix: a2 > 0, a0 > 0, a2*a1 > a0."""
    a2, a1, a0 = char_poly_3x3(A)
    return a2 > 0.0 and a0 > 0.0 and a2 * a1 > a0


# The strong-coupling benchmark pair.  The desired-dynamics matrix has its
# (1,3) entry adjusted in the last printed digit (1.13e6 -> 1.132e6) so it
# is Hurwitz, which every analysis here requires; see the fixture config.
DC_AM = np.array([
    [-3.51e6, 4.0e3, 1.132e6],
    [5.12e6, -9.0e4, -1.65e6],
    [0.0, -1.0, 0.0],
])
DC_AM_PRINTED = np.array([
    [-3.51e6, 4.0e3, 1.13e6],
    [5.12e6, -9.0e4, -1.65e6],
    [0.0, -1.0, 0.0],
])
DC_A12 = np.zeros((3, 3))
DC_A12[1, 1] = 5.32e4
DC_A21 = np.zeros((3, 3))
DC_A21[1, 1] = 3.87e4
DC_B1 = np.array([[1.34e7], [-8.12e5], [0.0]])
