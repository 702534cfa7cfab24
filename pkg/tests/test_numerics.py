import numpy as np
import pytest

from conftest import (
    DC_AM,
    DC_AM_PRINTED,
    DC_A12,
    grid_distance_oracle,
    random_hurwitz,
    routh_hurwitz_3x3,
)
from gascert import (
    DimensionError,
    StabilityError,
    distance_to_instability,
    eigenvalues,
    hamiltonian,
    hinf_gain,
    is_hurwitz,
    is_hyperbolic,
    solve_are,
    solve_lyapunov,
    spectral_norm,
)


class TestEigenvalues:
    def test_diagonal(self):
        w = eigenvalues(np.diag([-1.0, -2.0]))
        assert np.allclose(w, [-2.0, -1.0])

    def test_rotation(self):
        w = eigenvalues([[0.0, 1.0], [-1.0, 0.0]])
        assert np.allclose(w, [-1j, 1j])

    def test_benchmark_matrix_vs_routh_oracle(self):
        # the Routh oracle and the eigensolver must agree on both variants
        # of the benchmark matrix; the fixture (repaired) one is Hurwitz,
        # the raw printed one is not (its determinant has the wrong sign)
        assert routh_hurwitz_3x3(DC_AM)
        assert is_hurwitz(DC_AM)
        assert np.max(eigenvalues(DC_AM).real) < 0.0
        assert not routh_hurwitz_3x3(DC_AM_PRINTED)
        assert not is_hurwitz(DC_AM_PRINTED)

    def test_sorted_deterministically(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(6, 6))
        w = eigenvalues(A)
        order = np.lexsort((w.imag, w.real))
        assert np.array_equal(order, np.arange(6))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.ones((2, 3)))


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(3)) == pytest.approx(1.0)

    def test_nilpotent(self):
        assert spectral_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0)

    def test_benchmark_coupling(self):
        assert spectral_norm(DC_A12) == pytest.approx(5.32e4)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            spectral_norm([[np.inf, 0.0], [0.0, 1.0]])


class TestLyapunov:
    def test_scalar_identity(self):
        P = solve_lyapunov(-np.eye(2), np.eye(2))
        assert np.allclose(P, 0.5 * np.eye(2))

    def test_decoupled(self):
        P = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
        assert np.allclose(P, np.diag([0.5, 0.25]))

    def test_benchmark(self):
        # orders of magnitude only: the printed P in the source material is
        # not reproducible from its printed inputs (see the regression notes)
        P = solve_lyapunov(DC_AM, np.eye(3))
        w = np.linalg.eigvalsh(P)
        assert w[0] > 0.0
        residual = np.linalg.norm(DC_AM.T @ P + P @ DC_AM + np.eye(3))
        scale = np.linalg.norm(DC_AM) * np.linalg.norm(P) + np.linalg.norm(np.eye(3))
        assert residual <= 1e-10 * scale

    def test_not_hurwitz_rejected(self):
        with pytest.raises(StabilityError):
            solve_lyapunov([[1.0]], [[1.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            solve_lyapunov(-np.eye(2), np.eye(3))

    def test_residual_and_definiteness_random(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            A = random_hurwitz(rng, n)
            W = rng.normal(size=(n, n))
            Q = W @ W.T + np.eye(n)
            P = solve_lyapunov(A, Q)
            assert np.allclose(P, P.T, atol=1e-10 * max(1.0, np.abs(P).max()))
            assert np.min(np.linalg.eigvalsh(P)) > 0.0
            residual = np.linalg.norm(A.T @ P + P @ A + Q)
            scale = np.linalg.norm(A) * np.linalg.norm(P) + np.linalg.norm(Q)
            assert residual <= 1e-10 * scale


class TestHamiltonian:
    def test_scalar_blocks(self):
        H = hamiltonian([[-2.0]], 1, 1.0)
        assert np.array_equal(H, [[-2.0, 1.0], [-1.0, 2.0]])

    def test_zero_q_block_triangular(self):
        H = hamiltonian([[-1.0]], 1, 0.0)
        assert np.array_equal(H, [[-1.0, 1.0], [0.0, 1.0]])

    def test_block_placement(self):
        Am = np.diag([-1.0, -2.0])
        H = hamiltonian(Am, 2, 3.0)
        assert H.shape == (4, 4)
        assert np.array_equal(H[:2, :2], Am)
        assert np.array_equal(H[:2, 2:], 2.0 * np.eye(2))
        assert np.array_equal(H[2:, :2], -3.0 * np.eye(2))
        assert np.array_equal(H[2:, 2:], np.diag([1.0, 2.0]))


class TestHyperbolic:
    def test_clear_case(self):
        # characteristic polynomial s^2 - 3 = 0: eigenvalues +-sqrt(3)
        assert is_hyperbolic(hamiltonian([[-2.0]], 1, 1.0), 1e-8)

    def test_boundary_case(self):
        # s^2 = 0: double eigenvalue at the origin
        assert not is_hyperbolic(hamiltonian([[-1.0]], 1, 1.0), 1e-8)

    def test_zero_q_hurwitz(self):
        # block-triangular: spectrum of A union -A', off-axis for Hurwitz A
        rng = np.random.default_rng(3)
        A = random_hurwitz(rng, 3)
        assert is_hyperbolic(hamiltonian(A, 2, 0.0), 1e-10)

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            is_hyperbolic(np.eye(2), 0.0)


class TestSolveAre:
    def test_scalar_golden_a2(self):
        sol = solve_are([[-2.0]], 1, 1.0)
        assert sol.P[0, 0] == pytest.approx(2.0 - np.sqrt(3.0), abs=1e-12)
        assert sol.closed_loop_spectrum[0] == pytest.approx(-np.sqrt(3.0), abs=1e-12)

    def test_scalar_golden_a3(self):
        sol = solve_are([[-3.0]], 1, 1.0)
        assert sol.P[0, 0] == pytest.approx(3.0 - 2.0 * np.sqrt(2.0), abs=1e-12)

    def test_decoupled_diagonal(self):
        sol = solve_are(np.diag([-2.0, -3.0]), 1, 1.0)
        assert np.allclose(sol.P, np.diag([2.0 - np.sqrt(3.0), 3.0 - 2.0 * np.sqrt(2.0)]),
                           atol=1e-12)

    def test_non_hyperbolic_rejected(self):
        with pytest.raises(StabilityError):
            solve_are([[-1.0]], 1, 1.0)

    def test_not_hurwitz_rejected(self):
        with pytest.raises(StabilityError):
            solve_are([[0.5]], 1, 0.1)

    def test_random_suite_residual_and_spectrum(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            n = int(rng.integers(1, 5))
            A = random_hurwitz(rng, n)
            N = int(rng.integers(1, 4))
            gamma = distance_to_instability(A, N, 1e-10)
            q = rng.uniform(0.05, 0.8) * gamma * gamma / N
            sol = solve_are(A, N, q)
            resid = np.linalg.norm(A.T @ sol.P + sol.P @ A + N * sol.P @ sol.P
                                   + q * np.eye(n))
            assert resid <= 1e-8 * max(1.0, np.linalg.norm(sol.P) ** 2)
            assert np.min(np.linalg.eigvalsh(sol.P)) > 0.0
            # closed loop equals the stable half of the Hamiltonian spectrum
            Hw = eigenvalues(hamiltonian(A, N, q))
            stable = np.sort_complex(Hw[Hw.real < 0.0])
            assert np.allclose(np.sort_complex(sol.closed_loop_spectrum), stable,
                               atol=1e-8 * max(1.0, np.abs(stable).max()))


class TestDistance:
    def test_normal_matrix(self):
        d = distance_to_instability(np.diag([-1.0, -2.0]), 1, 1e-10)
        assert d == pytest.approx(1.0, abs=1e-9)

    def test_shear_matrix_vs_oracle(self):
        # analytic check at w=0: sigma_min^2 is the small root of
        # x^2 - 102 x + 1, i.e. ~9.902e-2; the grid oracle confirms the
        # minimum sits at w=0
        A = np.array([[-1.0, 10.0], [0.0, -1.0]])
        oracle = grid_distance_oracle(A)
        smin0 = np.sqrt((102.0 - np.sqrt(102.0**2 - 4.0)) / 2.0)
        assert oracle == pytest.approx(smin0, rel=1e-9)
        d = distance_to_instability(A, 1, 1e-8)
        assert d == pytest.approx(oracle, abs=max(1e-8, 1e-4 * oracle))

    def test_scalar(self):
        assert distance_to_instability([[-5.0]], 1, 1e-10) == pytest.approx(5.0, abs=1e-9)

    def test_independent_of_count(self):
        rng = np.random.default_rng(5)
        A = random_hurwitz(rng, 3)
        d1 = distance_to_instability(A, 1, 1e-10)
        d2 = distance_to_instability(A, 3, 1e-10)
        assert d1 == pytest.approx(d2, abs=1e-9)

    def test_not_hurwitz_rejected(self):
        with pytest.raises(StabilityError):
            distance_to_instability([[1.0]], 1, 1e-6)

    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            A = random_hurwitz(rng, n)
            oracle = grid_distance_oracle(A)
            d = distance_to_instability(A, 1, 1e-8)
            assert abs(d - oracle) <= max(1e-8, 1e-4 * oracle)


class TestHyperbolicityDistanceEquivalence:
    def test_random_agreement(self):
        rng = np.random.default_rng(41)
        checked = 0
        for _ in range(60):
            n = int(rng.integers(1, 5))
            A = random_hurwitz(rng, n)
            N = int(rng.integers(1, 4))
            gamma = distance_to_instability(A, N, 1e-10)
            xi2 = rng.uniform(0.0, 2.0) * gamma * gamma / N
            # skip the tolerance band around the boundary
            if abs(np.sqrt(N * xi2) - gamma) <= 1e-6 * max(1.0, gamma):
                continue
            H = hamiltonian(A, N, xi2)
            hyp = is_hyperbolic(H, 1e-8 * spectral_norm(H))
            assert hyp == (gamma > np.sqrt(N * xi2))
            checked += 1
        assert checked >= 50

    def test_boundary_scalar(self):
        # a = -1, N = 1, coupling level exactly at the distance: both
        # formulations must report failure (the inequality is strict)
        H = hamiltonian([[-1.0]], 1, 1.0)
        assert not is_hyperbolic(H, 1e-8 * spectral_norm(H))
        d = distance_to_instability([[-1.0]], 1, 1e-10)
        assert not d > 1.0


class TestHinfGain:
    def test_first_order_unity(self):
        assert hinf_gain([[1.0]], [[-1.0]]) == pytest.approx(1.0, rel=1e-6)

    def test_linear_scaling(self):
        c = 3.7
        assert hinf_gain([[c]], [[-1.0]]) == pytest.approx(c, rel=1e-6)

    def test_first_order_half(self):
        assert hinf_gain([[1.0]], [[-2.0]]) == pytest.approx(0.5, rel=1e-6)

    def test_benchmark_coupling_path(self):
        # the integrator row makes the w=0 gain exactly the coupling norm
        assert hinf_gain(DC_A12, DC_AM) == pytest.approx(5.32e4, rel=1e-3)

    def test_unstable_rejected(self):
        with pytest.raises(StabilityError):
            hinf_gain([[1.0]], [[0.1]])

    def test_resonant_peak(self):
        # lightly damped oscillator: the peak sits near w0, far from the
        # endpoints; cross-check against a dense independent scan
        w0, zeta = 2.0, 0.05
        A = np.array([[0.0, 1.0], [-w0 * w0, -2.0 * zeta * w0]])
        M = np.array([[1.0, 0.0]])

        def g(w):
            return np.linalg.svd(M @ np.linalg.inv(1j * w * np.eye(2) - A),
                                 compute_uv=False)[0]

        oracle = max(g(w) for w in np.linspace(1.8, 2.2, 40001))
        assert hinf_gain(M, A) == pytest.approx(oracle, rel=1e-3)
