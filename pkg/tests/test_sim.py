import io

import numpy as np
import pytest
import scipy.linalg as sla

from gascert import (
    AugmentedSubsystem,
    Interconnection,
    NetworkModel,
    NetworkState,
    Scenario,
    Schedule,
    Tuning,
    certify,
    control,
    export_csv,
    metrics,
    simulate,
    step,
)

AM = np.array([[-2.0, 1.0], [-1.0, 0.0]])


def make_sub(sid):
    return AugmentedSubsystem.from_raw(sid, B=[[1.0]], C=[[1.0]], A=[[0.0]], E=[[1.0]])


def solo_net(gamma=20.0):
    tun = Tuning(Q=np.eye(2), gamma=gamma, theta_max=1.5, eps0=0.1)
    return NetworkModel(subsystems=[make_sub("solo")], edges=[],
                        desired={"solo": AM}, tuning={"solo": tun})


def pair_net(coupling=0.1, gamma=20.0):
    tun = Tuning(Q=np.eye(2), gamma=gamma, theta_max=1.5, eps0=0.1)
    edges = [Interconnection(src="b", dst="a", A=coupling * np.eye(2) * [[1, 0], [0, 0]]),
             Interconnection(src="a", dst="b", A=coupling * np.eye(2) * [[1, 0], [0, 0]])]
    return NetworkModel(subsystems=[make_sub("a"), make_sub("b")], edges=edges,
                        desired={"a": AM, "b": AM},
                        tuning={"a": tun, "b": tun})


class TestSchedule:
    def test_piecewise_lookup(self):
        s = Schedule(times=[0.0, 1.0, 2.5], values=[[0.0], [1.0], [-3.0]])
        assert s.at(0.0)[0] == 0.0
        assert s.at(0.999)[0] == 0.0
        assert s.at(1.0)[0] == 1.0
        assert s.at(3.0)[0] == -3.0

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            Schedule(times=[0.0, 2.0, 1.0], values=[[0.0], [1.0], [2.0]])

    def test_must_start_at_zero(self):
        with pytest.raises(ValueError):
            Schedule(times=[1.0], values=[[0.0]])


class TestEquilibrium:
    def test_exact_zero_error(self):
        # no coupling, truth equals initial estimate (zero), plant and
        # predictor start together: the error stays exactly zero
        net = solo_net()
        sc = Scenario(horizon=0.05, dt=1e-3)
        trace = simulate(net, sc, mode="distributed")
        assert np.all(trace.error_norm["solo"] == 0.0)
        assert np.all(trace.theta_hat["solo"] == 0.0)

    def test_equilibrium_metrics_all_zero(self):
        net = solo_net()
        sc = Scenario(horizon=0.05, dt=1e-3)
        m = metrics(simulate(net, sc, mode="distributed"))
        entry = m["per_subsystem"]["solo"]
        assert entry["max_error_norm"] == 0.0
        assert entry["settling_time"] == 0.0
        assert entry["steady_state_error"] == 0.0
        assert not m["diverged"]


class TestDecoupledConvergence:
    def test_error_vanishes_and_tracks_analytic_response(self):
        net = solo_net(gamma=60.0)
        cert = certify(net)
        horizon = 30.0
        sc = Scenario(horizon=horizon, dt=2e-3,
                      references={"solo": Schedule.constant([1.0])},
                      theta={"solo": [[0.1], [-0.067]]},
                      x0={"solo": [0.5, 0.0]})
        trace = simulate(net, sc, mode="distributed", certificate=cert)
        # the predictor's uncertainty channel cancels identically, so it
        # follows the pure reference dynamics; compare with the matrix
        # exponential (independent of the RK4 path)
        forced = np.array([0.0, 1.0])
        x_eq = -np.linalg.solve(AM, forced)
        x_ref = sla.expm(AM * horizon) @ (np.zeros(2) - x_eq) + x_eq
        assert np.max(np.abs(trace.xhat["solo"][-1] - x_ref)) < 1e-9
        assert trace.error_norm["solo"][-1] < 1e-6
        # plant output converged to the reference input
        m = metrics(trace)
        assert m["per_subsystem"]["solo"]["steady_state_error"] < 1e-6

    def test_decentralized_mode_converges_too(self):
        net = solo_net(gamma=20.0)
        sc = Scenario(horizon=10.0, dt=2e-3,
                      references={"solo": Schedule.constant([1.0])},
                      theta={"solo": [[0.3], [-0.2]]},
                      x0={"solo": [0.5, 0.0]})
        trace = simulate(net, sc, mode="decentralized")
        assert trace.error_norm["solo"][-1] < 1e-2
        assert trace.error_norm["solo"][-1] < 0.05 * np.max(trace.error_norm["solo"])


class TestStepFunction:
    def test_matches_simulate_first_step(self):
        net = pair_net()
        sc = Scenario(horizon=0.002, dt=1e-3,
                      references={"a": Schedule.constant([1.0])},
                      theta={"a": [[0.3], [-0.2]]},
                      x0={"a": [0.4, 0.0]})
        trace = simulate(net, sc, mode="distributed")
        state0 = NetworkState(
            xbar={"a": np.array([0.4, 0.0])}, xhat={}, theta_hat={})
        nxt = step(net, state0, sc, 0.0, 1e-3, mode="distributed")
        assert np.allclose(nxt.xbar["a"], trace.xbar["a"][1], atol=1e-15)
        assert np.allclose(nxt.xbar["b"], trace.xbar["b"][1], atol=1e-15)
        assert np.allclose(nxt.theta_hat["a"], trace.theta_hat["a"][1], atol=1e-15)

    def test_distributed_coupling_matches_control_module(self):
        # the simulator's distributed predictor must reproduce the control
        # module's rate: decentralized rate plus the coupling replica
        net = pair_net(coupling=0.3)
        sc = Scenario(horizon=0.0, dt=1e-3, theta={"a": [[0.3], [-0.2]]})
        rng = np.random.default_rng(6)
        state = NetworkState(
            xbar={"a": rng.normal(size=2), "b": rng.normal(size=2)},
            xhat={"a": rng.normal(size=2), "b": rng.normal(size=2)},
            theta_hat={"a": rng.normal(size=(2, 1)) * 0.1,
                       "b": rng.normal(size=(2, 1)) * 0.1},
        )
        from gascert.sim import _Dynamics

        dyn = _Dynamics(net, sc, "distributed")
        z = dyn.pack(state)
        dz = dyn.rhs(0.0, z)
        # subsystem "a": predictor slice is [2:4] in its block
        a, b, c, d = dyn.off[0]
        u = control.mrac_control(state.theta_hat["a"], state.xbar["a"])
        edge = net.in_edges("a")[0]
        expected = control.predictor_rate(
            AM, np.array([[1.0], [0.0]]), state.xhat["a"], u,
            state.theta_hat["a"], state.xbar["a"], np.zeros(2),
            mode="distributed", neighbor_terms=[(edge.A, state.xhat["b"])])
        assert np.allclose(dz[b:c], expected, atol=1e-14)
        dec = control.predictor_rate(
            AM, np.array([[1.0], [0.0]]), state.xhat["a"], u,
            state.theta_hat["a"], state.xbar["a"], np.zeros(2))
        assert np.allclose(dz[b:c] - dec, edge.A @ state.xhat["b"], atol=1e-14)


class TestTraceMechanics:
    def test_zero_horizon_single_sample(self):
        net = solo_net()
        sc = Scenario(horizon=0.0, dt=1e-3, x0={"solo": [0.3, -0.1]})
        trace = simulate(net, sc, mode="distributed")
        assert trace.t.shape == (1,)
        assert np.allclose(trace.xbar["solo"][0], [0.3, -0.1])
        assert not trace.diverged

    def test_determinism_bit_identical(self):
        net = pair_net()
        sc = Scenario(horizon=0.3, dt=1e-3,
                      references={"a": Schedule.constant([1.0])},
                      theta={"a": [[0.3], [-0.2]], "b": [[-0.25], [0.15]]},
                      x0={"a": [0.4, 0.0]})
        cert = certify(net)
        t1 = simulate(net, sc, mode="distributed", certificate=cert)
        t2 = simulate(net, sc, mode="distributed", certificate=cert)
        for sid in t1.ids:
            assert np.array_equal(t1.xbar[sid], t2.xbar[sid])
            assert np.array_equal(t1.theta_hat[sid], t2.theta_hat[sid])
        assert np.array_equal(t1.lyapunov, t2.lyapunov)
        buf1, buf2 = io.StringIO(), io.StringIO()
        export_csv(t1, buf1)
        export_csv(t2, buf2)
        assert buf1.getvalue() == buf2.getvalue()

    def test_rk4_order(self):
        # halving the step shrinks the end-state error against a dt/8
        # reference by about 2^4
        net = solo_net()
        cert = certify(net)

        def end_state(dt):
            sc = Scenario(horizon=1.0, dt=dt,
                          references={"solo": Schedule.constant([1.0])},
                          theta={"solo": [[0.3], [-0.2]]},
                          x0={"solo": [0.5, 0.0]})
            tr = simulate(net, sc, mode="distributed", certificate=cert)
            return np.concatenate([tr.xbar["solo"][-1], tr.xhat["solo"][-1],
                                   tr.theta_hat["solo"][-1].ravel()])

        ref = end_state(1.0 / 4096)
        e1 = np.linalg.norm(end_state(1.0 / 256) - ref)
        e2 = np.linalg.norm(end_state(1.0 / 512) - ref)
        assert 8.0 < e1 / e2 < 32.0

    def test_divergence_flagged_with_partial_trace(self):
        net = pair_net(coupling=5000.0)
        sc = Scenario(horizon=0.5, dt=1e-3, x0={"a": [0.4, 0.0]})
        trace = simulate(net, sc, mode="decentralized")
        assert trace.diverged
        assert trace.diverged_at is not None
        assert trace.t.size < 501
        assert np.all(np.isfinite(trace.xbar["a"]))
        m = metrics(trace)
        assert m["diverged"]

    def test_csv_format(self):
        net = solo_net()
        sc = Scenario(horizon=0.001, dt=1e-3, x0={"solo": [0.25, 0.0]})
        cert = certify(net)
        trace = simulate(net, sc, mode="distributed", certificate=cert)
        buf = io.StringIO()
        export_csv(trace, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "time,subsystem,series,index,value"
        assert lines[1] == "0,solo,state,0,0.25"
        # samples * (2+2+2+1+1+2+1+1 per-subsystem rows + 1 network row)
        assert len(lines) == 1 + 2 * 13
        assert any(line.startswith("0,network,lyapunov,0,") for line in lines)

    def test_lyapunov_decreases_on_certified_pair(self):
        net = pair_net()
        cert = certify(net)
        assert cert.certified
        sc = Scenario(horizon=1.0, dt=1e-3,
                      references={"a": Schedule.constant([1.0]),
                                  "b": Schedule.constant([0.5])},
                      theta={"a": [[0.3], [-0.2]], "b": [[-0.25], [0.15]]},
                      x0={"a": [0.4, 0.0]})
        trace = simulate(net, sc, mode="distributed", certificate=cert)
        tol = 1e-6 * (1.0 + trace.lyapunov[0])
        assert np.max(np.diff(trace.lyapunov[10:])) <= tol
