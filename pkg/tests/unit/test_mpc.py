import numpy as np
import pytest

from src.carfollow import IdmParams, idm_equilibrium_headway
from src.controllers import Observation, PaccController, PcccController
from src.dynamics import VehicleParams, VehicleState, kinematic_step
from src.errors import ConfigurationError, DomainError, QpBuildError
from src.mpc import (
    KKT_FAILED,
    KktReport,
    MpcConfig,
    build_qp,
    condensed_dynamics,
    mpc_step,
    solve_mpc,
    solve_qp,
)
import src.mpc.solver as solver_module
from src.predict import predict_constant_speed
from src.simkit import run
from tests.conftest import constant_speed_scenario


def equilibrium_setup(cfg, v=20.0):
    """Ego at the desired headway behind a vehicle cruising at v."""
    ego = VehicleState(s=0.0, v=v)
    s1 = cfg.vehicle.length + cfg.range.d + cfg.range.tau * v
    pred = predict_constant_speed(s1, v, cfg.T, cfg.dt)
    return ego, s1, pred


class TestMpcConfig:
    def test_defaults(self):
        cfg = MpcConfig()
        assert cfg.q == 6
        assert cfg.n_commands == 106

    def test_validation(self):
        with pytest.raises(DomainError):
            MpcConfig(q_eps=100.0)
        with pytest.raises(DomainError):
            MpcConfig(alpha_start=0.4, alpha_end=0.4)
        with pytest.raises(DomainError):
            MpcConfig(T=0)


class TestCondensedDynamics:
    def test_matches_integration(self):
        dt, n = 0.1, 15
        rng = np.random.default_rng(0)
        a = rng.uniform(-1.0, 1.0, n)
        S, V = condensed_dynamics(n, dt)
        s, v = 3.0, 12.0
        positions, speeds = [s], [v]
        for a_k in a:
            s, v, _ = kinematic_step(s, v, a_k, dt)
            positions.append(s)
            speeds.append(v)
        k = np.arange(n + 1)
        np.testing.assert_allclose(3.0 + k * dt * 12.0 + S @ a, positions, atol=1e-12)
        np.testing.assert_allclose(12.0 + V @ a, speeds, atol=1e-12)


class TestBuildQp:
    def test_hessian_is_positive_semidefinite(self):
        cfg = MpcConfig(T=5, K=5)
        ego = VehicleState(s=0.0, v=25.0)
        pred = predict_constant_speed(40.0, 15.0, cfg.T, cfg.dt)
        qp = build_qp(ego, np.zeros(cfg.q), pred, cfg)
        np.testing.assert_allclose(qp.P, qp.P.T, atol=1e-9)
        assert np.linalg.eigvalsh(qp.P).min() >= -1e-9

    def test_dimensions(self, short_mpc):
        ego, _, pred = equilibrium_setup(short_mpc)
        qp = build_qp(ego, np.zeros(short_mpc.q), pred, short_mpc)
        T, q = short_mpc.T, short_mpc.q
        assert qp.n == T + q + 1
        assert qp.m_eq == q
        assert qp.m_ineq == (T + 1) + 2 * (T - q) + 3 * T + 1
        assert qp.row_kinds.count("safety") == T + 1
        assert qp.row_kinds[-1] == "slack"

    def test_cap_rows(self):
        cfg = MpcConfig(T=10, K=10, vehicle=VehicleParams(u_max_cap=1.5))
        ego, _, pred = equilibrium_setup(cfg)
        qp = build_qp(ego, np.zeros(cfg.q), pred, cfg)
        assert qp.row_kinds.count("u_max_cap") == cfg.T

    def test_committed_length(self, short_mpc):
        ego, _, pred = equilibrium_setup(short_mpc)
        with pytest.raises(QpBuildError):
            build_qp(ego, np.zeros(short_mpc.q + 1), pred, short_mpc)

    def test_short_prediction(self, short_mpc):
        ego, s1, _ = equilibrium_setup(short_mpc)
        pred = predict_constant_speed(s1, 20.0, short_mpc.T - 1, short_mpc.dt)
        with pytest.raises(QpBuildError):
            build_qp(ego, np.zeros(short_mpc.q), pred, short_mpc)

    def test_layout_recovers_trajectory(self, short_mpc):
        ego, _, pred = equilibrium_setup(short_mpc)
        qp = build_qp(ego, np.zeros(short_mpc.q), pred, short_mpc)
        x = np.zeros(qp.n)
        np.testing.assert_allclose(qp.layout.positions(x), 20.0 * short_mpc.dt * np.arange(qp.n))
        np.testing.assert_allclose(qp.layout.speeds(x), 20.0)


class TestSolveMpc:
    def test_equilibrium_needs_no_action(self):
        cfg = MpcConfig(T=20, K=20, sigma_a1=0.0)
        ego, _, pred = equilibrium_setup(cfg)
        outcome = solve_mpc(ego, np.zeros(cfg.q), pred, cfg)
        assert outcome.status == "optimal"
        assert not outcome.fallback
        assert outcome.command == pytest.approx(0.0, abs=1e-6)
        assert outcome.slack == pytest.approx(0.0, abs=1e-6)
        assert outcome.solution.objective == pytest.approx(0.0, abs=1e-6)
        assert outcome.solution.kkt.satisfied()

    def test_too_close_brakes(self, short_mpc):
        ego = VehicleState(s=0.0, v=20.0)
        pred = predict_constant_speed(25.0, 20.0, short_mpc.T, short_mpc.dt)
        command = mpc_step(ego, np.zeros(short_mpc.q), pred, short_mpc)
        assert command < 0.0
        assert command >= short_mpc.vehicle.u_min

    def test_committed_commands_are_pinned(self, short_mpc):
        ego, _, pred = equilibrium_setup(short_mpc)
        committed = np.linspace(-0.5, 0.5, short_mpc.q)
        outcome = solve_mpc(ego, committed, pred, short_mpc)
        np.testing.assert_allclose(outcome.solution.x[:short_mpc.q], committed, atol=1e-9)

    def test_fallback_reuses_previous_command(self):
        cfg = MpcConfig(T=20, K=20, max_iterations=1)
        ego, _, pred = equilibrium_setup(cfg)
        outcome = solve_mpc(ego, np.zeros(cfg.q), pred, cfg, previous_command=0.3)
        assert outcome.fallback
        assert outcome.command == 0.3
        assert outcome.slack is None

    def test_failed_audit_falls_back(self, short_mpc, monkeypatch):
        failing = KktReport(primal=1e-2, stationarity=0.0, complementarity=0.0, dual=0.0)
        monkeypatch.setattr(solver_module, "kkt_residuals", lambda *args: failing)
        ego, _, pred = equilibrium_setup(short_mpc)
        outcome = solve_mpc(ego, np.zeros(short_mpc.q), pred, short_mpc, previous_command=0.3)
        assert outcome.status == KKT_FAILED
        assert outcome.fallback
        assert outcome.command == 0.3

    def test_kkt_holds_along_a_braking_plan(self, short_mpc):
        ego = VehicleState(s=0.0, v=25.0)
        pred = predict_constant_speed(40.0, 15.0, short_mpc.T, short_mpc.dt)
        qp = build_qp(ego, np.zeros(short_mpc.q), pred, short_mpc)
        solution = solve_qp(qp)
        assert solution.optimal
        assert solution.kkt.satisfied()


def observation(ego, visible, k=0, dt=0.1):
    return Observation(k=k, t=k * dt, ego=ego, visible=visible)


class TestPredictiveControllers:
    def test_pacc_records_diagnostics(self, short_mpc):
        controller = PaccController(short_mpc)
        ego, s1, _ = equilibrium_setup(short_mpc)
        command = controller.command(observation(ego, {1: (s1, 20.0)}))
        record = controller.last_record
        assert record.qp_status == "optimal"
        assert record.hidden_estimate is None
        assert len(record.prediction) == short_mpc.T + 1
        assert abs(command) < 0.5
        assert len(controller.issued) == short_mpc.q
        assert controller.issued[-1] == command

    def test_reset_clears_commands(self, short_mpc):
        controller = PaccController(short_mpc)
        ego, s1, _ = equilibrium_setup(short_mpc)
        controller.command(observation(ego, {1: (s1, 20.0)}))
        controller.reset()
        assert list(controller.issued) == [0.0] * short_mpc.q
        assert controller.previous_x is None

    def test_pccc_requires_distant_vehicle(self, short_mpc, idm):
        with pytest.raises(ConfigurationError):
            PcccController(short_mpc, idm, connected_index=1)
        controller = PcccController(short_mpc, idm, connected_index=3)
        assert controller.required_indices == (1, 3)

    def test_pccc_matches_pacc_behind_cruising_chain(self, short_mpc):
        idm = IdmParams()
        v = 20.0
        ego, s1, _ = equilibrium_setup(short_mpc, v)
        s_L = s1 + idm_equilibrium_headway(v, idm) + short_mpc.vehicle.length
        pccc = PcccController(short_mpc, idm, connected_index=2)
        pacc = PaccController(short_mpc)
        pred_c, n_hat = pccc.predict(observation(ego, {1: (s1, v), 2: (s_L, v)}))
        pred_a, _ = pacc.predict(observation(ego, {1: (s1, v)}))
        assert n_hat == 0
        np.testing.assert_allclose(pred_c.s_hat, pred_a.s_hat, atol=1e-6)

    def test_pccc_missing_signal(self, short_mpc, idm):
        controller = PcccController(short_mpc, idm, connected_index=3)
        ego = VehicleState(s=0.0, v=10.0)
        with pytest.raises(ConfigurationError):
            controller.command(observation(ego, {1: (40.0, 10.0)}))


class TestPowertrainDelays:
    @pytest.mark.parametrize("sigma", [0.0, 0.3, 0.6])
    def test_closed_loop_for_each_delay(self, sigma):
        vehicle = VehicleParams(sigma=sigma)
        cfg = MpcConfig(T=20, K=20, vehicle=vehicle)
        assert cfg.q == int(round(sigma / 0.1))
        result = run(constant_speed_scenario(n_vehicles=2, duration=5.0), PaccController(cfg), vehicle)
        assert not result.failed
        assert result.fallback_count == 0

    def test_receding_leader_pulls_ego_forward(self, short_mpc):
        ego = VehicleState(s=0.0, v=15.0)
        pred = predict_constant_speed(70.0, 25.0, short_mpc.T, short_mpc.dt)
        assert mpc_step(ego, np.zeros(short_mpc.q), pred, short_mpc) > 0.0
