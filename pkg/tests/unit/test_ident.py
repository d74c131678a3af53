import numpy as np
import pytest

from src.carfollow import IdmParamArrays, IdmParams
from src.errors import DomainError
from src.ident import (
    IdentProblem,
    fit_idm,
    ident_cost,
    ident_cost_batch,
    identify,
    pattern_search,
    simulated_headways,
)
from src.simkit import generate_synthetic


@pytest.fixture
def generator():
    return IdmParams(a0=1.8, b0=3.0, delta=4.0, tau=1.2, d=6.0, v_max=33.0)


@pytest.fixture
def problem(generator):
    scenario = generate_synthetic("congested", seed=11, chain_len=4, idm=generator, duration=30.0)
    return IdentProblem.from_scenario(scenario)


class TestIdentProblem:
    def test_from_arrays_pairs_followers_with_leaders(self):
        positions = np.array([[0.0, 20.0, 45.0], [1.0, 21.5, 47.0]])
        speeds = np.array([[10.0, 15.0, 20.0], [10.0, 15.0, 20.0]])
        problem = IdentProblem.from_arrays(positions, speeds, dt=0.1)
        assert problem.n_vehicles == 2
        assert problem.n_samples == 2
        np.testing.assert_allclose(problem.h_data[0], [15.0, 20.0])
        np.testing.assert_allclose(problem.v0, [10.0, 15.0])

    def test_needs_a_follower(self):
        with pytest.raises(DomainError):
            IdentProblem.from_arrays(np.zeros((5, 1)), np.zeros((5, 1)), dt=0.1)

    def test_rejects_bad_time_step(self):
        with pytest.raises(DomainError):
            IdentProblem.from_arrays(np.zeros((5, 2)), np.zeros((5, 2)), dt=0.0)


class TestIdentCost:
    def test_generator_reproduces_data(self, problem, generator):
        assert ident_cost(generator, problem) < 1e-6

    def test_wrong_parameters_cost_more(self, problem, generator):
        wrong = IdmParams(a0=1.0, b0=6.0, delta=3.5, tau=2.0, d=8.0, v_max=31.0)
        assert ident_cost(wrong, problem) > ident_cost(generator, problem) + 0.1

    def test_batch_matches_single(self, problem, generator):
        other = IdmParams()
        batch = ident_cost_batch(np.vstack((generator.as_vector(), other.as_vector())), problem)
        assert batch[0] == pytest.approx(ident_cost(generator, problem))
        assert batch[1] == pytest.approx(ident_cost(other, problem))

    def test_invariant_to_follower_order(self, problem):
        order = np.arange(problem.n_vehicles)[::-1]
        shuffled = IdentProblem(
            lead_s=problem.lead_s[:, order],
            lead_v=problem.lead_v[:, order],
            s0=problem.s0[order],
            v0=problem.v0[order],
            h_data=problem.h_data[:, order],
            dt=problem.dt,
        )
        params = IdmParams(a0=1.0, b0=6.0, delta=3.5, tau=2.0, d=8.0, v_max=31.0)
        assert ident_cost(params, shuffled) == pytest.approx(ident_cost(params, problem))

    def test_collided_follower_holds_last_headway(self):
        # leader stands still 12 m ahead; an aggressive follower runs into it
        n = 60
        problem = IdentProblem(
            lead_s=np.full((n, 1), 17.0),
            lead_v=np.zeros((n, 1)),
            s0=np.zeros(1),
            v0=np.array([25.0]),
            h_data=np.full((n, 1), 12.0),
            dt=0.1,
        )
        reckless = IdmParams(a0=4.0, b0=0.1, delta=5.0, tau=0.1, d=5.0, v_max=36.0)
        h_hat = simulated_headways(IdmParamArrays.from_matrix(reckless.as_vector()[None, :]), problem)
        assert np.all(np.isfinite(h_hat))
        assert h_hat[0, -1, 0] == h_hat[0, -2, 0]


class TestPatternSearch:
    def test_respects_budget_and_improves(self, problem):
        result = pattern_search(problem, np.full(6, 0.5), max_evaluations=60)
        assert result.evaluations <= 60
        assert result.params.within_bounds(tol=1e-9)
        assert all(b <= a for a, b in zip(result.history, result.history[1:]))
        assert result.cost == result.history[-1]

    def test_start_is_projected_onto_box(self, problem):
        result = pattern_search(problem, np.array([1.5, -0.2, 0.5, 0.5, 0.5, 0.5]), max_evaluations=13)
        assert result.params.within_bounds(tol=1e-9)


class TestFit:
    def test_deterministic_for_a_seed(self, problem):
        first = fit_idm(problem, seed=3, n_starts=2, max_evaluations=40)
        second = fit_idm(problem, seed=3, n_starts=2, max_evaluations=40)
        np.testing.assert_array_equal(first.params.as_vector(), second.params.as_vector())
        assert first.cost == second.cost
        assert len(first.starts) == 2
        assert first.cost == min(s.cost for s in first.starts)

    def test_identify_returns_params(self, problem):
        params = identify(problem, seed=0, n_starts=1, max_evaluations=25)
        assert isinstance(params, IdmParams)
        assert params.within_bounds(tol=1e-9)

    def test_needs_a_start(self, problem):
        with pytest.raises(DomainError):
            fit_idm(problem, n_starts=0)
