import numpy as np
import pytest

import qrkalman as qk
from conftest import build_random_scenario, feed_steps, oracle_solution, rel_err
from qrkalman import CovarianceSpec, KalmanFilter
from qrkalman.errors import FilterStateError, StepUnavailableError


def unit_cov(n):
    return CovarianceSpec.diagonal_weights(np.ones(n))


def test_empty_filter_rejects_everything():
    kal = KalmanFilter()
    with pytest.raises(FilterStateError, match="no steps"):
        kal.estimate()
    with pytest.raises(FilterStateError, match="no steps"):
        kal.smooth()
    with pytest.raises(FilterStateError, match="no steps"):
        kal.earliest()
    with pytest.raises(FilterStateError):
        kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))


def test_first_step_identity_observation():
    kal = KalmanFilter()
    o = np.array([1.1, -0.2])
    kal.observe(np.eye(2), o, CovarianceSpec.diagonal_sigmas([0.1, 0.1]))
    assert kal.earliest() == 0 and kal.latest() == 0
    x, w = kal.estimate()
    assert np.allclose(x, o, rtol=1e-12)
    assert np.allclose(np.abs(np.diagonal(w)), 10.0)
    assert np.allclose(w.T @ w, 100.0 * np.eye(2), rtol=1e-12)


def test_first_step_flat_observation_is_nan():
    kal = KalmanFilter()
    kal.observe(np.array([[1.0, 0.0]]), np.array([0.7]),
                CovarianceSpec.diagonal_sigmas([0.1]))
    x, w = kal.estimate()
    assert x.shape == (2,)
    assert np.isnan(x).all()
    assert np.isnan(np.diagonal(w)).all()


def test_scalar_random_walk_seals_column_norm():
    # sealing stacks the previous 1x1 block over the weighted evolution
    # row, so the sealed pivot is the stacked column norm
    kal = KalmanFilter()
    kal.observe(np.eye(1), np.array([1.0]),
                CovarianceSpec.diagonal_weights([2.0]))
    kal.evolve(1, np.eye(1), np.zeros(1),
               CovarianceSpec.diagonal_weights([3.0]))
    sealed = kal._records[0]
    assert sealed.diag_block.shape == (1, 1)
    assert np.isclose(abs(sealed.diag_block[0, 0]), np.sqrt(13.0))


def test_grow_dimension_default_mapping():
    kal = KalmanFilter()
    kal.observe(np.eye(1), np.array([1.0]),
                CovarianceSpec.diagonal_sigmas([0.1]))
    kal.evolve(2, np.eye(1), np.zeros(1),
               CovarianceSpec.diagonal_sigmas([0.1]))
    kal.observe(np.eye(2), np.array([1.0, 2.0]),
                CovarianceSpec.diagonal_sigmas([0.1, 0.1]))
    x, _ = kal.estimate()
    assert x.shape == (2,)
    assert np.allclose(x, [1.0, 2.0], atol=0.1)


def test_shrink_dimension_retains_second_component():
    kal = KalmanFilter()
    kal.observe(np.eye(2), np.array([1.0, 2.0]),
                CovarianceSpec.diagonal_sigmas([0.1, 0.1]))
    kal.evolve(1, np.eye(2), np.zeros(2),
               CovarianceSpec.diagonal_sigmas([0.1, 0.1]),
               H=np.array([[0.0], [1.0]]))
    kal.observe()
    x, _ = kal.estimate()
    assert x.shape == (1,)
    assert np.isclose(x[0], 2.0, atol=0.05)


def test_shrink_requires_explicit_mapping():
    kal = KalmanFilter()
    kal.observe(np.eye(2), np.zeros(2), unit_cov(2))
    with pytest.raises(ValueError, match="explicit H"):
        kal.evolve(1, np.eye(2), np.zeros(2), unit_cov(2))


def test_prediction_matches_propagation():
    alpha = 2 * np.pi / 16
    F = np.array([[np.cos(alpha), -np.sin(alpha)],
                  [np.sin(alpha), np.cos(alpha)]])
    c = np.array([0.3, -0.1])
    kal = KalmanFilter()
    o0 = np.array([0.9, 0.1])
    kal.observe(np.eye(2), o0, CovarianceSpec.diagonal_sigmas([0.1, 0.1]))
    x0, _ = kal.estimate()
    kal.evolve(2, F, c, CovarianceSpec.diagonal_sigmas([1e-3, 1e-3]))
    xp, wp = kal.estimate()                     # prediction, pre-observe
    assert np.allclose(xp, F @ x0 + c, rtol=1e-9)
    kal.observe()                               # declare no observation
    xn, wn = kal.estimate()
    assert np.array_equal(xp, xn)
    assert np.array_equal(wp, wn)


def test_prediction_chain_follows_dynamics():
    alpha = 2 * np.pi / 16
    F = np.array([[np.cos(alpha), -np.sin(alpha)],
                  [np.sin(alpha), np.cos(alpha)]])
    kal = KalmanFilter()
    kal.observe(np.eye(2), np.array([1.0, 0.0]),
                CovarianceSpec.diagonal_sigmas([0.1, 0.1]))
    x0, _ = kal.estimate()
    expected = x0.copy()
    for _ in range(15):
        kal.evolve(2, F, np.zeros(2),
                   CovarianceSpec.diagonal_sigmas([1e-3, 1e-3]))
        kal.observe()
        expected = F @ expected
        x, _ = kal.estimate()
        assert rel_err(x, expected) <= 1e-9
        assert np.isclose(np.linalg.norm(x), np.linalg.norm(x0), rtol=1e-6)


def test_filtered_matches_prefix_oracle():
    scenario = build_random_scenario(11, max_steps=6, max_dim=3,
                                     vary_dims=False)
    kal = KalmanFilter()
    for k in range(len(scenario.steps)):
        step = scenario.steps[k]
        if step.evolution is not None:
            evo = step.evolution
            kal.evolve(evo.n_new, evo.F, evo.c, evo.K, H=evo.H)
        obs = step.observation
        kal.observe(obs.G, obs.o, obs.C)
        ests, _ = qk.solve_gls(qk.assemble(scenario.steps[:k + 1]))
        x, _ = kal.estimate()
        assert rel_err(x, ests[-1]) <= 1e-10


def test_state_machine_errors():
    kal = KalmanFilter()
    kal.observe(np.eye(1), np.zeros(1), unit_cov(1))
    with pytest.raises(FilterStateError, match="already observed"):
        kal.observe(np.eye(1), np.zeros(1), unit_cov(1))
    kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
    with pytest.raises(FilterStateError, match="awaiting"):
        kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
    with pytest.raises(FilterStateError, match="awaiting"):
        kal.smooth()


def test_dimension_validation():
    kal = KalmanFilter()
    with pytest.raises(ValueError):
        kal.observe(np.eye(2), np.zeros(3), unit_cov(3))
    kal.observe(np.eye(2), np.zeros(2), unit_cov(2))
    with pytest.raises(ValueError):
        kal.evolve(2, np.eye(3), np.zeros(3), unit_cov(3))
    with pytest.raises(ValueError):
        kal.evolve(2, np.eye(2), np.zeros(2), unit_cov(3))
    with pytest.raises(ValueError):
        kal.evolve(2, np.eye(2), np.zeros(2), unit_cov(2),
                   H=np.eye(3))
    with pytest.raises(ValueError, match="G, o and C"):
        kal.observe(np.eye(2))


def test_observation_rejects_nan():
    kal = KalmanFilter()
    with pytest.raises(ValueError, match="non-finite"):
        kal.observe(np.eye(2), np.array([1.0, np.nan]), unit_cov(2))


def test_estimate_index_errors():
    kal = KalmanFilter()
    kal.observe(np.eye(1), np.zeros(1), unit_cov(1))
    kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
    kal.observe(np.eye(1), np.ones(1), unit_cov(1))
    with pytest.raises(StepUnavailableError, match="beyond"):
        kal.estimate(5)
    with pytest.raises(StepUnavailableError, match="not smoothed"):
        kal.estimate(0)
    kal.smooth()
    kal.estimate(0)     # fine now
    kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
    kal.observe()
    with pytest.raises(StepUnavailableError, match="not smoothed"):
        kal.estimate(0)     # stale after more steps


def test_first_step_without_observation_defers_dimension():
    kal = KalmanFilter()
    kal.observe()       # observation-free first step
    with pytest.raises(FilterStateError, match="undetermined"):
        kal.estimate()
    kal.evolve(2, np.eye(2), np.zeros(2), unit_cov(2))
    x, _ = kal.estimate()
    assert x.shape == (2,) and np.isnan(x).all()
    kal.observe(np.eye(2), np.array([3.0, 4.0]), unit_cov(2))
    kal.evolve(2, np.eye(2), np.zeros(2), unit_cov(2))
    kal.observe(np.eye(2), np.array([3.0, 4.0]), unit_cov(2))
    x, _ = kal.estimate()
    assert np.isfinite(x).all()


def test_exact_zero_pivot_gives_nan_not_error():
    kal = KalmanFilter()
    g = np.array([[1.0, 0.0], [1.0, 0.0]])     # rank-1 square stack
    kal.observe(g, np.array([1.0, 1.0]), unit_cov(2))
    x, w = kal.estimate()
    assert np.isnan(x).all()
    assert np.isnan(np.diagonal(w)).all()


def test_overdetermined_observation():
    rng = np.random.default_rng(8)
    g = np.vstack([np.eye(2), np.eye(2), [[1.0, 1.0]]])
    truth = np.array([0.4, -1.2])
    o = g @ truth
    kal = KalmanFilter()
    kal.observe(g, o, unit_cov(5))
    x, _ = kal.estimate()
    assert np.allclose(x, truth, atol=1e-12)


def test_engine_matches_oracle_on_random_systems():
    for seed in range(12):
        scenario = build_random_scenario(seed, max_steps=12)
        kal = feed_steps(KalmanFilter(), scenario.steps)
        ests, _ = oracle_solution(scenario)
        x, _ = kal.estimate()
        assert rel_err(x, ests[-1]) <= 1e-9
