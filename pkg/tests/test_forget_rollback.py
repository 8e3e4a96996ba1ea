import numpy as np
import pytest

from conftest import build_random_scenario, feed_steps
from qrkalman import CovarianceSpec, KalmanFilter
from qrkalman.errors import FilterStateError, StepUnavailableError
from qrkalman.scenarios import gen_rotation


def unit_cov(n):
    return CovarianceSpec.diagonal_weights(np.ones(n))


def scalar_chain(kal, observations):
    for i, o in enumerate(observations):
        if i > 0:
            kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
        kal.observe(np.eye(1), np.array([o]), unit_cov(1))
    return kal


def test_forget_leaves_latest_estimate_untouched():
    rng = np.random.default_rng(0)
    obs = rng.standard_normal(10)
    kal = scalar_chain(KalmanFilter(), obs)
    before = kal.estimate()
    kal.forget(4)
    after = kal.estimate()
    assert np.array_equal(before[0], after[0])
    assert np.array_equal(before[1], after[1])
    assert kal.earliest() == 5
    assert kal.latest() == 9


def test_forget_then_smooth_matches_unforgotten():
    rng = np.random.default_rng(1)
    obs = rng.standard_normal(11)
    full = scalar_chain(KalmanFilter(), obs)
    full.smooth()
    trimmed = scalar_chain(KalmanFilter(), obs)
    trimmed.forget(4)
    trimmed.smooth()
    for i in range(5, 11):
        xf, wf = full.estimate(i)
        xt, wt = trimmed.estimate(i)
        assert np.allclose(xt, xf, rtol=1e-12, atol=1e-15)
        assert np.allclose(wt, wf, rtol=1e-12, atol=1e-15)


def test_forget_then_rollback_to_forgotten_step_fails():
    kal = scalar_chain(KalmanFilter(), np.arange(10.0))
    kal.forget(4)
    with pytest.raises(StepUnavailableError, match="forgotten"):
        kal.rollback(3)


def test_forget_bounds():
    kal = scalar_chain(KalmanFilter(), np.arange(5.0))
    with pytest.raises(FilterStateError, match="retained"):
        kal.forget(4)       # pending step
    with pytest.raises(FilterStateError, match="retained"):
        kal.forget(3)       # latest sealed step
    kal.forget(1)
    with pytest.raises(StepUnavailableError, match="already forgotten"):
        kal.forget(0)
    single = KalmanFilter()
    single.observe(np.eye(1), np.zeros(1), unit_cov(1))
    with pytest.raises(FilterStateError):
        single.forget(0)


def test_forget_preserves_smoothed_caches():
    kal = scalar_chain(KalmanFilter(), np.arange(8.0))
    kal.smooth()
    cached = kal.estimate(5)
    kal.forget(3)
    again = kal.estimate(5)
    assert np.array_equal(cached[0], again[0])
    assert np.array_equal(cached[1], again[1])


def test_rollback_redo_same_observation_is_identical():
    kal = scalar_chain(KalmanFilter(), np.arange(4.0))
    before = kal.estimate()
    block_before = kal._pending.post_obs_block.copy()
    kal.rollback(3)
    assert kal.latest() == 3
    kal.observe(np.eye(1), np.array([3.0]), unit_cov(1))
    after = kal.estimate()
    assert np.array_equal(before[0], after[0])
    assert np.array_equal(block_before, kal._pending.post_obs_block)


def test_rollback_with_different_observation_matches_fresh_run():
    obs = [0.0, 1.0, 2.0, 3.0]
    kal = scalar_chain(KalmanFilter(), obs)
    kal.rollback(2)
    kal.observe(np.eye(1), np.array([5.0]), unit_cov(1))
    kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
    kal.observe(np.eye(1), np.array([6.0]), unit_cov(1))
    redone = kal.estimate()

    fresh = scalar_chain(KalmanFilter(), [0.0, 1.0, 5.0, 6.0])
    ref = fresh.estimate()
    assert np.array_equal(redone[0], ref[0])
    assert np.array_equal(redone[1], ref[1])


def test_rollback_discards_later_steps():
    kal = scalar_chain(KalmanFilter(), np.arange(6.0))
    kal.rollback(2)
    assert kal.latest() == 2
    assert kal.earliest() == 0
    with pytest.raises(StepUnavailableError, match="beyond"):
        kal.rollback(7)


def test_rollback_to_step_zero_allows_full_redo():
    kal = scalar_chain(KalmanFilter(), [1.0, 2.0])
    kal.rollback(0)
    assert kal.latest() == 0
    kal.observe(np.eye(1), np.array([-1.0]), unit_cov(1))
    x, _ = kal.estimate()
    assert np.isclose(x[0], -1.0)


def test_predict_rollback_refilter_equals_straight_run():
    scenario = gen_rotation(7)
    # predict-only pass: step 0 observed, the rest evolved blind
    kal = feed_steps(KalmanFilter(), scenario.steps, with_obs=False)
    kal.rollback(1)
    for i, step in enumerate(scenario.steps):
        if i == 0:
            continue
        if i > 1:
            evo = step.evolution
            kal.evolve(evo.n_new, evo.F, evo.c, evo.K, H=evo.H)
        obs = step.observation
        kal.observe(obs.G, obs.o, obs.C)
    straight = feed_steps(KalmanFilter(), scenario.steps)
    kal.smooth()
    straight.smooth()
    for i in range(16):
        xr, wr = kal.estimate(i)
        xs, ws = straight.estimate(i)
        assert np.allclose(xr, xs, rtol=0.0, atol=1e-12)
        assert np.allclose(wr, ws, rtol=0.0, atol=1e-12)


def test_windowed_forgetting_bounds_memory():
    window = 16
    kal = KalmanFilter()
    rng = np.random.default_rng(2)
    for i in range(200):
        if i > 0:
            kal.evolve(1, np.eye(1), np.zeros(1), unit_cov(1))
        kal.observe(np.eye(1), rng.standard_normal(1), unit_cov(1))
        if i > window:
            kal.forget(i - window)
        assert kal.latest() - kal.earliest() + 1 <= window + 1
