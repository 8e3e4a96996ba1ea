"""Shared helpers: seeded random systems and oracle comparisons."""

import numpy as np

import qrkalman as qk
from qrkalman.scenarios import (EvolutionInput, ObservationInput, Scenario,
                                StepInput)


def conditioned_matrix(rng, rows, cols, smin=0.5, smax=2.0):
    """Random matrix with singular values spread over [smin, smax]."""
    a = rng.standard_normal((rows, cols))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return u @ np.diag(np.linspace(smax, smin, len(s))) @ vt


def random_spd(rng, n, spread=30.0):
    q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    d = np.exp(rng.uniform(0.0, np.log(spread), n))
    return q @ np.diag(d) @ q.T


def random_covspec(rng, n, diagonal_only=False):
    kinds = ["w"] if diagonal_only else ["C", "W", "C_inverse", "w"]
    kind = kinds[rng.integers(len(kinds))]
    if kind == "w":
        return qk.CovarianceSpec.diagonal_weights(
            np.exp(rng.uniform(-1.0, 1.0, n)))
    C = random_spd(rng, n)
    if kind == "C":
        return qk.CovarianceSpec.explicit(C)
    if kind == "C_inverse":
        return qk.CovarianceSpec.inverse(np.linalg.inv(C))
    W = np.linalg.cholesky(np.linalg.inv(C)).T
    return qk.CovarianceSpec.inverse_factor(W)


def build_random_scenario(seed, max_steps=40, max_dim=5, vary_dims=True,
                          diagonal_only=False, max_condition=1e4):
    """Random observable scenario whose weighted system is well conditioned.

    Every step gets at least as many observation rows as state
    components, so filtered and smoothed estimates exist everywhere and
    the assembled system has full column rank.
    """
    for attempt in range(20):
        rng = np.random.default_rng(seed + 1_000_003 * attempt)
        scenario = _draw_scenario(rng, seed, max_steps, max_dim, vary_dims,
                                  diagonal_only)
        system = qk.assemble(scenario.steps)
        cond = np.linalg.cond(system.weight @ system.coefficients)
        if cond <= max_condition:
            return scenario
    raise AssertionError(f"could not draw a well-conditioned scenario "
                         f"for seed {seed}")


def _draw_scenario(rng, seed, max_steps, max_dim, vary_dims, diagonal_only):
    k = int(rng.integers(3, max_steps + 1))
    dims = [int(rng.integers(1, max_dim + 1))]
    steps = []
    for i in range(k):
        if i == 0:
            n = dims[0]
        else:
            n = dims[-1]
            if vary_dims and rng.random() < 0.3:
                n = int(rng.integers(1, max_dim + 1))
            dims.append(n)
        m = n + int(rng.integers(0, 2))
        obs = ObservationInput(
            G=conditioned_matrix(rng, m, n),
            o=rng.standard_normal(m),
            C=random_covspec(rng, m, diagonal_only))
        if i == 0:
            steps.append(StepInput(observation=obs))
            continue
        n_prev = dims[-2]
        rows = n_prev
        F = conditioned_matrix(rng, rows, n_prev)
        if n < n_prev:
            H = conditioned_matrix(rng, rows, n)
        else:
            H = None    # identity, zero-padded on growth
        evo = EvolutionInput(
            n_new=n, F=F, c=rng.standard_normal(rows),
            K=random_covspec(rng, rows, diagonal_only), H=H)
        steps.append(StepInput(evolution=evo, observation=obs))
    return Scenario(name=f"random-{seed}", seed=seed, steps=steps)


def feed_steps(kal, steps, with_obs=True):
    """Drive a filter straight through a list of step inputs."""
    for i, step in enumerate(steps):
        if step.evolution is not None:
            evo = step.evolution
            kal.evolve(evo.n_new, evo.F, evo.c, evo.K, H=evo.H)
        obs = step.observation
        if obs is not None and (with_obs or i == 0):
            kal.observe(obs.G, obs.o, obs.C)
        else:
            kal.observe()
    return kal


def oracle_solution(scenario):
    return qk.solve_gls(qk.assemble(scenario.steps))


def rel_err(actual, expected):
    expected = np.asarray(expected, dtype=float)
    scale = max(float(np.linalg.norm(expected)), 1e-30)
    return float(np.linalg.norm(np.asarray(actual) - expected)) / scale
