# pylint: disable=invalid-name, too-many-locals

"""Scenario generators, a declarative runner, and file formats.

A :class:`Scenario` bundles the per-step evolution/observation inputs
of a simulated system, the command sequence to drive a filter with, the
seed that produced it, and (when simulated) the ground truth.  The
bundled generators reproduce the standard demonstration problems of
this package: a rotating point in the plane, a scalar with varying
observation variance, a state vector that grows and shrinks, a
projectile with drag observed only on part of its flight, and relative
clock offsets in a receiver network.

All randomness comes from ``numpy.random.Generator`` seeded with
``numpy.random.PCG64(seed)``, so every generator is deterministic under
a fixed seed.

File formats
------------
Scenario files are JSON documents::

    {"name": ..., "seed": ...,
     "steps": [{"evolve": {"n": ..., "F": [[...]], "c": [...],
                           "K": {"type": ..., "data": ...},
                           "H": [[...]]}?,
                "observe": {"G": [[...]], "o": [...],
                            "C": {"type": ..., "data": ...}}?}, ...],
     "commands": ["filter_all", "smooth", {"forget": i},
                  {"rollback": i}, {"predict_to": i}],
     "ground_truth": [[...], ...]?}

Matrices are row-major nested arrays of finite doubles; NaN is
forbidden on input.  Result files are CSV with the header
``step,component,truth,filtered,filtered_sigma,smoothed,smoothed_sigma``,
doubles rendered with 17 significant digits and NaN as the literal
``NaN``.
"""

import json
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covariance import CovarianceSpec, factor_to_sigmas
from .errors import KalmanError, ScenarioRunError
from .filter import KalmanFilter
from .linalg import as_matrix, as_vector

__all__ = [
    "EvolutionInput", "ObservationInput", "StepInput", "Scenario",
    "StepResult", "RunResult", "PerfResult",
    "FILTER_ALL", "SMOOTH", "forget", "rollback", "predict_to",
    "gen_rotation", "gen_variance", "gen_add_remove", "gen_projectile",
    "gen_clock_offsets",
    "run", "perftest", "random_unitary",
    "scenario_to_json_obj", "scenario_from_json_obj",
    "save_scenario", "load_scenario", "write_result_csv",
]


# ----------------------------------------------------------------------
# scenario data model

FILTER_ALL = ("filter_all",)
SMOOTH = ("smooth",)


def forget(index):
    """Command: drop steps up to and including ``index``."""
    return ("forget", int(index))


def rollback(index):
    """Command: roll the filter back to step ``index``."""
    return ("rollback", int(index))


def predict_to(index):
    """Command: advance to step ``index`` without observations.

    Step 0 cannot be evolved into, so if the run starts here step 0 is
    fed its observation (the anchor) and prediction starts at step 1.
    """
    return ("predict_to", int(index))


@dataclass
class EvolutionInput:
    """One step's evolution equation H @ u_i = F @ u_{i-1} + c + noise."""

    n_new: int
    F: np.ndarray
    c: np.ndarray
    K: CovarianceSpec
    H: Optional[np.ndarray] = None


@dataclass
class ObservationInput:
    """One step's stacked observation rows o = G @ u + noise."""

    G: np.ndarray
    o: np.ndarray
    C: CovarianceSpec


@dataclass
class StepInput:
    """Inputs for one time step; step 0 has no evolution."""

    evolution: Optional[EvolutionInput] = None
    observation: Optional[ObservationInput] = None


@dataclass
class Scenario:
    """A reproducible, declarative description of one filter run."""

    name: str
    seed: int
    steps: list
    commands: list = field(default_factory=lambda: [FILTER_ALL, SMOOTH])
    ground_truth: Optional[list] = None

    def dims(self):
        """Per-step state dimensions."""
        out = []
        for i, step in enumerate(self.steps):
            if i == 0:
                if step.observation is not None:
                    out.append(np.asarray(step.observation.G).shape[1])
                elif len(self.steps) > 1:
                    out.append(np.asarray(self.steps[1].evolution.F).shape[1])
                elif self.ground_truth:
                    out.append(len(self.ground_truth[0]))
                else:
                    raise ValueError(
                        "cannot determine the dimension of step 0")
            else:
                out.append(int(step.evolution.n_new))
        return out

    def validate(self):
        """Check structural consistency; raises ValueError on problems."""
        if not self.steps:
            raise ValueError("a scenario needs at least one step")
        if self.steps[0].evolution is not None:
            raise ValueError("step 0 must not have an evolution")
        for i, step in enumerate(self.steps[1:], start=1):
            if step.evolution is None:
                raise ValueError(f"step {i} is missing its evolution")
        last = len(self.steps) - 1
        for cmd in self.commands:
            if cmd[0] in ("forget", "rollback", "predict_to"):
                if not 0 <= cmd[1] <= last:
                    raise ValueError(
                        f"command {cmd[0]}({cmd[1]}) references a step "
                        f"outside 0..{last}")
        self.dims()


# ----------------------------------------------------------------------
# run results

@dataclass
class StepResult:
    """Estimates collected for one step of a scenario run."""

    index: int
    truth: Optional[np.ndarray]
    filtered: np.ndarray
    filtered_sigma: np.ndarray
    smoothed: Optional[np.ndarray] = None
    smoothed_sigma: Optional[np.ndarray] = None
    seconds: float = 0.0


@dataclass
class RunResult:
    """Per-step results of executing a scenario's command list."""

    scenario_name: str
    steps: list


# ----------------------------------------------------------------------
# generators

def gen_rotation(seed, obs_rows=2):
    """A point rotating in the plane, observed with 1..6 rows per step.

    The evolution is an exact rotation by 1/16 of a circle with very
    small process noise (sigma 0.001); observations are inaccurate
    (sigma 0.1).  The observation matrix has an identity in its first
    two rows; additional rows repeat the identity pattern.  The default
    command list reproduces the predict / roll back / refilter / smooth
    flow: only the first observation is given, the remaining steps are
    predicted, then the filter rolls back to step 1 and runs again with
    all observations before smoothing.
    """
    if not 1 <= obs_rows <= 6:
        raise ValueError("obs_rows must be in 1..6")
    rng = np.random.Generator(np.random.PCG64(seed))
    alpha = 2.0 * np.pi / 16.0
    F = np.array([[np.cos(alpha), -np.sin(alpha)],
                  [np.sin(alpha), np.cos(alpha)]])
    G = np.array([[1.0, 0.0], [0.0, 1.0]] * 3)[:obs_rows]
    K = CovarianceSpec.diagonal_sigmas([1e-3, 1e-3])
    C = CovarianceSpec.diagonal_sigmas([0.1] * obs_rows)
    n_steps = 16

    truth = [np.array([1.0, 0.0])]
    for _ in range(1, n_steps):
        truth.append(F @ truth[-1] + 1e-3 * rng.standard_normal(2))
    steps = []
    for i in range(n_steps):
        obs = ObservationInput(
            G=G, o=G @ truth[i] + 0.1 * rng.standard_normal(obs_rows), C=C)
        evo = None if i == 0 else EvolutionInput(
            n_new=2, F=F, c=np.zeros(2), K=K)
        steps.append(StepInput(evolution=evo, observation=obs))
    commands = [predict_to(n_steps - 1), rollback(1), FILTER_ALL, SMOOTH]
    return Scenario(name=f"rotation-obs{obs_rows}", seed=seed, steps=steps,
                    commands=commands, ground_truth=truth)


def gen_variance(seed, mode="slope", precise_at_50=True, n_steps=101):
    """A scalar tracked through observations of strongly varying quality.

    The filter always models a random walk with unit process noise.  In
    ``"slope"`` mode the simulated scalar actually grows by 0.2 per
    step, so the model is wrong on purpose; in ``"random_walk"`` mode
    simulation and model agree.  Observations are direct with sigma 10,
    optionally dropping to sigma 0.25 at step 50.
    """
    if mode not in ("slope", "random_walk"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    K = CovarianceSpec.diagonal_sigmas([1.0])
    G = np.array([[1.0]])

    truth = [np.zeros(1)]
    for _ in range(1, n_steps):
        if mode == "slope":
            truth.append(truth[-1] + 0.2)
        else:
            truth.append(truth[-1] + rng.standard_normal(1))
    steps = []
    for i in range(n_steps):
        sigma = 0.25 if (precise_at_50 and i == 50) else 10.0
        obs = ObservationInput(
            G=G, o=truth[i] + sigma * rng.standard_normal(1),
            C=CovarianceSpec.diagonal_sigmas([sigma]))
        evo = None if i == 0 else EvolutionInput(
            n_new=1, F=np.eye(1), c=np.zeros(1), K=K)
        steps.append(StepInput(evolution=evo, observation=obs))
    return Scenario(name=f"variance-{mode}", seed=seed, steps=steps,
                    ground_truth=truth)


def gen_add_remove(seed):
    """Grow the state from one parameter to two, then shrink back.

    Two scalar steps track the constant 1; step 2 grows the state to
    two components (the second has true value 2) with the default
    grown-state mapping; after two more two-dimensional steps, step 5
    drops the first component with an explicit mapping that retains the
    second.  All noise terms have sigma 0.1.

    The shrink keeps the 2-by-2 evolution matrix but zeroes the column
    of the dropped component; keeping an identity there would add a
    spurious zero-anchor equation on the dropped parameter and bias its
    smoothed history by several sigma.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    s = 0.1
    K1 = CovarianceSpec.diagonal_sigmas([s])
    K2 = CovarianceSpec.diagonal_sigmas([s, s])
    C1 = CovarianceSpec.diagonal_sigmas([s])
    C2 = CovarianceSpec.diagonal_sigmas([s, s])

    truth = [np.array([1.0]), np.array([1.0]),
             np.array([1.0, 2.0]), np.array([1.0, 2.0]),
             np.array([1.0, 2.0]),
             np.array([2.0]), np.array([2.0])]

    def noisy(t):
        return t + s * rng.standard_normal(t.shape[0])

    steps = [
        StepInput(observation=ObservationInput(np.eye(1), noisy(truth[0]), C1)),
        StepInput(evolution=EvolutionInput(1, np.eye(1), np.zeros(1), K1),
                  observation=ObservationInput(np.eye(1), noisy(truth[1]), C1)),
        # grow: H defaults to [1 0]
        StepInput(evolution=EvolutionInput(2, np.eye(1), np.zeros(1), K1),
                  observation=ObservationInput(np.eye(2), noisy(truth[2]), C2)),
        StepInput(evolution=EvolutionInput(2, np.eye(2), np.zeros(2), K2),
                  observation=ObservationInput(np.eye(2), noisy(truth[3]), C2)),
        StepInput(evolution=EvolutionInput(2, np.eye(2), np.zeros(2), K2),
                  observation=ObservationInput(np.eye(2), noisy(truth[4]), C2)),
        # shrink: retain the second component
        StepInput(evolution=EvolutionInput(
                      1, np.array([[0.0, 0.0], [0.0, 1.0]]), np.zeros(2), K2,
                      H=np.array([[0.0], [1.0]])),
                  observation=ObservationInput(np.eye(1), noisy(truth[5]), C1)),
        StepInput(evolution=EvolutionInput(1, np.eye(1), np.zeros(1), K1),
                  observation=ObservationInput(np.eye(1), noisy(truth[6]), C1)),
    ]
    return Scenario(name="add-remove", seed=seed, steps=steps,
                    ground_truth=truth)


def gen_projectile(seed, n_steps=1200, obs_from=400, obs_to=600):
    """A projectile under gravity and drag, observed mid-flight only.

    The four-dimensional state holds horizontal/vertical displacement
    and velocity; each 0.1 s step scales the velocity by (1 - 1e-4) for
    drag and subtracts 0.98 from the vertical velocity for gravity.
    Only the displacements are observed, with noise variance 500, and
    only in steps ``obs_from..obs_to``.  The simulated trajectory is
    deterministic; the filter models a tiny process noise (sigma 1e-3)
    to keep the evolution covariance nonsingular.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    dt, drag = 0.1, 1e-4
    F = np.array([[1.0, 0.0, dt, 0.0],
                  [0.0, 1.0, 0.0, dt],
                  [0.0, 0.0, 1.0 - drag, 0.0],
                  [0.0, 0.0, 0.0, 1.0 - drag]])
    c = np.array([0.0, 0.0, 0.0, -9.8 * dt])
    G = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0]])
    K = CovarianceSpec.diagonal_sigmas([1e-3] * 4)
    obs_sigma = np.sqrt(500.0)
    C = CovarianceSpec.diagonal_sigmas([obs_sigma] * 2)

    truth = [np.array([0.0, 0.0, 300.0, 600.0])]
    for _ in range(1, n_steps):
        truth.append(F @ truth[-1] + c)
    steps = []
    for i in range(n_steps):
        obs = None
        if obs_from <= i <= obs_to:
            obs = ObservationInput(
                G=G, o=G @ truth[i] + obs_sigma * rng.standard_normal(2), C=C)
        evo = None if i == 0 else EvolutionInput(
            n_new=4, F=F, c=c, K=K)
        steps.append(StepInput(evolution=evo, observation=obs))
    return Scenario(name="projectile", seed=seed, steps=steps,
                    ground_truth=truth)


def gen_clock_offsets(seed, n_clocks=3, n_packets=100, anchor=True):
    """Relative clock offsets from times of arrival of beacon packets.

    The state at packet i holds the offset of each of the ``n_clocks``
    receiver clocks plus the packet's unknown departure time; the
    evolution keeps the offsets (they drift slowly, sigma 0.01) while
    dropping the old departure time and introducing the new one.  Each
    packet yields one arrival-time row per clock (sigma 0.1), with the
    known propagation delays already subtracted.  The model determines
    offsets only up to a common shift, so a pseudo-observation of the
    first offset is added at step 0; pass ``anchor=False`` to leave the
    rank deficiency in place.
    """
    m = int(n_clocks)
    if m < 2:
        raise ValueError("need at least two clocks")
    rng = np.random.Generator(np.random.PCG64(seed))
    sigma_f, sigma_t, sigma_anchor = 0.01, 0.1, 1.0
    HF = np.hstack([np.eye(m), np.zeros((m, 1))])
    G_packet = np.hstack([np.eye(m), np.ones((m, 1))])
    K = CovarianceSpec.diagonal_sigmas([sigma_f] * m)
    C_packet = CovarianceSpec.diagonal_sigmas([sigma_t] * m)

    offsets = rng.standard_normal(m)
    steps = []
    truth = []
    for i in range(n_packets):
        if i > 0:
            offsets = offsets + sigma_f * rng.standard_normal(m)
        tau = float(i) + 0.3 * rng.standard_normal()
        truth.append(np.concatenate([offsets, [tau]]))
        # arrival-time rows with the known delays already removed
        o = offsets + tau + sigma_t * rng.standard_normal(m)
        if i == 0 and anchor:
            G = np.vstack([np.eye(1, m + 1), G_packet])
            o = np.concatenate([[0.0], o])
            C = CovarianceSpec.diagonal_sigmas(
                [sigma_anchor] + [sigma_t] * m)
        else:
            G, C = G_packet, C_packet
        evo = None if i == 0 else EvolutionInput(
            n_new=m + 1, F=HF, c=np.zeros(m), K=K, H=HF)
        steps.append(StepInput(evolution=evo,
                               observation=ObservationInput(G, o, C)))
    return Scenario(name=f"clock-offsets-{m}", seed=seed, steps=steps,
                    ground_truth=truth)


# ----------------------------------------------------------------------
# runner

def _collect_filtered(kal, dim):
    try:
        x, W = kal.estimate()
    except KalmanError:
        return np.full(dim, np.nan), np.full(dim, np.nan)
    return x, factor_to_sigmas(W)


def run(scenario, filter_factory=KalmanFilter):
    """Execute a scenario's commands against a fresh filter.

    Returns a :class:`RunResult` with, per fed step, the last filtered
    (or predicted) estimate, the smoothed estimate if a smooth command
    ran, per-component standard deviations, ground truth when the
    scenario carries it, and the engine time spent on the step.
    Engine errors are re-raised as :class:`ScenarioRunError` annotated
    with the step or command that caused them.
    """
    scenario.validate()
    dims = scenario.dims()
    kal = filter_factory()
    results = {}
    last = len(scenario.steps) - 1
    next_index = 0
    resume_observe = False

    def truth_at(idx):
        if scenario.ground_truth is None:
            return None
        return np.asarray(scenario.ground_truth[idx], dtype=float)

    def feed(through, with_obs):
        nonlocal next_index, resume_observe
        if through > last:
            raise ScenarioRunError(
                f"command references step {through}, scenario has "
                f"{last + 1} steps")
        for idx in range(next_index, through + 1):
            step = scenario.steps[idx]
            t0 = time.perf_counter()
            try:
                if idx > 0 and not resume_observe:
                    evo = step.evolution
                    kal.evolve(evo.n_new, evo.F, evo.c, evo.K, H=evo.H)
                obs = step.observation
                if obs is not None and (with_obs or idx == 0):
                    kal.observe(obs.G, obs.o, obs.C)
                else:
                    kal.observe()
            except (KalmanError, ValueError) as exc:
                raise ScenarioRunError(f"step {idx}: {exc}") from exc
            seconds = time.perf_counter() - t0
            resume_observe = False
            x, sig = _collect_filtered(kal, dims[idx])
            results[idx] = StepResult(
                index=idx, truth=truth_at(idx), filtered=x,
                filtered_sigma=sig, seconds=seconds)
        next_index = through + 1

    for cmd in scenario.commands:
        kind = cmd[0]
        try:
            if kind == "filter_all":
                feed(last, with_obs=True)
            elif kind == "predict_to":
                feed(cmd[1], with_obs=False)
            elif kind == "smooth":
                kal.smooth()
                for idx in range(kal.earliest(), kal.latest() + 1):
                    x, W = kal.estimate(idx)
                    res = results[idx]
                    res.smoothed = x
                    res.smoothed_sigma = factor_to_sigmas(W)
            elif kind == "forget":
                kal.forget(cmd[1])
            elif kind == "rollback":
                kal.rollback(cmd[1])
                next_index = cmd[1]
                resume_observe = True
            else:
                raise ScenarioRunError(f"unknown command {kind!r}")
        except ScenarioRunError:
            raise
        except (KalmanError, ValueError) as exc:
            label = f"{kind}({cmd[1]})" if len(cmd) > 1 else kind
            raise ScenarioRunError(f"command {label}: {exc}") from exc

    ordered = [results[i] for i in sorted(results)]
    return RunResult(scenario_name=scenario.name, steps=ordered)


# ----------------------------------------------------------------------
# performance harness

@dataclass
class PerfResult:
    """Timing summary of a long filtering run."""

    dim: int
    n_steps: int
    window: Optional[int]
    group_size: int
    group_means: np.ndarray     # mean seconds per step, per group
    max_retained: int
    smooth_seconds: Optional[float] = None


def random_unitary(n, rng):
    """Random n-by-n orthogonal matrix (QR of a Gaussian matrix)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diagonal(r))


def perftest(dim=6, n_steps=100_000, window=16, seed=0, group_size=1000,
             include_smooth=False):
    """Time filtering (and optionally smoothing) of a synthetic system.

    The system uses fixed random orthogonal evolution and observation
    matrices (orthogonality keeps the factorization from drifting
    towards overflow on very long runs), identity covariances, zero
    control, and Gaussian observations.  With a ``window``, steps more
    than ``window`` behind the newest are forgotten, bounding memory;
    ``window=None`` retains everything, which is what a later
    ``smooth()`` needs.  Per-step wall times are averaged over
    non-overlapping groups of ``group_size`` steps.
    """
    if window is not None and window < 2:
        raise ValueError("window must be at least 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    F = random_unitary(dim, rng)
    G = random_unitary(dim, rng)
    K = CovarianceSpec.diagonal_weights(np.ones(dim))
    C = CovarianceSpec.diagonal_weights(np.ones(dim))
    c = np.zeros(dim)
    obs = rng.standard_normal((n_steps, dim))

    kal = KalmanFilter()
    times = np.empty(n_steps)
    max_retained = 0
    for i in range(n_steps):
        t0 = time.perf_counter()
        if i > 0:
            kal.evolve(dim, F, c, K)
        kal.observe(G, obs[i], C)
        kal.estimate()
        if window is not None and i > window:
            kal.forget(i - window)
        times[i] = time.perf_counter() - t0
        retained = kal.latest() - kal.earliest() + 1
        if retained > max_retained:
            max_retained = retained

    n_groups = n_steps // group_size
    group_means = times[:n_groups * group_size] \
        .reshape(n_groups, group_size).mean(axis=1)
    smooth_seconds = None
    if include_smooth:
        t0 = time.perf_counter()
        kal.smooth()
        smooth_seconds = time.perf_counter() - t0
    return PerfResult(dim=dim, n_steps=n_steps, window=window,
                      group_size=group_size, group_means=group_means,
                      max_retained=max_retained,
                      smooth_seconds=smooth_seconds)


# ----------------------------------------------------------------------
# serialization

def _evolution_to_obj(evo):
    obj = {"n": int(evo.n_new),
           "F": np.asarray(evo.F, dtype=float).tolist(),
           "c": np.asarray(evo.c, dtype=float).tolist(),
           "K": evo.K.to_json_obj()}
    if evo.H is not None:
        obj["H"] = np.asarray(evo.H, dtype=float).tolist()
    return obj


def _observation_to_obj(obs):
    return {"G": np.asarray(obs.G, dtype=float).tolist(),
            "o": np.asarray(obs.o, dtype=float).tolist(),
            "C": obs.C.to_json_obj()}


def _command_to_obj(cmd):
    if cmd[0] in ("filter_all", "smooth"):
        return cmd[0]
    return {cmd[0]: cmd[1]}


def scenario_to_json_obj(scenario):
    """Plain-JSON representation of a scenario."""
    obj = {"name": scenario.name,
           "seed": int(scenario.seed),
           "steps": [], "commands": []}
    for step in scenario.steps:
        step_obj = {}
        if step.evolution is not None:
            step_obj["evolve"] = _evolution_to_obj(step.evolution)
        if step.observation is not None:
            step_obj["observe"] = _observation_to_obj(step.observation)
        obj["steps"].append(step_obj)
    obj["commands"] = [_command_to_obj(c) for c in scenario.commands]
    if scenario.ground_truth is not None:
        obj["ground_truth"] = [np.asarray(t, dtype=float).tolist()
                               for t in scenario.ground_truth]
    return obj


def _command_from_obj(obj):
    if isinstance(obj, str):
        if obj in ("filter_all", "smooth"):
            return (obj,)
        raise ValueError(f"unknown command {obj!r}")
    if isinstance(obj, dict) and len(obj) == 1:
        key, value = next(iter(obj.items()))
        if key in ("forget", "rollback", "predict_to"):
            return (key, int(value))
    raise ValueError(f"unknown command {obj!r}")


def scenario_from_json_obj(obj):
    """Inverse of :func:`scenario_to_json_obj`, with validation."""
    steps = []
    for i, step_obj in enumerate(obj.get("steps", [])):
        evo = None
        if "evolve" in step_obj:
            e = step_obj["evolve"]
            evo = EvolutionInput(
                n_new=int(e["n"]),
                F=as_matrix(e["F"], f"step {i} F"),
                c=as_vector(e["c"], f"step {i} c"),
                K=CovarianceSpec.from_json_obj(e["K"]),
                H=as_matrix(e["H"], f"step {i} H") if "H" in e else None)
        observation = None
        if "observe" in step_obj:
            ob = step_obj["observe"]
            observation = ObservationInput(
                G=as_matrix(ob["G"], f"step {i} G"),
                o=as_vector(ob["o"], f"step {i} o"),
                C=CovarianceSpec.from_json_obj(ob["C"]))
        steps.append(StepInput(evolution=evo, observation=observation))
    truth = None
    if "ground_truth" in obj:
        truth = [as_vector(t, "ground_truth") for t in obj["ground_truth"]]
    scenario = Scenario(
        name=str(obj.get("name", "scenario")),
        seed=int(obj.get("seed", 0)),
        steps=steps,
        commands=[_command_from_obj(c) for c in obj.get("commands", [])],
        ground_truth=truth)
    scenario.validate()
    return scenario


def _reject_nan(token):
    raise ValueError(f"non-finite value {token!r} is not allowed in "
                     f"scenario files")


def save_scenario(scenario, path):
    """Write a scenario to a JSON file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_json_obj(scenario), fh, indent=1,
                  allow_nan=False)
        fh.write("\n")


def load_scenario(path):
    """Read a scenario from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh, parse_constant=_reject_nan)
    return scenario_from_json_obj(obj)


def _fmt(value):
    if value is None or np.isnan(value):
        return "NaN"
    return format(float(value), ".17g")


def write_result_csv(result, path):
    """Write a run result as CSV, one row per step and component."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,component,truth,filtered,filtered_sigma,"
                 "smoothed,smoothed_sigma\n")
        for step in result.steps:
            dim = len(step.filtered)
            for j in range(dim):
                truth = None if step.truth is None else step.truth[j]
                smoothed = None if step.smoothed is None else step.smoothed[j]
                ssig = None if step.smoothed_sigma is None \
                    else step.smoothed_sigma[j]
                fh.write(",".join([
                    str(step.index), str(j), _fmt(truth),
                    _fmt(step.filtered[j]), _fmt(step.filtered_sigma[j]),
                    _fmt(smoothed), _fmt(ssig)]) + "\n")
