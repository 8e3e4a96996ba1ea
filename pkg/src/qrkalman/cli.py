"""Command-line front end.

Subcommands::

    qrkalman example {rotation|variance|add-remove|projectile|clock-offsets}
    qrkalman run <scenario.json>
    qrkalman perftest
    qrkalman oracle-check <scenario.json>

Exit codes: 0 on success, 1 on usage or file errors, 2 on engine or
solver errors (with the failing step on standard error).  The
``QRKALMAN_OUT_DIR`` environment variable, when set, redirects relative
``--out`` paths into that directory; no other behavior is controlled by
the environment.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import gls, scenarios
from .covariance import factor_to_covariance
from .errors import KalmanError
from .filter import KalmanFilter


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="qrkalman",
                     description="run Kalman filtering/smoothing scenarios")
    sub = parser.add_subparsers(dest="command", required=True)

    example = sub.add_parser("example", help="run a bundled example")
    example.add_argument("name", choices=["rotation", "variance",
                                          "add-remove", "projectile",
                                          "clock-offsets"])
    example.add_argument("--seed", type=int, default=0)
    example.add_argument("--out", default=None,
                         help="output CSV path (default <name>.csv)")
    example.add_argument("--obs-rows", type=int, default=2,
                         help="rotation: observation rows, 1..6")
    example.add_argument("--mode", choices=["slope", "random-walk"],
                         default="slope", help="variance: true dynamics")
    example.add_argument("--precise-at-50",
                         action=argparse.BooleanOptionalAction, default=True,
                         help="variance: precise observation at step 50")
    example.add_argument("--clocks", type=int, default=3)
    example.add_argument("--packets", type=int, default=100)

    runp = sub.add_parser("run", help="run a scenario file")
    runp.add_argument("scenario", help="path to a scenario JSON file")
    runp.add_argument("--out", default="result.csv")

    perf = sub.add_parser("perftest", help="time a long filtering run")
    perf.add_argument("--dim", type=int, default=6)
    perf.add_argument("--steps", type=int, default=100_000)
    perf.add_argument("--window", type=int, default=16,
                      help="forget steps more than this far behind; "
                           "0 retains everything")
    perf.add_argument("--seed", type=int, default=0)
    perf.add_argument("--out", default="perftest.csv")

    check = sub.add_parser(
        "oracle-check",
        help="filter+smooth a scenario and compare against the dense "
             "least-squares solver")
    check.add_argument("scenario", help="path to a scenario JSON file")
    return parser


def _out_path(path):
    out_dir = os.environ.get("QRKALMAN_OUT_DIR")
    if out_dir and not os.path.isabs(path):
        return os.path.join(out_dir, path)
    return path


def _make_example(args):
    if args.name == "rotation":
        return scenarios.gen_rotation(args.seed, obs_rows=args.obs_rows)
    if args.name == "variance":
        return scenarios.gen_variance(
            args.seed, mode=args.mode.replace("-", "_"),
            precise_at_50=args.precise_at_50)
    if args.name == "add-remove":
        return scenarios.gen_add_remove(args.seed)
    if args.name == "projectile":
        return scenarios.gen_projectile(args.seed)
    return scenarios.gen_clock_offsets(
        args.seed, n_clocks=args.clocks, n_packets=args.packets)


def _cmd_example(args):
    scenario = _make_example(args)
    result = scenarios.run(scenario)
    out = _out_path(args.out or f"{scenario.name}.csv")
    scenarios.write_result_csv(result, out)
    print(f"{scenario.name}: {len(result.steps)} steps -> {out}")
    return 0


def _cmd_run(args):
    scenario = scenarios.load_scenario(args.scenario)
    result = scenarios.run(scenario)
    out = _out_path(args.out)
    scenarios.write_result_csv(result, out)
    print(f"{scenario.name}: {len(result.steps)} steps -> {out}")
    return 0


def _cmd_perftest(args):
    window = None if args.window == 0 else args.window
    perf = scenarios.perftest(dim=args.dim, n_steps=args.steps,
                              window=window, seed=args.seed)
    out = _out_path(args.out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("group,first_step,last_step,mean_seconds\n")
        for g, mean in enumerate(perf.group_means):
            first = g * perf.group_size
            fh.write(f"{g},{first},{first + perf.group_size - 1},"
                     f"{mean:.9e}\n")
    print(f"perftest dim={perf.dim} steps={perf.n_steps} "
          f"window={perf.window}: "
          f"mean {perf.group_means.mean() * 1e6:.1f} us/step, "
          f"max retained {perf.max_retained} -> {out}")
    return 0


def _cmd_oracle_check(args):
    scenario = scenarios.load_scenario(args.scenario)
    scenario.validate()
    kal = KalmanFilter()
    for step in scenario.steps:
        if step.evolution is not None:
            evo = step.evolution
            kal.evolve(evo.n_new, evo.F, evo.c, evo.K, H=evo.H)
        if step.observation is not None:
            obs = step.observation
            kal.observe(obs.G, obs.o, obs.C)
        else:
            kal.observe()
    kal.smooth()

    estimates, covariances = gls.solve_gls(gls.assemble(scenario.steps))
    worst_est = 0.0
    worst_cov = 0.0
    for idx in range(kal.earliest(), kal.latest() + 1):
        x, w = kal.estimate(idx)
        ref = estimates[idx]
        scale = max(float(np.linalg.norm(ref)), 1e-300)
        worst_est = max(worst_est,
                        float(np.linalg.norm(x - ref)) / scale)
        cov = factor_to_covariance(w)
        ref_cov = covariances[idx]
        scale = max(float(np.linalg.norm(ref_cov)), 1e-300)
        worst_cov = max(worst_cov,
                        float(np.linalg.norm(cov - ref_cov)) / scale)
    print(f"{scenario.name}: max relative discrepancy "
          f"estimates={worst_est:.3e} covariances={worst_cov:.3e}")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qrkalman: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:     # --help and friends
        return 0 if exc.code in (0, None) else 1

    handlers = {"example": _cmd_example, "run": _cmd_run,
                "perftest": _cmd_perftest, "oracle-check": _cmd_oracle_check}
    try:
        return handlers[args.command](args)
    except KalmanError as exc:
        print(f"qrkalman: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"qrkalman: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
