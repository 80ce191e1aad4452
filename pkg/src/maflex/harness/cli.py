"""Command-line entry point: ``maflex <command> [--config FILE] [--seed S] ...``.

Every command writes CSV files into ``--out-dir`` (default: ``$MAFLEX_OUT_DIR``
or ``./maflex-out``). Exit status is 0 on success, 2 for infeasible input
and 3 when a numerical solver fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

import numpy as np

from ..errors import MaflexError
from . import csvio
from .config import DropDistribution, ScenarioConfig, load_config
from .experiments import SCHEMES, heatmap, monte_carlo, robustness_sweep, run_scenario

OUT_ENV = "MAFLEX_OUT_DIR"
DEFAULT_RATIOS = np.round(np.arange(0.0, 0.301, 0.02), 10)

logger = logging.getLogger("maflex")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out-dir", help=f"output directory (default ${OUT_ENV} or ./maflex-out)")
    common.add_argument("--scheme", default="proposed",
                        help=f"one of {', '.join(SCHEMES)}; comma-separated for montecarlo")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="maflex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("null", parents=[common], help="beam nulling design")
    sub.add_parser("multibeam", parents=[common], help="max-min multi-beam design")
    sub.add_parser("construct", parents=[common], help="closed-form APV")
    rob = sub.add_parser("robust", parents=[common], help="worst-case position-error sweep")
    rob.add_argument("--ratios", help="comma-separated epsilon/lambda values")
    sub.add_parser("heatmap", parents=[common], help="gain map of a solved design")
    mc = sub.add_parser("montecarlo", parents=[common], help="average over random drops")
    mc.add_argument("--trials", type=int, help="override the number of drops")
    mc.add_argument("--workers", type=int, default=1)
    return p


def _load(args, scenario=None):
    if args.config:
        cfg, dist = load_config(args.config)
    else:
        cfg, dist = ScenarioConfig.build(), DropDistribution()
    changes = {}
    if scenario is not None and cfg.scenario != scenario:
        changes["scenario"] = scenario
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
    return cfg, dist


def _write_run(out, name, cfg, res):
    csvio.write_table(
        os.path.join(out, f"{name}_apv.csv"),
        ["antenna", "position_m", "weight_re", "weight_im"],
        [(i, x, w.real, w.imag) for i, (x, w) in enumerate(zip(res.apv, res.weights))],
    )
    pts = [cfg.target0, *cfg.users]
    csvio.write_table(
        os.path.join(out, f"{name}_gains.csv"),
        ["user", "distance_m", "angle_rad", "gain"],
        [(k, p.distance, p.angle, g) for k, (p, g) in enumerate(zip(pts, res.gains))],
    )
    trace = res.traces.get("objective", [])
    csvio.write_table(os.path.join(out, f"{name}_trace.csv"), ["step", "objective"],
                      list(enumerate(trace)))


def run(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out_dir or os.environ.get(OUT_ENV) or "maflex-out"
    cmd = args.command
    scenario = {"null": "nulling", "multibeam": "multibeam"}.get(cmd)
    cfg, dist = _load(args, scenario)

    if cmd in ("null", "multibeam", "construct"):
        scheme = "construct" if cmd == "construct" else args.scheme
        res = run_scenario(cfg, scheme)
        _write_run(out, f"{cmd}_{scheme}", cfg, res)
        print(f"{scheme}: objective {res.objective!r}")
    elif cmd == "heatmap":
        res = run_scenario(cfg, args.scheme)
        hm = heatmap(cfg, res)
        csvio.write_matrix(os.path.join(out, "heatmap.csv"), hm.gains, prefix="x")
        axes = [("x", i, v) for i, v in enumerate(hm.xs)] + [("y", j, v) for j, v in enumerate(hm.ys)]
        csvio.write_table(os.path.join(out, "heatmap_axes.csv"), ["axis", "index", "value_m"], axes)
        print(f"heatmap {hm.gains.shape[0]}x{hm.gains.shape[1]}, max {float(hm.gains.max())!r}")
    elif cmd == "robust":
        ratios = DEFAULT_RATIOS if not args.ratios else [float(v) for v in args.ratios.split(",")]
        x, rows = robustness_sweep(cfg, ratios)
        csvio.write_table(os.path.join(out, "robust_apv.csv"), ["antenna", "position_m"],
                          list(enumerate(x)))
        csvio.write_table(
            os.path.join(out, "robust.csv"),
            ["eps_over_lambda", "approx_sum_gain", "exact_sum_gain", "upper_bound"],
            [(r.eps_over_lambda, r.approx, r.exact, r.bound) for r in rows],
        )
        print(f"robust: {len(rows)} error levels")
    else:
        schemes = [s.strip() for s in args.scheme.split(",") if s.strip()]
        if args.trials is not None:
            dist = dataclasses.replace(dist, trials=args.trials)
        res = monte_carlo(cfg, dist, schemes, workers=args.workers)
        csvio.write_table(
            os.path.join(out, "montecarlo.csv"),
            ["scheme", "mean", "stderr", "trials", "redraws"],
            [(s.scheme, s.mean, s.stderr, s.trials, res.redraws) for s in res.summary],
        )
        csvio.write_table(os.path.join(out, "montecarlo_trials.csv"), ["trial", *res.schemes],
                          [(t, *row) for t, row in enumerate(res.objectives.tolist())])
        for s in res.summary:
            print(f"{s.scheme}: mean {s.mean!r} stderr {s.stderr!r}")
    return 0


def main(argv=None):
    try:
        return run(argv)
    except MaflexError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
