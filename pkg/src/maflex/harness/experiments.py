"""Scenario runs, Monte Carlo over random drops, gain maps and error sweeps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..baselines import BaselineKind, evaluate, solve_baseline
from ..beamforming import mrt_weights
from ..construct import (
    construct_optimal_apv,
    full_gain_apv_single,
    grating_lobe_spacing,
    nulling_apv_single,
    phase_coeffs,
    uniform_apv,
)
from ..errors import DegenerateDirection, InfeasibleInput, MaflexError, RankDeficient
from ..geometry import PolarTarget, gain_map, to_polar_grid
from ..multibeam_opt import solve_p3
from ..nulling_opt import solve_p2
from ..robustness import (
    build_sensitivity,
    exact_sum_gain,
    find_mrt_null_apv,
    worstcase_multibeam,
    worstcase_nulling,
)
from .config import trial_rng

logger = logging.getLogger(__name__)

SCHEMES = ("proposed", "construct", *(k.value for k in BaselineKind))
MAX_REDRAWS = 100
HEATMAP_X = (-10.0, 10.0, 200)
HEATMAP_Y = (0.0, 10.0, 100)


@dataclass
class RunResult:
    scheme: str
    apv: np.ndarray
    weights: np.ndarray
    gains: np.ndarray  # target0 first, then each user
    objective: float
    traces: dict = field(default_factory=dict)


def construct_solution(config):
    """Closed-form APV with MRT toward ``target0``.

    Nulling uses the prime-factor construction; multi-beam forming uses the
    full-gain residue placement for one user and the rational uniform
    spacing otherwise. The track limit is not enforced.
    """
    lam = config.wavelength
    N = config.n_antennas
    if config.scenario == "nulling":
        x = construct_optimal_apv(config.target0, config.users, N, config.limits)
    elif len(config.users) == 1:
        x = full_gain_apv_single(phase_coeffs(config.target0, config.users[0]), N, config.limits)
    else:
        coeffs = [phase_coeffs(config.target0, u) for u in config.users]
        x = uniform_apv(N, grating_lobe_spacing(coeffs, config.limits).d_star)
    return x, mrt_weights(x, config.target0, lam, config.model)


def _check_scheme(scheme):
    if scheme not in SCHEMES:
        raise InfeasibleInput(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def run_scenario(config, scheme="proposed", rng=None):
    """Solve ``config`` with one scheme and score it with the near-field evaluator."""
    _check_scheme(scheme)
    traces = {}
    if scheme == "proposed":
        if config.scenario == "nulling":
            x, zf, trace = solve_p2(config)
            w = zf.weights
        else:
            res = solve_p3(config)
            x, w, trace = res.apv, res.weights, res.trace
        traces["objective"] = list(trace)
    elif scheme == "construct":
        x, w = construct_solution(config)
    else:
        rng = rng if rng is not None else trial_rng(config.seed, 0)
        x, w = solve_baseline(scheme, config, rng)
    ev = evaluate(config, x, w)
    return RunResult(scheme, np.asarray(x), np.asarray(w), ev.gains, ev.objective, traces)


@dataclass
class SchemeSummary:
    scheme: str
    mean: float
    stderr: float
    trials: int


@dataclass
class MonteCarloResult:
    summary: list
    objectives: np.ndarray  # (trials, schemes)
    schemes: tuple
    redraws: int
    drops: list  # (target0, users) per trial


def _trial(args):
    config, dist, schemes, t = args
    n_users = dist.n_users if dist.n_users is not None else len(config.users)
    redraws = 0
    for attempt in range(MAX_REDRAWS):
        target0, users = dist.draw(trial_rng(config.seed, t, attempt), n_users)
        cfg = config.with_users(target0, users)
        try:
            objs = [
                run_scenario(cfg, s, trial_rng(config.seed, t, attempt, 1)).objective
                for s in schemes
            ]
        except (DegenerateDirection, RankDeficient) as exc:
            logger.info("trial %d draw %d re-drawn: %s", t, attempt, exc)
            redraws += 1
            continue
        return objs, redraws, (target0, users)
    raise MaflexError(f"trial {t}: no usable drop in {MAX_REDRAWS} attempts")


def monte_carlo(config, dist, schemes=("proposed",), workers=1):
    """Average every scheme's objective over ``dist.trials`` random drops.

    Each trial draws from its own substream of ``config.seed``; all schemes
    in a trial see the same users. Results do not depend on ``workers``.
    """
    schemes = tuple(schemes)
    for s in schemes:
        _check_scheme(s)
    jobs = [(config, dist, schemes, t) for t in range(dist.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_trial, jobs))
    else:
        out = [_trial(j) for j in jobs]
    objs = np.array([o[0] for o in out], dtype=float)
    redraws = sum(o[1] for o in out)
    T = objs.shape[0]
    summary = []
    for j, s in enumerate(schemes):
        col = objs[:, j]
        se = float(np.std(col, ddof=1) / math.sqrt(T)) if T > 1 else 0.0
        summary.append(SchemeSummary(s, float(np.mean(col)), se, T))
    return MonteCarloResult(summary, objs, schemes, redraws, [o[2] for o in out])


@dataclass
class Heatmap:
    gains: np.ndarray  # rows follow ys, columns follow xs
    xs: np.ndarray
    ys: np.ndarray


def heatmap(config, result, xs=None, ys=None):
    """Gain of ``(result.apv, result.weights)`` over a Cartesian grid in front of the array."""
    xs = np.linspace(*HEATMAP_X) if xs is None else np.asarray(xs, dtype=float)
    ys = np.linspace(*HEATMAP_Y) if ys is None else np.asarray(ys, dtype=float)
    R, TH = to_polar_grid(xs, ys)
    G = gain_map(result.apv, result.weights, R, TH, config.wavelength, config.model)
    return Heatmap(G, xs, ys)


def robust_apv(config, rng=None):
    """APV meeting the premise of the error analysis (MRT nulls or full gains)."""
    if config.scenario == "nulling":
        rng = rng if rng is not None else trial_rng(config.seed, 0)
        return find_mrt_null_apv(config.target0, config.users, config.n_antennas,
                                 config.limits, rng=rng)
    return construct_solution(config)[0]


@dataclass
class SweepRow:
    eps_over_lambda: float
    approx: float
    exact: float
    bound: float  # SDR upper bound (nulling) or the approximation itself (multi-beam)

    @property
    def gap_db(self):
        return abs(10.0 * math.log10(self.approx / self.exact))


def robustness_sweep(config, ratios, apv=None, rng=None):
    """Approximate and exact worst-case sum gain over ``epsilon = ratio * lambda``.

    Gains are on the beam-gain scale (the leakage is divided by ``N``); the
    exact value re-evaluates the gain at the worst-case errors.
    """
    lam = config.wavelength
    N = config.n_antennas
    x = robust_apv(config, rng) if apv is None else np.asarray(apv, dtype=float)
    model = build_sensitivity(x, config.target0, config.users, lam)
    rows = []
    for r in ratios:
        eps = float(r) * lam
        if config.scenario == "nulling":
            wc = worstcase_nulling(model, eps, config.randomization_draws,
                                   rng=trial_rng(config.seed, 2))
            approx, bound = wc.leakage / N, wc.sdr_upper_bound / N
        else:
            wc = worstcase_multibeam(model, eps)
            approx = bound = wc.approx_sum_gain
        exact = exact_sum_gain(x, wc.delta_d, config.target0, config.users, lam)
        rows.append(SweepRow(float(r), float(approx), float(exact), float(bound)))
    return x, rows


def separation_degradation(target0, separations_deg, eps_over_lambda, n_antennas, limits,
                           randomization_draws=1000, seed=0):
    """Worst-case leakage at one user offset from ``target0`` by each angle.

    The user sits at the target's range; the APV is the single-user null
    construction. Returns ``(approx, exact)`` arrays on the beam-gain scale,
    which equal the loss against the error-free value of zero.
    """
    lam = limits.wavelength
    eps = eps_over_lambda * lam
    approx, exact = [], []
    for deg in separations_deg:
        th = target0.angle + math.radians(deg)
        if th > math.pi:
            th = target0.angle - math.radians(deg)
        user = PolarTarget(target0.distance, th)
        x = nulling_apv_single(phase_coeffs(target0, user), n_antennas, limits)
        m = build_sensitivity(x, target0, [user], lam)
        wc = worstcase_nulling(m, eps, randomization_draws, rng=trial_rng(seed, 3))
        approx.append(wc.leakage / n_antennas)
        exact.append(exact_sum_gain(x, wc.delta_d, target0, [user], lam))
    return np.array(approx), np.array(exact)

