"""Benchmark schemes: fixed layouts, antenna selection, particle swarm and far-field design.

Every scheme returns an APV and weights; scoring goes through
:func:`evaluate`, which always uses the scenario's near-field model so the
comparison is like for like.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .beamforming import zf_target_gain_batch, zf_weights
from .errors import Infeasible, InfeasibleInput
from .geometry import steering_matrix
from .multibeam_opt import alternate, gains, initial_weights, sca_delta_batch, sca_weights
from .nulling_opt import sequential_update, solve_p2, uniform_start
from .multibeam_opt import solve_p3

logger = logging.getLogger(__name__)


class BaselineKind(str, enum.Enum):
    FPA = "FPA"
    SA = "SA"
    AS = "AS"
    PSO = "PSO"
    FF = "FF"


@dataclass(frozen=True)
class SwarmConfig:
    """Particle swarm settings (constriction-style coefficients)."""

    particles: int = 50
    iterations: int = 100
    inertia: float = 0.729
    cognitive: float = 1.494
    social: float = 1.494

    def __post_init__(self):
        if self.particles < 1 or self.iterations < 0:
            raise InfeasibleInput("swarm needs >= 1 particle and >= 0 iterations")


class Solution(NamedTuple):
    apv: np.ndarray
    weights: np.ndarray


class Evaluation(NamedTuple):
    gains: np.ndarray  # target0 first, then every user
    objective: float


def _all_targets(scenario):
    return [scenario.target0, *scenario.users]


def evaluate(scenario, apv, w):
    """Near-field gains of ``(apv, w)`` and the scenario objective.

    The objective is the target gain when nulling and the minimum gain over
    all users for multi-beam forming.
    """
    A = steering_matrix(apv, _all_targets(scenario), scenario.limits.wavelength, scenario.model)
    g = gains(A, np.asarray(w, dtype=complex))
    obj = float(g[0]) if scenario.scenario == "nulling" else float(np.min(g))
    return Evaluation(g, obj)


def weights_for(scenario, apv):
    """Weights a fixed layout gets: ZF for nulling, SCA max-min for multi-beam."""
    lam = scenario.limits.wavelength
    if scenario.scenario == "nulling":
        return zf_weights(apv, scenario.target0, scenario.users, lam, scenario.model).weights
    A = steering_matrix(apv, _all_targets(scenario), lam, scenario.model)
    return sca_weights(A, initial_weights(A), scenario.sca).weights


def fpa_apv(limits, n):
    limits.check_capacity(n)
    return limits.d_max / 2.0 + (np.arange(n) - (n - 1) / 2.0) * limits.d_min


def sa_apv(limits, n):
    limits.check_capacity(n)
    step = limits.d_max / n
    if n > 1 and step < limits.d_min:
        raise Infeasible(f"spacing D_max/N = {step:.6g} m is below d_min")
    return np.arange(n) * step


def selection_grid(limits):
    """Fixed candidate slots ``0, d_min, 2 d_min, ...`` inside the track."""
    count = int(np.floor(limits.d_max / limits.d_min * (1 + 1e-12))) + 1
    return np.arange(count) * limits.d_min


def _as_start(pts, limits, n):
    # Start from the FPA layout when it is itself a selection, so AS never loses to it.
    fpa = fpa_apv(limits, n)
    idx = np.round(fpa / limits.d_min).astype(int)
    if np.all(idx >= 0) and np.all(idx < pts.size) and np.allclose(pts[idx], fpa, atol=1e-12):
        return pts[idx]
    return uniform_start(pts, n, limits.d_min)


def antenna_selection(scenario):
    """Pick ``N`` of the fixed ``d_min``-spaced slots with the proposed search."""
    limits = scenario.limits
    N = scenario.n_antennas
    limits.check_capacity(N)
    pts = selection_grid(limits)
    x0 = _as_start(pts, limits, N)
    lam = limits.wavelength
    if scenario.scenario == "nulling":

        def score(X):
            return zf_target_gain_batch(X, scenario.target0, scenario.users, lam, scenario.model)

        x, _, _ = sequential_update(x0, score, pts, limits.d_min, scenario.grid.rounds)
        x = np.sort(x)
        return Solution(x, weights_for(scenario, x))
    res = alternate(x0, _all_targets(scenario), limits, pts, scenario.grid.rounds,
                    scenario.sca, scenario.model)
    return Solution(res.apv, res.weights)


def baseline_apv(kind, scenario):
    """Layout of a non-iterative benchmark (``FPA``, ``SA``) or of antenna selection."""
    kind = BaselineKind(kind)
    if kind is BaselineKind.FPA:
        return fpa_apv(scenario.limits, scenario.n_antennas)
    if kind is BaselineKind.SA:
        return sa_apv(scenario.limits, scenario.n_antennas)
    if kind is BaselineKind.AS:
        return antenna_selection(scenario).apv
    raise InfeasibleInput(f"baseline_apv does not handle {kind.value}")


def repair(X, limits):
    """Sort each row and shift the fewest coordinates needed to restore the spacing.

    A forward pass pushes antennas right to keep ``d_min``, a backward pass
    pulls them left to stay inside ``d_max``.
    """
    X = np.sort(np.clip(np.atleast_2d(np.asarray(X, dtype=float)), 0.0, limits.d_max), axis=1)
    N = X.shape[1]
    for n in range(1, N):
        X[:, n] = np.maximum(X[:, n], X[:, n - 1] + limits.d_min)
    X[:, -1] = np.minimum(X[:, -1], limits.d_max)
    for n in range(N - 2, -1, -1):
        X[:, n] = np.minimum(X[:, n], X[:, n + 1] - limits.d_min)
    return X


def _swarm_fitness(scenario):
    lam = scenario.limits.wavelength
    if scenario.scenario == "nulling":
        return lambda X: zf_target_gain_batch(X, scenario.target0, scenario.users, lam,
                                              scenario.model)
    targets = _all_targets(scenario)
    return lambda X: sca_delta_batch(steering_matrix(X, targets, lam, scenario.model), scenario.sca)


def pso_solve(scenario, swarm_cfg=None, rng=None):
    """Continuous-space particle swarm over the APV.

    Velocities start at zero; every particle is repaired before scoring.

    Returns
    -------
    Solution, float
        Best layout with its weights, and its objective under :func:`evaluate`.
    """
    cfg = swarm_cfg or SwarmConfig()
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    limits = scenario.limits
    N = scenario.n_antennas
    limits.check_capacity(N)
    fit = _swarm_fitness(scenario)

    pos = repair(rng.uniform(0.0, limits.d_max, size=(cfg.particles, N)), limits)
    vel = np.zeros_like(pos)
    val = fit(pos)
    pbest, pval = pos.copy(), val.copy()
    g = int(np.argmax(pval))
    gbest, gval = pbest[g].copy(), pval[g]
    for _ in range(cfg.iterations):
        r1 = rng.random(pos.shape)
        r2 = rng.random(pos.shape)
        vel = (cfg.inertia * vel + cfg.cognitive * r1 * (pbest - pos)
               + cfg.social * r2 * (gbest - pos))
        pos = repair(pos + vel, limits)
        val = fit(pos)
        better = val > pval
        pbest[better] = pos[better]
        pval[better] = val[better]
        g = int(np.argmax(pval))
        if pval[g] > gval:
            gbest, gval = pbest[g].copy(), pval[g]
    w = weights_for(scenario, gbest)
    return Solution(gbest, w), evaluate(scenario, gbest, w).objective


def far_field_solve(scenario):
    """Run the proposed design with planar-wavefront steering vectors.

    The result is meant to be scored with :func:`evaluate` on the original
    (near-field) scenario.
    """
    ff = dataclasses.replace(scenario, model="far")
    if scenario.scenario == "nulling":
        x, zf, _ = solve_p2(ff)
        return Solution(x, zf.weights)
    res = solve_p3(ff)
    return Solution(res.apv, res.weights)


def solve_baseline(kind, scenario, rng=None):
    """Dispatch any benchmark and return its :class:`Solution`."""
    kind = BaselineKind(kind)
    if kind in (BaselineKind.FPA, BaselineKind.SA):
        x = baseline_apv(kind, scenario)
        return Solution(x, weights_for(scenario, x))
    if kind is BaselineKind.AS:
        return antenna_selection(scenario)
    if kind is BaselineKind.PSO:
        return pso_solve(scenario, scenario.swarm, rng)[0]
    return far_field_solve(scenario)
