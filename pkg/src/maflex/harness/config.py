"""Scenario configuration and its YAML file format.

Example file::

    scenario: nulling          # or multibeam
    seed: 7
    model: approx              # approx | exact
    array:
      wavelength: 0.06
      n_antennas: 6
      d_min: lambda/2          # numbers or expressions in lambda, N, pi
      d_max: 9*lambda
    target0: [4.72, 1.01]      # [distance_m, angle_rad]
    users: [[6.32, 1.89], [5, 1.57], [5, 0.93]]
    grid: {samples: null, rounds: 10}
    sca: {tol_delta: 1.0e-6, max_iters: 50, ao_tol: 1.0e-5, ao_max_iters: 20}
    robustness: {epsilon: 0.009, draws: 1000}
    swarm: {particles: 50, iterations: 100}
    drops: {angles: [0, pi], distances: [3, 9.7], trials: 100, n_users: 3}

Every section is optional; missing keys take the defaults below.
"""

from __future__ import annotations

import ast
import dataclasses
import math
import operator
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..baselines import SwarmConfig
from ..errors import InfeasibleInput
from ..geometry import MODELS, ArrayLimits, PolarTarget
from ..multibeam_opt import ScaConfig
from ..nulling_opt import GridSearchConfig

WAVELENGTH = 0.06
N_ANTENNAS = 6
SCENARIOS = ("nulling", "multibeam")

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def eval_expr(text, names):
    """Evaluate arithmetic over numbers and ``names`` (no calls, no attributes).

    ``lambda`` is a Python keyword, so it is renamed before parsing.
    """
    if isinstance(text, (int, float)):
        return float(text)
    names = {("lambda_" if k == "lambda" else k): v for k, v in names.items()}
    src = re.sub(r"\blambda\b", "lambda_", str(text))

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return float(names[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise InfeasibleInput(f"unsupported expression {text!r}")

    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InfeasibleInput(f"cannot parse expression {text!r}") from exc
    return ev(tree)


@dataclass(frozen=True)
class DropDistribution:
    """Uniform random user placement for Monte Carlo runs.

    ``n_users`` counts the users besides ``target0``; ``None`` keeps the
    number in the scenario.
    """

    angles: tuple = (0.0, math.pi)
    distances: tuple = (3.0, 9.7)
    trials: int = 100
    n_users: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise InfeasibleInput("trials must be >= 1")
        lo, hi = self.angles
        if not (0.0 <= lo <= hi <= math.pi):
            raise InfeasibleInput("angle range must lie inside [0, pi]")
        lo, hi = self.distances
        if not (0.0 < lo <= hi):
            raise InfeasibleInput("distance range must be positive and ordered")

    def draw(self, rng, n_users):
        """``target0`` and ``n_users`` users, each uniform in angle and distance."""
        th = rng.uniform(self.angles[0], self.angles[1], size=n_users + 1)
        r = rng.uniform(self.distances[0], self.distances[1], size=n_users + 1)
        pts = [PolarTarget(float(a), float(b)) for a, b in zip(r, th)]
        return pts[0], tuple(pts[1:])


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario deterministically."""

    limits: ArrayLimits
    n_antennas: int = N_ANTENNAS
    target0: PolarTarget = PolarTarget(4.72, 1.01)
    users: tuple = ()
    scenario: str = "nulling"
    seed: int = 0
    model: str = "approx"
    grid: GridSearchConfig = field(default_factory=GridSearchConfig)
    sca: ScaConfig = field(default_factory=ScaConfig)
    epsilon: float = 0.009
    randomization_draws: int = 1000
    swarm: SwarmConfig = field(default_factory=SwarmConfig)

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if self.scenario not in SCENARIOS:
            raise InfeasibleInput(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.model not in MODELS:
            raise InfeasibleInput(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n_antennas < 1:
            raise InfeasibleInput("n_antennas must be >= 1")
        if self.epsilon < 0:
            raise InfeasibleInput("epsilon must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InfeasibleInput("seed must be a 64-bit unsigned integer")

    @property
    def wavelength(self):
        return self.limits.wavelength

    @classmethod
    def build(cls, wavelength=WAVELENGTH, n_antennas=N_ANTENNAS, d_min=None, d_max=None, **kw):
        """Defaults: ``d_min = lambda/2`` and ``d_max = 9 lambda``."""
        d_min = wavelength / 2.0 if d_min is None else d_min
        d_max = 9.0 * wavelength if d_max is None else d_max
        return cls(limits=ArrayLimits(d_max, d_min, wavelength), n_antennas=n_antennas, **kw)

    def with_users(self, target0, users):
        return dataclasses.replace(self, target0=target0, users=tuple(users))


def _target(v):
    if isinstance(v, dict):
        return PolarTarget(float(v["distance"]), float(v["angle"]))
    r, th = v
    return PolarTarget(float(r), float(th))


def _section(cls, raw):
    raw = dict(raw or {})
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(raw) - known
    if extra:
        raise InfeasibleInput(f"unknown {cls.__name__} keys: {sorted(extra)}")
    return cls(**raw)


def config_from_dict(data):
    """Build ``(ScenarioConfig, DropDistribution)`` from a parsed mapping."""
    data = dict(data or {})
    allowed = {"scenario", "seed", "model", "array", "target0", "users", "grid", "sca",
               "robustness", "swarm", "drops"}
    extra = set(data) - allowed
    if extra:
        raise InfeasibleInput(f"unknown config keys: {sorted(extra)}")
    arr = dict(data.get("array") or {})
    lam = float(eval_expr(arr.get("wavelength", WAVELENGTH), {"pi": math.pi}))
    n = int(arr.get("n_antennas", N_ANTENNAS))
    names = {"lambda": lam, "N": n, "pi": math.pi}
    d_min = eval_expr(arr.get("d_min", "lambda/2"), names)
    d_max = eval_expr(arr.get("d_max", "9*lambda"), names)
    rob = dict(data.get("robustness") or {})
    names_r = {"lambda": lam, "pi": math.pi}
    kw = dict(
        scenario=data.get("scenario", "nulling"),
        seed=int(data.get("seed", 0)),
        model=data.get("model", "approx"),
        users=tuple(_target(u) for u in data.get("users") or ()),
        grid=_section(GridSearchConfig, data.get("grid")),
        sca=_section(ScaConfig, data.get("sca")),
        swarm=_section(SwarmConfig, data.get("swarm")),
        epsilon=eval_expr(rob.get("epsilon", 0.009), names_r),
        randomization_draws=int(rob.get("draws", 1000)),
    )
    if "target0" in data:
        kw["target0"] = _target(data["target0"])
    cfg = ScenarioConfig.build(lam, n, d_min, d_max, **kw)

    drops = dict(data.get("drops") or {})
    dist = DropDistribution(
        angles=tuple(eval_expr(v, {"pi": math.pi}) for v in drops.get("angles", (0, "pi"))),
        distances=tuple(float(v) for v in drops.get("distances", (3.0, 9.7))),
        trials=int(drops.get("trials", 100)),
        n_users=drops.get("n_users"),
    )
    return cfg, dist


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def config_to_dict(cfg, dist=None):
    """Inverse of :func:`config_from_dict` with every value spelled out numerically."""
    out = {
        "scenario": cfg.scenario,
        "seed": int(cfg.seed),
        "model": cfg.model,
        "array": {
            "wavelength": cfg.wavelength,
            "n_antennas": cfg.n_antennas,
            "d_min": cfg.limits.d_min,
            "d_max": cfg.limits.d_max,
        },
        "target0": [cfg.target0.distance, cfg.target0.angle],
        "users": [[u.distance, u.angle] for u in cfg.users],
        "grid": dataclasses.asdict(cfg.grid),
        "sca": dataclasses.asdict(cfg.sca),
        "robustness": {"epsilon": cfg.epsilon, "draws": cfg.randomization_draws},
        "swarm": dataclasses.asdict(cfg.swarm),
    }
    if dist is not None:
        out["drops"] = {
            "angles": list(dist.angles),
            "distances": list(dist.distances),
            "trials": dist.trials,
            "n_users": dist.n_users,
        }
    return out


def trial_rng(seed, *keys):
    """Counter-based generator for substream ``keys`` of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *keys])))
