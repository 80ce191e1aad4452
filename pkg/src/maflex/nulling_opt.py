"""Grid-based sequential position search for the beam-nulling problem.

The movement region is sampled at ``M + 1`` points and antennas are updated
one at a time: each takes the grid point that maximizes the objective with
all other antennas held fixed, subject to the minimum spacing. The same loop
serves the multi-beam position subproblem with a different score function.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .beamforming import zf_target_gain_batch, zf_weights
from .errors import EmptyFeasibleSet, InfeasibleInput

logger = logging.getLogger(__name__)

# Grid points closer than this (in units of the pitch) to a spacing bound count as feasible.
_SLACK = 1e-9


@dataclass(frozen=True)
class GridSearchConfig:
    """Sampling and stopping parameters.

    ``samples=None`` picks a pitch of wavelength/100 over the track.
    """

    samples: int | None = None
    rounds: int = 10

    def __post_init__(self):
        if self.rounds < 1:
            raise InfeasibleInput("rounds must be >= 1")
        if self.samples is not None and self.samples < 1:
            raise InfeasibleInput("samples must be >= 1")

    def resolve(self, limits, n_antennas=None, enforce_density=True):
        """Return the grid coordinates ``i * d_max / M`` for ``i = 0..M``."""
        M = self.samples
        if M is None:
            M = max(1, int(round(limits.d_max / (limits.wavelength / 100.0))))
        if enforce_density and n_antennas is not None and M < 10 * n_antennas:
            raise InfeasibleInput(f"grid needs M >= 10*N samples, got M={M}, N={n_antennas}")
        return np.arange(M + 1) * (limits.d_max / M)


def feasible_sampling_set(grid, x, n, d_min):
    """Grid points at least ``d_min`` away from every antenna other than ``n``.

    ``x`` holds the current positions: already updated ones for indices below
    ``n`` and previous-round ones above it.
    """
    grid = np.asarray(grid, dtype=float)
    others = np.delete(np.asarray(x, dtype=float), n)
    if others.size == 0:
        return grid.copy()
    pitch = grid[1] - grid[0] if grid.size > 1 else 1.0
    gap = np.min(np.abs(grid[:, None] - others[None, :]), axis=1)
    cand = grid[gap >= d_min - _SLACK * pitch]
    if cand.size == 0:
        raise EmptyFeasibleSet(
            f"no grid point keeps antenna {n} at least {d_min:.6g} m from the others"
        )
    return cand


def uniform_start(grid, n_antennas, d_min):
    """Evenly spread start over the track, snapped onto the grid."""
    M = grid.size - 1
    if n_antennas == 1:
        return grid[:1].copy()
    idx = np.round(np.arange(n_antennas) * M / (n_antennas - 1)).astype(int)
    x = grid[idx]
    pitch = grid[1] - grid[0]
    if np.min(np.diff(x)) < d_min - _SLACK * pitch:
        raise EmptyFeasibleSet("uniform start violates the minimum spacing on this grid")
    return x


def sequential_update(x0, score, grid, d_min, rounds):
    """Coordinate-wise grid ascent.

    Parameters
    ----------
    x0 : ndarray, shape (N,)
        Feasible starting positions. Order is kept during the search so that
        callers with per-antenna weights stay aligned.
    score : callable
        Maps a ``(B, N)`` stack of APVs to ``B`` objective values.
    grid : ndarray
        Sorted sampling points.
    d_min : float
    rounds : int

    Returns
    -------
    x : ndarray
        Final positions in antenna order (not sorted).
    trace : list of float
        Objective at the start and after every single-antenna update.
    rounds_used : int
    """
    x = np.array(x0, dtype=float)
    N = x.size
    trace = [float(score(x[None, :])[0])]
    rounds_used = 0
    for _ in range(rounds):
        rounds_used += 1
        moved = False
        for n in range(N):
            cand = feasible_sampling_set(grid, x, n, d_min)
            cand = np.union1d(cand, [x[n]])
            X = np.repeat(x[None, :], cand.size, axis=0)
            X[:, n] = cand
            vals = score(X)
            cur = vals[np.searchsorted(cand, x[n])]
            best = int(np.argmax(vals))  # first maximum == smallest coordinate
            if vals[best] >= cur and cand[best] != x[n]:
                x[n] = cand[best]
                moved = True
            trace.append(float(max(vals[best], cur)))
        if not moved:
            break
    return x, trace, rounds_used


def solve_p2(scenario, grid=None):
    """Maximize the post-ZF target gain over grid positions.

    Returns
    -------
    apv : ndarray
        Sorted positions.
    zf : ZfResult
    trace : list of float
        Target gain ``N - I(x)`` after each antenna update.
    """
    grid = grid or scenario.grid
    limits = scenario.limits
    N = scenario.n_antennas
    K = len(scenario.users)
    if K >= N:
        raise InfeasibleInput(f"need K < N, got K={K}, N={N}")
    limits.check_capacity(N)
    pts = grid.resolve(limits, N)
    x0 = uniform_start(pts, N, limits.d_min)

    def score(X):
        return zf_target_gain_batch(
            X, scenario.target0, scenario.users, limits.wavelength, scenario.model
        )

    x, trace, used = sequential_update(x0, score, pts, limits.d_min, grid.rounds)
    x = np.sort(x)
    logger.debug("solve_p2 finished after %d rounds, gain %.6f", used, trace[-1])
    zf = zf_weights(x, scenario.target0, scenario.users, limits.wavelength, scenario.model)
    return x, zf, trace
