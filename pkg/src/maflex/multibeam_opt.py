"""Max-min multi-beam design by alternating optimization.

The weight step linearizes each user's gain around the current weights and
solves the resulting max-min problem over the unit ball exactly; the
position step reuses the grid search of :mod:`maflex.nulling_opt` with the
weights held fixed.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleInput, SolverFailure
from .geometry import steering_matrix
from .nulling_opt import GridSearchConfig, sequential_update, uniform_start

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScaConfig:
    tol_delta: float = 1e-6
    max_iters: int = 50
    inner_kkt_tol: float = 1e-8
    ao_tol: float = 1e-5
    ao_max_iters: int = 20

    def __post_init__(self):
        if self.tol_delta <= 0:
            raise InfeasibleInput("tol_delta must be positive")
        if self.max_iters < 1 or self.ao_max_iters < 1:
            raise InfeasibleInput("iteration limits must be >= 1")


class ScaResult(NamedTuple):
    weights: np.ndarray
    delta: float
    trace: list


class P3Result(NamedTuple):
    apv: np.ndarray
    weights: np.ndarray
    delta: float
    trace: list


def gains(A, w):
    """Per-user gains ``|w^H a_k|^2`` for a steering matrix ``A`` of shape ``(..., N, K)``."""
    return np.abs(np.einsum("...nk,n->...k", A, np.conj(w))) ** 2


def surrogate_gain(w, w_t, a):
    """Linear minorant of ``|w^H a|^2`` expanded at ``w_t``.

    Equal to ``2 Re{w_t^H a a^H w} - |w_t^H a|^2``; it touches the true gain
    at ``w = w_t`` and lies below it everywhere else.
    """
    c = np.vdot(w_t, a)  # w_t^H a
    return float(2.0 * np.real(c * np.vdot(a, w)) - np.abs(c) ** 2)


def surrogate_gain_at(w, w_t, x, target, wavelength, model="approx"):
    a = steering_matrix(x, [target], wavelength, model)[:, 0]
    return surrogate_gain(w, w_t, a)


def initial_weights(A):
    """Normalized sum of the users' steering vectors."""
    s = A.sum(axis=-1)
    norm = np.linalg.norm(s)
    if norm < 1e-12:
        s = A[:, 0]
        norm = np.linalg.norm(s)
    return s / norm


def _to_real(z):
    return np.concatenate([z.real, z.imag], axis=0)


def _from_real(r):
    n = r.shape[0] // 2
    return r[:n] + 1j * r[n:]


def _solve_active(V, g, S):
    """Candidate optimum with constraints ``S`` tight and the norm constraint active."""
    VS = V[:, S]
    G = VS.T @ VS
    gS = g[S]
    try:
        cho = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(cho)
    # a NaN pivot means the Gram matrix is singular (e.g. duplicated users)
    if not np.all(np.isfinite(d)) or np.min(d) < 1e-10 * np.sqrt(np.max(np.diag(G))):
        return None
    ones = np.ones(len(S))
    try:
        p = np.linalg.solve(G, gS)
        q = np.linalg.solve(G, ones)
    except np.linalg.LinAlgError:
        return None
    qa = ones @ q
    qb = 2.0 * (ones @ p)
    qc = gS @ p - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        return None
    delta = (-qb + np.sqrt(disc)) / (2.0 * qa)
    mu = p + delta * q
    return delta, mu, VS @ mu


def _kkt_residual(V, g, w, delta, lam):
    viol = np.maximum(delta - (V.T @ w - g), 0.0)
    comp = np.abs(lam * (V.T @ w - g - delta))
    return max(
        float(np.max(viol, initial=0.0)),
        float(max(np.linalg.norm(w) - 1.0, 0.0)),
        float(np.max(np.maximum(-lam, 0.0), initial=0.0)),
        float(np.max(comp, initial=0.0)),
    )


def _solve_cvx(V, g):
    import cvxpy as cp

    w = cp.Variable(V.shape[0])
    d = cp.Variable()
    cons = [V.T @ w - g >= d, cp.norm(w, 2) <= 1]
    prob = cp.Problem(cp.Maximize(d), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SolverFailure(f"max-min weight subproblem failed: {prob.status}")
    lam = np.asarray(cons[0].dual_value, dtype=float)
    return float(d.value), np.asarray(w.value, dtype=float), lam


def solve_linearized(A, w_t, kkt_tol=1e-8, hint=None):
    """Exact solution of one linearized max-min subproblem.

    Maximizes ``delta`` subject to every user's linearized gain being at least
    ``delta`` and ``||w|| <= 1``. The optimum has the norm constraint active
    and some subset of user constraints tight; subsets are tried (``hint``
    first, then by increasing size) until one satisfies the KKT conditions.

    Returns
    -------
    w : ndarray
    delta : float
    active : tuple of int
    """
    c = A.conj().T @ w_t  # a_k^H w_t, shape (K,)
    U = A * c[None, :]  # columns a_k (a_k^H w_t)
    V = _to_real(2.0 * U)
    g = np.abs(c) ** 2
    K = A.shape[1]
    scale = max(1.0, float(np.max(np.abs(V))))
    tol = kkt_tol * scale

    def attempts():
        if hint:
            yield tuple(hint)
        for size in range(1, min(K, V.shape[0]) + 1):
            yield from itertools.combinations(range(K), size)

    for S in attempts():
        S = list(S)
        sol = _solve_active(V, g, S)
        if sol is None:
            continue
        delta, mu, w = sol
        if np.min(mu) < -tol:
            continue
        lam = np.zeros(K)
        lam[S] = mu / mu.sum() if mu.sum() > 0 else mu
        if _kkt_residual(V, g, w, delta, lam) <= tol:
            return _from_real(w), float(delta), tuple(S)

    logger.debug("active-set search failed; falling back to conic solver")
    delta, w, lam = _solve_cvx(V, g)
    norm = np.linalg.norm(w)
    if norm > 1.0:
        w = w / norm
    delta = float(np.min(V.T @ w - g))
    lam = lam / lam.sum() if lam.sum() > 0 else lam
    res = _kkt_residual(V, g, w, delta, lam)
    if res > max(tol, 1e-6 * scale):
        raise SolverFailure(f"max-min weight subproblem KKT residual {res:.3g} above tolerance")
    return _from_real(w), delta, ()


def sca_weights(A, w_init, cfg=None):
    """Successive convex approximation of the max-min weight problem for a fixed APV.

    Returns a :class:`ScaResult` whose ``trace`` holds the subproblem optimum
    ``delta`` of every iteration (non-decreasing).
    """
    cfg = cfg or ScaConfig()
    w = np.asarray(w_init, dtype=complex)
    if np.linalg.norm(w) > 1.0 + 1e-12:
        raise InfeasibleInput("initial weights must have norm <= 1")
    hint = None
    trace = []
    delta = -np.inf
    for _ in range(cfg.max_iters):
        w_new, d_new, hint = solve_linearized(A, w, cfg.inner_kkt_tol, hint)
        trace.append(d_new)
        w = w_new
        if d_new - delta < cfg.tol_delta:
            delta = max(delta, d_new)
            break
        delta = d_new
    return ScaResult(w, float(delta), trace)


def _subsets(K, limit):
    return [list(S) for size in range(1, min(K, limit) + 1)
            for S in itertools.combinations(range(K), size)]


def _linearized_batch(A, w_t, kkt_tol):
    """Vectorized :func:`solve_linearized` over a leading batch axis.

    Every active set is tried for every instance at once; instances with no
    KKT-valid set fall back to the scalar solver.
    """
    B, N, K = A.shape
    c = np.einsum("bnk,bn->bk", A.conj(), w_t)
    U = 2.0 * A * c[:, None, :]
    V = np.concatenate([U.real, U.imag], axis=1)
    g = np.abs(c) ** 2
    scale = np.maximum(1.0, np.max(np.abs(V), axis=(1, 2)))
    tol = kkt_tol * scale
    w_out = np.zeros((B, 2 * N))
    d_out = np.full(B, np.nan)
    done = np.zeros(B, dtype=bool)
    for S in _subsets(K, 2 * N):
        if done.all():
            break
        VS = V[:, :, S]
        G = np.einsum("bns,bnt->bst", VS, VS)
        ev = np.linalg.eigvalsh(G)
        ok = (~done) & (ev[:, 0] > 1e-20 * ev[:, -1]) & (ev[:, -1] > 0)
        if not ok.any():
            continue
        Gi = G[ok]
        gS = g[ok][:, S]
        ones = np.ones_like(gS)
        p = np.linalg.solve(Gi, gS[..., None])[..., 0]
        q = np.linalg.solve(Gi, ones[..., None])[..., 0]
        qa = q.sum(axis=1)
        qb = 2.0 * p.sum(axis=1)
        qc = np.einsum("bs,bs->b", gS, p) - 1.0
        disc = qb * qb - 4.0 * qa * qc
        delta = (-qb + np.sqrt(np.maximum(disc, 0.0))) / (2.0 * qa)
        mu = p + delta[:, None] * q
        w = np.einsum("bns,bs->bn", VS[ok], mu)
        t = tol[ok]
        Vo, go = V[ok], g[ok]
        slack = np.einsum("bnk,bn->bk", Vo, w) - go
        lam = np.zeros((mu.shape[0], K))
        tot = mu.sum(axis=1, keepdims=True)
        lam[:, S] = np.where(tot > 0, mu / np.where(tot > 0, tot, 1.0), mu)
        res = np.maximum.reduce([
            np.max(np.maximum(delta[:, None] - slack, 0.0), axis=1),
            np.maximum(np.linalg.norm(w, axis=1) - 1.0, 0.0),
            np.max(np.maximum(-lam, 0.0), axis=1),
            np.max(np.abs(lam * (slack - delta[:, None])), axis=1),
        ])
        valid = (disc >= 0) & (np.min(mu, axis=1) >= -t) & (res <= t)
        idx = np.flatnonzero(ok)[valid]
        w_out[idx] = w[valid]
        d_out[idx] = delta[valid]
        done[idx] = True
    out = w_out[:, :N] + 1j * w_out[:, N:]
    for b in np.flatnonzero(~done):
        out[b], d_out[b], _ = solve_linearized(A[b], w_t[b], kkt_tol)
    return out, d_out


def sca_delta_batch(A, cfg=None):
    """Final SCA ``delta`` for a stack of steering matrices ``(B, N, K)``.

    Matches :func:`sca_weights` started from :func:`initial_weights`, one
    instance at a time, but runs all instances together.
    """
    cfg = cfg or ScaConfig()
    A = np.asarray(A, dtype=complex)
    s = A.sum(axis=-1)
    norm = np.linalg.norm(s, axis=-1)
    weak = norm < 1e-12
    s[weak] = A[weak, :, 0]
    w = s / np.linalg.norm(s, axis=-1, keepdims=True)
    B = A.shape[0]
    delta = np.full(B, -np.inf)
    active = np.ones(B, dtype=bool)
    for _ in range(cfg.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w_new, d_new = _linearized_batch(A[idx], w[idx], cfg.inner_kkt_tol)
        w[idx] = w_new
        stop = d_new - delta[idx] < cfg.tol_delta
        delta[idx] = np.where(stop, np.maximum(delta[idx], d_new), d_new)
        active[idx[stop]] = False
    return delta


def solve_beamforming_subproblem(x, targets, w_init, cfg=None, wavelength=0.06, model="approx"):
    A = steering_matrix(x, targets, wavelength, model)
    return sca_weights(A, w_init, cfg)


def min_gain(x, w, targets, wavelength, model="approx"):
    return float(np.min(gains(steering_matrix(x, targets, wavelength, model), w)))


def optimize_positions(x, w, targets, grid_pts, d_min, rounds, wavelength, model="approx"):
    """Position step: grid ascent on ``min_k |w^H a_k(x)|^2`` with ``w`` fixed."""

    def score(X):
        A = steering_matrix(X, targets, wavelength, model)
        return np.min(gains(A, w), axis=-1)

    return sequential_update(x, score, grid_pts, d_min, rounds)


def alternate(x0, targets, limits, grid_pts, grid_rounds, cfg, model="approx", w0=None):
    """Alternating optimization from a given start; returns ``P3Result``.

    Positions are returned sorted with the weights permuted to match.
    """
    lam = limits.wavelength
    x = np.array(x0, dtype=float)
    A = steering_matrix(x, targets, lam, model)
    w = initial_weights(A) if w0 is None else np.asarray(w0, dtype=complex)
    trace = []
    for it in range(cfg.ao_max_iters):
        A = steering_matrix(x, targets, lam, model)
        w = sca_weights(A, w, cfg).weights
        x, _, _ = optimize_positions(x, w, targets, grid_pts, limits.d_min, grid_rounds, lam, model)
        delta = min_gain(x, w, targets, lam, model)
        trace.append(delta)
        if it > 0 and delta - trace[-2] < cfg.ao_tol:
            break
    order = np.argsort(x)
    return P3Result(x[order], w[order], trace[-1], trace)


def solve_p3(scenario, grid=None, cfg=None, ao_max_iters=None):
    """Max-min multi-beam design over target0 and every listed user."""
    grid = grid or scenario.grid
    cfg = cfg or scenario.sca
    if ao_max_iters is not None:
        cfg = ScaConfig(cfg.tol_delta, cfg.max_iters, cfg.inner_kkt_tol, cfg.ao_tol, ao_max_iters)
    limits = scenario.limits
    N = scenario.n_antennas
    limits.check_capacity(N)
    targets = [scenario.target0, *scenario.users]
    pts = grid.resolve(limits, N)
    x0 = uniform_start(pts, N, limits.d_min)
    return alternate(x0, targets, limits, pts, grid.rounds, cfg, scenario.model)


__all__ = [
    "GridSearchConfig",
    "P3Result",
    "ScaConfig",
    "ScaResult",
    "alternate",
    "gains",
    "initial_weights",
    "min_gain",
    "optimize_positions",
    "sca_delta_batch",
    "sca_weights",
    "solve_beamforming_subproblem",
    "solve_linearized",
    "solve_p3",
    "surrogate_gain",
    "surrogate_gain_at",
]
