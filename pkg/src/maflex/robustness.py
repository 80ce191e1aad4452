"""Worst-case impact of bounded antenna position errors.

A first-order expansion of each antenna's distance in its position error
turns the leakage toward nulled users into a convex quadratic in the error
vector (maximized over a box through a semidefinite relaxation), and turns
the multi-beam sum gain into an affine function with a closed-form minimum.

Leakage values here drop the ``1/N`` factor of the MRT beam gain; callers
comparing against beam gains divide by ``N``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleInput, NotFullGain, NotNulled, SolverFailure, TooLarge
from .geometry import beam_gain, is_feasible, path_difference, steering_vector

logger = logging.getLogger(__name__)

NULL_TOL = 1e-6
FULL_GAIN_TOL = 1e-4
VERTEX_LIMIT = 16  # exact vertex pass in worstcase_nulling
ORACLE_LIMIT = 20  # enumeration budget of vertex_oracle
SDP_GAP_TOL = 1e-7


@dataclass(frozen=True)
class SensitivityModel:
    """First-order position-error model around an APV with MRT toward user 0.

    Attributes
    ----------
    beta : ndarray, shape (K+1, N)
        d r_{k,n} / d x_n; row 0 is the target.
    phi0 : ndarray, shape (K, N)
        Nominal phase differences ``2pi/lambda (r_0 - r_k)``.
    s : ndarray, shape (K, N)
        ``exp(j phi0)``.
    c : ndarray, shape (K, N)
        Leakage coefficients ``2pi/lambda s (beta_0 - beta_k)``.
    eta : ndarray, shape (K, N)
        Gain sensitivities for the multi-beam case.
    D : ndarray, shape (N,)
        ``eta`` summed over users.
    """

    apv: np.ndarray
    wavelength: float
    beta: np.ndarray
    phi0: np.ndarray
    s: np.ndarray
    c: np.ndarray
    eta: np.ndarray
    D: np.ndarray

    @property
    def n_antennas(self):
        return self.apv.size

    @property
    def S0(self):
        """Nominal unnormalized array factors ``sum_n s_{k,n}``."""
        return self.s.sum(axis=1)

    @property
    def Q(self):
        """Hermitian PSD matrix ``sum_k c_k c_k^H``."""
        return self.c.T @ self.c.conj()


def _distance(target, x):
    return target.distance + path_difference(target, x, "approx")


def build_sensitivity(apv, target0, users, wavelength):
    """Evaluate the first-order sensitivity model at ``apv``.

    ``eta`` is the derivative of the MRT gain at user ``k`` with respect to
    each position error, ``2/N Re{j k0 (beta_0 - beta_k) s conj(S0)}``, which
    reduces to a function of ``phi0`` alone once the nominal array factor is
    real and equal to ``N``.
    """
    x = np.asarray(apv, dtype=float)
    N = x.size
    targets = [target0, *users]
    cos = np.array([np.cos(t.angle) for t in targets])[:, None]
    sin2 = np.array([np.sin(t.angle) ** 2 for t in targets])[:, None]
    R = np.array([t.distance for t in targets])[:, None]
    beta = -cos + x[None, :] * sin2 / R
    k0 = 2.0 * np.pi / wavelength
    r0 = _distance(target0, x)
    if users:
        rk = np.stack([_distance(u, x) for u in users])
    else:
        rk = np.zeros((0, N))
    phi0 = k0 * (r0[None, :] - rk)
    s = np.exp(1j * phi0)
    dbeta = beta[0][None, :] - beta[1:]
    c = k0 * s * dbeta
    S0 = s.sum(axis=1, keepdims=True)
    eta = (2.0 / N) * np.real(1j * k0 * dbeta * s * np.conj(S0))
    return SensitivityModel(x, wavelength, beta, phi0, s, c, eta, eta.sum(axis=0))


def check_nulled(model, tol=NULL_TOL):
    bad = np.abs(model.S0) > tol
    if np.any(bad):
        k = int(np.argmax(np.abs(model.S0)))
        raise NotNulled(
            f"user {k + 1} is not nulled: |S0| = {abs(model.S0[k]):.3g} exceeds {tol:g}"
        )


def check_full_gain(model, tol=FULL_GAIN_TOL):
    N = model.n_antennas
    g = np.abs(model.S0) ** 2 / N
    if np.any(g < N - tol):
        k = int(np.argmin(g))
        raise NotFullGain(f"user {k + 1} has MRT gain {g[k]:.6f} < N - {tol:g}")


def nulling_leakage_gain(model, delta_d, check=True):
    """First-order leakage ``sum_k |sum_n c_{k,n} dd_n|^2`` (``1/N`` omitted)."""
    if check:
        check_nulled(model)
    dd = np.asarray(delta_d, dtype=float)
    return float(np.sum(np.abs(model.c @ dd) ** 2))


def _leakage_quadratic(Qr, D):
    """``d^T Qr d`` for every row of ``D``."""
    return np.einsum("bi,ij,bj->b", D, Qr, D)


def vertex_oracle(model, epsilon, max_n=ORACLE_LIMIT):
    """Exact maximizer of the first-order leakage over the box ``|dd| <= eps``.

    A convex quadratic attains its maximum over a box at a vertex; the
    first sign is fixed since ``dd`` and ``-dd`` score the same.
    """
    N = model.n_antennas
    if N > max_n:
        raise TooLarge(f"vertex enumeration limited to N <= {max_n}, got N={N}")
    Qr = np.real(model.Q)
    if N == 1:
        return np.array([epsilon]), float(Qr[0, 0] * epsilon**2)
    best_val, best_sign = -np.inf, None
    rest = N - 1
    chunk = 1 << min(rest, 14)
    bits = np.arange(rest)
    for start in range(0, 1 << rest, chunk):
        idx = np.arange(start, min(start + chunk, 1 << rest))
        signs = 1.0 - 2.0 * ((idx[:, None] >> bits[None, :]) & 1)
        signs = np.concatenate([np.ones((idx.size, 1)), signs], axis=1)
        vals = _leakage_quadratic(Qr, signs)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_sign = vals[i], signs[i]
    return epsilon * best_sign, float(best_val * epsilon**2)


class SdrSolution(NamedTuple):
    X: np.ndarray  # optimal relaxed matrix for the unit box
    primal: float
    upper_bound: float  # certified via a repaired dual point


def solve_box_sdr(Qr):
    """Maximize ``Tr(Qr X)`` over ``X >= 0`` with ``diag(X) <= 1``.

    The returned upper bound comes from the solver's dual multipliers,
    shifted until ``Diag(y) - Qr`` is PSD, so it is valid regardless of
    solver accuracy.
    """
    import cvxpy as cp

    N = Qr.shape[0]
    scale = float(np.max(np.abs(Qr)))
    if scale == 0.0:
        return SdrSolution(np.zeros((N, N)), 0.0, 0.0)
    C = Qr / scale
    X = cp.Variable((N, N), PSD=True)
    cons = [cp.diag(X) <= 1]
    prob = cp.Problem(cp.Maximize(cp.trace(C @ X)), cons)
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"SDP solve failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SolverFailure(f"SDP solve ended with status {prob.status}")
    Xv = 0.5 * (X.value + X.value.T)
    w, V = np.linalg.eigh(Xv)
    Xv = (V * np.clip(w, 0.0, None)) @ V.T
    d = np.sqrt(np.clip(np.diag(Xv), 1e-300, None))
    Xv = Xv / np.maximum(d[:, None] * d[None, :], 1.0)  # keep diag <= 1
    primal = float(np.sum(C * Xv))
    y = np.clip(np.asarray(cons[0].dual_value, dtype=float), 0.0, None)
    shift = -np.linalg.eigvalsh(np.diag(y) - C)[0]
    y = y + max(shift, 0.0)
    upper = float(np.sum(y))
    if upper - primal > SDP_GAP_TOL * max(1.0, abs(upper)):
        raise SolverFailure(f"SDP duality gap {upper - primal:.3g} above {SDP_GAP_TOL:g}")
    return SdrSolution(Xv, primal * scale, upper * scale)


class WorstCaseNulling(NamedTuple):
    delta_d: np.ndarray
    leakage: float
    sdr_upper_bound: float
    randomized_leakage: float
    relaxed_rank: int


def worstcase_nulling(model, epsilon, randomization_draws=1000, rng=None,
                      vertex_refine=True, check=True):
    """Worst-case first-order leakage under ``|dd_n| <= epsilon``.

    Solves the semidefinite relaxation, recovers candidates by eigenvector
    extraction and Gaussian randomization (each snapped to a box vertex),
    and for ``N <= 16`` finishes with exact vertex enumeration.
    """
    if epsilon < 0:
        raise InfeasibleInput("epsilon must be non-negative")
    if check:
        check_nulled(model)
    N = model.n_antennas
    if epsilon == 0:
        return WorstCaseNulling(np.zeros(N), 0.0, 0.0, 0.0, 0)
    rng = rng if rng is not None else np.random.default_rng(0)
    Qr = np.real(model.Q)
    sdr = solve_box_sdr(Qr)
    eps2 = epsilon**2

    w, V = np.linalg.eigh(sdr.X)
    w = np.clip(w, 0.0, None)
    rank = int(np.sum(w > 1e-6 * max(w[-1], 1e-300)))
    cands = [np.sign(V[:, -1]) + (V[:, -1] == 0)]
    if randomization_draws > 0:
        Z = rng.standard_normal((randomization_draws, N))
        draws = (Z * np.sqrt(w)[None, :]) @ V.T
        cands.append(np.where(draws >= 0, 1.0, -1.0))
    signs = np.vstack(cands)
    vals = _leakage_quadratic(Qr, signs)
    i = int(np.argmax(vals))
    best, best_val = epsilon * signs[i], float(vals[i] * eps2)
    randomized = best_val
    if vertex_refine and N <= VERTEX_LIMIT:
        v_dd, v_val = vertex_oracle(model, epsilon)
        if v_val > best_val:
            best, best_val = v_dd, v_val
    leakage = nulling_leakage_gain(model, best, check=False)
    bound = max(sdr.upper_bound * eps2, leakage)
    if leakage > sdr.upper_bound * eps2 * (1 + 1e-9) + 1e-12:
        raise SolverFailure("vertex leakage exceeds the SDR upper bound")
    return WorstCaseNulling(best, leakage, bound, randomized, rank)


class WorstCaseMultibeam(NamedTuple):
    delta_d: np.ndarray
    approx_sum_gain: float
    per_user_gains: np.ndarray


def worstcase_multibeam(model, epsilon, check=True, zero_tol=1e-9):
    """Closed-form first-order worst case of the multi-beam sum gain.

    The sum gain is affine in the errors, so each antenna moves by
    ``-epsilon * sign(D_n)``. Entries of ``D`` below ``zero_tol`` times their
    natural scale are numerically zero; those antennas take ``-epsilon``.
    """
    if epsilon < 0:
        raise InfeasibleInput("epsilon must be non-negative")
    if check:
        check_full_gain(model)
    N = model.n_antennas
    K = model.eta.shape[0]
    D = model.D
    scale = 2.0 * np.pi / model.wavelength * max(K, 1) * max(
        float(np.max(np.abs(model.beta[0][None, :] - model.beta[1:]), initial=0.0)), 1.0
    )
    sign = np.sign(D)
    sign[np.abs(D) <= zero_tol * scale] = 1.0
    dd = -epsilon * sign
    per_user = N + model.eta @ dd
    total = K * N - epsilon * float(np.sum(np.abs(D)))
    return WorstCaseMultibeam(dd, total, per_user)


def perturbed_gain(apv, delta_d, w, target, wavelength, model="approx"):
    """Beam gain of weights ``w`` toward ``target`` with antennas at ``apv + delta_d``."""
    x = np.asarray(apv, dtype=float) + np.asarray(delta_d, dtype=float)
    return float(beam_gain(x, w, target, wavelength, model))


def mrt_perturbed_gain(apv, delta_d, target0, user, wavelength, model="approx"):
    """MRT gain at ``user`` with the beam refocused on ``target0`` after the errors.

    This is the exact (expansion-free) counterpart of the first-order model,
    in which the target phase is also taken at the perturbed positions.
    """
    x = np.asarray(apv, dtype=float) + np.asarray(delta_d, dtype=float)
    w = steering_vector(x, target0, wavelength, model) / np.sqrt(x.size)
    return perturbed_gain(apv, delta_d, w, user, wavelength, model)


def exact_sum_gain(apv, delta_d, target0, users, wavelength, model="approx"):
    return float(sum(mrt_perturbed_gain(apv, delta_d, target0, u, wavelength, model) for u in users))


def exact_worst_vertex(apv, epsilon, target0, users, wavelength, minimize=True, model="approx"):
    """Brute-force extreme of the exact MRT sum gain over all box vertices.

    Only a diagnostic for the first-order analyses; ``N`` must be small.
    """
    x = np.asarray(apv, dtype=float)
    N = x.size
    if N > ORACLE_LIMIT:
        raise TooLarge(f"vertex enumeration limited to N <= {ORACLE_LIMIT}")
    idx = np.arange(1 << N)
    signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(N)[None, :]) & 1)
    X = x[None, :] + epsilon * signs
    a0 = steering_vector(X, target0, wavelength, model)
    total = np.zeros(idx.size)
    for u in users:
        au = steering_vector(X, u, wavelength, model)
        total += np.abs(np.sum(np.conj(a0) * au, axis=1)) ** 2 / N
    i = int(np.argmin(total) if minimize else np.argmax(total))
    return epsilon * signs[i], float(total[i])


def find_mrt_null_apv(target0, users, n_antennas, limits, rng=None, restarts=200, tol=1e-10):
    """Numerically find an in-track APV where MRT toward ``target0`` nulls every user.

    Solves ``f_k(x) = 0`` by bounded least squares from random feasible
    starts; returns the first solution that keeps the spacing and track
    limits, or raises :class:`NotNulled`.
    """
    from scipy.optimize import least_squares

    from .construct import correlation, phase_coeffs

    rng = rng if rng is not None else np.random.default_rng(0)
    coeffs = [phase_coeffs(target0, u) for u in users]
    lam = limits.wavelength
    N = n_antennas
    limits.check_capacity(N)

    def residual(x):
        f = np.array([correlation(x, c, lam) for c in coeffs])
        return np.concatenate([f.real, f.imag])

    slack = limits.d_max - (N - 1) * limits.d_min
    for _ in range(restarts):
        gaps = rng.dirichlet(np.ones(N + 1)) * slack
        x0 = np.cumsum(gaps[:N]) + np.arange(N) * limits.d_min
        if not coeffs:
            return x0  # nothing to null
        sol = least_squares(residual, x0, bounds=(0.0, limits.d_max), xtol=1e-15,
                            ftol=1e-15, gtol=1e-15)
        x = np.sort(sol.x)
        if np.max(np.abs(residual(x))) > tol:
            continue
        if is_feasible(x, limits, atol=0.0):
            return x
    raise NotNulled(f"no nulling APV found in {restarts} restarts")
