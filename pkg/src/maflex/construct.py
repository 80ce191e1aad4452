"""Closed-form APV constructions for an unbounded movement region.

With MRT toward user 0, the correlation with user ``k`` is

    f_k(x) = sum_n exp(j 2pi/lambda (a_k x_n + b_k x_n^2))

so nulls (or full gains) follow from placing the per-antenna phases on
chosen residues. Constructions ignore ``d_max`` unless ``strict=True``;
they always honour ``d_min``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import (
    DegenerateDirection,
    Infeasible,
    InfeasibleFactorization,
    InfeasibleInput,
    IrrationalInput,
    NegativeCurvature,
)

logger = logging.getLogger(__name__)

# |b| below this (times 1/lambda) switches to the far-field linear solution.
LINEAR_B_THRESHOLD = 1e-9
# |a| below this counts as an identical angle.
ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class PhaseCoeffs:
    """Linear (``a``, dimensionless) and quadratic (``b``, 1/m) phase coefficients."""

    a: float
    b: float

    def scaled(self, wavelength):
        """Return ``(a/lambda, sqrt(b/lambda))``; the second needs ``b >= 0``."""
        if self.b < 0:
            raise NegativeCurvature(f"b={self.b:.6g} < 0 has no real square root")
        return self.a / wavelength, math.sqrt(self.b / wavelength)


@dataclass(frozen=True)
class RationalSpacing:
    numerators: tuple
    denominators: tuple
    scaled: tuple  # integer numerators over the common denominator
    c_max: int
    zeta: int
    d_star: float


def phase_coeffs(target0, target_k):
    a = math.cos(target0.angle) - math.cos(target_k.angle)
    b = -(
        math.sin(target0.angle) ** 2 / (2.0 * target0.distance)
        - math.sin(target_k.angle) ** 2 / (2.0 * target_k.distance)
    )
    return PhaseCoeffs(a, b)


def correlation(x, coeffs, wavelength):
    """``f_k(x)``: unnormalized correlation of user-0 and user-k steering vectors."""
    x = np.asarray(x, dtype=float)
    return np.sum(np.exp(2j * np.pi * (coeffs.a * x + coeffs.b * x**2) / wavelength), axis=-1)


def phase_cycles(x, coeffs, wavelength):
    x = np.asarray(x, dtype=float)
    return (coeffs.a * x + coeffs.b * x**2) / wavelength


def _quadratic_root(b, a, c, lo, hi):
    """Root of ``b x^2 + a x + c`` inside ``[lo, hi]`` (the function is monotone there)."""
    if b == 0.0:
        return -c / a
    disc = max(a * a - 4.0 * b * c, 0.0)
    sq = math.sqrt(disc)
    # Numerically stable pair of roots.
    qq = -0.5 * (a + math.copysign(sq, a)) if a != 0 else -0.5 * sq
    roots = []
    if qq != 0.0:
        roots.append(qq / b)
        roots.append(c / qq)
    else:
        roots.append(math.sqrt(max(-c / b, 0.0)))
        roots.append(-roots[0])
    mid = 0.5 * (lo + hi) if math.isfinite(hi) else lo
    span = (hi - lo) if math.isfinite(hi) else max(abs(lo), 1.0)
    inside = [r for r in roots if lo - 1e-9 * span <= r <= hi + 1e-9 * max(span, 1.0)]
    if not inside:
        return min(roots, key=lambda r: abs(r - mid))
    return min(inside)


def _first_residue_root(coeffs, wavelength, start, frac):
    """Smallest ``x >= start`` whose phase (in cycles) is congruent to ``frac`` mod 1."""
    a, b = coeffs.a, coeffs.b
    lam = wavelength
    if abs(b) < LINEAR_B_THRESHOLD / lam:
        b = 0.0
        if abs(a) < ANGLE_TOL:
            raise DegenerateDirection("a = b = 0: the user is indistinguishable from the target")

    def phi(x):
        return (a * x + b * x * x) / lam

    pieces = []
    if b != 0.0:
        vertex = -a / (2.0 * b)
        if vertex > start:
            pieces.append((start, vertex))
            pieces.append((vertex, math.inf))
        else:
            pieces.append((start, math.inf))
    else:
        pieces.append((start, math.inf))

    for lo, hi in pieces:
        p_lo = phi(lo)
        if math.isfinite(hi):
            p_hi = phi(hi)
        else:
            p_hi = math.inf if (b > 0 or (b == 0 and a > 0)) else -math.inf
        if p_hi >= p_lo:
            t = frac + math.ceil(p_lo - frac - 1e-12)
            if t > p_hi:
                continue
        else:
            t = frac + math.floor(p_lo - frac + 1e-12)
            if t < p_hi:
                continue
        if b == 0.0:
            x = lam * t / a
        else:
            x = _quadratic_root(b, a, -lam * t, lo, hi)
        return max(x, start) + 0.0
    raise DegenerateDirection("phase never reaches the requested residue")


def residue_apv(coeffs, residues, limits, start=0.0):
    """Increasing positions whose phases hit ``residues`` (cycles, mod 1) in order.

    Each antenna takes the smallest admissible coordinate at least ``d_min``
    past its predecessor, which fixes the integer offsets greedily.
    """
    x = []
    lo = start
    for frac in residues:
        xn = _first_residue_root(coeffs, limits.wavelength, lo, frac)
        x.append(xn)
        lo = xn + limits.d_min
    return np.array(x)


def _check_aperture(x, limits, strict, what):
    aperture = float(x[-1] - x[0])
    if aperture > limits.d_max:
        if strict:
            raise Infeasible(
                f"{what}: realized aperture {aperture:.6g} m exceeds d_max={limits.d_max:.6g} m"
            )
        logger.info("%s: aperture %.6g m exceeds d_max (unbounded region)", what, aperture)
    return x


def nulling_apv_single(coeffs, n_antennas, limits, strict=False):
    """Positions where MRT toward user 0 nulls one user.

    The phases ``2pi (a x_n + b x_n^2) / lambda`` land on ``2pi n / N`` so
    the ``N`` unit phasors cancel. Small ``|b|`` falls back to the linear
    far-field solution ``x_n = lambda (n/N + q_n) / a``.
    """
    if n_antennas < 2:
        raise InfeasibleInput("nulling needs at least two antennas")
    residues = [n / n_antennas for n in range(1, n_antennas + 1)]
    x = residue_apv(coeffs, residues, limits)
    return _check_aperture(x, limits, strict, "nulling_apv_single")


def full_gain_apv_single(coeffs, n_antennas, limits, strict=False):
    """Positions where MRT toward user 0 also gives gain ``N`` at one user.

    Every phase is a multiple of ``2pi``; the first antenna sits at 0.
    """
    x = residue_apv(coeffs, [0.0] * n_antennas, limits)
    return _check_aperture(x, limits, strict, "full_gain_apv_single")


def block_index(n1, n2, n_first):
    """One-based position of pair ``(n1, n2)`` in the product ordering."""
    return n1 + (n2 - 1) * n_first


def extend_apv(base, coeff_next, n_second, limits, strict=False, max_q=10_000):
    """Grow an APV that nulls some users into one that also nulls ``coeff_next``.

    Requires identical angles for all users (``a = 0``), so each null depends
    only on squared positions; the new coordinates are
    ``sqrt(x_{n1}^2 + (n2 - 1) d)`` with ``d = (1/N2 + q) lambda / |b|``.
    The smallest ``q >= 0`` that keeps the spacing is used.
    """
    base = np.sort(np.asarray(base, dtype=float))
    if n_second == 1:
        return base.copy()
    if n_second < 1:
        raise InfeasibleInput("n_second must be >= 1")
    if abs(coeff_next.a) > ANGLE_TOL:
        raise InfeasibleInput("extension needs every user at the target's angle (a = 0)")
    if coeff_next.b == 0.0:
        raise DegenerateDirection("b = 0: the next user cannot be nulled by extension")
    if np.any(base < 0):
        raise InfeasibleInput("extension needs non-negative base positions")
    lam = limits.wavelength
    sq = base**2
    best = None
    for q in range(max_q + 1):
        d = (1.0 / n_second + q) * lam / abs(coeff_next.b)
        x = np.sqrt(sq[None, :] + (np.arange(n_second)[:, None] * d)).ravel()
        gap = np.min(np.diff(np.sort(x)))
        if gap >= limits.d_min * (1 - 1e-12):
            best = x
            break
    if best is None:
        raise Infeasible(f"no q <= {max_q} keeps spacing >= d_min in the extension")
    x = np.sort(best)
    return _check_aperture(x, limits, strict, "extend_apv")


def prime_factors(n):
    out = []
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def factor_groups(n_antennas, n_users):
    """Ascending prime factors of ``N``, the tail merged so there are ``K`` groups."""
    g = prime_factors(n_antennas)
    if n_users > len(g):
        raise InfeasibleFactorization(
            f"N={n_antennas} has {len(g)} prime factors, cannot null K={n_users} users"
        )
    if n_users < len(g):
        g = g[: n_users - 1] + [math.prod(g[n_users - 1 :])]
    return g


def construct_optimal_apv(target0, users, n_antennas, limits, strict=False):
    """APV where MRT toward ``target0`` nulls every user (single-null placement plus product extensions).

    One user works at any angle; several users must share ``target0``'s angle.
    """
    K = len(users)
    if K == 0:
        return np.arange(n_antennas) * limits.d_min
    groups = factor_groups(n_antennas, K)
    coeffs = [phase_coeffs(target0, u) for u in users]
    if K > 1 and any(abs(c.a) > ANGLE_TOL for c in coeffs):
        raise InfeasibleInput("multi-user construction needs all users at the target's angle")
    x = nulling_apv_single(coeffs[0], groups[0], limits)
    for c, g in zip(coeffs[1:], groups[1:]):
        x = extend_apv(x, c, g, limits)
    return _check_aperture(x, limits, strict, "construct_optimal_apv")


def rationalize(value, max_denominator=50):
    """Best rational approximation ``p/q`` with ``q <= max_denominator``."""
    if max_denominator < 1:
        raise InfeasibleInput("max_denominator must be >= 1")
    f = Fraction(value).limit_denominator(max_denominator)
    return f.numerator, f.denominator


def grating_lobe_spacing(coeffs, limits, max_denominator=50, rtol=1e-9):
    """Uniform spacing giving MRT full gain at every user (grating lobes).

    Each scaled coefficient ``a/lambda`` and ``sqrt(b/lambda)`` must be a
    rational ``p/q`` (up to ``rtol``); the spacing makes every product with
    ``d`` an integer, then is multiplied by the smallest ``zeta`` reaching
    ``d_min``.
    """
    lam = limits.wavelength
    values = []
    for c in coeffs:
        values.extend(c.scaled(lam))
    nums, dens = [], []
    for v in values:
        p, q = rationalize(v, max_denominator)
        if abs(v - p / q) > rtol * max(1.0, abs(v)):
            raise IrrationalInput(f"{v!r} is not p/q with q <= {max_denominator}")
        nums.append(p)
        dens.append(q)
    common = math.prod(dens)
    scaled = [p * (common // q) for p, q in zip(nums, dens)]
    c_max = reduce(math.gcd, (abs(m) for m in scaled), 0)
    if c_max == 0:
        return RationalSpacing(tuple(nums), tuple(dens), tuple(scaled), 0, 1, limits.d_min)
    base = common / c_max
    zeta = max(1, math.ceil(limits.d_min / base - 1e-12))
    return RationalSpacing(tuple(nums), tuple(dens), tuple(scaled), c_max, zeta, zeta * base)


def uniform_apv(n_antennas, spacing):
    return np.arange(n_antennas) * spacing
