"""Near-field geometry, steering vectors and beam gain for a 1D movable array.

All functions broadcast over leading axes of the position argument, so a
stack of candidate APVs with shape ``(B, N)`` yields steering vectors with
shape ``(B, N)``. This is what lets the grid searches score every candidate
of one antenna update in a single call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, InfeasibleInput

MODELS = ("approx", "exact", "far")

# Relative slack allowed on the unit-norm constraint of beam weights.
NORM_TOL = 1e-12


@dataclass(frozen=True)
class PolarTarget:
    """User location in the array's polar frame.

    Parameters
    ----------
    distance : float
        Range from the array reference point, in meters.
    angle : float
        Angle of departure in radians, within ``[0, pi]``.
    """

    distance: float
    angle: float

    def __post_init__(self):
        if not np.isfinite(self.distance) or self.distance <= 0:
            raise InfeasibleInput(f"distance must be positive, got {self.distance}")
        if not (0.0 <= self.angle <= np.pi):
            raise InfeasibleInput(f"angle must lie in [0, pi], got {self.angle}")

    @classmethod
    def from_cartesian(cls, x, y):
        """Build a target from array-frame Cartesian coordinates (y >= 0)."""
        r = float(np.hypot(x, y))
        return cls(r, float(np.arctan2(y, x)))


@dataclass(frozen=True)
class ArrayLimits:
    """Track length, minimum spacing and carrier wavelength (meters)."""

    d_max: float
    d_min: float
    wavelength: float

    def __post_init__(self):
        if self.wavelength <= 0:
            raise InfeasibleInput("wavelength must be positive")
        if not (0 < self.d_min <= self.d_max):
            raise InfeasibleInput(
                f"need 0 < d_min <= d_max, got d_min={self.d_min}, d_max={self.d_max}"
            )

    def check_capacity(self, n_antennas):
        if (n_antennas - 1) * self.d_min > self.d_max * (1 + 1e-12):
            raise Infeasible(
                f"{n_antennas} antennas need {(n_antennas - 1) * self.d_min:.6g} m "
                f"of track but d_max={self.d_max:.6g} m"
            )


def as_apv(positions):
    """Return positions as a 1D float array, checking strict ordering."""
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InfeasibleInput("APV must be a non-empty 1D vector")
    if np.any(np.diff(x) <= 0):
        raise InfeasibleInput("APV positions must be strictly increasing")
    return x


def is_feasible(x, limits, *, check_bounds=True, atol=1e-12):
    """True when sorted positions respect the spacing (and track) limits."""
    xs = np.sort(np.asarray(x, dtype=float))
    if xs.size > 1 and np.min(np.diff(xs)) < limits.d_min - atol:
        return False
    if check_bounds and (xs[0] < -atol or xs[-1] > limits.d_max + atol):
        return False
    return True


def exact_distance(target, x):
    """Distance from the element at coordinate ``x`` to ``target``."""
    R, th = target.distance, target.angle
    x = np.asarray(x, dtype=float)
    return R * np.sqrt(1.0 + (x / R) ** 2 - 2.0 * x * np.cos(th) / R)


def approx_distance(target, x):
    """Second-order (Fresnel) approximation of :func:`exact_distance`."""
    R, th = target.distance, target.angle
    x = np.asarray(x, dtype=float)
    return R - x * np.cos(th) + x**2 * np.sin(th) ** 2 / (2.0 * R)


def path_difference(target, x, model="approx"):
    """``r(x) - R`` under the chosen distance model.

    ``"far"`` is the planar-wavefront phase used by the far-field baseline.
    """
    if model == "approx":
        R, th = target.distance, target.angle
        x = np.asarray(x, dtype=float)
        # Written without R so the subtraction does not lose digits.
        return -x * np.cos(th) + x**2 * np.sin(th) ** 2 / (2.0 * R)
    if model == "exact":
        return exact_distance(target, x) - target.distance
    if model == "far":
        return -np.asarray(x, dtype=float) * np.cos(target.angle)
    raise InfeasibleInput(f"unknown distance model {model!r}; expected one of {MODELS}")


def steering_vector(x, target, wavelength, model="approx"):
    """Unit-modulus steering vector ``exp(j 2pi/lambda (r_n - R))``."""
    phase = (2.0 * np.pi / wavelength) * path_difference(target, x, model)
    return np.exp(1j * phase)


def steering_matrix(x, targets, wavelength, model="approx"):
    """Stack steering vectors of several targets as columns, shape ``(..., N, K)``."""
    x = np.asarray(x, dtype=float)
    if len(targets) == 0:
        return np.zeros(x.shape + (0,), dtype=complex)
    return np.stack([steering_vector(x, t, wavelength, model) for t in targets], axis=-1)


def check_weights(w):
    w = np.asarray(w, dtype=complex)
    norm = np.linalg.norm(w)
    if norm > 1.0 + NORM_TOL:
        raise InfeasibleInput(f"beam weights must have norm <= 1, got {norm!r}")
    return w


def beam_gain(x, w, target, wavelength, model="approx"):
    """Beam gain ``|w^H a|^2`` toward ``target``.

    ``x`` may carry leading batch axes; ``w`` must then broadcast against it.
    """
    a = steering_vector(x, target, wavelength, model)
    return np.abs(np.sum(np.conj(w) * a, axis=-1)) ** 2


def to_polar_grid(xs, ys):
    """Convert Cartesian axis vectors into ``(R, theta)`` meshes (rows follow ``ys``)."""
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float))
    return np.hypot(X, Y), np.arctan2(Y, X)


def gain_map(x, w, distances, angles, wavelength, model="approx"):
    """Beam gain at every ``(R, theta)`` pair of two equally shaped arrays."""
    # The origin itself has no direction; a tiny range keeps the formula finite.
    R = np.maximum(np.asarray(distances, dtype=float), 1e-12)[..., None]
    th = np.asarray(angles, dtype=float)[..., None]
    x = np.asarray(x, dtype=float)
    if model == "approx":
        diff = -x * np.cos(th) + x**2 * np.sin(th) ** 2 / (2.0 * R)
    elif model == "exact":
        diff = np.sqrt(R**2 + x**2 - 2.0 * x * R * np.cos(th)) - R
    elif model == "far":
        diff = -x * np.cos(th)
    else:
        raise InfeasibleInput(f"unknown distance model {model!r}")
    a = np.exp(1j * (2.0 * np.pi / wavelength) * diff)
    return np.abs(a @ np.conj(np.asarray(w, dtype=complex))) ** 2
