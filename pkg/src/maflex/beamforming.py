"""MRT and zero-forcing beamformers for a given antenna position vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleInput, RankDeficient
from .geometry import steering_matrix, steering_vector

# Largest acceptable condition number of the nulled steering matrix.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class ZfResult:
    weights: np.ndarray
    residual: float  # I(x): target power lost to the null-space projection
    target_gain: float  # N - I(x)


def mrt_weights(x, target, wavelength, model="approx"):
    a = steering_vector(x, target, wavelength, model)
    return a / np.sqrt(a.shape[-1])


def _colinear_pair(A):
    K = A.shape[-1]
    gram = np.abs(A.conj().T @ A) / A.shape[0]
    np.fill_diagonal(gram, -np.inf)
    i, j = np.unravel_index(np.argmax(gram), (K, K))
    return (int(min(i, j)), int(max(i, j)))


def zf_weights(x, target0, nulled, wavelength, model="approx"):
    """Zero-forcing weights toward ``target0`` with nulls at every ``nulled`` user.

    The projected MRT vector is normalized to unit norm, so the target gain
    equals ``N - I(x)``.

    Raises
    ------
    InfeasibleInput
        If there are at least as many nulls as antennas.
    RankDeficient
        If the nulled steering vectors are numerically collinear.
    """
    x = np.asarray(x, dtype=float)
    N = x.shape[-1]
    a0 = steering_vector(x, target0, wavelength, model)
    if len(nulled) == 0:
        return ZfResult(a0 / np.sqrt(N), 0.0, float(N))
    if len(nulled) >= N:
        raise InfeasibleInput(f"need fewer nulls than antennas, got K={len(nulled)}, N={N}")

    A = steering_matrix(x, nulled, wavelength, model)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= s[0] / COND_LIMIT:
        pair = _colinear_pair(A)
        raise RankDeficient(
            f"nulled users {pair[0]} and {pair[1]} have collinear steering vectors "
            f"(condition number {s[0] / max(s[-1], 1e-300):.3g})",
            pair=pair,
        )
    Q, _ = np.linalg.qr(A)
    v = a0 - Q @ (Q.conj().T @ a0)
    target_gain = float(np.real(np.vdot(v, v)))
    residual = float(N - target_gain)
    # below this the projection is rounding noise and cannot be normalized
    if target_gain <= N / COND_LIMIT:
        raise RankDeficient("target steering vector lies in the span of the nulled users")
    return ZfResult(v / np.sqrt(target_gain), residual, target_gain)


def zf_target_gain_batch(X, target0, nulled, wavelength, model="approx"):
    """Post-ZF target gain ``N - I(x)`` for a stack of APVs ``X`` of shape ``(B, N)``.

    Rank-deficient candidates score ``-inf``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = X.shape[-1]
    if len(nulled) == 0:
        return np.full(X.shape[0], float(N))
    a0 = steering_vector(X, target0, wavelength, model)
    A = steering_matrix(X, nulled, wavelength, model)
    s = np.linalg.svd(A, compute_uv=False)
    ok = s[:, -1] > s[:, 0] / COND_LIMIT
    Q, _ = np.linalg.qr(A)
    proj = np.einsum("bnk,bn->bk", Q.conj(), a0)
    gain = N - np.sum(np.abs(proj) ** 2, axis=-1)
    return np.where(ok, gain, -np.inf)
