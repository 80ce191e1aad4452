"""Randomized invariants shared by every module."""

from types import SimpleNamespace

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from maflex.baselines import repair
from maflex.beamforming import zf_weights
from maflex.errors import DegenerateDirection, RankDeficient
from maflex.geometry import ArrayLimits, PolarTarget, is_feasible, steering_vector, steering_matrix
from maflex.multibeam_opt import ScaConfig, initial_weights, sca_weights, solve_p3, surrogate_gain
from maflex.nulling_opt import GridSearchConfig, solve_p2

LAM = 0.06
LIM = ArrayLimits(9 * LAM, LAM / 2, LAM)

targets = st.builds(PolarTarget, st.floats(3.0, 9.7), st.floats(0.0, np.pi))
apvs = st.lists(st.floats(0.0, LIM.d_max), min_size=2, max_size=8).map(
    lambda v: repair(np.array(v), LIM)[0])
slow = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def well_posed(t0, users):
    # ZF is undefined for coincident directions
    pts = [t0, *users]
    return all(abs(a.angle - b.angle) > 1e-3 or abs(a.distance - b.distance) > 1e-3
               for i, a in enumerate(pts) for b in pts[i + 1:])


@given(apvs, targets)
def test_steering_norm(x, t):
    assert abs(np.vdot(steering_vector(x, t, LAM), steering_vector(x, t, LAM)).real - x.size) <= 1e-9


@given(apvs, targets, st.lists(targets, min_size=1, max_size=3))
def test_zf_nulls(x, t0, users):
    if len(users) >= x.size or not well_posed(t0, users):
        return
    try:
        zf = zf_weights(x, t0, users, LAM)
    except (RankDeficient, DegenerateDirection):
        return
    A = steering_matrix(x, users, LAM)
    assert np.all(np.abs(A.conj().T @ zf.weights) ** 2 <= 1e-10 * x.size)
    assert np.linalg.norm(zf.weights) <= 1 + 1e-9


@given(st.integers(0, 2**32 - 1))
def test_surrogate_minorant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    a = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    wt = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = abs(np.vdot(w, a)) ** 2
    assert surrogate_gain(w, wt, a) <= g + 1e-12 * max(1.0, g)
    assert abs(surrogate_gain(wt, wt, a) - abs(np.vdot(wt, a)) ** 2) <= 1e-12 * max(1.0, g)


@slow
@given(targets, st.lists(targets, min_size=1, max_size=3))
def test_grid_search_monotone_and_feasible(t0, users):
    if not well_posed(t0, users):
        return
    sc = SimpleNamespace(limits=LIM, n_antennas=6, target0=t0, users=users, model="approx",
                         grid=GridSearchConfig())
    try:
        x, _, trace = solve_p2(sc)
    except (RankDeficient, DegenerateDirection):
        return
    assert np.all(np.diff(trace) >= -1e-9)
    assert is_feasible(x, LIM)


@slow
@given(apvs, st.lists(targets, min_size=1, max_size=4))
def test_sca_monotone(x, ts):
    A = steering_matrix(x, ts, LAM)
    res = sca_weights(A, initial_weights(A))
    assert np.all(np.diff(res.trace) >= -1e-9)


@settings(max_examples=5, deadline=None)
@given(targets, st.lists(targets, min_size=1, max_size=2))
def test_alternating_monotone_and_feasible(t0, users):
    sc = SimpleNamespace(limits=LIM, n_antennas=6, target0=t0, users=users, model="approx",
                         grid=GridSearchConfig(), sca=ScaConfig())
    res = solve_p3(sc)
    assert np.all(np.diff(res.trace) >= -1e-9)
    assert is_feasible(res.apv, LIM)
