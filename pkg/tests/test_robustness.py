import numpy as np
import pytest

from maflex.construct import full_gain_apv_single, nulling_apv_single, phase_coeffs
from maflex.errors import InfeasibleInput, NotFullGain, NotNulled, TooLarge
from maflex.geometry import ArrayLimits, PolarTarget
from maflex.robustness import (
    build_sensitivity,
    exact_sum_gain,
    mrt_perturbed_gain,
    nulling_leakage_gain,
    perturbed_gain,
    vertex_oracle,
    worstcase_multibeam,
    worstcase_nulling,
)
from maflex.beamforming import mrt_weights
from oracles import brute_force_box_max

LAM = 0.06
LIM = ArrayLimits(9 * LAM, LAM / 2, LAM)
T0 = PolarTarget(5.0, 0.93)
U1 = PolarTarget(5.0, 2.21)
S2_T0, S2_U = PolarTarget(8.94, 2.03), PolarTarget(7.61, 1.16)


def null_model(n=6, t0=T0, u=U1):
    x = nulling_apv_single(phase_coeffs(t0, u), n, LIM)
    return build_sensitivity(x, t0, [u], LAM)


def full_model(lam=LAM):
    x = full_gain_apv_single(phase_coeffs(S2_T0, S2_U), 6, LIM)
    return build_sensitivity(x, S2_T0, [S2_U], lam)


def test_beta_broadside_and_far_limit():
    x = np.linspace(0, 0.5, 6)
    m = build_sensitivity(x, PolarTarget(4.0, np.pi / 2), [PolarTarget(7.0, np.pi / 2)], LAM)
    np.testing.assert_allclose(m.beta[0], x / 4.0, atol=1e-15)
    np.testing.assert_allclose(m.beta[1], x / 7.0, atol=1e-15)
    m = build_sensitivity(x, PolarTarget(1e9, 0.4), [PolarTarget(1e9, 2.0)], LAM)
    np.testing.assert_allclose(m.beta[0], -np.cos(0.4), atol=1e-9)
    np.testing.assert_allclose(m.beta[1], -np.cos(2.0), atol=1e-9)


def test_q_hermitian_psd_and_real_part(rng):
    x = np.sort(rng.uniform(0, 0.54, 6))
    m = build_sensitivity(x, T0, [U1, PolarTarget(6.08, 1.74)], LAM)
    Q = m.Q
    np.testing.assert_allclose(Q, Q.conj().T, atol=1e-9)
    assert np.min(np.linalg.eigvalsh(Q)) >= -1e-9 * np.max(np.abs(Q))
    for _ in range(20):
        d = rng.uniform(-1, 1, 6)
        q = d @ Q @ d
        assert abs(q.imag) <= 1e-9 * abs(q)
        assert q.real == pytest.approx(d @ Q.real @ d, rel=1e-12)
        assert q.real == pytest.approx(nulling_leakage_gain(m, d, check=False), rel=1e-12)


def test_leakage_basic_properties(rng):
    m = null_model()
    assert nulling_leakage_gain(m, np.zeros(6)) == 0.0
    d = rng.uniform(-1, 1, 6) * 0.01
    assert nulling_leakage_gain(m, d) == pytest.approx(nulling_leakage_gain(m, -d), rel=1e-14)
    assert nulling_leakage_gain(m, 3 * d) == pytest.approx(9 * nulling_leakage_gain(m, d), rel=1e-12)


def test_leakage_requires_nulls():
    m = build_sensitivity(np.linspace(0, 0.5, 6), T0, [U1], LAM)
    with pytest.raises(NotNulled):
        nulling_leakage_gain(m, np.zeros(6))


def test_vertex_oracle_against_enumeration_and_sampling(rng):
    m = null_model()
    eps = 0.1 * LAM
    dd, val = vertex_oracle(m, eps)
    ref, _ = brute_force_box_max(m.Q.real, eps)
    assert val == pytest.approx(ref, rel=1e-12)
    assert np.all(np.abs(np.abs(dd) - eps) < 1e-15)
    samples = rng.uniform(-eps, eps, (100, 6))
    assert val >= max(nulling_leakage_gain(m, s) for s in samples)
    assert vertex_oracle(m, 2 * eps)[1] == pytest.approx(4 * val, rel=1e-12)


def test_vertex_oracle_two_antennas():
    m = null_model(n=2)
    dd, val = vertex_oracle(m, 0.01)
    pats = [np.array(p) * 0.01 for p in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    assert val == pytest.approx(max(nulling_leakage_gain(m, p) for p in pats), rel=1e-14)


def test_vertex_oracle_budget():
    m = build_sensitivity(np.arange(21) * 0.04, T0, [], LAM)
    with pytest.raises(TooLarge):
        vertex_oracle(m, 0.01)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_worstcase_nulling_equals_vertex_optimum(n, rng):
    m = null_model(n=n)
    for ratio in (0.05, 0.2):
        eps = ratio * LAM
        wc = worstcase_nulling(m, eps, rng=rng)
        ref, _ = brute_force_box_max(m.Q.real, eps)
        assert wc.leakage == pytest.approx(ref, rel=1e-10)
        assert wc.sdr_upper_bound >= wc.leakage * (1 - 1e-9)
        assert wc.randomized_leakage <= wc.leakage * (1 + 1e-12)


def test_worstcase_nulling_zero_error():
    wc = worstcase_nulling(null_model(), 0.0)
    assert wc.leakage == 0.0
    assert wc.sdr_upper_bound == pytest.approx(0.0, abs=1e-12)


def test_worstcase_multibeam_closed_form():
    m = full_model()
    eps_grid = np.linspace(0, 0.3 * LAM, 10)
    vals = []
    for eps in eps_grid:
        wc = worstcase_multibeam(m, eps)
        assert wc.approx_sum_gain == pytest.approx(6 - eps * np.sum(np.abs(m.D)), abs=1e-12)
        assert np.all(np.abs(wc.delta_d) == eps)
        np.testing.assert_allclose(wc.per_user_gains, 6 + m.eta @ wc.delta_d, atol=1e-12)
        vals.append(wc.approx_sum_gain)
    assert worstcase_multibeam(m, 0.0).approx_sum_gain == 6.0
    second = np.diff(vals, 2)
    assert np.max(np.abs(second)) <= 1e-12


def test_multibeam_tie_rule():
    m = full_model()
    wc = worstcase_multibeam(m, 0.01)
    # every D_n is numerically zero at an exact full-gain layout; ties take -eps
    np.testing.assert_array_equal(wc.delta_d, -0.01 * np.ones(6))
    flipped = -wc.delta_d
    assert 6 + float(np.sum(m.eta @ flipped)) == pytest.approx(wc.approx_sum_gain, abs=1e-9)


def test_multibeam_requires_full_gain():
    m = build_sensitivity(np.linspace(0, 0.5, 6), S2_T0, [S2_U], LAM)
    with pytest.raises(NotFullGain):
        worstcase_multibeam(m, 0.01)
    with pytest.raises(InfeasibleInput):
        worstcase_multibeam(full_model(), -1.0)


def test_eta_is_first_order_gain_slope(rng):
    # finite differences of the exact MRT gain at a generic layout
    x = np.sort(rng.uniform(0, 0.54, 6))
    m = build_sensitivity(x, S2_T0, [S2_U], LAM)
    h = 1e-7
    for n in range(6):
        e = np.zeros(6)
        e[n] = h
        fd = (mrt_perturbed_gain(x, e, S2_T0, S2_U, LAM)
              - mrt_perturbed_gain(x, -e, S2_T0, S2_U, LAM)) / (2 * h)
        assert m.eta[0, n] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_perturbed_gain_zero_error():
    x = np.linspace(0, 0.5, 6)
    w = mrt_weights(x, T0, LAM)
    assert perturbed_gain(x, np.zeros(6), w, T0, LAM) == pytest.approx(6.0, abs=1e-12)


def test_remainder_is_second_order(rng):
    m = null_model()
    d = np.sign(rng.uniform(-1, 1, 6))
    ratios = []
    for eps in np.logspace(-6, -3, 7):
        approx = nulling_leakage_gain(m, eps * d) / 6
        exact = exact_sum_gain(m.apv, eps * d, T0, [U1], LAM)
        ratios.append(abs(exact - approx) / eps**2)
    # the leakage itself is O(eps^2); the remainder must vanish faster than that
    assert max(ratios) < 1e3
    assert ratios[0] < 1e-2 * (nulling_leakage_gain(m, d) / 6)


def test_frequency_scaling_at_full_gain():
    a, b = full_model(), full_model(LAM / 2)
    assert abs(np.sum(np.abs(b.D)) - 2 * np.sum(np.abs(a.D))) <= 1e-9
