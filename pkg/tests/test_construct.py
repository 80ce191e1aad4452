import math

import numpy as np
import pytest

from maflex.construct import (
    PhaseCoeffs,
    block_index,
    construct_optimal_apv,
    correlation,
    extend_apv,
    factor_groups,
    full_gain_apv_single,
    grating_lobe_spacing,
    nulling_apv_single,
    phase_coeffs,
    phase_cycles,
    rationalize,
    uniform_apv,
)
from maflex.errors import (
    DegenerateDirection,
    Infeasible,
    InfeasibleFactorization,
    InfeasibleInput,
    IrrationalInput,
    NegativeCurvature,
)
from maflex.geometry import ArrayLimits, PolarTarget
from oracles import greedy_linear

LAM = 0.06
LIM = ArrayLimits(9 * LAM, LAM / 2, LAM)
T0 = PolarTarget(4.72, 1.01)


def test_phase_coeffs_identical_users():
    c = phase_coeffs(T0, T0)
    assert c.a == 0.0 and c.b == 0.0


def test_phase_coeffs_broadside_example():
    c = phase_coeffs(PolarTarget(5.0, math.pi / 2), PolarTarget(10.0, math.pi / 2))
    assert c.a == pytest.approx(0.0, abs=1e-15)
    assert c.b == pytest.approx(-0.05, abs=1e-15)


def test_phase_coeffs_endfire_target():
    u = PolarTarget(3.0, 1.2)
    c = phase_coeffs(PolarTarget(5.0, 0.0), u)
    assert c.a == pytest.approx(1 - math.cos(1.2))
    assert c.b == pytest.approx(math.sin(1.2) ** 2 / 6.0)


def test_two_antenna_phases_differ_by_half_cycle():
    c = phase_coeffs(T0, PolarTarget(6.32, 1.89))
    x = nulling_apv_single(c, 2, LIM)
    d = np.diff(phase_cycles(x, c, LAM))[0]
    assert (d - 0.5) % 1.0 == pytest.approx(0.0, abs=1e-9) or (d - 0.5) % 1.0 == pytest.approx(1.0)


def test_single_user_null_reference_geometry():
    c = phase_coeffs(T0, PolarTarget(6.32, 1.89))
    x = nulling_apv_single(c, 4, LIM)
    assert abs(correlation(x, c, LAM)) <= 1e-8 * 4
    assert np.all(np.diff(x) >= LIM.d_min - 1e-12) and x[0] >= 0


@pytest.mark.parametrize("a", [0.37, -0.81, 1.6])
def test_far_field_fallback_positions(a):
    c = PhaseCoeffs(a, 1e-13)
    x = nulling_apv_single(c, 6, LIM)
    np.testing.assert_allclose(x, greedy_linear(a, 6, LIM.d_min, LAM), atol=1e-9)
    assert abs(correlation(x, PhaseCoeffs(a, 0.0), LAM)) <= 1e-8 * 6


def test_degenerate_direction():
    with pytest.raises(DegenerateDirection):
        nulling_apv_single(PhaseCoeffs(0.0, 0.0), 4, LIM)


def test_strict_mode_enforces_track():
    c = phase_coeffs(T0, PolarTarget(5.0, 1.02))
    with pytest.raises(Infeasible):
        nulling_apv_single(c, 6, LIM, strict=True)


def test_full_gain_single():
    t0, u = PolarTarget(8.94, 2.03), PolarTarget(7.61, 1.16)
    c = phase_coeffs(t0, u)
    x = full_gain_apv_single(c, 6, LIM)
    assert abs(correlation(x, c, LAM)) ** 2 / 6 == pytest.approx(6.0, abs=1e-8)


def test_extend_identity_for_one_block():
    base = np.array([0.0, 0.1])
    np.testing.assert_array_equal(extend_apv(base, PhaseCoeffs(0.0, 0.02), 1, LIM), base)


def test_extend_two_by_two():
    t0 = PolarTarget(4.0, 1.2)
    u1, u2 = PolarTarget(6.0, 1.2), PolarTarget(9.0, 1.2)
    c1, c2 = phase_coeffs(t0, u1), phase_coeffs(t0, u2)
    base = nulling_apv_single(c1, 2, LIM)
    x = extend_apv(base, c2, 2, LIM)
    assert x.size == 4
    for c in (c1, c2):
        assert abs(correlation(x, c, LAM)) <= 1e-8 * 4


def test_extend_needs_equal_angles():
    with pytest.raises(InfeasibleInput):
        extend_apv(np.array([0.0, 0.1]), PhaseCoeffs(0.1, 0.02), 2, LIM)


def test_block_index_bijection():
    idx = {block_index(n1, n2, 3) for n1 in range(1, 4) for n2 in range(1, 5)}
    assert idx == set(range(1, 13))


def test_factor_groups():
    assert factor_groups(8, 2) == [2, 4]
    assert factor_groups(12, 3) == [2, 2, 3]
    assert factor_groups(7, 1) == [7]
    with pytest.raises(InfeasibleFactorization):
        factor_groups(6, 3)


@pytest.mark.parametrize("n", [4, 8])
def test_construct_two_same_angle_users(n):
    t0 = PolarTarget(4.0, 1.2)
    users = [PolarTarget(6.0, 1.2), PolarTarget(9.0, 1.2)]
    x = construct_optimal_apv(t0, users, n, LIM)
    assert x.size == n
    assert np.min(np.diff(x)) >= LIM.d_min * (1 - 1e-12)
    for u in users:
        assert abs(correlation(x, phase_coeffs(t0, u), LAM)) <= 1e-8 * n


def test_construct_single_user_reduces():
    u = PolarTarget(6.32, 1.89)
    np.testing.assert_allclose(
        construct_optimal_apv(T0, [u], 5, LIM), nulling_apv_single(phase_coeffs(T0, u), 5, LIM)
    )


def test_construct_rejects_mixed_angles():
    with pytest.raises(InfeasibleInput):
        construct_optimal_apv(T0, [PolarTarget(6.0, 1.5), PolarTarget(7.0, 1.7)], 4, LIM)


def test_rationalize_examples():
    assert rationalize(0.5, 100) == (1, 2)
    assert rationalize(math.pi, 113) == (355, 113)
    assert rationalize(0.0, 7) == (0, 1)


def test_grating_no_users():
    s = grating_lobe_spacing([], LIM)
    assert s.d_star == LIM.d_min


def test_grating_lcm_example():
    c = PhaseCoeffs(2 * LAM / 3, LAM / 4)  # a/lambda = 2/3, sqrt(b/lambda) = 1/2
    s = grating_lobe_spacing([c], LIM)
    assert s.d_star == pytest.approx(6.0)
    assert s.zeta == 1
    for v in c.scaled(LAM):
        assert v * s.d_star == pytest.approx(round(v * s.d_star), abs=1e-9)
    x = uniform_apv(5, s.d_star)
    assert abs(correlation(x, c, LAM)) ** 2 / 5 == pytest.approx(5.0, abs=1e-6)


def test_grating_zeta_scales_up_to_d_min():
    lim = ArrayLimits(9.0, 1.0, LAM)
    c = PhaseCoeffs(2 * LAM, LAM * 4)  # 2 and 2: base spacing 1/2
    s = grating_lobe_spacing([c], lim)
    assert s.zeta == 2 and s.d_star == pytest.approx(1.0)


def test_grating_errors():
    with pytest.raises(NegativeCurvature):
        grating_lobe_spacing([PhaseCoeffs(0.1, -0.01)], LIM)
    with pytest.raises(IrrationalInput):
        grating_lobe_spacing([PhaseCoeffs(LAM * math.sqrt(2), 0.0)], LIM)
