import math

import pytest
from hypothesis import given, settings, strategies as st

from asdn import (ChannelSpec, Constraint, NoiseModel, SigmaProfile, Status,
                  UnsupportedConstraintCombination, lower_bound_maj, lower_bound_maj_constrained,
                  lower_bound_psi, verify_majorization_condition)
from asdn.errors import NonMonotoneSigma
from asdn.lower import psi_bound_value

G = NoiseModel.standard_gaussian()
HZ = 0.5 * math.log(2 * math.pi * math.e)


def sqrt_spec(c0, A):
    return ChannelSpec(SigmaProfile.sqrt_affine(c0, 1.0), G, (0.0, A))


@settings(max_examples=25, deadline=None)
@given(c0=st.floats(0.3, 3.0), A=st.floats(0.5, 60.0))
def test_lower_maj_closed_form_sqrt_affine(c0, A):
    # int_0^A dx / sqrt(c0^2 + x) = 2 (sqrt(c0^2 + A) - c0)
    want = math.log(2.0 * (math.sqrt(c0 * c0 + A) - c0)) - HZ
    assert lower_bound_maj(sqrt_spec(c0, A), y_grid_size=64).value == pytest.approx(want, abs=1e-9)


def test_lower_maj_frozen_values():
    assert lower_bound_maj(sqrt_spec(1.0, 50.0)).value == pytest.approx(1.0892660, abs=1e-6)
    assert lower_bound_maj(sqrt_spec(1.0, 5.0)).hypothesis("majorization").status is Status.VERIFIED


def test_lower_psi_frozen_and_nonnegative_floor():
    rep = lower_bound_psi(sqrt_spec(1.0, 50.0))
    assert rep.value == pytest.approx(0.1976279, abs=1e-6)
    assert 1e-3 <= rep.params["delta"] <= 10.0
    # small A: the optimizer runs to the delta-range edge where the value is ~0
    assert abs(lower_bound_psi(sqrt_spec(1.0, 1.0)).value) < 1e-12


def test_lower_psi_optimum_beats_fixed_delta():
    spec = sqrt_spec(1.0, 50.0)
    best = lower_bound_psi(spec).value
    for d in (0.01, 0.3, 1.0, 3.0):
        assert psi_bound_value(spec, d)[0] <= best + 1e-9


def test_psi_needs_monotone_sigma():
    spec = ChannelSpec(SigmaProfile.fading_affine(1.0, 1.0, (-2.0, 2.0)), G, (-2.0, 2.0))
    with pytest.raises(NonMonotoneSigma):
        lower_bound_psi(spec)


def test_awgn_power_closed_form():
    spec = ChannelSpec(SigmaProfile.constant(2.0), G, (-math.inf, math.inf), (Constraint.power(100.0),))
    assert lower_bound_maj_constrained(spec).value == pytest.approx(0.5 * math.log(25.0), abs=1e-12)


def test_exponential_mean_closed_form():
    spec = ChannelSpec(SigmaProfile.constant(1.0), G, (0.0, math.inf), (Constraint.mean(3.0),))
    want = 0.5 * math.log(9.0 * math.e / (2.0 * math.pi))
    assert lower_bound_maj_constrained(spec).value == pytest.approx(want, abs=1e-12)


def test_unbounded_without_closed_form_is_unsupported():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, math.inf), (Constraint.mean(3.0),))
    with pytest.raises(UnsupportedConstraintCombination):
        lower_bound_maj_constrained(spec)


def test_bounded_constrained_falls_back_with_assumption():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0), (Constraint.mean(1.0),))
    rep = lower_bound_maj_constrained(spec)
    assert rep.value == pytest.approx(lower_bound_maj(spec).value)
    assert rep.hypothesis("constrained_max_entropy").status is Status.ASSUMED


def test_majorization_fails_for_decreasing_sigma():
    # sigma = 2 - 0.3 x shrinks the noise toward x = 5, piling output density above 1
    spec = ChannelSpec(SigmaProfile.affine(2.0, -0.3), G, (0.0, 5.0))
    res = verify_majorization_condition(spec, 256)
    assert res.status is Status.FAILED
    assert res.witness["value"] > 1.0
    assert lower_bound_maj(spec, 256).valid is False
