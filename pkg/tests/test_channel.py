import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asdn import (ChannelSpec, Constraint, DiscreteInput, DomainError, NoiseModel, SigmaProfile,
                  conditional_density, conditional_entropy, sample)
from asdn.quadrature import integrate

G = NoiseModel.standard_gaussian()


def test_conditional_density_integrates_to_one():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    for x in (0.0, 1.3, 5.0):
        s = float(spec.sigma(x))
        tot = integrate(lambda y: conditional_density(spec, x, y), x - 12 * s, x + 12 * s)
        assert tot == pytest.approx(1.0, abs=1e-9)


def test_conditional_entropy_discrete_matches_formula():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    inp = DiscreteInput([0.0, 3.0], [0.5, 0.5])
    want = 0.5 * math.log(2 * math.pi * math.e) + 0.5 * (0.0 + math.log(2.0))
    assert conditional_entropy(spec, inp) == pytest.approx(want, abs=1e-12)


def test_interior_zero_rejected_but_endpoint_zero_allowed():
    ChannelSpec(SigmaProfile.power_law(1.0), G, (0.0, 1.0))
    with pytest.raises(DomainError):
        ChannelSpec(SigmaProfile.fading_affine(0.0, 1.0, (-1.0, 1.0)), G, (-1.0, 1.0))


def test_support_must_fit_sigma_domain():
    with pytest.raises(DomainError):
        ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (-2.0, 1.0))


def test_noiseless_sampling():
    spec = ChannelSpec(SigmaProfile.constant(0.0), G, (-1.0, 1.0))
    assert sample(spec, 0.3, rng_seed=1) == 0.3
    with pytest.raises(DomainError):
        conditional_entropy(spec, DiscreteInput([0.0], [1.0]))


def test_sample_deterministic():
    spec = ChannelSpec(SigmaProfile.constant(1.0), G, (-1.0, 1.0))
    a = sample(spec, 0.2, rng_seed=7, size=5)
    b = sample(spec, 0.2, rng_seed=7, size=5)
    np.testing.assert_array_equal(a, b)


def test_constant_limit_at_infinity():
    assert SigmaProfile.constant(2.0).limit(math.inf) == 2.0


def test_tabulated_profile_is_monotone_interpolant():
    prof = SigmaProfile.tabulated([0.0, 1.0, 2.0, 4.0], [1.0, 1.5, 1.7, 3.0])
    xs = np.linspace(0.0, 4.0, 200)
    assert np.all(np.diff(prof(xs)) >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(c0=st.floats(0.1, 5.0), u=st.floats(0.5, 50.0), bound=st.floats(0.1, 10.0))
def test_json_round_trip(c0, u, bound):
    spec = ChannelSpec(SigmaProfile.sqrt_affine(c0, 1.0), G, (0.0, u), (Constraint.mean(bound),))
    back = ChannelSpec.from_json(spec.to_json())
    assert back.fingerprint() == spec.fingerprint()
    xs = np.linspace(0.0, u, 7)
    np.testing.assert_allclose(back.sigma(xs), spec.sigma(xs), rtol=1e-15)


def test_json_infinite_support_round_trip():
    spec = ChannelSpec(SigmaProfile.constant(1.0), G, (-math.inf, math.inf), (Constraint.power(4.0),))
    back = ChannelSpec.from_json(spec.to_json())
    assert back.support == (-math.inf, math.inf)
