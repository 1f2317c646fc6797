import math

import pytest
from hypothesis import given, settings, strategies as st

from asdn import MonotoneTransform, SigmaProfile, phi, psi


def test_phi_constant():
    assert phi(SigmaProfile.constant(2.0), 0.0, 3.0) == pytest.approx(1.5)


def test_phi_sqrt_affine_closed_form():
    # int_0^5 dx / sqrt(1 + x) = 2 (sqrt 6 - 1)
    assert phi(SigmaProfile.sqrt_affine(1.0, 1.0), 0.0, 5.0) == pytest.approx(
        2.0 * (math.sqrt(6.0) - 1.0), abs=1e-12)


def test_psi_adds_log_sigma():
    prof = SigmaProfile.sqrt_affine(1.0, 1.0)
    d = 0.7
    assert psi(prof, d, 0.0, 3.0) == pytest.approx(
        phi(prof, 0.0, 3.0) + d * math.log(2.0), abs=1e-12)


def test_phi_image_length_of_sigma_x_is_infinite():
    tr = MonotoneTransform.phi(SigmaProfile.power_law(1.0), (0.0, 1.0))
    assert tr.image_length() == math.inf


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.0, 20.0), c0=st.floats(0.2, 3.0))
def test_inverse_round_trip(x, c0):
    tr = MonotoneTransform.phi(SigmaProfile.sqrt_affine(c0, 1.0), (0.0, 20.0))
    assert tr.inverse(tr.forward(x)) == pytest.approx(x, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.0, 10.0), b=st.floats(0.0, 10.0), d=st.floats(0.01, 5.0))
def test_psi_is_increasing(a, b, d):
    tr = MonotoneTransform.psi(SigmaProfile.affine(1.0, 0.5), d, (0.0, 10.0))
    lo, hi = min(a, b), max(a, b)
    assert tr.forward(lo) <= tr.forward(hi) + 1e-12
