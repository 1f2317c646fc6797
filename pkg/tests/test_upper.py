import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from asdn import (ChannelSpec, Constraint, DiscreteInput, HypothesisFailed, NoiseModel,
                  NotConvex, NotIncreasing, SigmaProfile, Status, maximize_covariance,
                  symkl_bound_at, upper_bound_closed_form)
from asdn.upper import symkl_factor

G = NoiseModel.standard_gaussian()


def spec(c0_sq=1.0, u=5.0, alpha=None):
    cons = (Constraint.mean(alpha),) if alpha is not None else ()
    return ChannelSpec(SigmaProfile.sqrt_affine(math.sqrt(c0_sq), 1.0), G, (0.0, u), cons)


@pytest.mark.parametrize("c0_sq,want", [(0.5, 7.9545454545), (1.0, 4.1666666667),
                                        (2.0, 2.2321428571), (5.0, 1.0), (10.0, 0.5416666667)])
def test_fig2_frozen(c0_sq, want):
    assert upper_bound_closed_form(spec(c0_sq, alpha=2.5)).value == pytest.approx(want, abs=1e-9)


def test_mean_branch_factor():
    rep = upper_bound_closed_form(spec(alpha=1.0))
    r = 1.0 / 5.0
    assert rep.params["branch"] == "mean"
    assert rep.value == pytest.approx(0.5 * (1 - r) * r * rep.params["F"], rel=1e-14)


def test_endpoint_input_attains_bound():
    # the half-half endpoint input maximizes both covariances at once
    rep = upper_bound_closed_form(spec())
    val = symkl_bound_at(spec(), DiscreteInput([0.0, 5.0], [0.5, 0.5]))
    assert val == pytest.approx(rep.value, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(pts=st.lists(st.floats(0.0, 5.0), min_size=2, max_size=6),
       w=st.lists(st.floats(0.01, 1.0), min_size=6, max_size=6))
def test_any_input_below_bound(pts, w):
    p = np.array(w[:len(pts)])
    inp = DiscreteInput(pts, p / p.sum())
    assert symkl_bound_at(spec(), inp) <= upper_bound_closed_form(spec()).value + 1e-9


@settings(max_examples=40, deadline=None)
@given(lo=st.floats(0.0, 2.0), width=st.floats(0.1, 3.0), k=st.floats(0.1, 2.0),
       frac=st.floats(0.0, 1.0), seed=st.integers(0, 2**16))
def test_two_point_beats_feasible_two_points(lo, width, k, frac, seed):
    hi = lo + width
    w, v = (lambda x: x), (lambda x: np.exp(k * x))
    alpha = lo + frac * width
    sol = maximize_covariance(w, v, lo, hi, alpha)
    assert sol.mean <= alpha + 1e-12
    rng = np.random.default_rng(seed)
    for _ in range(50):
        a, b = np.sort(rng.uniform(lo, hi, 2))
        assume(b > a)
        # p = Pr(X = a); the mean cap needs p >= (b - alpha) / (b - a)
        p_min = max(0.0, (b - alpha) / (b - a))
        if p_min > 1.0:
            continue
        p = rng.uniform(p_min, 1.0)
        cov = p * (1 - p) * (w(b) - w(a)) * (v(b) - v(a))
        assert cov <= sol.value + 1e-12


def test_maximize_covariance_checks_hypotheses():
    with pytest.raises(NotIncreasing):
        maximize_covariance(lambda x: -x, lambda x: x * x, 0.0, 1.0)
    with pytest.raises(NotConvex):
        maximize_covariance(lambda x: x, lambda x: np.sqrt(x), 0.0, 1.0)


def test_symkl_factor_zero_sigma():
    assert symkl_factor(lambda x: math.sqrt(x), 1.0) == math.inf


def test_decreasing_sigma_marks_report_invalid_or_raises():
    s = ChannelSpec(SigmaProfile.affine(2.0, -0.3), G, (0.0, 5.0))
    rep = upper_bound_closed_form(s)
    assert not rep.valid
    assert rep.hypothesis("sigma_increasing").status is Status.FAILED
    with pytest.raises(HypothesisFailed):
        upper_bound_closed_form(s, strict=True)
