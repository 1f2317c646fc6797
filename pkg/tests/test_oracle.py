import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from asdn import (ChannelSpec, Constraint, DiscreteInput, DiscretizedChannel, DomainError,
                  NoiseModel, SigmaProfile, UnboundedSupport, blahut_arimoto, discretize,
                  mc_mutual_information, mutual_information)
from asdn.oracle import OUTPUT_STABILITY_TOL, discretize_points, output_stability

G = NoiseModel.standard_gaussian()

matrices = arrays(np.float64, st.tuples(st.integers(2, 5), st.integers(2, 5)),
                  elements=st.floats(0.01, 1.0))


@settings(max_examples=40, deadline=None)
@given(W=matrices, seed=st.integers(0, 1000))
def test_capacity_properties(W, seed):
    ch = DiscretizedChannel.from_matrix(W)
    est = blahut_arimoto(ch, tol=1e-9)
    n, m = W.shape
    assert -1e-12 <= est.value <= math.log(min(n, m)) + 1e-12
    assert est.gap <= 1e-9
    p = np.random.default_rng(seed).dirichlet(np.ones(n))
    assert mutual_information(ch, p) <= est.value + 1e-9
    assert mutual_information(ch, est.pmf) == pytest.approx(est.value, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(W=matrices)
def test_permuting_outputs_preserves_capacity(W):
    a = blahut_arimoto(DiscretizedChannel.from_matrix(W), tol=1e-10).value
    b = blahut_arimoto(DiscretizedChannel.from_matrix(W[:, ::-1]), tol=1e-10).value
    assert a == pytest.approx(b, abs=1e-8)


def test_identity_and_useless_channels():
    assert blahut_arimoto(DiscretizedChannel.from_matrix(np.eye(7))).value == pytest.approx(
        math.log(7), abs=1e-14)
    assert blahut_arimoto(DiscretizedChannel.from_matrix(np.ones((4, 3)))).value == pytest.approx(
        0.0, abs=1e-14)


@pytest.mark.parametrize("e", [0.01, 0.1, 0.3])
def test_bsc(e):
    W = np.array([[1 - e, e], [e, 1 - e]])
    want = math.log(2) + e * math.log(e) + (1 - e) * math.log(1 - e)
    assert blahut_arimoto(DiscretizedChannel.from_matrix(W)).value == pytest.approx(want, abs=1e-12)


def test_mean_constraint_binds():
    # Z-channel-like 3-input channel where the free optimum has a large mean
    x = np.array([0.0, 1.0, 2.0])
    W = np.array([[0.9, 0.1, 0.0], [0.1, 0.8, 0.1], [0.0, 0.1, 0.9]])
    ch = DiscretizedChannel(x, np.arange(3.0), W, {})
    free = blahut_arimoto(ch)
    capped = blahut_arimoto(ch, {"mean": 0.6})
    assert capped.mean <= 0.6 + 1e-4
    assert capped.value < free.value
    assert capped.multiplier > 0


def test_slack_constraint_matches_free():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0), (Constraint.mean(4.9),))
    ch = discretize(spec, 32, 256)
    assert blahut_arimoto(ch).value == pytest.approx(blahut_arimoto(ch, {}).value, abs=1e-7)


def test_discretize_rows_are_distributions():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    ch = discretize(spec, 16, 128)
    np.testing.assert_allclose(ch.W.sum(axis=1), 1.0, atol=1e-12)
    assert ch.n == 16 and ch.m == 128


def test_discretize_needs_bounded_support():
    spec = ChannelSpec(SigmaProfile.constant(1.0), G, (-math.inf, math.inf))
    with pytest.raises(UnboundedSupport):
        discretize(spec, 16, 64)


def test_grid_refinement_is_stable():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    a = blahut_arimoto(discretize(spec, 64, 512)).value
    b = blahut_arimoto(discretize(spec, 128, 1024)).value
    assert abs(a - b) < 5e-3


def test_mc_matches_discretized_mi():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    inp = DiscreteInput([0.0, 2.0, 5.0], [0.4, 0.2, 0.4])
    ch = discretize_points(spec, inp.points, 4096)
    exact = mutual_information(ch, inp.probs)
    est, se = mc_mutual_information(spec, inp, 40_000, seed=3)
    assert abs(est - exact) < max(4 * se, 5e-3)


def test_mc_reproducible():
    spec = ChannelSpec(SigmaProfile.constant(1.0), G, (-2.0, 2.0))
    inp = DiscreteInput([-2.0, 2.0], [0.5, 0.5])
    assert mc_mutual_information(spec, inp, 2000, seed=5) == mc_mutual_information(spec, inp, 2000, seed=5)


def test_channel_validation():
    with pytest.raises(DomainError):
        DiscretizedChannel.from_matrix(np.array([[-1.0, 2.0]]))


def test_output_law_stable_across_restarts():
    spec = ChannelSpec(SigmaProfile.sqrt_affine(1.0, 1.0), G, (0.0, 5.0))
    l1, runs = output_stability(discretize(spec, 32, 256), restarts=3, seed=1)
    assert l1 <= OUTPUT_STABILITY_TOL
    assert max(r.value for r in runs) - min(r.value for r in runs) < 1e-7
