"""Capacity lower bounds from the phi-transform (majorization) and psi-transform arguments."""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import quad_vec

from .channel import ChannelSpec, ConstraintKind, Monotonicity
from .errors import EmptyTail, NonMonotoneSigma, UnsupportedConstraintCombination
from .quadrature import (DEFAULT_CONFIG, Side, binary_entropy, integrate, maximize_scalar,
                         tail_prob, truncated_entropy)
from .report import BoundKind, BoundReport, HypothesisResult, Status
from .transforms import MonotoneTransform

log = logging.getLogger(__name__)

MAJORIZATION_SLACK = 1e-6
DELTA_RANGE = (1e-3, 10.0)


def _y_window(spec: ChannelSpec):
    lo, hi = spec.effective_support()
    a = lo if math.isfinite(lo) else (hi - 50.0 if math.isfinite(hi) else -50.0)
    b = hi if math.isfinite(hi) else (lo + 50.0 if math.isfinite(lo) else 50.0)
    probe = np.asarray(spec.sigma(np.linspace(a, b, 1025)[1:-1]))
    ends = [spec.sigma.limit(a), spec.sigma.limit(b)]
    smax = float(np.nanmax(np.concatenate([probe, ends])))
    smax = min(smax, 1e3) if math.isfinite(smax) else 1e3
    return a - 10.0 * smax, b + 10.0 * smax


def majorization_integrals(spec: ChannelSpec, ys, cfg=DEFAULT_CONFIG):
    """int_l^u f_Z((y - x)/sigma(x)) / sigma(x) dx for every y in ``ys``."""
    lo, hi = spec.effective_support()
    ys = np.asarray(ys, dtype=float)

    def integrand(x):
        s = spec.sigma(x)
        if not s > 0 or not math.isfinite(s):
            return np.zeros_like(ys)
        return np.asarray(spec.noise.pdf((ys - x) / s), dtype=float) / s

    with np.errstate(all="ignore"):
        val, err = quad_vec(integrand, lo, hi, epsabs=cfg.abs_tol, epsrel=1e-10,
                            norm="max", limit=20000)
    return val, err


def verify_majorization_condition(spec: ChannelSpec, y_grid_size: int = 512,
                                  cfg=DEFAULT_CONFIG) -> HypothesisResult:
    """Check int f_{Y|X}(y|x) dx <= 1 on a finite y-grid.

    ``Verified`` means grid-verified: no grid point exceeds 1 + 1e-6.
    """
    name = "majorization"
    try:
        a, b = _y_window(spec)
        ys = np.linspace(a, b, y_grid_size)
        vals, err = majorization_integrals(spec, ys, cfg)
    except Exception as exc:  # quadrature trouble downgrades to an assumption
        log.warning("majorization check failed numerically: %s", exc)
        return HypothesisResult(name, Status.ASSUMED, f"quadrature failed: {exc}")
    i = int(np.argmax(vals))
    witness = {"y": float(ys[i]), "value": float(vals[i]), "grid": [float(a), float(b), y_grid_size]}
    if vals[i] <= 1.0 + MAJORIZATION_SLACK:
        return HypothesisResult(name, Status.VERIFIED, "max over y-grid <= 1", witness)
    return HypothesisResult(name, Status.FAILED, "integral exceeds 1 at some y", witness)


def _uniform_image_expectation(tr: MonotoneTransform, h, dh, cfg=DEFAULT_CONFIG):
    """E[h(X)] when tr(X) is uniform on the (bounded) image of tr.

    Uses E h(X) = h(u) - int_l^u h'(x) F(x) dx with F(x) = (tr(x)-tr(l))/L.
    """
    lo, hi = tr.interval
    t_lo, t_hi = tr.image()
    length = t_hi - t_lo

    def g(x):
        return dh(x) * (tr.forward(x) - t_lo) / length

    return h(hi) - integrate(g, lo, hi, cfg)


def _constraint_feasibility(spec, tr, name):
    """Check the uniform-image maximizer against mean/power constraints."""
    out = []
    for c in spec.constraints:
        if c.kind is ConstraintKind.PEAK:
            continue
        if not math.isfinite(tr.image_length()):
            out.append(HypothesisResult(f"{name}_{c.kind.value}_feasible", Status.ASSUMED,
                                        "unbounded image; a feasible heavy-tailed maximizer is assumed"))
            continue
        if c.kind is ConstraintKind.MEAN:
            m = _uniform_image_expectation(tr, lambda x: x, lambda x: 1.0)
        else:
            m = _uniform_image_expectation(tr, lambda x: x * x, lambda x: 2.0 * x)
        ok = m <= c.bound + 1e-12
        out.append(HypothesisResult(
            f"{name}_{c.kind.value}_feasible", Status.VERIFIED if ok else Status.FAILED,
            f"maximizer moment {m:.6g} vs bound {c.bound:.6g}", {"moment": m, "bound": c.bound}))
    return out


def _noise_entropy_hypothesis(spec):
    hz = spec.noise.entropy()
    st = Status.VERIFIED if math.isfinite(hz) else Status.FAILED
    return hz, HypothesisResult("noise_entropy_finite", st, f"h(Z) = {hz:.9g}")


def lower_bound_maj(spec: ChannelSpec, y_grid_size: int = 512, cfg=DEFAULT_CONFIG) -> BoundReport:
    """log(int_l^u dx/sigma) - h(Z), the uniform-phi lower bound.

    Mean or power constraints are not optimized over; the report checks
    whether the uniform-phi maximizer happens to satisfy them.
    """
    lo, hi = spec.effective_support()
    tr = MonotoneTransform.phi(spec.sigma, (lo, hi), cfg=cfg)
    length = tr.image_length()
    hz, h_noise = _noise_entropy_hypothesis(spec)
    value = math.log(length) - hz if math.isfinite(length) else math.inf
    hyps = [verify_majorization_condition(spec, y_grid_size, cfg), h_noise]
    if math.isfinite(length):
        hyps.append(HypothesisResult("inv_sigma_integrable", Status.VERIFIED,
                                     f"int 1/sigma = {length:.12g}"))
    else:
        hyps.append(HypothesisResult("inv_sigma_integrable", Status.ASSUMED,
                                     "phi image has infinite length; capacity is infinite"))
    hyps += _constraint_feasibility(spec, tr, "maj_maximizer")
    return BoundReport(value, BoundKind.LOWER_MAJ,
                       {"phi_image_length": length, "h_noise": hz, "support": [lo, hi]},
                       hyps, spec.fingerprint())


def lower_bound_maj_constrained(spec: ChannelSpec, cfg=DEFAULT_CONFIG) -> BoundReport:
    """Closed-form max-entropy bounds for constant sigma under power or mean cost.

    * power P, support R:          0.5 log(P / sigma0^2)
    * mean a, support [0, inf):    0.5 log(a^2 e / (2 pi sigma0^2))

    Any other mean/power combination on a bounded support falls back to the
    support-only value with the maximizer-feasibility hypothesis Assumed.
    """
    costs = [c for c in spec.constraints if c.kind is not ConstraintKind.PEAK]
    if not costs:
        return lower_bound_maj(spec, cfg=cfg)
    if len(costs) > 1:
        raise UnsupportedConstraintCombination("at most one mean or power constraint is supported")
    c = costs[0]
    lo, hi = spec.support
    const = spec.sigma.family == "constant" and not spec.constraint("peak")
    hz, h_noise = _noise_entropy_hypothesis(spec)
    if const and spec.noise.is_gaussian:
        s0 = spec.sigma.params["c"]
        if c.kind is ConstraintKind.POWER and lo == -math.inf and hi == math.inf:
            value = 0.5 * math.log(c.bound / s0 ** 2)
            maj = verify_majorization_condition(spec, cfg=cfg)
            return BoundReport(value, BoundKind.LOWER_MAJ,
                               {"maximizer": "gaussian", "power": c.bound, "sigma0": s0},
                               [maj, h_noise], spec.fingerprint())
        if c.kind is ConstraintKind.MEAN and lo == 0.0 and hi == math.inf:
            value = 0.5 * math.log(c.bound ** 2 * math.e / (2.0 * math.pi * s0 ** 2))
            maj = verify_majorization_condition(spec, cfg=cfg)
            return BoundReport(value, BoundKind.LOWER_MAJ,
                               {"maximizer": "exponential", "mean": c.bound, "sigma0": s0},
                               [maj, h_noise], spec.fingerprint())
    if not spec.bounded and not spec.constraint("peak"):
        raise UnsupportedConstraintCombination(
            f"no closed form for a {c.kind.value} constraint with this sigma on an unbounded support")
    rep = lower_bound_maj(spec, cfg=cfg)
    rep.hypotheses = [h for h in rep.hypotheses if not h.name.startswith("maj_maximizer")]
    rep.hypotheses.append(HypothesisResult(
        "constrained_max_entropy", Status.ASSUMED,
        "max-entropy over the transformed constraint set not solved; support-only value reported"))
    return rep


def _psi_pieces(spec: ChannelSpec, cfg=DEFAULT_CONFIG):
    mono = spec.sigma.monotonicity
    if mono is Monotonicity.NON_MONOTONE:
        raise NonMonotoneSigma("the psi bound needs a monotone sigma")
    lo, hi = spec.effective_support()
    side = Side.GE if mono is Monotonicity.INCREASING else Side.LE
    s_lo, s_hi = spec.sigma.limit(lo), spec.sigma.limit(hi)
    with np.errstate(divide="ignore"):
        log_ratio = abs(float(np.log(s_hi)) - float(np.log(s_lo))) if s_lo != s_hi else 0.0
    if math.isnan(log_ratio):
        log_ratio = math.inf
    inv_len = MonotoneTransform.phi(spec.sigma, (lo, hi), cfg=cfg).image_length()
    return lo, hi, side, log_ratio, inv_len


def psi_bound_value(spec: ChannelSpec, delta: float, cfg=DEFAULT_CONFIG, _pieces=None):
    """alpha log(delta |log sigma(u-)/sigma(l+)| + int 1/sigma) - beta at a fixed delta.

    Returns ``(value, alpha, beta)``.
    """
    lo, hi, side, log_ratio, inv_len = _pieces or _psi_pieces(spec, cfg)
    alpha = tail_prob(spec.noise, delta, side)
    if not alpha > 0:
        return -math.inf, 0.0, math.nan
    beta = alpha * truncated_entropy(spec.noise, delta, side, cfg) + binary_entropy(alpha)
    length = delta * log_ratio + inv_len if log_ratio > 0 else inv_len
    if math.isinf(length):
        return (math.inf if math.isfinite(beta) else math.nan), alpha, beta
    return alpha * math.log(length) - beta, alpha, beta


def lower_bound_psi(spec: ChannelSpec, delta: float | None = None, cfg=DEFAULT_CONFIG) -> BoundReport:
    """The psi-transform lower bound, optimized over delta in [1e-3, 10] when delta is None."""
    pieces = _psi_pieces(spec, cfg)
    lo, hi, side, log_ratio, inv_len = pieces
    if delta is None:
        if math.isinf(log_ratio) or math.isinf(inv_len):
            delta = 1.0
        else:
            delta, _ = maximize_scalar(lambda d: psi_bound_value(spec, d, cfg, pieces)[0],
                                       *DELTA_RANGE, cfg)
        optimized = True
    else:
        optimized = False
    value, alpha, beta = psi_bound_value(spec, delta, cfg, pieces)
    if alpha == 0.0:
        raise EmptyTail(f"Pr(tail) = 0 at delta = {delta}")
    hz, h_noise = _noise_entropy_hypothesis(spec)
    hyps = [
        HypothesisResult("sigma_monotone_continuous", Status.VERIFIED,
                         f"{spec.sigma.family} sigma is {spec.sigma.monotonicity.value}"),
        HypothesisResult("inv_sigma_integrable",
                         Status.VERIFIED if math.isfinite(inv_len) else Status.ASSUMED,
                         f"int 1/sigma = {inv_len:.12g}"),
        HypothesisResult("alpha_positive", Status.VERIFIED, f"alpha = {alpha:.9g}"),
        h_noise,
    ]
    if spec.sigma.family == "tabulated":
        hyps[0] = HypothesisResult("sigma_monotone_continuous", Status.VERIFIED,
                                   "monotone table with PCHIP interpolation")
    if math.isinf(log_ratio):
        hyps.append(HypothesisResult("sigma_endpoint_limits", Status.ASSUMED,
                                     "sigma tends to 0 or inf at an endpoint; bound is +inf"))
    if any(c.kind is not ConstraintKind.PEAK for c in spec.constraints) and math.isfinite(value):
        tr = MonotoneTransform.psi(spec.sigma, delta, (lo, hi), cfg=cfg)
        hyps += _constraint_feasibility(spec, tr, "psi_maximizer")
    params = {"delta": delta, "alpha": alpha, "beta": beta, "side": side.value,
              "log_sigma_ratio": log_ratio, "inv_sigma_integral": inv_len,
              "delta_optimized": optimized}
    return BoundReport(value, BoundKind.LOWER_PSI, params, hyps, spec.fingerprint())
