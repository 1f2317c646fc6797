"""Symmetrized-KL upper bound for Gaussian signal-dependent noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, DensityInput, DiscreteInput
from .errors import DomainError, HypothesisFailed, NonFinite, NotConvex, NotIncreasing
from .report import BoundKind, BoundReport, HypothesisResult, Status

CHECK_POINTS = 1000
_REL_SLACK = 1e-10


@dataclass(frozen=True)
class TwoPointSolution:
    x1: float
    x2: float
    p: float  # Pr(X = x1)
    value: float

    @property
    def mean(self):
        return self.p * self.x1 + (1.0 - self.p) * self.x2


def _require_gaussian(spec):
    if not spec.noise.is_gaussian:
        raise DomainError("the symmetrized-KL bound needs standard Gaussian noise")


def symkl_bound_at(spec: ChannelSpec, input) -> float:
    """-1/2 Cov(X^2 + s^2, 1/s^2) + Cov(X, X/s^2) for s = sigma(X).

    Exact weighted sums for a :class:`DiscreteInput`, quadrature for a
    :class:`DensityInput`.
    """
    _require_gaussian(spec)
    sig = spec.sigma
    if isinstance(input, DiscreteInput):
        x, p = input.points, input.probs
        s2 = np.asarray(sig(x), float) ** 2
        if np.any(~(s2 > 0)) or np.any(~np.isfinite(s2)):
            raise NonFinite("sigma must be positive and finite on the input support")
        a, b = x * x + s2, 1.0 / s2
        c = x / s2

        def cov(u, v):
            return float(np.sum(p * (u - np.sum(p * u)) * (v - np.sum(p * v))))

        val = -0.5 * cov(a, b) + cov(x, c)
    elif isinstance(input, DensityInput):
        def e(fn):
            return input.expect(fn)

        def s2(t):
            return float(sig(t)) ** 2

        ea = e(lambda t: t * t + s2(t))
        eb = e(lambda t: 1.0 / s2(t))
        ex = e(lambda t: t)
        ec = e(lambda t: t / s2(t))
        cov1 = e(lambda t: (t * t + s2(t) - ea) * (1.0 / s2(t) - eb))
        cov2 = e(lambda t: (t - ex) * (t / s2(t) - ec))
        val = -0.5 * cov1 + cov2
    else:
        raise TypeError("input must be a DiscreteInput or DensityInput")
    if not math.isfinite(val):
        raise NonFinite("a covariance term diverged")
    return val


def _check_increasing(f, lo, hi, name):
    xs = np.linspace(lo, hi, CHECK_POINTS)
    v = np.array([float(f(x)) for x in xs])
    scale = max(1.0, float(np.max(np.abs(v))))
    bad = np.nonzero(np.diff(v) < -_REL_SLACK * scale)[0]
    return (len(bad) == 0), (float(xs[bad[0]]) if len(bad) else None)


def _check_convex(f, lo, hi, n_triples=100, seed=0):
    rng = np.random.default_rng(seed)
    ab = np.sort(rng.uniform(lo, hi, size=(n_triples, 2)), axis=1)
    t = rng.uniform(0.0, 1.0, size=n_triples)
    worst = None
    for (a, b), s in zip(ab, t):
        m = s * a + (1.0 - s) * b
        fa, fb, fm = float(f(a)), float(f(b)), float(f(m))
        gap = fm - (s * fa + (1.0 - s) * fb)
        if gap > _REL_SLACK * max(1.0, abs(fa), abs(fb)):
            worst = (float(a), float(m), float(b))
            break
    # dense second differences catch non-convexity the random triples miss
    xs = np.linspace(lo, hi, CHECK_POINTS)
    v = np.array([float(f(x)) for x in xs])
    d2 = v[:-2] - 2.0 * v[1:-1] + v[2:]
    scale = max(1.0, float(np.max(np.abs(v))))
    bad = np.nonzero(d2 < -1e-9 * scale)[0]
    if worst is None and len(bad):
        worst = (float(xs[bad[0]]), float(xs[bad[0] + 1]), float(xs[bad[0] + 2]))
    return worst is None, worst


def maximize_covariance(w, v, lo: float, hi: float, alpha: float | None = None,
                        check: bool = True) -> TwoPointSolution:
    """Two-point maximizer of Cov(w(X), v(X)) over X in [lo, hi] with E X <= alpha.

    Needs w and v increasing and v convex (checked by sampling unless
    ``check=False``). The optimum puts all mass on the endpoints.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise DomainError("need lo < hi")
    if check:
        for f, name in ((w, "w"), (v, "v")):
            ok, where = _check_increasing(f, lo, hi, name)
            if not ok:
                raise NotIncreasing(f"{name} decreases near x={where}")
        ok, where = _check_convex(v, lo, hi)
        if not ok:
            raise NotConvex(f"v is not convex on the triple {where}")
    dw = float(w(hi)) - float(w(lo))
    dv = float(v(hi)) - float(v(lo))
    if alpha is None or alpha >= 0.5 * (lo + hi):
        p, beta = 0.5, 0.25
    else:
        if alpha < lo:
            raise DomainError("mean cap below the support")
        p = (hi - alpha) / (hi - lo)
        beta = (hi - alpha) * (alpha - lo) / (hi - lo) ** 2
    return TwoPointSolution(lo, hi, p, beta * dw * dv)


def symkl_factor(sigma, u: float) -> float:
    """F = u^2/s(u)^2 + u^2/s(0)^2 + s(0)^2/s(u)^2 + s(u)^2/s(0)^2 - 2."""
    s0 = float(sigma(0.0))
    su = float(sigma(float(u)))
    if s0 == 0.0:
        return math.inf
    s0, su = s0 * s0, su * su
    return u * u / su + u * u / s0 + s0 / su + su / s0 - 2.0


def upper_bound_closed_form(spec: ChannelSpec, alpha: float | None = None,
                            strict: bool = False) -> BoundReport:
    """Worst-case symmetrized-KL bound on [0, u]: F/8, or (1 - a/u)(a/u) F / 2 when a < u/2.

    ``alpha`` defaults to the spec's mean constraint. Hypotheses are
    checked on 1000 points; a failed check marks the report invalid, or
    raises :class:`HypothesisFailed` when ``strict``.
    """
    _require_gaussian(spec)
    lo, u = spec.effective_support()
    if lo != 0.0 or not math.isfinite(u):
        raise DomainError("the closed-form upper bound needs a support [0, u]")
    if alpha is None and spec.constraint("mean") is not None:
        alpha = spec.constraint("mean").bound
    sig = spec.sigma
    s0 = sig.limit(0.0)
    F = symkl_factor(lambda x: sig.limit(0.0) if x == 0.0 else sig(x), u)

    hyps = [HypothesisResult("sigma0_positive", Status.VERIFIED if s0 > 0 else Status.FAILED,
                             f"sigma(0) = {s0:.9g}")]
    ok, where = _check_increasing(sig, 0.0, u, "sigma")
    hyps.append(HypothesisResult("sigma_increasing", Status.VERIFIED if ok else Status.FAILED,
                                 "" if ok else f"decreases near {where}"))
    if s0 > 0:
        ok, where = _check_increasing(lambda x: x / float(sig(x)) ** 2, 0.0, u, "x/sigma^2")
        hyps.append(HypothesisResult("x_over_sigma2_increasing",
                                     Status.VERIFIED if ok else Status.FAILED,
                                     "" if ok else f"decreases near {where}"))
    conv1, _ = _check_convex(lambda x: x * x + float(sig(x)), 0.0, u)
    conv2, _ = _check_convex(lambda x: x * x + float(sig(x)) ** 2, 0.0, u)
    if conv1 and conv2:
        st, detail = Status.VERIFIED, "x^2 + sigma and x^2 + sigma^2 both convex"
    elif conv1 or conv2:
        st = Status.ASSUMED
        detail = "only x^2 + sigma convex" if conv1 else "only x^2 + sigma^2 convex"
    else:
        st, detail = Status.FAILED, "neither x^2 + sigma nor x^2 + sigma^2 is convex"
    hyps.append(HypothesisResult("convexity", st, detail,
                                 {"x2_plus_sigma": conv1, "x2_plus_sigma2": conv2}))

    if alpha is None or alpha >= u / 2.0:
        factor, branch = 0.125, "peak"
    else:
        r = alpha / u
        factor, branch = 0.5 * (1.0 - r) * r, "mean"
    value = factor * F if math.isfinite(F) else math.inf
    failed = [h.name for h in hyps if h.status is Status.FAILED]
    if strict and failed:
        raise HypothesisFailed(f"hypotheses failed: {', '.join(failed)}", failed)
    return BoundReport(value, BoundKind.UPPER_SYMKL,
                       {"F": F, "u": u, "alpha": alpha, "branch": branch, "factor": factor},
                       hyps, spec.fingerprint())
