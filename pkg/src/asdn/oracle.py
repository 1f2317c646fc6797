"""Discretized channel and constrained Blahut-Arimoto capacity oracle."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize
from scipy.special import logsumexp

from .channel import (ChannelSpec, ConstraintKind, DensityInput, DiscreteInput,
                      conditional_density_grid)
from .errors import DomainError, NoConvergence, UnboundedSupport

OUTPUT_SPAN_K = 8.0
MEAN_TOL = 1e-4
_FEAS_SLACK = 1e-8


@dataclass
class DiscretizedChannel:
    """Row-stochastic W[i, j] = Pr(Y in bin j | X = x_i)."""

    x_grid: np.ndarray
    y_grid: np.ndarray
    W: np.ndarray
    costs: dict = field(default_factory=dict)  # kind -> (g(x_grid), bound)

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 2:
            raise DomainError("W must be an n x m matrix with m >= 2")
        if np.any(W < 0) or np.any(~np.isfinite(W)):
            raise DomainError("W entries must be finite and nonnegative")
        rows = W.sum(axis=1)
        if np.any(rows <= 0):
            raise DomainError("W has an empty row")
        self.W = W / rows[:, None]
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.y_grid = np.asarray(self.y_grid, dtype=float)
        if self.x_grid.shape != (W.shape[0],) or self.y_grid.shape != (W.shape[1],):
            raise DomainError("grid sizes do not match W")

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def m(self):
        return self.W.shape[1]

    @classmethod
    def from_matrix(cls, W, x_grid=None, y_grid=None):
        W = np.asarray(W, dtype=float)
        n, m = W.shape
        return cls(np.arange(n, dtype=float) if x_grid is None else x_grid,
                   np.arange(m, dtype=float) if y_grid is None else y_grid, W)


@dataclass
class CapacityEstimate:
    value: float
    pmf: np.ndarray
    iterations: int
    gap: float
    x_grid: np.ndarray | None = None
    multiplier: float = 0.0
    upper: float = math.nan  # max_i D(W_i||q) - s g_i: an upper bound for the discrete channel
    output: np.ndarray | None = None

    @property
    def mean(self):
        return float(np.dot(self.pmf, self.x_grid)) if self.x_grid is not None else math.nan

    def to_dict(self, with_pmf=False):
        d = {"value": self.value, "iterations": self.iterations, "gap": self.gap,
             "multiplier": self.multiplier, "upper": self.upper, "n": int(len(self.pmf))}
        if self.x_grid is not None:
            d["mean"] = self.mean
            d["second_moment"] = float(np.dot(self.pmf, self.x_grid ** 2))
        if with_pmf:
            d["pmf"] = [float(p) for p in self.pmf]
            d["x_grid"] = [float(x) for x in self.x_grid]
        return d


def _row_matrix(spec, xs, edges):
    """Bin probabilities by cdf differences; the outer tails fold into the end bins."""
    s = np.asarray(spec.sigma(xs), dtype=float)
    if np.any(~(s > 0)) or np.any(~np.isfinite(s)):
        raise DomainError("sigma must be positive and finite on the input grid")
    z = (edges[None, :] - xs[:, None]) / s[:, None]
    # upper tails from sf keep tiny right-tail bins accurate
    cdf = spec.noise.cdf(z)
    sf = spec.noise.sf(z)
    inner_right = z > 0
    W = np.where(inner_right[:, 1:] & inner_right[:, :-1],
                 sf[:, :-1] - sf[:, 1:], cdf[:, 1:] - cdf[:, :-1])
    W = np.clip(W, 0.0, None)
    W[:, 0] += cdf[:, 0]
    W[:, -1] += sf[:, -1]
    return W


def discretize_points(spec: ChannelSpec, xs, m: int, k: float = OUTPUT_SPAN_K,
                      y_range=None) -> DiscretizedChannel:
    """Discretize on given input points; the output window defaults to the points' range +- k sigma."""
    xs = np.asarray(xs, dtype=float)
    if m < 2:
        raise DomainError("need m >= 2")
    if y_range is None:
        smax = float(np.max(spec.sigma(xs)))
        zlo, zhi = spec.noise.support
        lo = xs.min() + (max(zlo, -k) * smax if zlo > -math.inf else -k * smax)
        hi = xs.max() + (min(zhi, k) * smax if zhi < math.inf else k * smax)
        y_range = (lo, hi)
    edges = np.linspace(y_range[0], y_range[1], m + 1)
    W = _row_matrix(spec, xs, edges)
    costs = {c.kind.value: (np.asarray(c.cost(xs), float), c.bound) for c in spec.constraints
             if c.kind is not ConstraintKind.PEAK}
    return DiscretizedChannel(xs, 0.5 * (edges[1:] + edges[:-1]), W, costs)


def discretize(spec: ChannelSpec, n: int, m: int, k: float = OUTPUT_SPAN_K) -> DiscretizedChannel:
    """Uniform n-point input grid on the (peak-limited) support; m output bins
    covering [lo - k sigma_max, hi + k sigma_max]."""
    if n < 2 or m < 2:
        raise DomainError("need n, m >= 2")
    lo, hi = spec.effective_support()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnboundedSupport("the oracle needs a bounded input support; truncate first")
    xs = np.linspace(lo, hi, n)
    # sigma may vanish at an endpoint; nudge those points inside
    s = np.asarray(spec.sigma(xs), dtype=float)
    bad = ~(s > 0) | ~np.isfinite(s)
    if bad.any():
        step = (hi - lo) / (n - 1)
        xs = np.where(bad & (xs == lo), lo + 1e-6 * step, xs)
        xs = np.where(bad & (xs == hi), hi - 1e-6 * step, xs)
    smax = spec.sigma_max()
    if not math.isfinite(smax):
        raise DomainError("sigma is unbounded on the support")
    zlo, zhi = spec.noise.support
    y_lo = lo + max(zlo, -k) * smax
    y_hi = hi + min(zhi, k) * smax
    return discretize_points(spec, xs, m, k, (y_lo, y_hi))


def _xlogx_rows(W):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(np.where(W > 0, W * np.log(W), 0.0), axis=1)


def _divergences(W, wlogw, q):
    """D(W_i || q) for every row."""
    with np.errstate(divide="ignore"):
        logq = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), 0.0)
    return wlogw - W @ logq


def mutual_information(ch: DiscretizedChannel, pmf) -> float:
    """sum_i p_i sum_j W_ij log(W_ij / q_j), q = p^T W."""
    p = np.asarray(pmf, dtype=float)
    if p.shape != (ch.n,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("pmf must be a probability vector on x_grid")
    q = p @ ch.W
    D = _divergences(ch.W, _xlogx_rows(ch.W), q)
    return float(max(0.0, np.dot(p, D)))


def _slsqp_polish(W, wlogw, shift, p, maxiter=1000):
    """Quasi-Newton polish of max_p sum_i p_i c_i(p) on the simplex.

    BA is first order and crawls along the near-flat directions between
    adjacent grid points that share one mass point of the optimum; SLSQP
    handles those and the zero-mass faces directly.
    """
    n = len(p)

    def neg(pv):
        pv = np.clip(pv, 0.0, None)
        c = _divergences(W, wlogw, pv @ W) + shift
        return -float(np.dot(pv, c)), -(c - 1.0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize(neg, p, jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * n,
                       constraints=[{"type": "eq", "fun": lambda v: v.sum() - 1.0,
                                     "jac": lambda v: np.ones(n)}],
                       options={"ftol": 1e-15, "maxiter": maxiter})
    q = np.clip(res.x, 0.0, None)
    if not q.sum() > 0:
        return p, int(res.nit)
    q /= q.sum()
    return q, int(res.nit)


def _ba_fixed_s(W, wlogw, g, s, p0, tol, max_iter, warmup=300):
    """Maximize I(p) - s E_p g: BA sweeps alternating with SLSQP polishing.

    Returns (p, D, iterations, gap) where gap = max_i c_i - sum_i p_i c_i,
    c_i = D(W_i || q) - s g_i, is the usual BA certificate.
    """
    p = p0.copy()
    shift = -s * g if g is not None else np.zeros(W.shape[0])
    it = 0

    def certificate(p):
        c = _divergences(W, wlogw, p @ W) + shift
        return c, float(c.max() - np.dot(p, c))

    while it < max_iter:
        for _ in range(min(warmup, max_iter - it)):
            c, gap = certificate(p)
            if gap <= tol:
                return p, c - shift, it, max(gap, 0.0)
            p = p * np.exp(c - c.max())
            p /= p.sum()
            it += 1
        p, nit = _slsqp_polish(W, wlogw, shift, p)
        it += nit
        c, gap = certificate(p)
        if gap <= tol:
            return p, c - shift, it, max(gap, 0.0)
        warmup = 50
    raise NoConvergence(f"Blahut-Arimoto gap {gap:.3g} > {tol:g} after {max_iter} iterations")


def _finish(ch, p, D, it, gap, s, g):
    val = float(np.dot(p, D))
    shift = -s * g if g is not None else 0.0
    upper = float(np.max(D + shift))
    return CapacityEstimate(max(val, 0.0), p, it, gap, ch.x_grid, s, upper, p @ ch.W)


def blahut_arimoto(ch: DiscretizedChannel, constraints=None, tol: float = 1e-7,
                   max_iter: int = 100_000, p0=None) -> CapacityEstimate:
    """Capacity of ``ch`` with at most one average-cost constraint.

    ``constraints`` is a mapping kind -> bound (``"mean"`` or ``"power"``)
    or None to use the costs stored on the channel. An active constraint is
    handled by bisection on the multiplier s >= 0 until the constraint is
    met within 1e-4 (or is slack at s = 0). ``gap`` is the certificate
    max_i c_i - sum_i p_i c_i of the final inner problem, c_i = D_i - s g_i.
    """
    if constraints is None:
        costs = {k: v for k, v in ch.costs.items()}
    else:
        costs = {}
        for kind, bound in dict(constraints).items():
            kind = ConstraintKind(kind)
            if kind is ConstraintKind.PEAK:
                continue
            g = ch.x_grid - bound if kind is ConstraintKind.MEAN else ch.x_grid ** 2 - bound
            costs[kind.value] = (g, bound)
    if len(costs) > 1:
        raise DomainError("only one average-cost constraint is supported")
    W = ch.W
    wlogw = _xlogx_rows(W)
    p = np.full(ch.n, 1.0 / ch.n) if p0 is None else np.asarray(p0, float) / np.sum(p0)
    total = 0

    if not costs:
        p, D, it, gap = _ba_fixed_s(W, wlogw, None, 0.0, p, tol, max_iter)
        return _finish(ch, p, D, it, gap, 0.0, None)

    (kind, (g, bound)), = costs.items()
    if np.all(g > _FEAS_SLACK):
        raise DomainError(f"{kind} constraint is infeasible on the input grid")
    scale = max(1.0, abs(bound))
    ctol = MEAN_TOL * scale if kind == "power" else MEAN_TOL

    def solve(s, p_start):
        nonlocal total
        out = _ba_fixed_s(W, wlogw, g, s, p_start, tol, max_iter - total)
        total += out[2]
        return out

    res = solve(0.0, p)
    if float(np.dot(res[0], g)) <= _FEAS_SLACK:
        return _finish(ch, res[0], res[1], total, res[3], 0.0, g)
    lo_s, lo_res = 0.0, res
    hi_s = 1.0 / scale
    while True:
        hi_res = solve(hi_s, lo_res[0])
        if float(np.dot(hi_res[0], g)) <= 0.0:
            break
        lo_s, lo_res = hi_s, hi_res
        hi_s *= 2.0
        if hi_s > 1e12:
            raise NoConvergence("multiplier bracket failed")
    for _ in range(200):
        eg = float(np.dot(hi_res[0], g))
        if -eg <= ctol:
            break
        mid = 0.5 * (lo_s + hi_s)
        mid_res = solve(mid, hi_res[0])
        if float(np.dot(mid_res[0], g)) <= 0.0:
            hi_s, hi_res = mid, mid_res
        else:
            lo_s, lo_res = mid, mid_res
        if hi_s - lo_s <= 1e-14 * hi_s:
            break
    p, D, _, gap = hi_res
    return _finish(ch, p, D, total, gap, hi_s, g)


OUTPUT_STABILITY_TOL = 1e-3


def output_stability(ch: DiscretizedChannel, constraints=None, restarts: int = 3, seed=0,
                     tol: float = 1e-7):
    """Max L1 distance between BA output pmfs from random (Dirichlet) starts.

    The capacity-achieving output law is unique, so distances above
    ``OUTPUT_STABILITY_TOL`` point at an unconverged run. Returns
    (max_l1, estimates), the first estimate being the uniform start.
    """
    rng = np.random.default_rng(seed)
    runs = [blahut_arimoto(ch, constraints, tol)]
    for _ in range(restarts):
        runs.append(blahut_arimoto(ch, constraints, tol, p0=rng.dirichlet(np.ones(ch.n))))
    ref = runs[0].output
    return max(float(np.abs(r.output - ref).sum()) for r in runs[1:]) if restarts else 0.0, runs


def _sample_inputs(input_sampler, rng, size):
    if isinstance(input_sampler, (DiscreteInput, DensityInput)):
        return np.asarray(input_sampler.sample(rng, size), dtype=float)
    return np.asarray(input_sampler(rng, size), dtype=float)


def _log_cond(spec, x, y):
    """log f_{Y|X}(y_k | x_l) on a broadcast grid."""
    s = np.asarray(spec.sigma(x), dtype=float)
    return spec.noise.logpdf((y - x) / s) - np.log(s)


def mc_mutual_information(spec: ChannelSpec, input_sampler, n_samples: int, seed=0,
                          n_batches: int = 20, n_mixture: int = 2000):
    """Monte Carlo estimate of I(X;Y) as mean[log f(Y|X) - log f_Y(Y)].

    f_Y is the exact mixture for a :class:`DiscreteInput` and otherwise a
    mixture over ``n_mixture`` independent input draws. Returns
    (estimate, standard error from batch means).
    """
    if n_samples < n_batches:
        raise DomainError("need at least one sample per batch")
    rng = np.random.default_rng(seed)
    x = _sample_inputs(input_sampler, rng, n_samples)
    s = np.asarray(spec.sigma(x), dtype=float)
    y = x + s * spec.noise.sample(rng, n_samples)
    if isinstance(input_sampler, DiscreteInput):
        cx, logw = input_sampler.points, np.log(input_sampler.probs, where=input_sampler.probs > 0,
                                                 out=np.full(len(input_sampler.probs), -np.inf))
    else:
        cx = _sample_inputs(input_sampler, rng, n_mixture)
        logw = np.full(len(cx), -math.log(len(cx)))
    keep = np.isfinite(logw)
    cx, logw = cx[keep], logw[keep]
    terms = np.empty(n_samples)
    chunk = max(1, 4_000_000 // len(cx))
    with np.errstate(divide="ignore", under="ignore"):
        for a in range(0, n_samples, chunk):
            yb = y[a:a + chunk, None]
            log_fy = logsumexp(_log_cond(spec, cx[None, :], yb) + logw[None, :], axis=1)
            terms[a:a + chunk] = _log_cond(spec, x[a:a + chunk], y[a:a + chunk]) - log_fy
    means = np.array([b.mean() for b in np.array_split(terms, n_batches)])
    est = float(terms.mean())
    se = float(means.std(ddof=1) / math.sqrt(n_batches))
    return est, se


def output_entropy(spec: ChannelSpec, input: DensityInput, nx: int = 400, ny: int = 8001,
                   k: float = OUTPUT_SPAN_K) -> float:
    """h(Y) for a density input on a bounded support.

    Gauss-Legendre nodes in x build f_Y on a uniform y-grid; the entropy
    integral is then a trapezoid sum.
    """
    lo, hi = input.support
    lo, hi = max(lo, spec.support[0]), min(hi, spec.support[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnboundedSupport("output_entropy needs a bounded input support")
    t, w = np.polynomial.legendre.leggauss(nx)
    xs = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    wx = 0.5 * (hi - lo) * w * np.array([float(input.pdf(x)) for x in xs])
    zlo, zhi = spec.noise.ppf(0.0), spec.noise.ppf(1.0)
    smax = spec.sigma_max()
    ys = np.linspace(lo + max(zlo, -k) * smax, hi + min(zhi, k) * smax, ny)
    fy = np.zeros(ny)
    for a in range(0, nx, 50):
        fy += wx[a:a + 50] @ conditional_density_grid(spec, xs[a:a + 50], ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(fy > 0, -fy * np.log(fy), 0.0)
    return float(trapezoid(integrand, ys))
