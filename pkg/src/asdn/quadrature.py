"""Numerical kernels: adaptive quadrature, entropy functionals and a 1-D maximizer.

Everything is in nats. Adaptive integration is QUADPACK (``scipy.integrate.quad``,
21-point Gauss-Kronrod with epsilon extrapolation, QAGI substitution for
infinite endpoints) behind a stricter convergence contract.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _spi

from .errors import DomainError, EmptyTail, NoConvergence, NonFinite, NotADensity

INFINITE_ENTROPY_THRESHOLD = 1e6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_subdivisions: int = 2000
    improper_truncation_mass: float = 1e-12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.improper_truncation_mass > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")


DEFAULT_CONFIG = QuadratureConfig()


class Side(str, enum.Enum):
    GE = "GE"  # Z >= delta
    LE = "LE"  # Z <= -delta


def _quad(f, a, b, cfg, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        out = _spi.quad(
            f, a, b,
            epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
            points=points, full_output=1,
        )
    value, err = out[0], out[1]
    ier_ok = len(out) == 3
    return value, err, ier_ok


def integrate(f, a, b, cfg: QuadratureConfig | None = None, points=None) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``(a, b)``.

    ``a`` and ``b`` may be infinite. ``points`` lists interior break points
    (kinks, peaks) the subdivision should start from.

    Raises
    ------
    NoConvergence
        If the error estimate stays above ``max(abs_tol, rel_tol*|I|)``.
    """
    cfg = cfg or DEFAULT_CONFIG
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, cfg, points)
    brk = sorted(float(p) for p in (points or ()) if a < p < b)
    if brk and (math.isinf(a) or math.isinf(b)):
        edges = [a, *brk, b]
        return sum(integrate(f, lo, hi, cfg) for lo, hi in zip(edges[:-1], edges[1:]))
    value, err, ok = _quad(f, a, b, cfg, points=brk or None)
    if not math.isfinite(value):
        raise NoConvergence(f"integral over ({a}, {b}) is not finite")
    if not ok and err > max(cfg.abs_tol, cfg.rel_tol * abs(value)):
        raise NoConvergence(
            f"integral over ({a}, {b}) stalled at {value!r} with error {err:.3g}"
        )
    return value


# -- shell decomposition used for improper entropy integrals ---------------------------

_SHELL_EDGES = np.concatenate([[0.0], np.exp(np.arange(0.0, 13.5, 1.0) / 2.0)])
_SHELL_PROBE = 65


def _shell_map(center, end):
    """(x(s), dx/ds, s_max) for the shell coordinate toward ``end``."""
    if math.isinf(end):
        d = 1.0 if end > 0 else -1.0
        s_max = 700.0 - max(0.0, math.log1p(abs(center)))
        return (lambda s: center + d * math.expm1(s)), math.exp, s_max
    span = center - end
    floor = max(abs(end) * np.finfo(float).eps, 1e-300)
    s_max = math.log(abs(span) / floor)
    return (lambda s: end + span * math.exp(-s)), (lambda s: abs(span) * math.exp(-s)), s_max


def _shell_peaks(pdf, center, end, n_probe=_SHELL_PROBE):
    """Per-shell argmax of the pdf in shell coordinates, as quad break points.

    Adaptive quadrature can step over a peak much narrower than a shell;
    starting the subdivision at the probed maximum avoids that.
    """
    if center == end:
        return []
    x_of, _, s_max = _shell_map(center, end)
    edges = _SHELL_EDGES[_SHELL_EDGES <= s_max]
    peaks = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        ss = np.linspace(lo, hi, n_probe)[1:-1]
        with np.errstate(all="ignore"):
            v = np.array([float(pdf(x_of(s))) for s in ss])
        v = np.where(np.isfinite(v), v, 0.0)
        peaks.append([float(ss[int(np.argmax(v))])] if np.max(v) > 0 else None)
    return peaks


def _side_shells(g, center, end, cfg, peaks=None):
    """Integrate ``g`` from ``center`` to ``end`` in log-distance shells.

    Returns the per-shell contributions. Infinite ends use
    ``x = center +/- (e^s - 1)``; finite ends use ``x = end + (center-end) e^{-s}``.
    ``peaks`` optionally gives per-shell break points.
    """
    if center == end:
        return np.zeros(1)
    x_of, jac, s_max = _shell_map(center, end)

    def h(s):
        return g(x_of(s)) * jac(s)

    # full shells only, so the trailing ratio reflects the tail decay
    edges = _SHELL_EDGES[_SHELL_EDGES <= s_max]
    parts = []
    with np.errstate(all="ignore"):
        for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            pts = peaks[i] if peaks is not None and i < len(peaks) else None
            v, err, ok = _quad(h, lo, hi, cfg, points=pts)
            parts.append(v)
    return np.asarray(parts)


def _shell_total(parts, extrapolate=True):
    """Sum shell contributions; returns (total, diverges).

    A trailing ratio near one with non-negligible mass means the tail does
    not decay. Otherwise the trailing shells are extrapolated as a
    geometric series when ``extrapolate`` (infinite ends only: finite ends
    stop at floating-point resolution, not at a decayed tail).
    """
    total = float(np.sum(parts))
    a = np.abs(parts)
    if len(a) < 3 or a[-1] <= 1e-12:
        return total, False
    r = a[-1] / a[-2] if a[-2] > 0 else np.inf
    if r >= 0.9 and a[-1] > 1e-6:
        return total, True
    if not extrapolate:
        return total, False
    tail = parts[-1] * r / (1.0 - r)
    return total + tail, False


def _default_center(a, b):
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a):
        return a + 1.0
    if math.isfinite(b):
        return b - 1.0
    return 0.0


def differential_entropy(pdf, support, cfg: QuadratureConfig | None = None, center=None) -> float:
    """Differential entropy ``-int f log f`` in nats, with ``0 log 0 = 0``.

    The integral is split into the region where ``f < 1`` (positive
    contribution) and ``f > 1`` (negative contribution). Each part is
    integrated in shells toward the support endpoints; a part whose shell
    contributions stop decaying, or that exceeds 1e6 nats, is reported as
    diverging and the function returns ``+inf`` or ``-inf``.

    Raises
    ------
    NotADensity
        If ``pdf`` does not integrate to one within 1e-6.
    NonFinite
        If both parts diverge (the entropy is undefined).
    """
    cfg = cfg or DEFAULT_CONFIG
    a, b = float(support[0]), float(support[1])
    if not a < b:
        raise DomainError(f"empty support ({a}, {b})")
    c = _default_center(a, b) if center is None else float(center)

    def safe_pdf(x):
        v = float(pdf(x))
        return v if v > 0.0 and math.isfinite(v) else (math.inf if v == math.inf else 0.0)

    def mass_g(x):
        v = safe_pdf(x)
        return 0.0 if math.isinf(v) else v

    def plus_g(x):
        v = safe_pdf(x)
        return -v * math.log(v) if 0.0 < v < 1.0 else 0.0

    def minus_g(x):
        v = safe_pdf(x)
        if math.isinf(v):
            return 0.0
        return v * math.log(v) if v > 1.0 else 0.0

    totals = {}
    peaks_a, peaks_b = _shell_peaks(mass_g, c, a), _shell_peaks(mass_g, c, b)
    for name, g in (("mass", mass_g), ("plus", plus_g), ("minus", minus_g)):
        left = _shell_total(_side_shells(g, c, a, cfg, peaks_a), math.isinf(a))
        right = _shell_total(_side_shells(g, c, b, cfg, peaks_b), math.isinf(b))
        totals[name] = (left[0] + right[0], left[1] or right[1])

    mass, mass_div = totals["mass"]
    if mass_div or abs(mass - 1.0) > 1e-6:
        raise NotADensity(f"pdf integrates to {mass!r}, not 1")
    plus, plus_div = totals["plus"]
    minus, minus_div = totals["minus"]
    plus_div = plus_div or plus > INFINITE_ENTROPY_THRESHOLD
    minus_div = minus_div or minus > INFINITE_ENTROPY_THRESHOLD
    if plus_div and minus_div:
        raise NonFinite("both the positive and negative parts of the entropy diverge")
    if plus_div:
        return math.inf
    if minus_div:
        return -math.inf
    return plus - minus


def binary_entropy(p: float) -> float:
    """H2(p) in nats; accurate for tiny p."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy needs p in [0, 1], got {p}")
    # canonical small side: for p >= 0.5, 1 - p is exact, so H(q) == H(1 - q)
    lo = p if p < 0.5 else 1.0 - p
    if lo == 0.0:
        return 0.0
    return float(-lo * math.log(lo) - (1.0 - lo) * math.log1p(-lo))


def tail_prob(noise, delta: float, side: Side | str = Side.GE) -> float:
    """``Pr(Z >= delta)`` for side GE, ``Pr(Z <= -delta)`` for side LE."""
    side = Side(side)
    if side is Side.GE:
        return float(noise.sf(delta))
    return float(noise.cdf(-delta))


def truncated_entropy(noise, delta: float, side: Side | str = Side.GE,
                      cfg: QuadratureConfig | None = None) -> float:
    """Entropy of ``Z`` conditioned on the tail event selected by ``side``."""
    cfg = cfg or DEFAULT_CONFIG
    side = Side(side)
    theta = tail_prob(noise, delta, side)
    if not theta > 0.0:
        raise EmptyTail(f"Pr(tail) = 0 at delta={delta}, side={side.value}")
    zlo, zhi = noise.support
    if side is Side.GE:
        lo, hi = max(float(delta), zlo), zhi
    else:
        lo, hi = zlo, min(-float(delta), zhi)
    log_theta = math.log(theta)

    def g(z):
        lf = float(noise.logpdf(z))
        if not math.isfinite(lf):
            return 0.0
        lr = lf - log_theta
        return -math.exp(lr) * lr

    pts = [p for p in getattr(noise, "breakpoints", ()) if lo < p < hi]
    return integrate(g, lo, hi, cfg, points=pts)


def _golden_max(f, a, b, fa_x=None, width=1e-9, max_iter=500):
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > width and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        it += 1
    return (x1, f1) if f1 >= f2 else (x2, f2)


def maximize_scalar(f, lo: float, hi: float, cfg: QuadratureConfig | None = None,
                    n_grid: int = 64):
    """Grid scan followed by golden-section refinement; returns ``(argmax, max)``.

    The 64-point scan is log-spaced when ``lo > 0``. Unimodality is not
    assumed: refinement only runs inside the bracket around the best grid
    point, and the best value seen overall is returned.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo}, {hi})")

    def fs(x):
        v = float(f(x))
        return v if not math.isnan(v) else -math.inf

    grid = np.geomspace(lo, hi, n_grid) if lo > 0 else np.linspace(lo, hi, n_grid)
    vals = np.array([fs(x) for x in grid])
    i = int(np.argmax(vals))
    best_x, best_f = float(grid[i]), float(vals[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, n_grid - 1)])
    x, fx = _golden_max(fs, a, b, width=1e-6 * (hi - lo))
    if fx > best_f:
        best_x, best_f = x, fx
    return best_x, best_f
