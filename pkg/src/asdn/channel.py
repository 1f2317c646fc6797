"""Channel model Y = X + sigma(X) * Z: noise profiles, noise laws, specs and inputs."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, NonFinite
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate

HALF_LOG_2PIE = 0.5 * math.log(2.0 * math.pi * math.e)


class Monotonicity(str, enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NON_MONOTONE = "non_monotone"


def _encode_float(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _decode_float(v):
    if isinstance(v, str):
        return float(v.strip())  # accepts "inf" / "-inf"
    return float(v)


def _detect_monotonicity(xs, vals):
    d = np.diff(vals)
    if np.all(d >= 0):
        return Monotonicity.INCREASING
    if np.all(d <= 0):
        return Monotonicity.DECREASING
    return Monotonicity.NON_MONOTONE


def _interior_probe(lo, hi, n=257):
    """Points strictly inside (lo, hi), geometric toward infinite ends."""
    if math.isfinite(lo) and math.isfinite(hi):
        return np.linspace(lo, hi, n + 2)[1:-1]
    if math.isfinite(lo):
        return lo + np.geomspace(1e-6, 1e6, n)
    if math.isfinite(hi):
        return hi - np.geomspace(1e-6, 1e6, n)[::-1]
    t = np.geomspace(1e-6, 1e6, n // 2)
    return np.concatenate([-t[::-1], [0.0], t])


# ---------------------------------------------------------------------------- sigma


@dataclass(frozen=True)
class SigmaProfile:
    """Noise-scaling function sigma(x) on an open domain (lo, hi).

    Use the family constructors (:meth:`constant`, :meth:`sqrt_affine`,
    :meth:`power_law`, :meth:`fading_affine`, :meth:`affine`,
    :meth:`tabulated`) rather than calling this directly.
    """

    family: str
    params: dict
    domain: tuple
    monotonicity: Monotonicity
    _fn: Callable = field(repr=False, compare=False)
    _inv_antideriv: Callable | None = field(default=None, repr=False, compare=False)
    _antideriv: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, x):
        with np.errstate(all="ignore"):
            return self._fn(np.asarray(x, dtype=float)) if np.ndim(x) else float(self._fn(float(x)))

    @property
    def lo(self):
        return self.domain[0]

    @property
    def hi(self):
        return self.domain[1]

    def limit(self, x_end: float) -> float:
        """sigma at an endpoint as a one-sided limit (may be 0 or inf)."""
        with np.errstate(all="ignore"):
            v = float(self._fn(float(x_end)))
        if math.isnan(v):
            # approach from inside the domain
            lo, hi = self.domain
            inner = x_end + (1e-300 if x_end <= lo else -1e-300) if math.isfinite(x_end) else x_end
            v = float(self._fn(inner))
        return v

    def inv_antiderivative(self):
        """Closed-form antiderivative of 1/sigma, or None."""
        return self._inv_antideriv

    def antiderivative(self):
        """Closed-form antiderivative of sigma, or None."""
        return self._antideriv

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c, domain=(-math.inf, math.inf)):
        c = float(c)
        if c < 0:
            raise DomainError("constant sigma must be nonnegative")
        inv = (lambda x: np.asarray(x) / c) if c > 0 else None
        return cls("constant", {"c": c}, _domain(domain), Monotonicity.INCREASING,
                   lambda x: np.full(np.shape(x), c), inv, lambda x: c * np.asarray(x))

    @classmethod
    def sqrt_affine(cls, c0, c1, domain=None):
        """sigma(x) = sqrt(c0^2 + c1^2 x)."""
        c0, c1 = float(c0), float(c1)
        if c1 == 0:
            raise DomainError("sqrt_affine needs c1 != 0; use constant")
        k = c1 * c1
        natural = -c0 * c0 / k
        domain = _domain(domain if domain is not None else (natural, math.inf))
        if domain[0] < natural - 1e-12 * max(1.0, abs(natural)):
            raise DomainError(f"c0^2 + c1^2 x must be positive on the domain; needs x > {natural}")
        return cls(
            "sqrt_affine", {"c0": c0, "c1": c1}, domain, Monotonicity.INCREASING,
            lambda x: np.sqrt(np.maximum(c0 * c0 + k * np.asarray(x), 0.0)),
            lambda x: 2.0 * np.sqrt(np.maximum(c0 * c0 + k * np.asarray(x), 0.0)) / k,
            lambda x: (2.0 / (3.0 * k)) * np.maximum(c0 * c0 + k * np.asarray(x), 0.0) ** 1.5,
        )

    @classmethod
    def power_law(cls, alpha, domain=(0.0, math.inf)):
        """sigma(x) = x**alpha on x > 0."""
        a = float(alpha)
        domain = _domain(domain)
        if domain[0] < 0:
            raise DomainError("power_law is defined for x > 0 only")
        mono = Monotonicity.INCREASING if a >= 0 else Monotonicity.DECREASING
        if a == 1.0:
            inv = lambda x: np.log(np.asarray(x))
        else:
            inv = lambda x: np.asarray(x) ** (1.0 - a) / (1.0 - a)
        if a == -1.0:
            anti = lambda x: np.log(np.asarray(x))
        else:
            anti = lambda x: np.asarray(x) ** (1.0 + a) / (1.0 + a)
        return cls("power_law", {"alpha": a}, domain, mono,
                   lambda x: np.asarray(x) ** a, inv, anti)

    @classmethod
    def fading_affine(cls, c0, c1, domain=(0.0, math.inf)):
        """sigma(x) = sqrt(c1 x^2 + c0)."""
        c0, c1 = float(c0), float(c1)
        if c0 < 0 or c1 <= 0:
            raise DomainError("fading_affine needs c0 >= 0 and c1 > 0")
        domain = _domain(domain)
        if domain[0] >= 0:
            mono = Monotonicity.INCREASING
        elif domain[1] <= 0:
            mono = Monotonicity.DECREASING
        else:
            mono = Monotonicity.NON_MONOTONE
        r = math.sqrt(c1)
        if c0 > 0:
            inv = lambda x: np.arcsinh(np.asarray(x) * math.sqrt(c1 / c0)) / r
        elif domain[0] >= 0 or domain[1] <= 0:
            inv = lambda x: np.sign(np.asarray(x)) * np.log(np.abs(np.asarray(x))) / r
        else:
            inv = None
        return cls("fading_affine", {"c0": c0, "c1": c1}, domain, mono,
                   lambda x: np.sqrt(c1 * np.asarray(x) ** 2 + c0), inv, None)

    @classmethod
    def affine(cls, c0, c1, domain=None):
        """sigma(x) = c0 + c1 x, restricted to where it is positive."""
        c0, c1 = float(c0), float(c1)
        if c1 == 0:
            raise DomainError("affine needs c1 != 0; use constant")
        root = -c0 / c1
        if domain is None:
            domain = (root, math.inf) if c1 > 0 else (-math.inf, root)
        domain = _domain(domain)
        if (c1 > 0 and domain[0] < root) or (c1 < 0 and domain[1] > root):
            raise DomainError("affine sigma must stay positive on the domain")
        mono = Monotonicity.INCREASING if c1 > 0 else Monotonicity.DECREASING
        return cls("affine", {"c0": c0, "c1": c1}, domain, mono,
                   lambda x: c0 + c1 * np.asarray(x),
                   lambda x: np.log(c0 + c1 * np.asarray(x)) / c1,
                   lambda x: (c0 + c1 * np.asarray(x)) ** 2 / (2.0 * c1))

    @classmethod
    def tabulated(cls, xs: Sequence[float], sigmas: Sequence[float], monotonicity=None):
        """Monotone-cubic (PCHIP) interpolation of sampled sigma, clamped outside the table."""
        xs = np.asarray(xs, dtype=float)
        ss = np.asarray(sigmas, dtype=float)
        if xs.ndim != 1 or xs.shape != ss.shape or len(xs) < 2:
            raise DomainError("tabulated sigma needs two equal-length 1-D arrays")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("tabulated sigma abscissae must be strictly increasing")
        if np.any(ss < 0):
            raise DomainError("tabulated sigma values must be nonnegative")
        detected = _detect_monotonicity(xs, ss)
        if monotonicity is not None:
            mono = Monotonicity(monotonicity)
            if mono is not Monotonicity.NON_MONOTONE and mono is not detected:
                raise DomainError(f"declared {mono.value} but table is {detected.value}")
        else:
            mono = detected
        interp = PchipInterpolator(xs, ss, extrapolate=False)
        lo_v, hi_v = ss[0], ss[-1]

        def fn(x):
            x = np.asarray(x, dtype=float)
            v = interp(np.clip(x, xs[0], xs[-1]))
            v = np.where(x <= xs[0], lo_v, np.where(x >= xs[-1], hi_v, v))
            return v if v.ndim else float(v)

        return cls("tabulated", {"x": xs.tolist(), "sigma": ss.tolist()},
                   (-math.inf, math.inf), mono, fn, None, None)

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        d = {"family": self.family}
        d.update(self.params)
        d["domain"] = [_encode_float(self.lo), _encode_float(self.hi)]
        d["monotonicity"] = self.monotonicity.value
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        fam = d.pop("family")
        dom = d.pop("domain", None)
        dom = tuple(_decode_float(v) for v in dom) if dom is not None else None
        declared = d.pop("monotonicity", None)
        if fam == "constant":
            prof = cls.constant(d["c"], dom or (-math.inf, math.inf))
        elif fam == "sqrt_affine":
            if "c0_sq" in d and "c0" in d:
                raise DomainError("give either c0 or c0_sq, not both")
            c0 = math.sqrt(float(d["c0_sq"])) if "c0_sq" in d else d["c0"]
            prof = cls.sqrt_affine(c0, d.get("c1", 1.0), dom)
        elif fam == "power_law":
            prof = cls.power_law(d["alpha"], dom or (0.0, math.inf))
        elif fam == "fading_affine":
            prof = cls.fading_affine(d["c0"], d.get("c1", 1.0), dom or (0.0, math.inf))
        elif fam == "affine":
            prof = cls.affine(d["c0"], d["c1"], dom)
        elif fam == "tabulated":
            return cls.tabulated(d["x"], d["sigma"], declared)
        else:
            raise DomainError(f"unknown sigma family {fam!r}")
        if declared is not None and Monotonicity(declared) is not prof.monotonicity:
            raise DomainError(f"declared monotonicity {declared} does not match {fam}")
        return prof


def _domain(dom):
    lo, hi = float(dom[0]), float(dom[1])
    if not lo < hi:
        raise DomainError(f"empty domain ({lo}, {hi})")
    return (lo, hi)


# ---------------------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoiseModel:
    """Density of the noise Z, with entropy, tails and moments."""

    family: str
    params: dict
    _dist: object = field(repr=False, compare=False)
    support: tuple = (-math.inf, math.inf)
    breakpoints: tuple = ()

    @classmethod
    def standard_gaussian(cls):
        return cls("standard_gaussian", {}, stats.norm())

    @classmethod
    def truncated_gaussian(cls, lo, hi):
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise DomainError("truncated_gaussian needs lo < hi")
        return cls("truncated_gaussian", {"lo": lo, "hi": hi},
                   stats.truncnorm(lo, hi), (lo, hi))

    @classmethod
    def uniform(cls, lo, hi):
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise DomainError("uniform needs lo < hi")
        return cls("uniform", {"lo": lo, "hi": hi},
                   stats.uniform(loc=lo, scale=hi - lo), (lo, hi))

    @classmethod
    def tabulated(cls, zs, density):
        """PCHIP-interpolated density on [z_0, z_n], zero outside, renormalized."""
        dist = _TabulatedDensity(np.asarray(zs, float), np.asarray(density, float))
        return cls("tabulated", {"z": list(map(float, zs)), "density": list(map(float, density))},
                   dist, (float(zs[0]), float(zs[-1])), tuple(float(z) for z in zs))

    @property
    def is_gaussian(self):
        return self.family == "standard_gaussian"

    def pdf(self, z):
        return self._dist.pdf(z)

    def logpdf(self, z):
        with np.errstate(divide="ignore"):
            return self._dist.logpdf(z)

    def cdf(self, z):
        return self._dist.cdf(z)

    def sf(self, z):
        return self._dist.sf(z)

    def ppf(self, q):
        return self._dist.ppf(q)

    def entropy(self, cfg: QuadratureConfig | None = None) -> float:
        """h(Z) in nats; closed form where scipy has one, quadrature otherwise."""
        if self.is_gaussian:
            return HALF_LOG_2PIE
        if self.family in ("truncated_gaussian", "uniform"):
            return float(self._dist.entropy())
        lo, hi = self.support

        def g(z):
            f = float(self.pdf(z))
            return -f * math.log(f) if f > 0 else 0.0

        return integrate(g, lo, hi, cfg, points=self.breakpoints)

    @property
    def sup_density(self) -> float:
        if self.is_gaussian:
            return 1.0 / math.sqrt(2.0 * math.pi)
        if self.family == "truncated_gaussian":
            lo, hi = self.support
            peak = min(max(0.0, lo), hi)
            return float(self.pdf(peak))
        if self.family == "uniform":
            return 1.0 / (self.support[1] - self.support[0])
        return self._dist.sup

    def moment(self, gamma: float = 1.0, cfg=None) -> float:
        """E|Z|^gamma."""
        if self.is_gaussian:
            return 2.0 ** (gamma / 2.0) * math.gamma((gamma + 1.0) / 2.0) / math.sqrt(math.pi)
        lo, hi = self.support
        pts = [p for p in (0.0, *self.breakpoints) if lo < p < hi]
        return integrate(lambda z: abs(z) ** gamma * float(self.pdf(z)), lo, hi, cfg, points=pts)

    def sample(self, rng, size=None):
        return self._dist.rvs(size=size, random_state=rng)

    def to_dict(self):
        d = {"family": self.family}
        d.update(self.params)
        return d

    @classmethod
    def from_dict(cls, d):
        fam = d["family"]
        if fam == "standard_gaussian":
            return cls.standard_gaussian()
        if fam == "truncated_gaussian":
            return cls.truncated_gaussian(_decode_float(d["lo"]), _decode_float(d["hi"]))
        if fam == "uniform":
            return cls.uniform(d["lo"], d["hi"])
        if fam == "tabulated":
            return cls.tabulated(d["z"], d["density"])
        raise DomainError(f"unknown noise family {fam!r}")


class _TabulatedDensity:
    """Minimal frozen-distribution interface over a PCHIP density table."""

    def __init__(self, zs, dens):
        if zs.ndim != 1 or zs.shape != dens.shape or len(zs) < 2:
            raise DomainError("tabulated density needs two equal-length 1-D arrays")
        if np.any(np.diff(zs) <= 0) or np.any(dens < 0):
            raise DomainError("tabulated density needs increasing z and nonnegative values")
        raw = PchipInterpolator(zs, dens, extrapolate=False)
        mass = float(raw.integrate(zs[0], zs[-1]))
        if not mass > 0:
            raise DomainError("tabulated density has zero mass")
        self._interp = PchipInterpolator(zs, dens / mass, extrapolate=False)
        self._cum = self._interp.antiderivative()
        self.lo, self.hi = float(zs[0]), float(zs[-1])
        self.sup = float(np.max(dens / mass))
        grid = np.linspace(self.lo, self.hi, 4097)
        self._grid, self._cgrid = grid, np.maximum.accumulate(self.cdf(grid))

    def pdf(self, z):
        z = np.asarray(z, float)
        v = np.nan_to_num(self._interp(z), nan=0.0)
        v = np.maximum(v, 0.0)
        return v if v.ndim else float(v)

    def logpdf(self, z):
        return np.log(self.pdf(z))

    def cdf(self, z):
        z = np.asarray(z, float)
        v = self._cum(np.clip(z, self.lo, self.hi)) - self._cum(self.lo)
        v = np.clip(v, 0.0, 1.0)
        return v if v.ndim else float(v)

    def sf(self, z):
        return 1.0 - self.cdf(z)

    def ppf(self, q):
        return np.interp(q, self._cgrid, self._grid)

    def rvs(self, size=None, random_state=None):
        rng = np.random.default_rng(random_state)
        return self.ppf(rng.random(size))


# ---------------------------------------------------------------------------- constraints


class ConstraintKind(str, enum.Enum):
    PEAK = "peak"    # |X| <= bound (|X| <= A with X in support)
    MEAN = "mean"    # E X <= bound
    POWER = "power"  # E X^2 <= bound


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    bound: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        b = float(self.bound)
        if not math.isfinite(b):
            raise DomainError("constraint bound must be finite")
        if self.kind is not ConstraintKind.MEAN and b <= 0:
            raise DomainError(f"{self.kind.value} bound must be positive")
        object.__setattr__(self, "bound", b)

    def cost(self, x):
        """g(x) with feasibility E[g(X)] <= 0 (pointwise g <= 0 for peak)."""
        x = np.asarray(x, dtype=float)
        if self.kind is ConstraintKind.PEAK:
            return np.abs(x) - self.bound
        if self.kind is ConstraintKind.MEAN:
            return x - self.bound
        return x * x - self.bound

    def to_dict(self):
        return {"kind": self.kind.value, "bound": self.bound}

    @classmethod
    def peak(cls, a):
        return cls(ConstraintKind.PEAK, a)

    @classmethod
    def mean(cls, a):
        return cls(ConstraintKind.MEAN, a)

    @classmethod
    def power(cls, p):
        return cls(ConstraintKind.POWER, p)


# ---------------------------------------------------------------------------- spec


@dataclass(frozen=True)
class ChannelSpec:
    """sigma profile + noise law + input support + cost constraints.

    Interior zeros of sigma are rejected; sigma may vanish only at the
    support endpoints. ``SigmaProfile.constant(0)`` is the one exception and
    stands for the noiseless channel Y = X (only :func:`sample` accepts it).
    """

    sigma: SigmaProfile
    noise: NoiseModel
    support: tuple
    constraints: tuple = ()

    def __post_init__(self):
        lo, hi = float(self.support[0]), float(self.support[1])
        if not lo < hi:
            raise DomainError(f"support ({lo}, {hi}) is empty")
        if lo < self.sigma.lo or hi > self.sigma.hi:
            raise DomainError(
                f"support ({lo}, {hi}) leaves the sigma domain {self.sigma.domain}"
            )
        object.__setattr__(self, "support", (lo, hi))
        object.__setattr__(self, "constraints", tuple(
            c if isinstance(c, Constraint) else Constraint(**c) for c in self.constraints
        ))
        if not self.is_noiseless:
            probe = np.asarray(self.sigma(_interior_probe(lo, hi)))
            if np.any(~(probe > 0)):
                raise DomainError("sigma vanishes or is undefined inside the support")
        for c in self.constraints:
            v = c.cost(np.array([lo, hi, 0.5 * (lo + hi)] if math.isfinite(lo + hi) else [0.0]))
            if np.any(np.isnan(v)):
                raise DomainError(f"constraint {c} not evaluable on the support")

    @property
    def is_noiseless(self):
        return self.sigma.family == "constant" and self.sigma.params["c"] == 0.0

    @property
    def bounded(self):
        return math.isfinite(self.support[0]) and math.isfinite(self.support[1])

    def constraint(self, kind):
        kind = ConstraintKind(kind)
        found = [c for c in self.constraints if c.kind is kind]
        return found[0] if found else None

    def effective_support(self):
        """Support intersected with every peak constraint."""
        lo, hi = self.support
        for c in self.constraints:
            if c.kind is ConstraintKind.PEAK:
                lo, hi = max(lo, -c.bound), min(hi, c.bound)
        if not lo < hi:
            raise DomainError("peak constraint leaves an empty support")
        return lo, hi

    def contains(self, x):
        lo, hi = self.support
        return lo <= x <= hi

    def sigma_max(self):
        lo, hi = self.support
        vals = np.asarray(self.sigma(_interior_probe(lo, hi, 1025)))
        ends = [self.sigma.limit(e) for e in (lo, hi)]
        return float(np.nanmax(np.concatenate([vals, ends])))

    def with_(self, **changes):
        d = {"sigma": self.sigma, "noise": self.noise, "support": self.support,
             "constraints": self.constraints}
        d.update(changes)
        return ChannelSpec(**d)

    # -- JSON -----------------------------------------------------------------

    def to_dict(self):
        return {
            "sigma": self.sigma.to_dict(),
            "noise": self.noise.to_dict(),
            "support": [_encode_float(self.support[0]), _encode_float(self.support[1])],
            "constraints": [c.to_dict() for c in self.constraints],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            sigma=SigmaProfile.from_dict(d["sigma"]),
            noise=NoiseModel.from_dict(d.get("noise", {"family": "standard_gaussian"})),
            support=tuple(_decode_float(v) for v in d["support"]),
            constraints=tuple(Constraint(**c) for c in d.get("constraints", ())),
        )

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def fingerprint(self):
        return self.to_json(sort_keys=True)


# ---------------------------------------------------------------------------- inputs


@dataclass(frozen=True)
class DiscreteInput:
    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        pr = np.asarray(self.probs, dtype=float).ravel()
        if pts.shape != pr.shape or np.any(pr < 0) or abs(pr.sum() - 1.0) > 1e-9:
            raise DomainError("discrete input needs matching points and a pmf")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", pr / pr.sum())

    def expect(self, fn):
        return float(np.sum(self.probs * np.asarray(fn(self.points), dtype=float)))

    def sample(self, rng, size):
        return rng.choice(self.points, size=size, p=self.probs)


@dataclass(frozen=True)
class DensityInput:
    pdf: Callable
    support: tuple
    sampler: Callable | None = None  # (rng, size) -> array
    cfg: QuadratureConfig = DEFAULT_CONFIG

    @classmethod
    def from_scipy(cls, dist, support=None):
        lo, hi = dist.support() if support is None else support
        return cls(lambda x: float(dist.pdf(x)), (float(lo), float(hi)),
                   lambda rng, size: dist.rvs(size=size, random_state=rng))

    def expect(self, fn):
        lo, hi = self.support
        return integrate(lambda x: float(fn(x)) * float(self.pdf(x)), lo, hi, self.cfg)

    def sample(self, rng, size):
        if self.sampler is None:
            raise DomainError("density input has no sampler")
        return np.asarray(self.sampler(rng, size), dtype=float)


# ---------------------------------------------------------------------------- operations


def _check_x(spec, x):
    if not spec.contains(x):
        raise DomainError(f"x={x} outside the support {spec.support}")
    s = spec.sigma(x)
    if not s > 0 or not math.isfinite(s):
        raise DomainError(f"sigma({x}) = {s} is not a positive finite scale")
    return s


def conditional_density(spec: ChannelSpec, x: float, y: float) -> float:
    """f_{Y|X}(y|x) = f_Z((y - x) / sigma(x)) / sigma(x)."""
    s = _check_x(spec, float(x))
    return float(spec.noise.pdf((float(y) - x) / s)) / s


def conditional_density_grid(spec: ChannelSpec, xs, ys):
    """Vectorized f_{Y|X} on the outer grid ``xs x ys`` (no domain checks)."""
    xs = np.asarray(xs, float)[:, None]
    s = np.asarray(spec.sigma(xs.ravel()), float)[:, None]
    return spec.noise.pdf((np.asarray(ys, float)[None, :] - xs) / s) / s


def conditional_entropy(spec: ChannelSpec, input) -> float:
    """h(Y|X) = E[log sigma(X)] + h(Z) in nats."""
    if spec.is_noiseless:
        raise DomainError("h(Y|X) is undefined for the noiseless channel")
    hz = spec.noise.entropy()
    if not math.isfinite(hz):
        raise NonFinite("h(Z) is not finite")
    if isinstance(input, DiscreteInput):
        for p in input.points:
            _check_x(spec, p)
        e = input.expect(lambda x: np.log(spec.sigma(x)))
    else:
        lo = max(input.support[0], spec.support[0])
        hi = min(input.support[1], spec.support[1])

        def g(x):
            f = float(input.pdf(x))
            return f * math.log(spec.sigma(x)) if f > 0 else 0.0

        e = integrate(g, lo, hi, input.cfg)
    if not math.isfinite(e):
        raise NonFinite("E[log sigma(X)] diverges")
    return e + hz


def sample(spec: ChannelSpec, x: float, rng_seed=None, size=None):
    """Draw Y = x + sigma(x) Z; deterministic for a fixed seed."""
    x = float(x)
    if not spec.contains(x):
        raise DomainError(f"x={x} outside the support {spec.support}")
    s = spec.sigma(x)
    rng = np.random.default_rng(rng_seed)
    if s == 0.0:
        return x if size is None else np.full(size, x)
    if not s > 0 or not math.isfinite(s):
        raise DomainError(f"sigma({x}) = {s} is not a valid scale")
    z = spec.noise.sample(rng, size)
    return x + s * z if size is not None else float(x + s * z)
