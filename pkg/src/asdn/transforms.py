"""Monotone reparametrizations phi and psi built from 1/sigma, plus the entropy-change self-test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import Monotonicity, SigmaProfile
from .errors import DomainError, NoConvergence, NonMonotoneSigma
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, differential_entropy, integrate

BISECTION_STEPS = 60


def default_base_point(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _integral(integrand, anti, c, x, cfg):
    """int_c^x integrand, preferring a closed-form antiderivative.

    A divergent improper integral toward an endpoint is returned as +/-inf.
    """
    if x == c:
        return 0.0
    if anti is not None:
        with np.errstate(all="ignore"):
            v = float(anti(x)) - float(anti(c))
        if not math.isnan(v):
            return v
    try:
        return integrate(lambda t: float(integrand(t)), c, x, cfg)
    except NoConvergence:
        return math.inf if x > c else -math.inf


def _sign_for(profile: SigmaProfile) -> float:
    if profile.monotonicity is Monotonicity.INCREASING:
        return 1.0
    if profile.monotonicity is Monotonicity.DECREASING:
        return -1.0
    raise NonMonotoneSigma("psi needs a monotone sigma profile")


@dataclass(frozen=True)
class MonotoneTransform:
    """A strictly increasing map of an interval, with numerical inverse.

    ``kind`` is ``"phi"`` (int_c^x dt/sigma), ``"psi"`` (phi plus
    +/- delta log sigma) or ``"sigma_integral"`` (int_c^x sigma dt).
    """

    profile: SigmaProfile
    kind: str
    interval: tuple
    c: float
    delta: float = 0.0
    cfg: QuadratureConfig = DEFAULT_CONFIG

    @classmethod
    def phi(cls, profile, interval=None, c=None, cfg=DEFAULT_CONFIG):
        lo, hi = interval or profile.domain
        return cls(profile, "phi", (lo, hi), default_base_point(lo, hi) if c is None else c, 0.0, cfg)

    @classmethod
    def psi(cls, profile, delta, interval=None, c=None, cfg=DEFAULT_CONFIG):
        if not delta > 0:
            raise DomainError("psi needs delta > 0")
        _sign_for(profile)
        lo, hi = interval or profile.domain
        return cls(profile, "psi", (lo, hi), default_base_point(lo, hi) if c is None else c,
                   float(delta), cfg)

    @classmethod
    def sigma_integral(cls, profile, interval=None, c=None, cfg=DEFAULT_CONFIG):
        lo, hi = interval or profile.domain
        return cls(profile, "sigma_integral", (lo, hi),
                   default_base_point(lo, hi) if c is None else c, 0.0, cfg)

    def _base(self, x):
        if self.kind == "sigma_integral":
            return _integral(self.profile, self.profile.antiderivative(), self.c, x, self.cfg)
        return _integral(lambda t: 1.0 / self.profile(t), self.profile.inv_antiderivative(),
                         self.c, x, self.cfg)

    def forward(self, x: float) -> float:
        x = float(x)
        v = self._base(x)
        if self.kind == "psi":
            s = self.profile.limit(x) if x in self.interval else self.profile(x)
            with np.errstate(divide="ignore"):
                v += _sign_for(self.profile) * self.delta * float(np.log(s))
        return v

    __call__ = forward

    def image(self):
        """(forward(lo+), forward(hi-)) as extended reals."""
        return self.forward(self.interval[0]), self.forward(self.interval[1])

    def image_length(self) -> float:
        a, b = self.image()
        if math.isinf(a) or math.isinf(b):
            return math.inf
        return b - a

    def _bracket(self, v):
        lo, hi = self.interval
        c = self.c
        if math.isinf(lo):
            step = 1.0
            a = c - step
            while self.forward(a) > v:
                step *= 2.0
                a = c - step
                if step > 1e300:
                    raise DomainError(f"value {v} below the image")
            lo = a
        if math.isinf(hi):
            step = 1.0
            b = c + step
            while self.forward(b) < v:
                step *= 2.0
                b = c + step
                if step > 1e300:
                    raise DomainError(f"value {v} above the image")
            hi = b
        return lo, hi

    def inverse(self, v: float) -> float:
        """Bisection on the increasing forward map (60 halvings)."""
        v = float(v)
        lo, hi = self._bracket(v)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if self.forward(mid) < v:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def phi(profile: SigmaProfile, c: float, x: float, cfg=DEFAULT_CONFIG) -> float:
    """int_c^x dt / sigma(t)."""
    return MonotoneTransform.phi(profile, c=c, cfg=cfg).forward(x)


def psi(profile: SigmaProfile, delta: float, c: float, x: float, cfg=DEFAULT_CONFIG) -> float:
    """+/- delta log sigma(x) + int_c^x dt / sigma(t); sign + for increasing sigma."""
    return MonotoneTransform.psi(profile, delta, c=c, cfg=cfg).forward(x)


def image_length(transform: MonotoneTransform) -> float:
    return transform.image_length()


def entropy_transform_check(profile: SigmaProfile, input_density, c=None, g: str = "sigma",
                            cfg=DEFAULT_CONFIG):
    """Both sides of h(X) + E[log g(X)] = h(G(X)), with G(x) = int_c^x g.

    ``g`` is ``"sigma"`` or ``"inv_sigma"``. The left side is computed in x
    coordinates; the right side from the change-of-variables density of
    G(X) in its own coordinates, using the bisection inverse.
    """
    lo, hi = input_density.support
    if g == "sigma":
        tr = MonotoneTransform.sigma_integral(profile, (lo, hi), c, cfg)
        gfun: Callable = profile
    elif g == "inv_sigma":
        tr = MonotoneTransform.phi(profile, (lo, hi), c, cfg)
        gfun = lambda x: 1.0 / profile(x)
    else:
        raise ValueError("g must be 'sigma' or 'inv_sigma'")

    hx = differential_entropy(input_density.pdf, (lo, hi), cfg)

    def log_g_weighted(x):
        f = float(input_density.pdf(x))
        return f * math.log(gfun(x)) if f > 0 else 0.0

    lhs = hx + integrate(log_g_weighted, lo, hi, cfg)

    t_lo, t_hi = tr.image()

    def pdf_t(t):
        x = tr.inverse(t)
        return float(input_density.pdf(x)) / float(gfun(x))

    rhs = differential_entropy(pdf_t, (t_lo, t_hi), cfg, center=tr.forward(tr.c))
    return lhs, rhs
