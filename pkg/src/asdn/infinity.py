"""Finiteness hypotheses, infinite-capacity detection and the interval-packing witness."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .channel import ChannelSpec, DiscreteInput, _interior_probe
from .errors import ASDNError, DomainError, HypothesisFailed, StepFailed
from .quadrature import binary_entropy
from .report import HypothesisResult, Status, _jsonify

APPROACH_RATIO = 0.5
APPROACH_TERMS = 60
ZERO_THRESHOLD = 1e-9
INF_THRESHOLD = 1e9
DEFAULT_AB = (0.5, 2.0)
_TAIL_DELTA = 1e-6


# ---------------------------------------------------------------------------- finiteness


def _sigma_samples(spec, lo, hi, n=4097):
    xs = _interior_probe(lo, hi, n)
    vals = np.asarray(spec.sigma(xs), dtype=float)
    ends = [(e, spec.sigma.limit(e)) for e in (lo, hi) if math.isfinite(e)]
    if ends:
        xs = np.concatenate([xs, [e for e, _ in ends]])
        vals = np.concatenate([vals, [v for _, v in ends]])
    return xs, vals


def check_finiteness_hypotheses(spec: ChannelSpec, gamma: float = 1.0) -> list:
    """The four bullets of the finiteness theorem, each Verified or Failed."""
    out = []
    lo, hi = spec.effective_support()
    bounded = math.isfinite(lo) and math.isfinite(hi)
    ends_in = bounded and all(0 < spec.sigma.limit(e) < math.inf for e in (lo, hi))
    if not bounded:
        out.append(HypothesisResult("support_closed_bounded", Status.FAILED,
                                    "input support is unbounded", {"support": [lo, hi]}))
    elif not ends_in:
        out.append(HypothesisResult("support_closed_bounded", Status.FAILED,
                                    "sigma degenerates at an endpoint, so the endpoint is excluded",
                                    {"support": [lo, hi]}))
    else:
        out.append(HypothesisResult("support_closed_bounded", Status.VERIFIED,
                                    f"support [{lo:.9g}, {hi:.9g}]"))

    if spec.is_noiseless:
        out.append(HypothesisResult("sigma_bounded", Status.FAILED, "sigma is identically 0"))
    else:
        probe_lo = lo if math.isfinite(lo) else -1e12
        probe_hi = hi if math.isfinite(hi) else 1e12
        xs, vals = _sigma_samples(spec, probe_lo, probe_hi)
        if not math.isfinite(lo):
            vals = np.append(vals, spec.sigma.limit(lo))
            xs = np.append(xs, lo)
        if not math.isfinite(hi):
            vals = np.append(vals, spec.sigma.limit(hi))
            xs = np.append(xs, hi)
        vals = np.where(np.isnan(vals), 0.0, vals)
        i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
        s_lo, s_hi = float(vals[i_min]), float(vals[i_max])
        wit = {"sigma_min": s_lo, "x_min": float(xs[i_min]),
               "sigma_max": s_hi, "x_max": float(xs[i_max])}
        if s_lo > 0 and math.isfinite(s_hi):
            out.append(HypothesisResult("sigma_bounded", Status.VERIFIED,
                                        f"{s_lo:.6g} <= sigma <= {s_hi:.6g}", wit))
        else:
            why = "inf sigma = 0" if not s_lo > 0 else "sup sigma = inf"
            out.append(HypothesisResult("sigma_bounded", Status.FAILED, why, wit))

    m = spec.noise.sup_density
    mom = spec.noise.moment(gamma)
    ok = math.isfinite(m) and math.isfinite(mom)
    out.append(HypothesisResult("noise_regular", Status.VERIFIED if ok else Status.FAILED,
                                f"sup f_Z = {m:.6g}, E|Z|^{gamma:g} = {mom:.6g}",
                                {"sup_density": m, "moment": mom, "gamma": gamma}))

    costs = [c for c in spec.constraints if c.kind.value != "peak"]
    if not costs or bounded:
        out.append(HypothesisResult("constraints_bounded", Status.VERIFIED,
                                    "no cost functions" if not costs else "continuous costs on a bounded set"))
    else:
        out.append(HypothesisResult("constraints_bounded", Status.FAILED,
                                    "cost functions are unbounded on an unbounded support",
                                    {"kinds": [c.kind.value for c in costs]}))
    return out


# ---------------------------------------------------------------------------- infinite capacity


@dataclass
class Detection:
    detected: bool
    endpoint: float | None = None
    side: str | None = None          # "left" | "right"
    direction: str | None = None     # "zero" | "infinity"
    local_sign: int = 0              # +1 sigma increasing near the endpoint, -1 decreasing
    region: tuple | None = None      # open interval E on which sigma is monotone
    hypotheses: list = field(default_factory=list)
    sequence: list = field(default_factory=list)

    def __bool__(self):
        return self.detected

    def to_dict(self):
        return _jsonify({
            "detected": self.detected, "endpoint": self.endpoint, "side": self.side,
            "direction": self.direction, "local_sign": self.local_sign,
            "region": list(self.region) if self.region else None,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "sequence": [list(p) for p in self.sequence[-5:]],
        })


def _approach(e, ref):
    k = np.arange(1, APPROACH_TERMS + 1)
    if math.isfinite(e):
        return e + (ref - e) * APPROACH_RATIO ** k
    return ref + math.copysign(1.0, e) * (1.0 / APPROACH_RATIO) ** k


def _reference(lo, hi):
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _noise_hypotheses(spec):
    hs = []
    try:
        hz = spec.noise.entropy()
    except ASDNError:
        hz = math.nan
    hs.append(HypothesisResult("noise_entropy_finite",
                               Status.VERIFIED if math.isfinite(hz) else Status.FAILED,
                               f"h(Z) = {hz:.9g}"))
    up, down = spec.noise.sf(_TAIL_DELTA), spec.noise.cdf(-_TAIL_DELTA)
    ok = up > 0 and down > 0
    hs.append(HypothesisResult("two_sided_tails", Status.VERIFIED if ok else Status.FAILED,
                               f"Pr(Z > d) = {up:.6g}, Pr(Z < -d) = {down:.6g}, d = {_TAIL_DELTA:g}"))
    return hs


def _classify_endpoint(spec, e, ref):
    """(direction, local_sign, sequence) for one endpoint, or (None, 0, seq)."""
    xs = _approach(e, ref)
    vals = np.asarray(spec.sigma(xs), dtype=float)
    seq = list(zip(xs.tolist(), vals.tolist()))
    lim = spec.sigma.limit(e)
    tail = vals[-20:]
    finite_tail = tail[np.isfinite(tail)]
    dec = len(finite_tail) > 1 and np.all(np.diff(finite_tail) <= 0) and finite_tail[0] > finite_tail[-1]
    inc = len(finite_tail) > 1 and np.all(np.diff(finite_tail) >= 0) and finite_tail[0] < finite_tail[-1]
    direction = None
    if lim == 0.0 or (dec and vals[-1] < ZERO_THRESHOLD):
        direction = "zero"
    elif lim == math.inf or (inc and vals[-1] > INF_THRESHOLD):
        direction = "infinity"
    if direction is None:
        return None, 0, seq
    # sign of d sigma / dx near the endpoint
    moving_right = (e > ref)
    shrinking = direction == "zero"
    sign = 1 if moving_right != shrinking else -1
    return direction, sign, seq


def _monotone_region(spec, e, far, sign):
    """Longest sampled run from the endpoint toward ``far`` on which sigma is monotone."""
    lo, hi = (e, far) if e < far else (far, e)
    ref = _reference(lo, hi)
    xs = _interior_probe(lo if math.isfinite(lo) else ref - 1e6, hi if math.isfinite(hi) else ref + 1e6, 2049)
    vals = np.asarray(spec.sigma(xs), dtype=float)
    d = np.diff(vals) * sign
    bad = np.nonzero(d < -1e-12 * np.maximum(1.0, np.abs(vals[1:])))[0]
    if len(bad) == 0:
        return (lo, hi)
    if e < far:
        return (lo, float(xs[bad[0]]))
    return (float(xs[bad[-1] + 1]), hi)


def detect_infinite_capacity(spec: ChannelSpec) -> Detection:
    """Look for sigma -> 0 or sigma -> inf at an endpoint of the support.

    Each endpoint is approached along a geometric sequence (ratio 1/2, 60
    terms); the analytic one-sided limit is used when the profile provides
    it. A detection also needs sigma monotone near the endpoint, |h(Z)| <
    inf, and positive noise mass on both sides of zero.
    """
    lo, hi = spec.effective_support()
    noise_h = _noise_hypotheses(spec)
    if spec.is_noiseless:
        return Detection(False, hypotheses=noise_h)
    ref = _reference(lo, hi)
    for e, side in ((lo, "left"), (hi, "right")):
        direction, sign, seq = _classify_endpoint(spec, e, ref)
        if direction is None:
            continue
        other = hi if e == lo else lo
        region = _monotone_region(spec, e, other if math.isfinite(other) else ref, sign)
        mono_ok = region[0] < region[1]
        hyps = [HypothesisResult("sigma_monotone_near_endpoint",
                                 Status.VERIFIED if mono_ok else Status.FAILED,
                                 f"monotone on ({region[0]:.6g}, {region[1]:.6g})")] + noise_h
        ok = all(h.status is Status.VERIFIED for h in hyps)
        det = Detection(ok, e, side, direction, sign, region, hyps, seq)
        if ok:
            return det
    return Detection(False, hypotheses=noise_h)


# ---------------------------------------------------------------------------- witness


def heavy_tailed_pmf(n: int) -> np.ndarray:
    """p_i proportional to 1 / (i log^2(i+1)), i = 1..n (divergent entropy as n -> inf)."""
    i = np.arange(1, n + 1, dtype=float)
    w = 1.0 / (i * np.log1p(i) ** 2)
    return w / w.sum()


def pmf_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def event_probability(spec, a, b, sign):
    """Pr(a < Z < b) for increasing sigma, Pr(-b < Z < -a) for decreasing."""
    if sign > 0:
        return float(spec.noise.cdf(b) - spec.noise.cdf(a))
    return float(spec.noise.cdf(-a) - spec.noise.cdf(-b))


@dataclass
class PackingWitness:
    a: float
    b: float
    points: np.ndarray
    sigmas: np.ndarray
    intervals: np.ndarray  # n x 2 open intervals
    pmf: np.ndarray
    residuals: np.ndarray  # |h(x_{i+1}) - T_i| / max(1, |T_i|) for steps 1..n-1
    sign: int
    theta: float

    @property
    def n(self):
        return len(self.points)

    def max_residual(self):
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0

    def overlapping_pairs(self):
        """Exhaustive pairwise scan; rounding-level contact of touching ends is not an overlap."""
        L, R = self.intervals[:, 0], self.intervals[:, 1]
        inter = np.minimum(R[:, None], R[None, :]) - np.maximum(L[:, None], L[None, :])
        scale = np.maximum(np.abs(R[:, None]), np.abs(R[None, :]))
        bad = inter > 16 * np.finfo(float).eps * scale
        np.fill_diagonal(bad, False)
        i, j = np.nonzero(np.triu(bad))
        return list(zip(i.tolist(), j.tolist()))

    def pairwise_disjoint(self):
        return not self.overlapping_pairs()

    def estimate(self):
        """Pr(event) H(p) - H2(Pr(event))."""
        return self.theta * pmf_entropy(self.pmf) - binary_entropy(self.theta)

    def as_input(self):
        return DiscreteInput(self.points, self.pmf)


def _solve_step(h, target, lo, hi, index):
    """Root of h(t) = target on (lo, hi) with h increasing; brackets grow toward open ends."""
    flo, fhi = h(lo) - target, h(hi) - target
    if not (flo < 0 < fhi):
        raise StepFailed(f"cannot bracket step {index}: h(lo)-T={flo:.3g}, h(hi)-T={fhi:.3g}", index)
    return brentq(lambda t: h(t) - target, lo, hi, xtol=1e-322, rtol=4 * np.finfo(float).eps,
                  maxiter=500)


def build_packing(spec: ChannelSpec, a: float = DEFAULT_AB[0], b: float = DEFAULT_AB[1],
                  n: int = 100, x1: float | None = None,
                  detection: Detection | None = None) -> PackingWitness:
    """Points x_1..x_n whose noise windows are disjoint.

    Increasing sigma with sigma -> 0 at the left end walks left with
    x_{i+1} + b sigma(x_{i+1}) = x_i + a sigma(x_i); sigma -> inf at the
    right end walks right with x_{i+1} + a sigma(x_{i+1}) = x_i + b sigma(x_i).
    Decreasing sigma is the mirror image (windows (x - b sigma, x - a sigma)).
    """
    if not 0 < a < b:
        raise DomainError("need 0 < a < b")
    if n < 1:
        raise DomainError("need n >= 1")
    det = detection if detection is not None else detect_infinite_capacity(spec)
    if not det.detected:
        raise DomainError("no infinite-capacity endpoint detected for this channel")
    r = det.local_sign
    theta = event_probability(spec, a, b, r)
    if not theta > 0:
        raise DomainError("the noise event has zero probability for this (a, b)")
    c_lo, c_hi = det.region
    # t = r x makes sigma increasing in t
    st = lambda t: float(spec.sigma(r * t))
    t_lo, t_hi = sorted((r * c_lo, r * c_hi))
    t_end = r * det.endpoint
    walk_left = (t_end == t_lo)
    if x1 is None:
        x1 = _reference(c_lo, c_hi)
    t = r * float(x1)
    if not t_lo < t < t_hi:
        raise DomainError("x1 must lie inside the monotone region")

    def limit_t(tt):
        return spec.sigma.limit(r * tt)

    ts, residuals = [t], []
    for i in range(1, n):
        s = st(t)
        if walk_left:
            h = lambda u: u + b * (st(u) if u != t_lo else limit_t(t_lo))
            target = t + a * s
            lo = t_lo
            if not math.isfinite(lo):
                lo = t - 1.0
                while h(lo) >= target:
                    lo = t - 2.0 * (t - lo)
                    if not math.isfinite(lo):
                        raise StepFailed("left bracket diverged", i)
            nxt = _solve_step(h, target, lo, t, i)
        else:
            h = lambda u: u + a * st(u)
            target = t + b * s
            hi = t + 0.5 * (t_hi - t) if math.isfinite(t_hi) else t + 1.0
            while h(hi) <= target:
                if math.isfinite(t_hi):
                    if hi == t_hi or t_hi - hi <= 0:
                        raise StepFailed("right bracket reached the endpoint", i)
                    hi = hi + 0.5 * (t_hi - hi)
                    if hi == t_hi:
                        raise StepFailed("right bracket reached the endpoint", i)
                else:
                    hi = t + 2.0 * (hi - t)
                    if not math.isfinite(hi):
                        raise StepFailed("right bracket diverged", i)
            nxt = _solve_step(h, target, t, hi, i)
        sn = st(nxt)
        if not (0 < sn < math.inf) or nxt == t:
            raise StepFailed(f"sigma left (0, inf) or the sequence stalled at step {i} "
                             "(floating-point range exhausted)", i)
        residuals.append(abs(h(nxt) - target) / max(1.0, abs(target)))
        ts.append(nxt)
        t = nxt
    ts = np.asarray(ts)
    xs = r * ts
    sig = np.asarray([float(spec.sigma(x)) for x in xs])
    if r > 0:
        iv = np.column_stack([xs + a * sig, xs + b * sig])
    else:
        iv = np.column_stack([xs - b * sig, xs - a * sig])
    return PackingWitness(float(a), float(b), xs, sig, iv, heavy_tailed_pmf(len(xs)),
                          np.asarray(residuals), r, theta)


def max_buildable(spec: ChannelSpec, a=DEFAULT_AB[0], b=DEFAULT_AB[1], limit=100_000,
                  detection=None) -> int:
    """How many packing points fit in double precision (up to ``limit``)."""
    try:
        return build_packing(spec, a, b, limit, detection=detection).n
    except StepFailed as exc:
        return exc.index


def witness_exact_mi(spec: ChannelSpec, witness: PackingWitness, m: int = 4096) -> float:
    """Mutual information of the witness input on a fine output discretization."""
    from .oracle import discretize_points, mutual_information

    ch = discretize_points(spec, witness.points, m)
    return mutual_information(ch, witness.pmf)


def witness_mi_growth(spec: ChannelSpec, n_list, a=DEFAULT_AB[0], b=DEFAULT_AB[1],
                      cross_check_n: int | None = 4, build_limit: int = 1000):
    """[(n, Pr(E) H(p_1..n) - H2(Pr(E)))] for the heavy-tailed pmf on the packing.

    The packing is constructed (and checked for disjointness) up to
    ``min(n, build_limit)`` points; beyond that the estimate depends only
    on the pmf and Pr(E). With ``cross_check_n`` the estimate at that size
    is compared with the exact discretized mutual information.
    """
    det = detect_infinite_capacity(spec)
    if not det.detected:
        raise DomainError("no infinite-capacity endpoint detected for this channel")
    theta = event_probability(spec, a, b, det.local_sign)
    h2 = binary_entropy(theta)
    built = build_packing(spec, a, b, max(1, min(max(n_list), build_limit)), detection=det)
    if not built.pairwise_disjoint():
        raise HypothesisFailed("packing intervals overlap", ["pairwise_disjoint"])
    out = []
    for n in n_list:
        out.append((int(n), theta * pmf_entropy(heavy_tailed_pmf(int(n))) - h2))
    if cross_check_n:
        w = build_packing(spec, a, b, cross_check_n, detection=det)
        exact = witness_exact_mi(spec, w)
        if exact < w.estimate() - 1e-3:
            raise HypothesisFailed(
                f"exact MI {exact:.6g} below the estimate {w.estimate():.6g}", ["cross_check"])
    return out
