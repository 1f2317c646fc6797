"""Command-line front end: ``asdn bounds | oracle | analyze | witness | fig2 | fig3 | sweep``."""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, Constraint, NoiseModel, SigmaProfile
from .errors import (ASDNError, DomainError, UnboundedSupport,
                     UnsupportedConstraintCombination)
from .infinity import (build_packing, check_finiteness_hypotheses, detect_infinite_capacity,
                       witness_mi_growth)
from .lower import lower_bound_maj, lower_bound_maj_constrained, lower_bound_psi
from .oracle import (OUTPUT_STABILITY_TOL, DiscreteInput, blahut_arimoto, discretize,
                     mc_mutual_information, output_stability)
from .quadrature import QuadratureConfig
from .report import _jsonify
from .upper import upper_bound_closed_form

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
_USAGE_ERRORS = (OSError, json.JSONDecodeError, KeyError, TypeError, DomainError,
                 UnboundedSupport, UnsupportedConstraintCombination)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise _UsageError(message)


def _workers():
    try:
        return max(1, int(os.environ.get("ASDN_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


def _pool_map(fn, items):
    """Map in a thread pool capped by ASDN_THREADS; results keep input order."""
    items = list(items)
    w = min(_workers(), len(items)) or 1
    if w == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.9g}"


def write_csv(rows, header, out=None):
    """CSV with a header row and 9 significant digits; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def _emit(obj, out=None):
    text = json.dumps(_jsonify(obj), indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cfg(args):
    return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


# ---------------------------------------------------------------------------- figures


def fig2_spec(c0_sq, u=5.0, alpha=2.5):
    return ChannelSpec(SigmaProfile.sqrt_affine(math.sqrt(c0_sq), 1.0),
                       NoiseModel.standard_gaussian(), (0.0, u), (Constraint.mean(alpha),))


def fig3_spec(A, c0=1.0):
    return ChannelSpec(SigmaProfile.sqrt_affine(c0, 1.0), NoiseModel.standard_gaussian(), (0.0, A))


def run_fig2(c0_sq_values, u=5.0, alpha=2.5, n=128, m=1024, tol=1e-7):
    """Rows (c0_sq, capacity_ba, upper_symkl), sorted by c0_sq."""
    vals = sorted(float(v) for v in c0_sq_values)
    if not vals or any(not v > 0 for v in vals):
        raise DomainError("c0_sq values must be positive")

    def row(c0_sq):
        spec = fig2_spec(c0_sq, u, alpha)
        est = blahut_arimoto(discretize(spec, n, m), tol=tol)
        up = upper_bound_closed_form(spec)
        return {"c0_sq": c0_sq, "capacity_ba": est.value, "upper_symkl": up.value}

    return _pool_map(row, vals)


def run_fig3(A_values, c0=1.0, n=128, m=1024, tol=1e-7, oracle=True):
    """Rows (A, lower_maj, lower_psi, capacity_ba), sorted by A."""
    vals = sorted(float(v) for v in A_values)
    if not vals or any(not v > 0 for v in vals):
        raise DomainError("A values must be positive")

    def row(A):
        spec = fig3_spec(A, c0)
        r = {"A": A, "lower_maj": lower_bound_maj(spec).value,
             "lower_psi": lower_bound_psi(spec).value, "capacity_ba": math.nan}
        if oracle:
            r["capacity_ba"] = blahut_arimoto(discretize(spec, n, m), tol=tol).value
        return r

    return _pool_map(row, vals)


# ---------------------------------------------------------------------------- sweep


@dataclass
class SweepPlan:
    param: str
    values: list
    compute: tuple = ("bounds",)
    out: str | None = None

    def __post_init__(self):
        vals = [float(v) for v in self.values]
        if not vals or any(not math.isfinite(v) for v in vals):
            raise DomainError("sweep values must be a nonempty list of finite numbers")
        self.values = vals
        bad = set(self.compute) - {"bounds", "oracle", "analyze"}
        if bad:
            raise DomainError(f"unknown computations {sorted(bad)}")

    def apply(self, spec_dict, value):
        """Copy of ``spec_dict`` with the parameter path set to ``value``."""
        d = copy.deepcopy(spec_dict)
        parts = self.param.split(".")
        if parts[0] == "support" and len(parts) == 2:
            idx = {"l": 0, "lo": 0, "u": 1, "hi": 1}.get(parts[1])
            if idx is None:
                raise DomainError(f"unknown support field {parts[1]!r}")
            d["support"][idx] = value
            return d
        if parts[0] == "constraints" and len(parts) == 2:
            for c in d.get("constraints", []):
                if c["kind"] == parts[1]:
                    c["bound"] = value
                    return d
            raise DomainError(f"spec has no {parts[1]} constraint")
        node = d
        for key in parts[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise DomainError(f"parameter path {self.param!r} does not resolve")
            node = node[key]
        leaf = parts[-1]
        aliases = {"c0_sq": "c0", "c0": "c0_sq"}
        if leaf in node:
            node[leaf] = value
        elif aliases.get(leaf) in node:
            node.pop(aliases[leaf])
            node[leaf] = value
        else:
            raise DomainError(f"parameter path {self.param!r} does not resolve")
        return d


def _bounds_row(spec, cfg):
    r = {}
    for name, fn in (("lower_maj", lambda: lower_bound_maj(spec, cfg=cfg)),
                     ("lower_psi", lambda: lower_bound_psi(spec, cfg=cfg)),
                     ("upper_symkl", lambda: upper_bound_closed_form(spec))):
        try:
            r[name] = fn().value
        except ASDNError:
            r[name] = math.nan
    return r


def run_sweep(spec_dict, plan: SweepPlan, n=128, m=1024, cfg=None):
    cfg = cfg or QuadratureConfig()
    specs = [(v, ChannelSpec.from_dict(plan.apply(spec_dict, v))) for v in sorted(plan.values)]

    def row(item):
        v, spec = item
        r = {"value": v}
        if "bounds" in plan.compute:
            r.update(_bounds_row(spec, cfg))
        if "oracle" in plan.compute:
            r["capacity_ba"] = blahut_arimoto(discretize(spec, n, m)).value
        if "analyze" in plan.compute:
            fin = check_finiteness_hypotheses(spec)
            r["finite_verified"] = float(all(h.ok for h in fin))
            r["infinite_detected"] = float(detect_infinite_capacity(spec).detected)
        return r

    return _pool_map(row, specs)


# ---------------------------------------------------------------------------- commands


def _cmd_bounds(args):
    spec = ChannelSpec.load(args.spec)
    cfg = _cfg(args)
    kinds = ["maj", "psi", "symkl"] if args.bound == "all" else [args.bound]
    reports = []
    for k in kinds:
        if k == "maj":
            costs = [c for c in spec.constraints if c.kind.value != "peak"]
            rep = (lower_bound_maj_constrained(spec, cfg=cfg) if costs
                   else lower_bound_maj(spec, cfg=cfg))
        elif k == "psi":
            rep = lower_bound_psi(spec, args.delta, cfg=cfg)
        else:
            rep = upper_bound_closed_form(spec, alpha=args.alpha)
        reports.append(rep.to_dict())
    _emit(reports[0] if len(reports) == 1 else {"reports": reports}, args.out)


def _cmd_oracle(args):
    spec = ChannelSpec.load(args.spec)
    if args.alpha is not None:
        spec = spec.with_(constraints=tuple(c for c in spec.constraints if c.kind.value != "mean")
                          + (Constraint.mean(args.alpha),))
    ch = discretize(spec, args.n, args.m)
    if args.restarts:
        l1, runs = output_stability(ch, None, args.restarts, args.seed, args.tol)
        est = runs[0]
    else:
        est = blahut_arimoto(ch, tol=args.tol)
    d = est.to_dict()
    if args.restarts:
        d["output_l1_spread"] = l1
        d["output_stable"] = l1 <= OUTPUT_STABILITY_TOL
    if args.mc:
        pts = est.pmf > 1e-12
        inp = DiscreteInput(ch.x_grid[pts], est.pmf[pts] / est.pmf[pts].sum())
        mc, se = mc_mutual_information(spec, inp, args.mc, args.seed)
        d["mc_estimate"], d["mc_stderr"] = mc, se
    if args.dump_pmf:
        write_csv([{"x": x, "p": p} for x, p in zip(ch.x_grid, est.pmf)], ["x", "p"], args.dump_pmf)
    _emit(d, args.out)


def _cmd_analyze(args):
    spec = ChannelSpec.load(args.spec)
    fin = check_finiteness_hypotheses(spec)
    det = detect_infinite_capacity(spec)
    _emit({"finiteness": [h.to_dict() for h in fin],
           "finite_capacity_guaranteed": all(h.ok for h in fin),
           "infinite_capacity": det.to_dict()}, args.out)


def _cmd_witness(args):
    spec = ChannelSpec.load(args.spec)
    w = build_packing(spec, args.a, args.b, args.n)
    summary = {"n": w.n, "a": w.a, "b": w.b, "event_probability": w.theta,
               "max_residual": w.max_residual(), "pairwise_disjoint": w.pairwise_disjoint(),
               "estimate": w.estimate()}
    if args.growth:
        sizes = [int(s) for s in args.growth.split(",")]
        summary["growth"] = [[n, v] for n, v in witness_mi_growth(spec, sizes, args.a, args.b)]
    if args.out:
        rows = [{"i": i + 1, "x": x, "sigma": s, "lo": iv[0], "hi": iv[1], "p": p}
                for i, (x, s, iv, p) in enumerate(zip(w.points, w.sigmas, w.intervals, w.pmf))]
        write_csv(rows, ["i", "x", "sigma", "lo", "hi", "p"], args.out)
    _emit(summary)


def _values(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _cmd_fig2(args):
    rows = run_fig2(_values(args.c0_sq), args.u, args.alpha_mean, args.n, args.m, args.tol)
    text = write_csv(rows, ["c0_sq", "capacity_ba", "upper_symkl"], args.out)
    if not args.out:
        sys.stdout.write(text)


def _cmd_fig3(args):
    if args.a_values:
        A = _values(args.a_values)
    else:
        if not args.a_max > 0 or args.steps < 1:
            raise DomainError("--a-max must be positive and --steps at least 1")
        A = list(np.linspace(args.a_max / args.steps, args.a_max, args.steps))
    rows = run_fig3(A, args.c0, args.n, args.m, args.tol, oracle=not args.no_oracle)
    text = write_csv(rows, ["A", "lower_maj", "lower_psi", "capacity_ba"], args.out)
    if not args.out:
        sys.stdout.write(text)


def _cmd_sweep(args):
    with open(args.spec) as fh:
        spec_dict = json.load(fh)
    plan = SweepPlan(args.param, _values(args.values), tuple(args.compute.split(",")), args.out)
    rows = run_sweep(spec_dict, plan, args.n, args.m, _cfg(args))
    header = list(rows[0].keys())
    if args.out and args.out.endswith(".csv"):
        write_csv(rows, header, args.out)
    else:
        _emit({"param": plan.param, "rows": rows}, args.out)


def build_parser():
    p = _Parser(prog="asdn", description="Capacity bounds for Y = X + sigma(X) Z channels.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, spec=True):
        if spec:
            sp.add_argument("--spec", required=True, help="channel spec JSON")
        sp.add_argument("--out", help="write results here instead of stdout")
        sp.add_argument("--abs-tol", type=float, default=1e-9)
        sp.add_argument("--rel-tol", type=float, default=1e-7)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    b = common(sub.add_parser("bounds", help="lower and upper bounds"))
    b.add_argument("--bound", choices=["maj", "psi", "symkl", "all"], default="all")
    b.add_argument("--alpha", type=float, help="mean cap for the upper bound")
    b.add_argument("--delta", type=float, help="fixed delta for the psi bound")

    o = common(sub.add_parser("oracle", help="Blahut-Arimoto capacity of the discretized channel"))
    o.add_argument("-n", type=int, default=128)
    o.add_argument("-m", type=int, default=1024)
    o.add_argument("--alpha", type=float, help="impose E X <= alpha")
    o.add_argument("--tol", type=float, default=1e-7)
    o.add_argument("--mc", type=int, default=0, help="Monte Carlo cross-check sample size")
    o.add_argument("--dump-pmf", help="CSV of the optimal input pmf")
    o.add_argument("--restarts", type=int, default=0,
                   help="random restarts for the output-uniqueness check")

    common(sub.add_parser("analyze", help="finiteness and infinite-capacity analysis"))

    w = common(sub.add_parser("witness", help="interval-packing witness"))
    w.add_argument("-n", type=int, default=1000)
    w.add_argument("--a", type=float, default=0.5)
    w.add_argument("--b", type=float, default=2.0)
    w.add_argument("--growth", help="comma-separated sizes for the MI growth estimate")

    f2 = common(sub.add_parser("fig2", help="capacity and upper bound versus c0^2"), spec=False)
    f2.add_argument("--c0-sq", default="0.5,1,2,5,10")
    f2.add_argument("--u", type=float, default=5.0)
    f2.add_argument("--alpha", dest="alpha_mean", type=float, default=2.5)
    f2.add_argument("-n", type=int, default=128)
    f2.add_argument("-m", type=int, default=1024)
    f2.add_argument("--tol", type=float, default=1e-7)

    f3 = common(sub.add_parser("fig3", help="lower bounds and capacity versus A"), spec=False)
    f3.add_argument("--a-max", type=float, default=50.0)
    f3.add_argument("--steps", type=int, default=25)
    f3.add_argument("--a-values", help="explicit comma-separated A values")
    f3.add_argument("--c0", type=float, default=1.0)
    f3.add_argument("-n", type=int, default=128)
    f3.add_argument("-m", type=int, default=1024)
    f3.add_argument("--tol", type=float, default=1e-7)
    f3.add_argument("--no-oracle", action="store_true", help="skip the BA column")

    s = common(sub.add_parser("sweep", help="sweep one spec parameter"))
    s.add_argument("--param", required=True, help='dotted path, e.g. "sigma.c0_sq" or "support.u"')
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--compute", default="bounds", help="any of bounds,oracle,analyze")
    s.add_argument("-n", type=int, default=128)
    s.add_argument("-m", type=int, default=1024)
    return p


_COMMANDS = {"bounds": _cmd_bounds, "oracle": _cmd_oracle, "analyze": _cmd_analyze,
             "witness": _cmd_witness, "fig2": _cmd_fig2, "fig3": _cmd_fig3, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"asdn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        _COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"asdn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ASDNError, ArithmeticError) as exc:
        print(f"asdn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
