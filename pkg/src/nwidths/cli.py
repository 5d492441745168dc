"""Command-line front end: order queries, sweeps, certificate suites, and
numeric width estimation with CSV/JSON/SVG output.

Exit codes: 0 ok, 1 invalid arguments, 2 verification failure.  All floats
are printed with 17 significant digits so CSV output round-trips and is
byte-stable for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import bodies as bd
from .errors import EnumerationCapError, InvalidExponentError, NotCoveredError
from .exponents import (
    ProblemParams,
    as_exponent,
    k_from_nu,
    nu_from_k,
    regime_boundary,
)
from .order_engine import (
    boundary_mismatch,
    describe_derivation,
    order_ball,
    order_intersection,
    order_intersection_from_nu,
)
from .widths import SearchConfig, width_bounds

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2

_EXP_GRID = ("1", "1.5", "2", "3", "inf")


class CliError(Exception):
    """Bad command-line input (mapped to exit code 1)."""


@dataclass
class RunReport:
    """Outcome of one command: echoed inputs, result rows, and a status
    that maps onto the exit code (ok / verification_failure / invalid_args)."""

    command: str
    params: dict
    rows: list = field(default_factory=list)
    status: str = "ok"
    seed: int = 0

    @property
    def exit_code(self) -> int:
        return {"ok": EXIT_OK, "invalid_args": EXIT_INVALID,
                "verification_failure": EXIT_VERIFY}[self.status]

    def to_json(self, extra=None) -> str:
        doc = {"command": self.command, "params": self.params,
               "status": self.status, "seed": self.seed}
        if len(self.rows) != 1:
            doc["rows"] = self.rows
        else:
            doc.update(self.rows[0])
        if extra:
            doc.update(extra)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def fmt(x) -> str:
    """17-significant-digit, round-trip-safe float rendering."""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _csv_field(s: str) -> str:
    """Quote a field if it would break the row (RFC-4180 style)."""
    if "," in s or '"' in s:
        return '"' + s.replace('"', '""') + '"'
    return s


def _emit(lines, out):
    out.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# order / sweep


def _order_estimate(args):
    p0, p1, q = args.p0, args.p1, args.q
    if (args.k is None) == (args.nu is None):
        raise CliError("exactly one of --k / --nu is required")
    if args.k is not None:
        params = ProblemParams.from_k(p0, p1, q, args.m, args.n, args.k)
        return order_intersection(params), params.k
    est = order_intersection_from_nu(p0, p1, q, args.m, args.n, args.nu)
    return est, k_from_nu(args.nu, p1, p0, args.m)


def cmd_order(args, out):
    est, k = _order_estimate(args)
    report = RunReport(
        command="order",
        params={"p0": str(args.p0), "p1": str(args.p1), "q": str(args.q),
                "m": args.m, "n": args.n, "k": k,
                "nu": nu_from_k(k, args.p1, args.p0)},
        rows=[{"value": est.value, "case": est.case_id.value,
               "regime": est.regime.value, "trace": list(est.trace),
               "derivation": describe_derivation(est)}],
        seed=args.seed)
    if args.json:
        out.write(report.to_json())
        return report.exit_code
    lines = ["p0,p1,q,m,k,n,value,case,regime,trace"]
    lines.append(",".join([
        str(args.p0), str(args.p1), str(args.q), str(args.m), fmt(k),
        str(args.n), fmt(est.value), est.case_id.value, est.regime.value,
        "|".join(est.trace)]))
    _emit(lines, out)
    return report.exit_code


def cmd_sweep(args, out):
    if args.k is None and args.nu is None:
        raise CliError("one of --k / --nu is required")
    k = args.k if args.k is not None else k_from_nu(
        args.nu, args.p1, args.p0, args.m)
    n_max = args.n_max if args.n_max is not None else args.m // 2
    ns = list(range(args.n_min, n_max + 1, args.n_step))
    if not ns:
        raise CliError("empty n range")
    rows = []
    for n in ns:
        params = ProblemParams.from_k(args.p0, args.p1, args.q,
                                      args.m, n, k)
        est = order_intersection(params)
        rows.append((n, est))
    lines = ["p0,p1,q,m,k,n,value,case,regime"]
    for n, est in rows:
        lines.append(",".join([
            str(args.p0), str(args.p1), str(args.q), str(args.m), fmt(k),
            str(n), fmt(est.value), est.case_id.value, est.regime.value]))
    _emit(lines, out)
    if args.svg:
        _write_sweep_svg(args, k, rows, args.svg)
    return EXIT_OK


def _write_sweep_svg(args, k, rows, path):
    """Self-contained log-log step plot with regime-boundary markers."""
    pts = [(n, est.value) for n, est in rows if n >= 1 and est.value > 0]
    if not pts:
        raise CliError("nothing to plot (need n >= 1 rows)")
    wpx, hpx, pad = 640, 480, 56
    xs = [math.log10(n) for n, _ in pts]
    ys = [math.log10(v) for _, v in pts]
    x0, x1 = min(xs), max(xs) or 1e-9
    y0, y1 = min(ys), max(ys)
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (wpx - 2 * pad)

    def sy(y):
        return hpx - pad - (y - y0) / (y1 - y0) * (hpx - 2 * pad)

    poly = " ".join(f"{sx(lx):.2f},{sy(ly):.2f}" for lx, ly in zip(xs, ys))
    qe = as_exponent(args.q)
    markers = []
    if qe.inv <= 0.5:
        n_star = regime_boundary(k, args.m, qe)
        markers.append((n_star, "n*"))
    markers.append((float(args.m) ** (2 * qe.inv), "m^(2/q)"))
    marker_elems = []
    for mx, label in markers:
        if mx < 1:
            continue
        lx = sx(math.log10(mx))
        if not (pad <= lx <= wpx - pad):
            continue
        marker_elems.append(
            f'<line x1="{lx:.2f}" y1="{pad}" x2="{lx:.2f}" y2="{hpx - pad}" '
            f'stroke="#999" stroke-dasharray="4 3"/>'
            f'<text x="{lx + 3:.2f}" y="{pad + 14}" font-size="11" '
            f'fill="#555">{label}={fmt(float(mx))[:8]}</text>')
    title = (f"width order vs n: p0={args.p0} p1={args.p1} q={args.q} "
             f"m={args.m} k={fmt(float(k))[:8]}")
    svg = f"""<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" height="{hpx}" viewBox="0 0 {wpx} {hpx}">
<rect width="{wpx}" height="{hpx}" fill="white"/>
<text x="{pad}" y="24" font-size="13" fill="#222">{title}</text>
<line x1="{pad}" y1="{hpx - pad}" x2="{wpx - pad}" y2="{hpx - pad}" stroke="#333"/>
<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{hpx - pad}" stroke="#333"/>
<text x="{wpx // 2}" y="{hpx - pad + 34}" font-size="12" fill="#333">log10 n</text>
<text x="12" y="{hpx // 2}" font-size="12" fill="#333" transform="rotate(-90 12 {hpx // 2})">log10 value</text>
{''.join(marker_elems)}
<polyline points="{poly}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>
</svg>
"""
    with open(path, "w") as fh:
        fh.write(svg)


# ---------------------------------------------------------------------------
# verify


def _grid_pairs():
    for s1, s0 in itertools.product(_EXP_GRID, _EXP_GRID):
        p1, p0 = as_exponent(s1), as_exponent(s0)
        if p1.inv > p0.inv:
            yield s1, s0


def _suite_inclusions(args):
    rows = []
    for s1, s0 in _grid_pairs():
        for m in range(1, args.m_max + 1):
            for k in range(1, m + 1):
                for rep in (bd.cert_vkl(s0, s1, k, m),
                            bd.cert_cube(s0, s1, k, m, seed=args.seed)):
                    rows.append(_cert_row("inclusions", rep))
    return rows


def _suite_interpolation(args):
    samples = args.samples or 10000
    rows = []
    for s1, s0 in _grid_pairs():
        for sq in _EXP_GRID:
            q = as_exponent(sq)
            if not as_exponent(s0).inv <= q.inv <= as_exponent(s1).inv:
                continue
            rep = bd.cert_interpolation(
                s1, s0, sq, args.m or 8, samples=samples, seed=args.seed,
                lambda_shift=args.corrupt_lambda)
            rows.append(_cert_row("interpolation", rep))
    return rows


_BOUNDARY_TRIPLES = (
    # (p1, p0, q) hitting each of the four piecewise cases
    ("1", "3", "4"), ("1.5", "2.5", "6"), ("1", "4", "5"), ("1.2", "3", "3.5"),
    ("2", "3", "4"), ("2.5", "4", "6"), ("2", "5", "8"), ("3", "4", "4.5"),
    ("2", "4", "3"), ("2.5", "6", "3"), ("2", "2.5", "2.25"), ("3", "inf", "4"),
    ("1", "4", "3"), ("1.5", "6", "4"), ("1", "inf", "2.5"), ("1.5", "8", "5"),
)


def _suite_boundaries(args):
    rows = []
    tol = 1e-12
    for s1, s0, sq in _BOUNDARY_TRIPLES:
        for m in (16, 64, 256):
            for k in (1.0, 2.0, math.sqrt(m), m / 2.0, float(m)):
                mis = boundary_mismatch(s0, s1, sq, m, k)
                rows.append({
                    "suite": "boundaries", "check": "regime-continuity",
                    "params": f"p0={s0};p1={s1};q={sq};m={m};k={fmt(k)}",
                    "checks": 1, "max_violation": mis, "tol": tol})
    return rows


_REDUCTION_TRIPLES = (
    ("1", "3", "4"), ("2", "3", "4"), ("2", "4", "3"), ("1", "4", "3"),
    ("1", "2", "1.5"), ("1", "1.5", "1.2"), ("1.5", "3", "6"), ("1", "2", "4"),
)


def _suite_reductions(args):
    rows = []
    for s1, s0, sq in _REDUCTION_TRIPLES:
        p0, p1, q = as_exponent(s0), as_exponent(s1), as_exponent(sq)
        for m in (16, 64):
            worst = 0.0
            checks = 0
            for n in sorted({0, 1, m // 8, m // 4, m // 2}):
                for k, pref in ((1.0, p1), (float(m), p0)):
                    if q.inv >= pref.inv:  # q <= p hits the exact-width
                        continue           # branch; only order-vs-order
                                           # comparisons reduce exactly
                    est = order_intersection(
                        ProblemParams.from_k(p0, p1, q, m, n, k))
                    ball = order_ball(pref, q, m, n)
                    worst = max(worst, abs(est.value - ball))
                    checks += 1
            rows.append({
                "suite": "reductions", "check": "endpoint-k",
                "params": f"p0={s0};p1={s1};q={sq};m={m}",
                "checks": checks, "max_violation": worst, "tol": 0.0})
    return rows


def _suite_duality(args):
    samples = args.samples or 200
    rng = np.random.default_rng(args.seed)
    rows = []
    for m in range(2, min(args.m_max, 6) + 1):
        for k in range(1, m + 1):
            body = bd.VkPolytope(k, m)
            V = bd.vk_vertices(m, k)
            worst_probe = 0.0
            worst_hull = 0.0
            worst_supp = 0.0
            X = rng.standard_normal((samples, m))
            for x in X:
                gref = bd.gauge(body, x)
                worst_probe = max(worst_probe,
                                  abs(bd.vk_gauge_probe(x, k) - gref)
                                  / max(gref, 1e-300))
                ghull = bd.hull_gauge(V, x)
                worst_hull = max(worst_hull,
                                 abs(ghull - gref) / max(gref, 1e-300))
            Y = rng.standard_normal((min(samples, 64), m))
            for y in Y:
                href = float((V @ y).max())
                worst_supp = max(worst_supp,
                                 abs(bd.support(body, y) - href)
                                 / max(abs(href), 1e-300))
            rows.append({
                "suite": "duality", "check": "gauge-probe",
                "params": f"m={m};k={k}", "checks": samples,
                "max_violation": worst_probe, "tol": 1e-12})
            rows.append({
                "suite": "duality", "check": "gauge-hull",
                "params": f"m={m};k={k}", "checks": samples,
                "max_violation": worst_hull, "tol": 1e-9})
            rows.append({
                "suite": "duality", "check": "support-vertices",
                "params": f"m={m};k={k}", "checks": min(samples, 64),
                "max_violation": worst_supp, "tol": 1e-12})
    return rows


def _cert_row(suite, rep: bd.CertReport):
    params = ";".join(f"{k}={v}" for k, v in sorted(rep.params.items()))
    return {"suite": suite, "check": rep.name, "params": params,
            "checks": rep.checks, "max_violation": rep.max_violation,
            "tol": rep.tol}


_SUITES = {
    "inclusions": _suite_inclusions,
    "interpolation": _suite_interpolation,
    "boundaries": _suite_boundaries,
    "reductions": _suite_reductions,
    "duality": _suite_duality,
}


def cmd_verify(args, out):
    rows = _SUITES[args.suite](args)
    ok = all(r["max_violation"] <= r["tol"] for r in rows)
    report = RunReport(
        command="verify",
        params={"suite": args.suite, "samples": args.samples,
                "m_max": args.m_max},
        rows=rows, status="ok" if ok else "verification_failure",
        seed=args.seed)
    lines = ["suite,check,params,checks,max_violation,tol,status"]
    for r in rows:
        good = r["max_violation"] <= r["tol"]
        lines.append(",".join([
            r["suite"], r["check"], r["params"], str(r["checks"]),
            fmt(float(r["max_violation"])), fmt(float(r["tol"])),
            "ok" if good else "fail"]))
    _emit(lines, out)
    return report.exit_code


# ---------------------------------------------------------------------------
# estimate


def parse_body(spec: str, m: int) -> bd.Body:
    """Body grammar: ball:<p> | vk:<k> | intersection:<p0>,<p1>,<nu> | cube:<c>."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ball":
            return bd.Ball(as_exponent(rest), m)
        if kind == "vk":
            k = float(rest)
            return bd.VkPolytope(k, m, extrapolated=(k != int(k)))
        if kind == "intersection":
            p0, p1, nu = rest.split(",")
            return bd.Intersection(as_exponent(p0), as_exponent(p1),
                                   float(nu), m)
        if kind == "cube":
            return bd.ScaledCube(float(rest), m)
    except (ValueError, InvalidExponentError) as exc:
        raise CliError(f"bad body spec {spec!r}: {exc}") from exc
    raise CliError(f"unknown body kind {kind!r}")


def _order_for_body(body: bd.Body, n: int, q) -> float:
    if isinstance(body, bd.Ball):
        return order_ball(body.p, q, body.m, n)
    if isinstance(body, bd.Intersection):
        return order_intersection_from_nu(
            body.p0, body.p1, q, body.m, n, body.nu).value
    if isinstance(body, bd.VkPolytope):
        return order_intersection_from_nu(
            "inf", 1, q, body.m, n, float(body.k)).value
    if isinstance(body, bd.ScaledCube):
        return body.c * order_ball("inf", q, body.m, n)
    raise CliError(f"no order estimate for body {body!r}")


def cmd_estimate(args, out):
    body = parse_body(args.body, args.m)
    cfg = SearchConfig(restarts=args.restarts, ascent_iters=args.ascent_iters,
                       refine_rounds=args.refine_rounds, seed=args.seed,
                       vertex_cap=args.vertex_cap, tol=args.tol)
    t0 = time.perf_counter()
    try:
        wb = width_bounds(body, args.n, args.q, cfg)
    except EnumerationCapError as exc:
        raise CliError(str(exc)) from exc
    wall_ms = (time.perf_counter() - t0) * 1e3
    order_value = ratio = ""
    if args.compare_order:
        ov = _order_for_body(body, args.n, args.q)
        order_value = fmt(float(ov))
        ratio = fmt(wb.upper / ov)
    report = RunReport(
        command="estimate",
        params={"body": args.body, "m": args.m, "n": args.n,
                "q": str(args.q), "restarts": args.restarts,
                "ascent_iters": args.ascent_iters,
                "refine_rounds": args.refine_rounds,
                "vertex_cap": args.vertex_cap, "tol": args.tol},
        rows=[{"upper": wb.upper,
               "upper_heuristic": wb.upper_heuristic,
               "upper_certificate": [[float(v) for v in row]
                                     for row in wb.upper_certificate.vectors],
               "lower": wb.lower,
               "lower_method": wb.lower_method,
               "order_value": order_value,
               "ratio": ratio}],
        seed=args.seed)
    if args.json:
        out.write(report.to_json(extra={"wall_ms": wall_ms}))
        return report.exit_code
    lines = ["body,m,n,q,upper,lower,lower_method,order_value,ratio,seed,wall_ms"]
    lines.append(",".join([
        _csv_field(args.body), str(args.m), str(args.n), str(args.q),
        fmt(wb.upper), fmt(wb.lower), wb.lower_method, order_value, ratio,
        str(args.seed), f"{wall_ms:.3f}"]))
    _emit(lines, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_exponent(parser, name):
    parser.add_argument(name, type=as_exponent, required=True,
                        help="exponent in [1, inf]; accepts decimals or 'inf'")


def build_parser() -> _Parser:
    top = _Parser(prog="nwidths",
                  description="width estimates for lp-ball intersections")
    sub = top.add_subparsers(dest="command", required=True)

    po = sub.add_parser("order", help="one closed-form order query")
    _add_exponent(po, "--p0")
    _add_exponent(po, "--p1")
    _add_exponent(po, "--q")
    po.add_argument("--m", type=int, required=True)
    po.add_argument("--n", type=int, required=True)
    po.add_argument("--k", type=float)
    po.add_argument("--nu", type=float)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--json", action="store_true")

    ps = sub.add_parser("sweep", help="order values over a range of n")
    _add_exponent(ps, "--p0")
    _add_exponent(ps, "--p1")
    _add_exponent(ps, "--q")
    ps.add_argument("--m", type=int, required=True)
    ps.add_argument("--k", type=float)
    ps.add_argument("--nu", type=float)
    ps.add_argument("--n-min", type=int, default=0)
    ps.add_argument("--n-max", type=int, default=None)
    ps.add_argument("--n-step", type=int, default=1)
    ps.add_argument("--svg", type=str, default=None)
    ps.add_argument("--seed", type=int, default=0)

    pv = sub.add_parser("verify", help="certificate and invariant suites")
    pv.add_argument("--suite", required=True, choices=sorted(_SUITES))
    pv.add_argument("--samples", type=int, default=None)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--m", type=int, default=None)
    pv.add_argument("--m-max", type=int, default=6)
    pv.add_argument("--corrupt-lambda", type=float, default=0.0,
                    help="testing hook: shift the interpolation weight")

    pe = sub.add_parser("estimate", help="numeric width bounds for one body")
    pe.add_argument("--body", required=True,
                    help="ball:<p> | vk:<k> | intersection:<p0>,<p1>,<nu>"
                         " | cube:<c>")
    pe.add_argument("--m", type=int, required=True)
    pe.add_argument("--n", type=int, required=True)
    _add_exponent(pe, "--q")
    pe.add_argument("--restarts", type=int, default=8)
    pe.add_argument("--ascent-iters", type=int, default=200)
    pe.add_argument("--refine-rounds", type=int, default=2)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--vertex-cap", type=int, default=bd.DEFAULT_VERTEX_CAP)
    pe.add_argument("--tol", type=float, default=1e-8)
    pe.add_argument("--compare-order", action="store_true")
    pe.add_argument("--json", action="store_true")
    return top


_COMMANDS = {
    "order": cmd_order,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidExponentError, NotCoveredError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
