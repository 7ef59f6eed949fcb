"""Command-line front end.

Subcommands mirror the library estimators and emit CSV (default) or
JSON.  Exit codes: 0 success, 1 usage error, 2 invariant-check failure
(qcheck only).  Column schemas are listed in the README and in each
subcommand's ``--help``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import experiments, moments, walk
from .clocks import build_schedule, dump_schedule
from .graphs import parse_graph_spec


def _emit(rows: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, default=float) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(spec: str) -> list[float]:
    a, b, step = (float(v) for v in spec.split(":"))
    if step <= 0 or b < a:
        raise ValueError("grid must be a:b:step with step > 0 and b >= a")
    n = int(round((b - a) / step))
    return [a + i * step for i in range(n + 1)]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tocp", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="survival probability at one rate and time")
    p.add_argument("--graph", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--t", "--horizon", dest="t", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--vertex", type=int, default=0)
    p.add_argument("--per-replica", action="store_true",
                   help="emit one (replica, time, observable, value) row per replica")
    p.add_argument("--dump-schedule", default=None,
                   help="also write one binary clock schedule for debugging")
    _add_common(p)

    p = sub.add_parser("duality", help="infection vs dual-set survival z-score")
    p.add_argument("--graph", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--replicas", type=int, default=10000)
    p.add_argument("--vertex", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("scan", help="survival over an ascending rate grid")
    p.add_argument("--graph", required=True)
    p.add_argument("--lambda-grid", dest="grid", required=True, help="a:b:step")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("critical", help="bisect the fixed-time survival crossing")
    p.add_argument("--graph", required=True)
    p.add_argument("--bracket", required=True, help="lo,hi")
    p.add_argument("--threshold", type=float, default=0.02)
    p.add_argument("--tol", type=float, default=0.02)
    p.add_argument("--t", type=float, default=20.0)
    p.add_argument("--replicas", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("green", help="lattice Green function and hitting probability")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--terms", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("moments", help="second-moment trajectory on a truncated box")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--times", required=True, help="comma-separated times")
    _add_common(p)

    p = sub.add_parser("bounds", help="analytic critical-rate brackets")
    p.add_argument("--lattice", default=None, help="comma-separated dimensions")
    p.add_argument("--tree", default=None, help="comma-separated branching numbers")
    _add_common(p)

    p = sub.add_parser("qcheck", help="verify matrix invariants; exit 2 on failure")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--radius", type=int, required=True)
    _add_common(p)

    return ap


def _cmd_simulate(args) -> int:
    g = parse_graph_spec(args.graph)
    if args.dump_schedule:
        dump_schedule(build_schedule(g, args.lam, args.t, args.seed), args.dump_schedule)
    if args.per_replica:
        from . import engines

        vals = engines.spin_replicas(g, args.lam, [args.t], args.vertex,
                                     args.replicas, args.seed)[0]
        _emit(
            [{"replica": i, "time": args.t, "observable": "infected", "value": int(v)}
             for i, v in enumerate(vals)],
            args.format, args.out,
        )
        return 0
    est = experiments.survival_probability(g, args.lam, args.t, args.vertex,
                                           args.replicas, args.seed)
    _emit(
        [{"graph": args.graph, "lambda": args.lam, "t": args.t, "vertex": args.vertex,
          "observable": "infected", "value": est.value, "std_error": est.std_error,
          "replicas": est.replicas, "seed": args.seed}],
        args.format, args.out,
    )
    return 0


def _cmd_duality(args) -> int:
    g = parse_graph_spec(args.graph)
    res = experiments.duality_check(g, args.vertex, args.lam, args.t,
                                    args.replicas, args.seed)
    _emit(
        [{"graph": args.graph, "lambda": args.lam, "t": args.t, "vertex": args.vertex,
          "p_eta": res.p_eta.value, "se_eta": res.p_eta.std_error,
          "p_dual": res.p_dual.value, "se_dual": res.p_dual.std_error,
          "z": res.z, "replicas": args.replicas, "seed": args.seed}],
        args.format, args.out,
    )
    return 0


def _cmd_scan(args) -> int:
    g = parse_graph_spec(args.graph)
    grid = _parse_grid(args.grid)
    rows = []
    for lam, est in experiments.lambda_scan(g, grid, args.t, args.replicas, args.seed):
        rows.append({"graph": args.graph, "lambda": lam, "t": args.t,
                     "value": est.value, "std_error": est.std_error,
                     "replicas": est.replicas})
    _emit(rows, args.format, args.out)
    return 0


def _cmd_critical(args) -> int:
    g = parse_graph_spec(args.graph)
    lo, hi = (float(v) for v in args.bracket.split(","))
    res = experiments.critical_estimate(g, (lo, hi), args.t, args.replicas,
                                        args.threshold, args.tol, args.seed)
    _emit(
        [{"graph": args.graph, "lo": res.lo, "hi": res.hi, "estimate": res.estimate,
          "threshold": args.threshold, "t": args.t, "replicas": args.replicas,
          "estimator": res.estimator, "note": res.note}],
        args.format, args.out,
    )
    return 0


def _cmd_green(args) -> int:
    if args.d <= 2:
        f = walk.hitting_prob_e1(args.d)
        _emit(
            [{"d": args.d, "N": 0, "G": "divergent", "tail": "",
              "F_e1": f.value, "2d_F_e1": 2 * args.d * f.value, "recurrent": True}],
            args.format, args.out,
        )
        return 0
    g = walk.green_function(args.d, args.terms)
    f = walk.hitting_prob_e1(args.d, args.terms)
    _emit(
        [{"d": args.d, "N": g.series.truncation_N, "G": g.value,
          "tail": g.series.tail_estimate, "F_e1": f.value,
          "2d_F_e1": 2 * args.d * f.value, "recurrent": False}],
        args.format, args.out,
    )
    return 0


def _cmd_moments(args) -> int:
    times = [float(v) for v in args.times.split(",")]
    res = moments.integrate_second_moment(args.d, args.lam, args.radius, times)
    bound = None
    try:
        table = walk.hitting_table(args.d, max(2, args.radius), n_terms=1500)
        h = moments.build_h(args.d, args.lam, table, args.radius)
        bound = moments.second_moment_bound(h)
    except (moments.ValidityError, walk.DivergenceError):
        bound = None
    rows = [
        {"t": t, "g0": g, "bound": bound if bound is not None else "n/a", "leakage": lk}
        for t, g, lk in zip(res.times, res.g0, res.leakage)
    ]
    _emit(rows, args.format, args.out)
    return 0


def _cmd_bounds(args) -> int:
    lattice = [int(v) for v in args.lattice.split(",")] if args.lattice else None
    tree = [int(v) for v in args.tree.split(",")] if args.tree else None
    if not lattice and not tree:
        raise ValueError("give --lattice and/or --tree")
    rows = []
    for r in experiments.bounds_report(lattice=lattice, tree=tree):
        rows.append({"family": r.family, "param": r.param, "degree": r.degree,
                     "lower": r.lower, "upper": r.upper if r.upper is not None else "n/a",
                     "degree_x_lower": r.lower_x_degree,
                     "degree_x_upper": r.upper_x_degree if r.upper_x_degree is not None else "n/a",
                     "note": r.note})
    _emit(rows, args.format, args.out)
    return 0


def _cmd_qcheck(args) -> int:
    from fractions import Fraction

    d, lam, R = args.d, args.lam, args.radius
    Q = moments.build_q(d, lam, R, exact=(2 * R + 1) ** d <= 20_000)
    checks = {}
    if Q.exact_rows is not None:
        interior = moments.shell_distances(d, R) <= R - 1
        ok_rows = True
        origin = Q.origin
        for r, cols in Q.exact_rows.items():
            if not interior[r]:
                continue
            s = sum(cols.values())
            want = 1 + 4 * Fraction(lam) * d * d if r == origin else 0
            if s != want:
                ok_rows = False
        checks["interior_row_sums_exact"] = ok_rows
    bound = moments.q_norm_bound(Q)
    v = np.ones(Q.size)
    ok_norm = True
    for n in range(1, 6):
        v = Q.matrix.dot(v)
        if float(np.abs(v).max()) > bound**n * (1 + 1e-12):
            ok_norm = False
    checks["iterated_norm_bound"] = ok_norm
    probe = np.zeros(Q.size)
    rng = np.random.Generator(np.random.PCG64(0))
    cols = rng.integers(0, Q.size, size=min(Q.size, 25))
    ok_pos = True
    for c in cols:
        probe[:] = 0.0
        probe[c] = 1.0
        for t in (0.1, 0.5, 1.0):
            if float(moments.expm_apply(Q, probe, t).min()) < -1e-10:
                ok_pos = False
    checks["expm_columns_nonnegative"] = ok_pos
    _emit([{"check": k, "ok": v} for k, v in checks.items()], args.format, args.out)
    return 0 if all(checks.values()) else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "duality": _cmd_duality,
    "scan": _cmd_scan,
    "critical": _cmd_critical,
    "green": _cmd_green,
    "moments": _cmd_moments,
    "bounds": _cmd_bounds,
    "qcheck": _cmd_qcheck,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; remap usage to 1
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.cmd](args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
