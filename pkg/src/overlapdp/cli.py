"""``overlapdp`` command line.

Exit codes: 0 success, 2 usage error, 3 unreadable/invalid input file,
4 capacity cap exceeded, 5 exact search timed out with no fallback.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from overlapdp import bench as bench_mod
from overlapdp.composition import CompositionRule, max_overlap_budget, utility_gain
from overlapdp.errors import CapacityError, SearchTimeout, WorkloadFormatError
from overlapdp.formats import dumps_workload, load_workload, save_workload
from overlapdp.graph import build_query_graph
from overlapdp.mechanisms import (
    DataSet,
    average_l1_error,
    gaussian_answer,
    laplace_answer,
    make_rng,
    read_dataset_csv,
    write_answers_csv,
)
from overlapdp.oracle import gamma_by_row_scan, gamma_by_subset_enumeration
from overlapdp.search import (
    BoundKind,
    OverlapBound,
    SearchBudget,
    dsatur_coloring,
    max_overlap,
    max_weight_clique,
)
from overlapdp.workload import (
    QUANTITIES,
    Distribution,
    gen_census_workload,
    gen_distribution_workload,
    gen_uniform_workload,
    maxcut_to_overlap,
    random_graph,
    write_maxcut_sidecar,
)

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_CAPACITY = 4
EXIT_TIMEOUT = 5

SAFE_OVERESTIMATE = "SAFE-OVERESTIMATE"


def compute_bound(w, g, method: str, rule: str, timeout: float) -> tuple[OverlapBound, bool]:
    """Run the requested algorithm; returns (bound, fell_back).

    ``auto`` tries the exact overlap first and switches to DSatur when the
    deadline passes. The timed-out incumbent is discarded, never reported.
    """
    budget = SearchBudget(timeout)
    if method == "overlap":
        return max_overlap(w, g, rule, budget), False
    if method == "clique":
        return max_weight_clique(g, rule, budget), False
    if method == "chromatic":
        return dsatur_coloring(g, rule), False
    try:
        return max_overlap(w, g, rule, budget), False
    except SearchTimeout:
        return dsatur_coloring(g, rule), True


def _witness_json(bound: OverlapBound):
    if bound.kind is BoundKind.APPROX_CHROMATIC:
        return [list(c) for c in bound.witness]
    return list(bound.witness)


def analyze_report(w, method="auto", rule="eps", timeout=60.0, oracle=None) -> dict:
    start = time.monotonic()
    g = build_query_graph(w)
    bound, fell_back = compute_bound(w, g, method, rule, timeout)
    statement = max_overlap_budget(bound, rule)
    rule_obj = CompositionRule.parse(rule)
    comp_all = rule_obj.combine(w.weights)
    homogeneous = len(set(w.weights)) == 1
    if homogeneous:
        # value / weight is the overlap count for eps and its square for gdp
        unit = w.weights[0]
        count = bound.value / unit if rule_obj.kind.value == "eps" else (bound.value / unit) ** 2
        gain = utility_gain(w.t, min(round(count, 9), w.t))
    else:
        gain = 1.0 - bound.value / comp_all
    notes = [n for n in (bound.note, statement.note) if n]
    if fell_back:
        notes.insert(0, f"exact overlap search timed out after {timeout:g}s; fell back to DSatur")
    report = {
        "t": w.t,
        "edges": g.edge_count,
        "method": method,
        "rule": rule,
        "kind": bound.kind.value,
        "safety": SAFE_OVERESTIMATE if bound.kind is BoundKind.APPROX_CHROMATIC else
                  ("exact" if bound.kind is BoundKind.EXACT_OVERLAP else "safe-upper-bound"),
        "value": bound.value,
        "count": bound.count,
        "witness": _witness_json(bound),
        "budget": statement.value,
        "sequential_budget": comp_all,
        "utility_gain": round(gain, 3),
        "wall_time_secs": None,
        "notes": notes,
    }
    if oracle:
        fn = gamma_by_row_scan if oracle == "row-scan" else gamma_by_subset_enumeration
        res = fn(w, rule)
        report["oracle"] = {"method": oracle, "gamma": res.gamma, "witness": list(res.witness)}
    report["wall_time_secs"] = round(time.monotonic() - start, 6)
    return report


def _summary(report: dict) -> str:
    lines = [
        f"queries t={report['t']}  edges={report['edges']}",
        f"bound {report['kind']} ({report['safety']}) value={report['value']:.6g} count={report['count']}",
        f"budget under {report['rule']}: {report['budget']:.6g} (sequential {report['sequential_budget']:.6g})",
        f"utility gain U={report['utility_gain']:.3f}",
        f"wall time {report['wall_time_secs']:.3f}s",
    ]
    if report["kind"] != "approx_chromatic":
        lines.insert(2, "witness " + " ".join(map(str, report["witness"])))
    if "oracle" in report:
        lines.append(f"oracle {report['oracle']['method']}: gamma={report['oracle']['gamma']:.6g}")
    lines.extend(f"note: {n}" for n in report["notes"])
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    w = load_workload(args.workload)
    report = analyze_report(w, args.method, args.rule, args.timeout_secs, args.oracle)
    print(_summary(report))
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def per_query_budgets(w, rule: str, total: float, allocation: str, bound_value: float | None) -> list[float]:
    """Budget per query, proportional to weights, spending ``total`` in the worst case.

    Sequential spends it over the whole workload, optimal over the worst
    overlapping set; both rules are homogeneous so weights simply scale.
    """
    rule_obj = CompositionRule.parse(rule)
    denom = rule_obj.combine(w.weights) if allocation == "sequential" else bound_value
    if not denom or denom <= 0:
        raise ValueError("overlap bound must be positive")
    return [q.weight * total / denom for q in w.queries]


def cmd_answer(args) -> int:
    w = load_workload(args.workload)
    rule = "eps" if args.mechanism == "laplace" else "gdp"
    dataset = read_dataset_csv(args.dataset, w.domain) if args.dataset else DataSet(w.domain, {})
    bound_value = None
    if args.allocation == "optimal":
        if args.gamma is not None:
            bound_value = args.gamma
        else:
            g = build_query_graph(w)
            bound, fell_back = compute_bound(w, g, args.method, rule, args.timeout_secs)
            bound_value = bound.value
            if fell_back:
                print(f"note: {SAFE_OVERESTIMATE} bound used for allocation", file=sys.stderr)
    budgets = per_query_budgets(w, rule, args.total_budget, args.allocation, bound_value)
    answers = []
    rng = make_rng(args.seed)
    fn = laplace_answer if args.mechanism == "laplace" else gaussian_answer
    for q, b in zip(w.queries, budgets):
        answers.append(fn(q, dataset, b, 1.0, rng))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_answers_csv(answers, fh)
    else:
        write_answers_csv(answers, sys.stdout)
    print(f"average_l1_error={average_l1_error(answers):.6g}", file=sys.stderr)
    return EXIT_OK


def _parse_dists(specs) -> dict:
    out = {}
    for spec in specs or []:
        name, sep, dist = spec.partition("=")
        if not sep or name not in QUANTITIES:
            raise argparse.ArgumentTypeError(
                f"--dist expects QUANTITY=DIST with QUANTITY in {', '.join(QUANTITIES)}; got {spec!r}"
            )
        out[name] = Distribution.parse(dist)
    return out


def cmd_generate(args) -> int:
    if args.kind == "uniform":
        w = gen_uniform_workload(args.m, args.t, args.seed, (args.exp_lo, args.exp_hi))
    elif args.kind == "dist":
        w = gen_distribution_workload(args.m, args.t, _parse_dists(args.dist), args.seed,
                                      (args.exp_lo, args.exp_hi))
    elif args.kind == "census":
        w = gen_census_workload(args.t, args.seed)
    else:
        edges = random_graph(args.n, args.p, np.random.default_rng(args.seed))
        w = maxcut_to_overlap(args.n, edges)
        if args.out:
            write_maxcut_sidecar(f"{args.out}.graph.json", args.n, edges)
    if args.out:
        save_workload(w, args.out)
    else:
        sys.stdout.write(dumps_workload(w))
    return EXIT_OK


def _write_rows(rows, out):
    rows = list(rows)
    fh = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    finally:
        if out:
            fh.close()
    return rows


def cmd_bench(args) -> int:
    if args.suite == "census-utility":
        ts = args.ts or [25, 100, 500]
        rows = bench_mod.census_utility(ts, args.trials, args.seed, args.timeout_secs)
    else:
        rows = bench_mod.feasibility(args.ms or [1, 10, 100], args.ts or [10, 50, 200],
                                     args.trials, args.seed, args.timeout_secs)
    _write_rows(rows, args.out)
    return EXIT_OK


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0 or (kind is float and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="overlapdp", description="Maximum-overlap privacy accounting for predicate query workloads.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="bound the maximum overlap of a workload")
    a.add_argument("workload")
    a.add_argument("--method", choices=["overlap", "clique", "chromatic", "auto"], default="auto")
    a.add_argument("--rule", choices=["eps", "gdp"], default="eps")
    a.add_argument("--timeout-secs", type=_positive(float), default=60.0)
    a.add_argument("--output", help="write the JSON report here")
    a.add_argument("--oracle", choices=["row-scan", "subset"], help="also run a brute-force oracle")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("answer", help="answer a workload with calibrated noise")
    r.add_argument("workload")
    r.add_argument("dataset", nargs="?", help="CSV of attribute labels plus a count column (default: empty data set)")
    r.add_argument("--mechanism", choices=["laplace", "gaussian"], default="gaussian")
    r.add_argument("--total-budget", type=_positive(float), default=1.0)
    r.add_argument("--allocation", choices=["sequential", "optimal"], default="optimal")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--gamma", type=_positive(float), help="precomputed overlap bound (skips analysis)")
    r.add_argument("--method", choices=["overlap", "clique", "chromatic", "auto"], default="auto")
    r.add_argument("--timeout-secs", type=_positive(float), default=60.0)
    r.add_argument("--out", help="answers CSV (default stdout)")
    r.set_defaults(func=cmd_answer)

    gp = sub.add_parser("generate", help="write a synthetic workload")
    gp.add_argument("kind", choices=["uniform", "dist", "census", "maxcut"])
    gp.add_argument("--m", type=_positive(int), default=5)
    gp.add_argument("--t", type=_positive(int), default=100)
    gp.add_argument("--exp-lo", type=_positive(int), default=1)
    gp.add_argument("--exp-hi", type=_positive(int), default=6)
    gp.add_argument("--dist", action="append", metavar="QUANTITY=DIST",
                    help="e.g. num_predicates=exponential:0.5 (repeatable)")
    gp.add_argument("--n", type=_positive(int), default=6, help="maxcut: vertices")
    gp.add_argument("--p", type=float, default=0.5, help="maxcut: edge probability")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out")
    gp.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run an experiment suite and write CSV")
    b.add_argument("--suite", choices=["feasibility", "census-utility"], required=True)
    b.add_argument("--trials", type=_positive(int), default=30)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--timeout-secs", type=_positive(float), default=60.0)
    b.add_argument("--ts", type=_positive(int), nargs="+")
    b.add_argument("--ms", type=_positive(int), nargs="+", help="feasibility: attribute counts")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WorkloadFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except SearchTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
