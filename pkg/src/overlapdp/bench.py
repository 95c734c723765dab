"""Experiment suites behind ``overlapdp bench``.

Each suite yields plain dict rows so the CLI can write them as CSV.
"""

from __future__ import annotations

import statistics
import time
from typing import Iterator, Sequence

import numpy as np

from overlapdp.composition import utility_gain
from overlapdp.errors import CapacityError, SearchTimeout
from overlapdp.graph import build_query_graph
from overlapdp.search import SearchBudget, dsatur_coloring, max_overlap, max_weight_clique
from overlapdp.workload import gen_census_workload, gen_uniform_workload


def trial_seed(master: int, *keys: int) -> int:
    """Per-trial seed from the master seed and trial coordinates (e.g. t, trial index)."""
    return int(np.random.SeedSequence([master, *keys]).generate_state(1, np.uint64)[0])


def census_trial(t: int, seed: int, timeout: float = 60.0) -> dict:
    w = gen_census_workload(t, seed)
    g = build_query_graph(w)
    budget = SearchBudget(timeout)
    gamma = max_overlap(w, g, "eps", budget)
    omega = max_weight_clique(g, "eps", budget)
    chi = dsatur_coloring(g, "eps")
    return {
        "t": t,
        "seed": seed,
        "edges": g.edge_count,
        "gamma": gamma.value,
        "omega": omega.value,
        "chi": chi.value,
        "utility_gain": utility_gain(t, gamma.value),
    }


def census_utility(ts: Sequence[int] = (25, 100, 500), trials: int = 30, seed: int = 0,
                   timeout: float = 60.0, per_trial: list | None = None) -> Iterator[dict]:
    """Mean overlap, clique and coloring bounds and utility gain per workload size."""
    for t in ts:
        rows = [census_trial(t, trial_seed(seed, t, k), timeout) for k in range(trials)]
        if per_trial is not None:
            per_trial.extend(rows)
        yield {
            "t": t,
            "trials": trials,
            "mean_gamma": statistics.fmean(r["gamma"] for r in rows),
            "mean_omega": statistics.fmean(r["omega"] for r in rows),
            "mean_chi": statistics.fmean(r["chi"] for r in rows),
            "mean_utility_gain": statistics.fmean(r["utility_gain"] for r in rows),
            "mean_edges": statistics.fmean(r["edges"] for r in rows),
        }


def _timed(fn):
    start = time.monotonic()
    try:
        value = fn().value
        status = "ok"
    except SearchTimeout:
        value, status = "", "timeout"
    return status, value, time.monotonic() - start


def feasibility(ms: Sequence[int] = (1, 10, 100), ts: Sequence[int] = (10, 50, 200),
                trials: int = 1, seed: int = 0, timeout: float = 60.0,
                exponent_range: tuple[int, int] = (1, 3)) -> Iterator[dict]:
    """Completion and wall time per algorithm over a (domain size, t) grid."""
    for m in ms:
        for t in ts:
            for k in range(trials):
                s = trial_seed(seed, m, t, k)
                try:
                    start = time.monotonic()
                    w = gen_uniform_workload(m, t, s, exponent_range)
                    g = build_query_graph(w)
                    build = time.monotonic() - start
                except CapacityError as exc:
                    yield {"m": m, "t": t, "trial": k, "seed": s, "algorithm": "build",
                           "status": "capacity", "value": "", "seconds": "", "log10_domain": "",
                           "note": str(exc)}
                    continue
                base = {"m": m, "t": t, "trial": k, "seed": s, "log10_domain": w.domain.log10_size}
                yield {**base, "algorithm": "build", "status": "ok", "value": g.edge_count,
                       "seconds": build, "note": ""}
                budget = SearchBudget(timeout)
                for name, fn in (
                    ("overlap", lambda: max_overlap(w, g, "eps", budget)),
                    ("clique", lambda: max_weight_clique(g, "eps", budget)),
                    ("chromatic", lambda: dsatur_coloring(g, "eps")),
                ):
                    status, value, secs = _timed(fn)
                    yield {**base, "algorithm": name, "status": status, "value": value,
                           "seconds": secs, "note": ""}
