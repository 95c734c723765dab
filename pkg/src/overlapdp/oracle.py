"""Brute-force ground truth for the maximum overlap.

Two independent routes: scanning every row of a small domain, and
enumerating query subsets level by level for small workloads. Neither uses the
query graph, so they can check the graph-based searches.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from overlapdp import limits
from overlapdp.composition import CompositionRule, RuleKind
from overlapdp.domain import QueryId, Workload, coverage_admits
from overlapdp.errors import CapacityError


class OracleMethod(str, enum.Enum):
    ROW_SCAN = "row-scan"
    SUBSET_ENUMERATION = "subset-enumeration"


@dataclass(frozen=True)
class OracleResult:
    gamma: float
    witness: tuple[QueryId, ...]
    method: OracleMethod
    row: tuple[int, ...] | None = None


def _row_digits(cards: tuple[int, ...], n_rows: int) -> list[np.ndarray]:
    """Value index of every attribute for rows 0..n_rows-1 in mixed-radix order.

    The last attribute varies fastest.
    """
    digits = []
    stride = n_rows
    idx = np.arange(n_rows, dtype=np.int64)
    for c in cards:
        stride //= c
        digits.append((idx // stride) % c)
    return digits


def _coverage_matrix(w: Workload) -> np.ndarray:
    """Boolean (t, |D|) matrix: query i covers row r."""
    d = w.domain
    try:
        n_rows = d.size
    except CapacityError:
        n_rows = None
    if n_rows is None or n_rows > limits.max_rows():
        raise CapacityError(
            f"row scan needs |D| <= {limits.max_rows()}, domain has ~10^{d.log10_size:.2f} rows"
        )
    digits = _row_digits(d.cardinalities, n_rows)
    cover = np.ones((w.t, n_rows), dtype=bool)
    for k, q in enumerate(w.queries):
        for i, p in q.predicates.items():
            accepted = np.zeros(d.cardinalities[i], dtype=bool)
            accepted[list(p.values)] = True
            cover[k] &= accepted[digits[i]]
    return cover


def _unravel(d_cards: tuple[int, ...], r: int) -> tuple[int, ...]:
    return tuple(int(x) for x in np.unravel_index(r, d_cards))


def gamma_by_row_scan(w: Workload, rule: CompositionRule | str = "eps") -> OracleResult:
    """Maximum over rows of the composed weight of the queries covering the row."""
    rule = CompositionRule.parse(rule)
    cover = _coverage_matrix(w)
    weights = np.asarray(w.weights, dtype=float)
    power = 1 if rule.kind is RuleKind.EPS_SUM else 2
    totals = (weights ** power) @ cover
    if not cover.any():
        return OracleResult(0.0, (), OracleMethod.ROW_SCAN)
    r = int(np.argmax(totals))
    members = np.flatnonzero(cover[:, r])
    witness = tuple(w.queries[i].id for i in members)
    gamma = rule.combine(w.queries[i].weight for i in members)
    return OracleResult(gamma, witness, OracleMethod.ROW_SCAN, _unravel(w.domain.cardinalities, r))


def l1_sensitivity_by_row_scan(w: Workload) -> int:
    """Largest number of queries whose answer changes when one row is added or removed."""
    cover = _coverage_matrix(w)
    if cover.size == 0:
        return 0
    return int(cover.sum(axis=0).max())


def gamma_by_subset_enumeration(w: Workload, rule: CompositionRule | str = "eps") -> OracleResult:
    """Search jointly satisfiable subsets by increasing size.

    A (k+1)-set is tested only when all its k-subsets were satisfiable, since
    satisfiable sets are closed under taking subsets.
    """
    rule = CompositionRule.parse(rule)
    t = w.t
    if t > limits.max_subset_queries():
        raise CapacityError(f"subset enumeration needs t <= {limits.max_subset_queries()}, got {t}")
    queries = w.queries
    level: dict[tuple[int, ...], dict] = {}
    for i, q in enumerate(queries):
        cov = coverage_admits({}, q)
        if cov is not None:
            level[(i,)] = cov
    best: tuple[int, ...] = ()
    best_value = 0.0
    while level:
        for s in level:
            value = rule.combine(queries[i].weight for i in s)
            if value > best_value:
                best, best_value = s, value
        nxt: dict[tuple[int, ...], dict] = {}
        for s, cov in level.items():
            for j in range(s[-1] + 1, t):
                cand = s + (j,)
                if any(cand[:k] + cand[k + 1:] not in level for k in range(len(cand) - 1)):
                    continue
                joint = coverage_admits(cov, queries[j])
                if joint is not None:
                    nxt[cand] = joint
        level = nxt
    return OracleResult(best_value, tuple(queries[i].id for i in best), OracleMethod.SUBSET_ENUMERATION)


def brute_force_max_cut(n: int, edges) -> int:
    """Largest cut over all 2^n vertex subsets."""
    best = 0
    for s in range(1 << n):
        cut = sum(1 for u, v in edges if (s >> u & 1) != (s >> v & 1))
        best = max(best, cut)
    return best


def brute_force_weighted_clique(adjacency, weights, rule: CompositionRule | str = "eps") -> float:
    """Heaviest clique by enumerating every vertex subset (small graphs only)."""
    rule = CompositionRule.parse(rule)
    n = len(adjacency)
    if n > 22:
        raise CapacityError("brute-force clique enumeration is limited to 22 vertices")
    best = 0.0
    for s in range(1, 1 << n):
        members = [i for i in range(n) if s >> i & 1]
        if all(adjacency[a] >> b & 1 for k, a in enumerate(members) for b in members[k + 1:]):
            best = max(best, rule.combine(weights[i] for i in members))
    return best


def exact_chromatic_number(adjacency) -> int:
    """Smallest k admitting a proper k-coloring, by exhaustive backtracking."""
    n = len(adjacency)
    if n == 0:
        return 0
    colors = [-1] * n

    def fits(k: int, v: int) -> bool:
        if v == n:
            return True
        for c in range(k):
            if all(colors[u] != c for u in range(v) if adjacency[v] >> u & 1):
                colors[v] = c
                if fits(k, v + 1):
                    return True
        colors[v] = -1
        return False

    for k in range(1, n + 1):
        if fits(k, 0):
            return k
    return n  # pragma: no cover

