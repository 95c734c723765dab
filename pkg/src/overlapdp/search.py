"""Exact maximum-weight clique / maximum overlap search and DSatur coloring.

The clique search is a branch and bound that branches on a maximum-degree
vertex and prunes with the weight of a DSatur coloring of the remaining
candidates. The overlap variant additionally keeps the running joint coverage
of the partial clique and drops candidates that would empty it, so every
clique it reports is jointly satisfiable.

Both exact searches are deadline governed. Running out of time raises
:class:`~overlapdp.errors.SearchTimeout`; the incumbent it carries is a lower
bound and must never be used as a privacy budget. DSatur never times out and
always overestimates, which makes it the safe fallback.

Tie-breaking is fixed so repeated runs return identical witnesses:
branching picks the highest degree, then larger weight, then lower index;
DSatur picks the highest saturation, then degree, then weight, then index.
"""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from overlapdp.composition import CompositionRule
from overlapdp.domain import PredicateQuery, QueryId, Workload, subset_coverage_nonempty
from overlapdp.errors import SearchTimeout
from overlapdp.graph import QueryGraph, iter_bits


class BoundKind(str, enum.Enum):
    EXACT_OVERLAP = "exact_overlap"
    EXACT_CLIQUE = "exact_clique"
    APPROX_CHROMATIC = "approx_chromatic"


@dataclass(frozen=True)
class SearchBudget:
    """Wall-clock deadline (seconds) and how many nodes pass between clock polls."""

    deadline: float = 60.0
    check_interval: int = 1024

    def __post_init__(self):
        if not self.deadline > 0:
            raise ValueError("deadline must be positive")
        if self.check_interval < 1:
            raise ValueError("check_interval must be at least 1")


@dataclass(frozen=True)
class OverlapBound:
    """Budget bound for a workload under a composition rule.

    ``witness`` is a tuple of query ids for the exact kinds and a tuple of
    color classes (each a tuple of ids) for ``approx_chromatic``.
    """

    value: float
    kind: BoundKind
    witness: tuple
    timed_out: bool = False
    nodes: int = 0
    elapsed: float = 0.0
    note: str = ""
    positions: tuple = field(default=(), repr=False)

    @property
    def count(self) -> int:
        """Overlap count: witness size, or number of colors for a coloring."""
        return len(self.witness)


class _Expired(Exception):
    pass


def _dsatur(adj: Sequence[int], weights: Sequence[float], cand: int, rule: CompositionRule):
    """Color the subgraph induced by ``cand``; return (weight, classes as bitsets)."""
    verts = list(iter_bits(cand))
    if not verts:
        return 0.0, []
    n = len(verts)
    # Static part of the selection key: higher degree, then weight, then lower index.
    order = sorted(verts, key=lambda v: (-(adj[v] & cand).bit_count(), -weights[v], v))
    key = {}
    for r, v in enumerate(order):
        key[v] = n - r
    stride = n + 1
    neighbour_colors = dict.fromkeys(verts, 0)
    uncolored = cand
    classes: list[int] = []
    class_max: list[float] = []
    pick = key.__getitem__
    for _ in range(n):
        v = max(key, key=pick)
        del key[v]
        used = neighbour_colors.pop(v)
        c = (~used & (used + 1)).bit_length() - 1
        bit = 1 << v
        if c == len(classes):
            classes.append(bit)
            class_max.append(weights[v])
        else:
            classes[c] |= bit
            if weights[v] > class_max[c]:
                class_max[c] = weights[v]
        uncolored ^= bit
        cbit = 1 << c
        for u in iter_bits(adj[v] & uncolored):
            nc = neighbour_colors[u]
            if not nc & cbit:
                neighbour_colors[u] = nc | cbit
                key[u] += stride
    return rule.combine(class_max), classes


class _CliqueSearch:
    def __init__(self, g: QueryGraph, rule: CompositionRule, budget: SearchBudget,
                 queries: Sequence[PredicateQuery] | None = None):
        self.adj = g.adjacency
        self.w = g.weights
        self.rule = rule
        self.budget = budget
        self.queries = queries
        self.best: list[int] = []
        self.best_value = 0.0
        self.nodes = 0
        self.start = time.monotonic()
        self.stop_at = self.start + budget.deadline

    def _tick(self):
        self.nodes += 1
        if self.nodes % self.budget.check_interval == 0 and time.monotonic() > self.stop_at:
            raise _Expired

    def _branch_vertex(self, cand: int) -> int:
        adj, w = self.adj, self.w
        return max(iter_bits(cand), key=lambda v: ((adj[v] & cand).bit_count(), w[v], -v))

    def _admits(self, cov: dict, v: int) -> bool:
        for i, p in self.queries[v].predicates.items():
            if not cov.get(i, -1) & p.mask:
                return False
        return True

    def expand(self, cand: int, clique: list[int], value: float, ub: float, cov: dict | None):
        rule = self.rule
        while True:
            self._tick()
            if not cand:
                exact = rule.combine(self.w[i] for i in clique)
                if exact > self.best_value:
                    self.best = list(clique)
                    self.best_value = exact
                return
            color_bound, _ = _dsatur(self.adj, self.w, cand, rule)
            ub = min(ub, rule.join(value, color_bound))
            if ub <= self.best_value:
                return
            q = self._branch_vertex(cand)
            sub = cand & self.adj[q]
            sub_cov = None
            if cov is not None:
                sub_cov = dict(cov)
                for i, p in self.queries[q].predicates.items():
                    sub_cov[i] = sub_cov.get(i, -1) & p.mask
                for v in iter_bits(sub):
                    if not self._admits(sub_cov, v):
                        sub &= ~(1 << v)
            clique.append(q)
            self.expand(sub, clique, rule.join(value, self.w[q]), ub, sub_cov)
            clique.pop()
            if self.best_value >= ub:
                return
            cand &= ~(1 << q)

    def run(self, cand: int, cov: dict | None):
        ub = self.rule.combine(self.w[v] for v in iter_bits(cand))
        # Inclusion branches nest once per clique member.
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, cand.bit_count() + 200))
        try:
            self.expand(cand, [], 0.0, ub, cov)
        finally:
            sys.setrecursionlimit(limit)


def _finish(g: QueryGraph, search: _CliqueSearch, kind: BoundKind, note: str = "") -> OverlapBound:
    pos = tuple(sorted(search.best))
    return OverlapBound(
        value=search.best_value,
        kind=kind,
        witness=tuple(g.vertex_ids[i] for i in pos),
        nodes=search.nodes,
        elapsed=time.monotonic() - search.start,
        note=note,
        positions=pos,
    )


def _run(g, search, cand, cov, kind, what):
    try:
        search.run(cand, cov)
    except _Expired:
        partial = _finish(g, search, kind, "UNSAFE: best-so-far lower bound, not a budget")
        partial = replace(partial, timed_out=True)
        raise SearchTimeout(
            f"{what} search exceeded {search.budget.deadline:g}s after {search.nodes} nodes; "
            f"best-so-far {partial.value:g} is an UNSAFE lower bound",
            partial,
        ) from None
    return _finish(g, search, kind)


def max_weight_clique(g: QueryGraph, comp: CompositionRule | str = "eps",
                      budget: SearchBudget | None = None) -> OverlapBound:
    """Exact weighted clique number of the query graph."""
    if g.t == 0:
        raise ValueError("graph has no vertices")
    rule = CompositionRule.parse(comp)
    search = _CliqueSearch(g, rule, budget or SearchBudget())
    bound = _run(g, search, g.all_mask, None, BoundKind.EXACT_CLIQUE, "clique")
    if not g.is_clique(bound.positions):
        raise AssertionError("clique search returned a non-clique")
    return bound


def max_overlap(w: Workload, g: QueryGraph, comp: CompositionRule | str = "eps",
                budget: SearchBudget | None = None) -> OverlapBound:
    """Exact maximum weighted overlap: the heaviest jointly satisfiable query set."""
    if w.t == 0:
        raise ValueError("workload has no queries")
    if g.vertex_ids != tuple(q.id for q in w.queries):
        raise ValueError("graph was not built from this workload")
    rule = CompositionRule.parse(comp)
    cand = 0
    for i, q in enumerate(w.queries):
        if not q.is_contradiction:
            cand |= 1 << i
    if not cand:
        return OverlapBound(0.0, BoundKind.EXACT_OVERLAP, (),
                            note="every query is a contradiction; overlap defined as 0")
    search = _CliqueSearch(g, rule, budget or SearchBudget(), w.queries)
    bound = _run(g, search, cand, {}, BoundKind.EXACT_OVERLAP, "overlap")
    members = [w.queries[i] for i in bound.positions]
    if not subset_coverage_nonempty(members):
        raise AssertionError("overlap search returned a set with empty joint coverage")
    return bound


def dsatur_coloring(g: QueryGraph, comp: CompositionRule | str = "eps") -> OverlapBound:
    """Safe upper bound: weight of a DSatur coloring of the query graph.

    Each color class is an independent set, so its queries compose in
    parallel at the class's largest weight; classes compose sequentially.
    """
    rule = CompositionRule.parse(comp)
    start = time.monotonic()
    value, classes = _dsatur(g.adjacency, g.weights, g.all_mask, rule)
    part = tuple(tuple(iter_bits(c)) for c in classes)
    for cls in part:
        for k, a in enumerate(cls):
            if any(g.adjacent(a, b) for b in cls[k + 1:]):
                raise AssertionError("DSatur produced an improper coloring")
    return OverlapBound(
        value=value,
        kind=BoundKind.APPROX_CHROMATIC,
        witness=tuple(tuple(g.vertex_ids[i] for i in cls) for cls in part),
        elapsed=time.monotonic() - start,
        positions=part,
    )


def witness_ids(bound: OverlapBound) -> list[QueryId]:
    """Flat list of query ids mentioned by a bound's witness."""
    if bound.kind is BoundKind.APPROX_CHROMATIC:
        return [q for cls in bound.witness for q in cls]
    return list(bound.witness)
