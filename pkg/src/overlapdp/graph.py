"""Pairwise-overlap query graph.

Vertices are queries in workload order; an edge joins two queries whose
coverages intersect. Adjacency is held as one ``int`` bitset per vertex, which
is what the clique and coloring searches want for neighbourhood intersection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from overlapdp.domain import QueryId, Workload
from overlapdp.errors import WorkloadFormatError


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, eq=False)
class QueryGraph:
    vertex_ids: tuple[QueryId, ...]
    weights: tuple[float, ...]
    adjacency: tuple[int, ...]

    def __post_init__(self):
        n = len(self.vertex_ids)
        if len(self.weights) != n or len(self.adjacency) != n:
            raise ValueError("vertex_ids, weights and adjacency must have equal length")
        for i, row in enumerate(self.adjacency):
            if row >> i & 1:
                raise ValueError(f"self-loop on vertex {self.vertex_ids[i]!r}")
            if row >> n:
                raise ValueError(f"vertex {self.vertex_ids[i]!r} has a neighbour outside the graph")
            for j in iter_bits(row):
                if not self.adjacency[j] >> i & 1:
                    raise ValueError("adjacency is not symmetric")

    @property
    def t(self) -> int:
        return len(self.vertex_ids)

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adjacency) // 2

    @property
    def all_mask(self) -> int:
        return (1 << self.t) - 1

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def degree(self, i: int) -> int:
        return self.adjacency[i].bit_count()

    def neighbors(self, i: int) -> list[int]:
        return list(iter_bits(self.adjacency[i]))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, row in enumerate(self.adjacency) for j in iter_bits(row >> (i + 1) << (i + 1))]

    def position(self, query_id: QueryId) -> int:
        try:
            return self.vertex_ids.index(query_id)
        except ValueError:
            raise ValueError(f"unknown vertex {query_id!r}") from None

    def is_clique(self, positions: Iterable[int]) -> bool:
        ps = list(positions)
        return all(self.adjacent(a, b) for k, a in enumerate(ps) for b in ps[k + 1:])


def build_query_graph(w: Workload) -> QueryGraph:
    """Build the overlap graph of a workload.

    For every attribute the distinct predicates are grouped, overlaps are
    decided once per pair of groups, and each query receives the bitset of
    queries compatible with it on that attribute. A query's neighbourhood is
    the AND of those bitsets over its constrained attributes. Contradictory
    queries overlap nothing and are isolated up front.
    """
    t = w.t
    everyone = (1 << t) - 1
    contradictory = 0
    for i, q in enumerate(w.queries):
        if q.is_contradiction:
            contradictory |= 1 << i
    alive = everyone & ~contradictory

    # attribute -> {mask: member bitset}
    groups: dict[int, dict[int, int]] = {}
    for i, q in enumerate(w.queries):
        if contradictory >> i & 1:
            continue
        for a, p in q.predicates.items():
            g = groups.setdefault(a, {})
            g[p.mask] = g.get(p.mask, 0) | (1 << i)

    # attribute -> {mask: bitset of live queries compatible with that mask}
    compat: dict[int, dict[int, int]] = {}
    for a, g in groups.items():
        constrained = 0
        for members in g.values():
            constrained |= members
        free = alive & ~constrained
        masks = list(g)
        table = {}
        for k, mk in enumerate(masks):
            acc = free | g[mk]
            for ml in masks[:k]:
                if mk & ml:
                    acc |= g[ml]
            for ml in masks[k + 1:]:
                if mk & ml:
                    acc |= g[ml]
            table[mk] = acc
        compat[a] = table

    adjacency = []
    for i, q in enumerate(w.queries):
        if contradictory >> i & 1:
            adjacency.append(0)
            continue
        row = alive
        for a, p in q.predicates.items():
            row &= compat[a][p.mask]
        adjacency.append(row & ~(1 << i))
    return QueryGraph(tuple(q.id for q in w.queries), w.weights, tuple(adjacency))


def induced_subgraph(g: QueryGraph, keep: Iterable[QueryId]) -> QueryGraph:
    """Subgraph on ``keep`` (query ids), preserving the original vertex order."""
    wanted = set(keep)
    unknown = wanted.difference(g.vertex_ids)
    if unknown:
        raise ValueError(f"unknown vertices: {sorted(map(repr, unknown))}")
    old = [i for i, v in enumerate(g.vertex_ids) if v in wanted]
    new_pos = {o: n for n, o in enumerate(old)}
    adjacency = []
    for o in old:
        row = 0
        for j in iter_bits(g.adjacency[o]):
            n = new_pos.get(j)
            if n is not None:
                row |= 1 << n
        adjacency.append(row)
    return QueryGraph(
        tuple(g.vertex_ids[o] for o in old), tuple(g.weights[o] for o in old), tuple(adjacency)
    )


def write_edge_list(g: QueryGraph, path) -> None:
    """Write ``t edge_count`` followed by one ``id_i id_j`` line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.t} {g.edge_count}\n")
        for i, j in g.edges():
            fh.write(f"{g.vertex_ids[i]} {g.vertex_ids[j]}\n")


def read_edge_list(path, vertex_ids: Sequence[QueryId] | None = None) -> QueryGraph:
    """Read the edge-list format back (unit weights).

    Vertex ids are strings unless ``vertex_ids`` supplies the full vertex order,
    which is needed to recover isolated vertices.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise WorkloadFormatError("missing 't edge_count' header", f"{path}:1")
    t, e = int(lines[0][0]), int(lines[0][1])
    ids = [str(v) for v in vertex_ids] if vertex_ids is not None else []
    pairs = []
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != 2:
            raise WorkloadFormatError("expected two vertex ids", f"{path}:{lineno}")
        for p in parts:
            if p not in ids:
                if vertex_ids is not None:
                    raise WorkloadFormatError(f"unknown vertex {p!r}", f"{path}:{lineno}")
                ids.append(p)
        pairs.append(parts)
    if len(pairs) != e:
        raise WorkloadFormatError(f"header promises {e} edges, found {len(pairs)}", f"{path}:1")
    while len(ids) < t:
        ids.append(f"_isolated{len(ids)}")
    pos = {v: i for i, v in enumerate(ids)}
    adjacency = [0] * len(ids)
    for a, b in pairs:
        i, j = pos[a], pos[b]
        adjacency[i] |= 1 << j
        adjacency[j] |= 1 << i
    return QueryGraph(tuple(ids), (1.0,) * len(ids), tuple(adjacency))
