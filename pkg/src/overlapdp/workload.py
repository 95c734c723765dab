"""Synthetic workload generators.

* :func:`gen_uniform_workload` draws random conjunctions over attributes of
  size ``10^k``.
* :func:`gen_distribution_workload` does the same with a configurable
  distribution for each of the four random quantities (number of predicates,
  which attributes, number of values, which values).
* :func:`gen_census_workload` samples the census-style prefix-income workload.
* :func:`maxcut_to_overlap` encodes a Max Cut instance so that the maximum
  overlap equals the maximum cut; handy for adversarial test instances.

Every generator is deterministic in its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from overlapdp import limits
from overlapdp.domain import Attribute, Domain, Predicate, PredicateQuery, Workload, mask_from_indices
from overlapdp.errors import CapacityError

QUANTITIES = ("num_predicates", "attributes", "num_values", "values")


@dataclass(frozen=True)
class Distribution:
    """How one random quantity is drawn.

    ``param`` is relative to the range being drawn from: the exponential scale
    or the normal standard deviation as a fraction of that range. Counts are
    rounded to the nearest integer and clamped into range, which piles the
    clipped mass onto the endpoints. Selections of distinct indices use
    weighted sampling without replacement with weights from the density; the
    normal is centred on the middle index and the exponential decays from
    index 0.
    """

    kind: str = "uniform"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "exponential", "normal"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.kind != "uniform" and not (self.param > 0 and math.isfinite(self.param)):
            raise ValueError(f"{self.kind} distribution needs a positive finite parameter")

    @classmethod
    def parse(cls, text: str) -> Distribution:
        """Parse ``uniform``, ``exponential:0.5`` or ``normal:0.2``."""
        name, _, arg = text.partition(":")
        return cls(name, float(arg) if arg else 0.0)

    def __str__(self) -> str:
        return self.kind if self.kind == "uniform" else f"{self.kind}:{self.param:g}"

    def draw_count(self, rng: np.random.Generator, lo: int, hi: int) -> int:
        if self.kind == "uniform":
            return int(rng.integers(lo, hi + 1))
        span = hi - lo + 1
        if self.kind == "exponential":
            x = lo + rng.exponential(self.param * span)
        else:
            x = rng.normal((lo + hi) / 2, self.param * span)
        return int(min(max(round(x), lo), hi))

    def choose(self, rng: np.random.Generator, n: int, k: int) -> np.ndarray:
        if self.kind == "uniform":
            return np.sort(rng.choice(n, size=k, replace=False))
        idx = np.arange(n, dtype=float)
        if self.kind == "exponential":
            logw = -idx / (self.param * n)
        else:
            logw = -0.5 * ((idx - (n - 1) / 2) / (self.param * n)) ** 2
        # Efraimidis-Spirakis: top-k of log(u) / w, computed in log space.
        keys = np.log(rng.random(n)) * np.exp(-logw)
        if k >= n:
            return idx.astype(np.int64)
        top = np.argpartition(-keys, k - 1)[:k]
        return np.sort(top)


UNIFORM = {q: Distribution() for q in QUANTITIES}

DEFAULT_ALTERNATIVES = {
    "num_predicates": [Distribution("exponential", s) for s in (0.5, 1.0, 2.0)],
    "attributes": [Distribution("normal", s) for s in (0.1, 0.2, 0.3)],
    "num_values": [Distribution("exponential", s) for s in (0.5, 1.0, 2.0)],
    "values": [Distribution("normal", s) for s in (0.1, 0.2, 0.3)],
}


def _random_domain(rng: np.random.Generator, m: int, exponent_range: tuple[int, int]) -> Domain:
    lo, hi = exponent_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid exponent range {exponent_range}")
    ks = rng.integers(lo, hi + 1, size=m)
    log10 = int(ks.sum())
    if log10 > limits.max_log10_domain():
        raise CapacityError(f"domain of size 10^{log10} exceeds cap 10^{limits.max_log10_domain()}")
    return Domain.from_cardinalities([10 ** int(k) for k in ks])


def gen_distribution_workload(
    m: int,
    t: int,
    dists: dict[str, Distribution] | None = None,
    seed: int = 0,
    exponent_range: tuple[int, int] = (1, 6),
) -> Workload:
    """Random predicate-query workload with per-quantity distributions.

    Missing entries in ``dists`` default to uniform. Attribute sizes are
    ``10^k`` with ``k`` uniform over ``exponent_range``.
    """
    if m < 1 or t < 1:
        raise ValueError("m and t must be at least 1")
    dists = {**UNIFORM, **(dists or {})}
    unknown = set(dists) - set(QUANTITIES)
    if unknown:
        raise ValueError(f"unknown quantities {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    domain = _random_domain(rng, m, exponent_range)
    cards = domain.cardinalities
    budget = limits.max_predicate_bits()
    if all(dists[q].kind == "uniform" for q in ("num_predicates", "attributes")):
        expected = t * (m + 1) / 2 * (sum(cards) / m)
        if expected > budget:
            raise CapacityError(
                f"expected predicate storage of {expected:.3g} bits exceeds cap {budget:.3g}; "
                "narrow exponent_range or reduce m, t"
            )
    used = 0
    queries = []
    for qi in range(t):
        k = dists["num_predicates"].draw_count(rng, 1, m)
        attrs = dists["attributes"].choose(rng, m, k)
        preds = {}
        for a in attrs:
            a = int(a)
            n = cards[a]
            size = dists["num_values"].draw_count(rng, 1, n)
            values = dists["values"].choose(rng, n, size)
            preds[a] = Predicate(a, n, mask_from_indices(values, n))
            used += n
        if used > budget:
            raise CapacityError(f"predicate storage exceeded cap of {budget} bits")
        queries.append(PredicateQuery(f"q{qi}", preds, 1.0))
    return Workload(domain, tuple(queries))


def gen_uniform_workload(
    m: int,
    t: int,
    seed: int = 0,
    exponent_range: tuple[int, int] = (1, 6),
) -> Workload:
    """Random workload with all four quantities uniform.

    Each query picks ``m' ~ U{1..m}`` distinct attributes and, for each, a
    uniform random subset of ``a' ~ U{1..|A|}`` values.
    """
    return gen_distribution_workload(m, t, UNIFORM, seed, exponent_range)


# Census-style domain: five attributes, 1.4 * 10^6 rows.
INCOME_BUCKETS = 5000
INCOME_TOP = 750_000
CENSUS_CATEGORICAL = {
    "Age": [f"{lo}-{lo + 20}" for lo in range(0, 100, 20)],
    "Marital": ["never-married", "married", "divorced", "widowed"],
    "Race": ["white", "black", "american-indian", "asian", "pacific-islander", "other", "multiple"],
    "Gender": ["female", "male"],
}


def census_domain() -> Domain:
    width = INCOME_TOP // INCOME_BUCKETS
    income = Attribute(
        "Income", INCOME_BUCKETS, tuple(f"{i * width}-{(i + 1) * width}" for i in range(INCOME_BUCKETS))
    )
    rest = [Attribute(name, len(labels), tuple(labels)) for name, labels in CENSUS_CATEGORICAL.items()]
    return Domain((income, *rest))


def _census_query(domain: Domain, qid, income_hi: int, choices: Sequence[int]) -> PredicateQuery:
    """Query ``Income in buckets [0, income_hi)`` and one value or ``*`` per categorical field.

    ``choices[j] == cardinality`` stands for the tautology.
    """
    preds = {0: Predicate(0, INCOME_BUCKETS, (1 << income_hi) - 1)}
    for j, c in enumerate(choices, start=1):
        card = domain.attributes[j].cardinality
        if c < card:
            preds[j] = Predicate(j, card, 1 << c)
    return PredicateQuery(qid, preds, 1.0)


def _census_radices(domain: Domain) -> list[int]:
    return [INCOME_BUCKETS] + [a.cardinality + 1 for a in domain.attributes[1:]]


def census_workload_size() -> int:
    """Number of distinct queries in the full census workload (3,600,000)."""
    return math.prod(_census_radices(census_domain()))


def gen_census_workload(t: int, seed: int = 0) -> Workload:
    """Sample ``t`` census queries with independent uniform components."""
    if t < 1:
        raise ValueError("t must be at least 1")
    domain = census_domain()
    rng = np.random.default_rng(seed)
    radices = _census_radices(domain)
    draws = np.column_stack([rng.integers(0, r, size=t) for r in radices])
    queries = tuple(
        _census_query(domain, f"c{k}", int(row[0]) + 1, [int(x) for x in row[1:]])
        for k, row in enumerate(draws)
    )
    return Workload(domain, queries)


def iter_census_queries(start: int = 0, stop: int | None = None) -> Iterator[PredicateQuery]:
    """Enumerate the full census workload by mixed-radix index, in slices."""
    domain = census_domain()
    radices = _census_radices(domain)
    total = math.prod(radices)
    stop = total if stop is None else min(stop, total)
    for idx in range(start, stop):
        digits = []
        rem = idx
        for r in reversed(radices):
            digits.append(rem % r)
            rem //= r
        digits.reverse()
        yield _census_query(domain, f"c{idx}", digits[0] + 1, digits[1:])


def census_full_workload(start: int = 0, stop: int | None = None, allow_large: bool = False,
                         max_queries: int = 100_000) -> Workload:
    """Materialize a slice of the full census workload.

    Slices longer than ``max_queries`` need ``allow_large=True``.
    """
    total = census_workload_size()
    stop = total if stop is None else min(stop, total)
    if stop - start > max_queries and not allow_large:
        raise CapacityError(
            f"materializing {stop - start} census queries needs allow_large=True"
        )
    return Workload(census_domain(), tuple(iter_census_queries(start, stop)))


def maxcut_to_overlap(n: int, edges: Iterable[tuple[int, int]]) -> Workload:
    """Encode a Max Cut instance as a maximum-overlap instance.

    Each vertex becomes a binary attribute ``x_v`` (value 1 means "in S"). Each
    edge ``uv`` contributes the queries ``x_u=0 and x_v=1`` and ``x_u=1 and x_v=0``;
    a row satisfies exactly one of them iff the edge is cut, so the maximum
    overlap equals the maximum cut.
    """
    edges = [(int(u), int(v)) for u, v in edges]
    if not edges:
        raise ValueError("graph has no edges; overlap would be 0")
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop on vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) outside vertex range [0, {n})")
    domain = Domain(tuple(Attribute(f"x{v}", 2, ("0", "1")) for v in range(n)))
    queries = []
    for k, (u, v) in enumerate(edges):
        queries.append(PredicateQuery(f"e{k}:{u}-{v}:a", {u: Predicate(u, 2, 0b01), v: Predicate(v, 2, 0b10)}))
        queries.append(PredicateQuery(f"e{k}:{u}-{v}:b", {u: Predicate(u, 2, 0b10), v: Predicate(v, 2, 0b01)}))
    return Workload(domain, tuple(queries))


def write_maxcut_sidecar(path, n: int, edges: Iterable[tuple[int, int]]) -> None:
    """Record the source graph next to a reduced workload for oracle cross-checks."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"n": n, "edges": [list(e) for e in edges]}, fh, indent=1)
        fh.write("\n")


def read_maxcut_sidecar(path) -> tuple[int, list[tuple[int, int]]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return int(doc["n"]), [tuple(e) for e in doc["edges"]]


def random_graph(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Erdos-Renyi edge list on ``n`` vertices."""
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
