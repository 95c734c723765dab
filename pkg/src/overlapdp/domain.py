"""Attribute domains, predicates and predicate queries.

Attribute values are canonicalized to indices ``0..|A|-1``. A predicate keeps
its accepted values as a bitmask held in a Python ``int``, so intersection is
a single ``&`` regardless of attribute size. Queries store predicates
sparsely: an attribute without a predicate is an implicit tautology.

Nothing in this module enumerates the domain. Coverage questions are answered
attribute by attribute, which is what makes domains of size 10^80000 usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from overlapdp import limits
from overlapdp.errors import CapacityError

QueryId = Hashable


def mask_from_indices(indices: Iterable[int], cardinality: int | None = None) -> int:
    """Pack value indices into an integer bitmask (bit ``i`` set for index ``i``)."""
    if isinstance(indices, np.ndarray) and indices.size > 64:
        if cardinality is None:
            cardinality = int(indices.max()) + 1
        bits = np.zeros(cardinality, dtype=bool)
        bits[indices] = True
        return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    mask = 0
    for i in indices:
        i = int(i)
        if i < 0:
            raise ValueError(f"negative value index {i}")
        mask |= 1 << i
    return mask


def indices_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


@dataclass(frozen=True)
class Attribute:
    """A finite attribute with ``cardinality`` values and optional labels."""

    name: str
    cardinality: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.cardinality, (int, np.integer)) or self.cardinality < 1:
            raise ValueError(f"attribute {self.name!r}: cardinality must be a positive integer")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            object.__setattr__(self, "labels", labels)
            if len(labels) != self.cardinality:
                raise ValueError(
                    f"attribute {self.name!r}: {len(labels)} labels for cardinality {self.cardinality}"
                )
            if len(set(labels)) != len(labels):
                raise ValueError(f"attribute {self.name!r}: labels are not distinct")
        object.__setattr__(self, "cardinality", int(self.cardinality))

    def index_of(self, value: str | int) -> int:
        """Resolve a label or an index to a value index."""
        if self.labels is not None and isinstance(value, str):
            try:
                return self.labels.index(value)
            except ValueError:
                raise ValueError(f"attribute {self.name!r} has no value {value!r}") from None
        if isinstance(value, (bool, np.bool_)):
            raise ValueError(f"attribute {self.name!r}: boolean is not a value index")
        if isinstance(value, (int, np.integer)):
            if not 0 <= value < self.cardinality:
                raise ValueError(
                    f"attribute {self.name!r}: index {value} outside [0, {self.cardinality})"
                )
            return int(value)
        raise ValueError(f"attribute {self.name!r} has no value {value!r}")

    def label_of(self, index: int) -> str | int:
        return self.labels[index] if self.labels is not None else index


@dataclass(frozen=True)
class Domain:
    """Ordered Cartesian product of attributes."""

    attributes: tuple[Attribute, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        if not attrs:
            raise ValueError("a domain needs at least one attribute")
        index = {}
        for i, a in enumerate(attrs):
            if a.name in index:
                raise ValueError(f"duplicate attribute name {a.name!r}")
            index[a.name] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_cardinalities(cls, cardinalities: Sequence[int], prefix: str = "A") -> Domain:
        return cls(tuple(Attribute(f"{prefix}{i}", int(c)) for i, c in enumerate(cardinalities)))

    @property
    def m(self) -> int:
        return len(self.attributes)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(a.cardinality for a in self.attributes)

    @property
    def log10_size(self) -> float:
        return math.fsum(math.log10(a.cardinality) for a in self.attributes)

    @property
    def size(self) -> int:
        """Exact number of rows; refuses when the domain is astronomically large."""
        if self.log10_size > limits.max_exact_log10():
            raise CapacityError(
                f"domain has ~10^{self.log10_size:.1f} rows; exact size is not materialized"
            )
        return math.prod(self.cardinalities)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown attribute {name!r}") from None

    def predicate(self, attribute: str | int, values: Iterable[str | int]) -> Predicate:
        """Build a predicate from attribute name/index and value labels/indices."""
        i = attribute if isinstance(attribute, int) else self.index_of(attribute)
        attr = self.attributes[i]
        return Predicate(i, attr.cardinality, mask_from_indices(attr.index_of(v) for v in values))

    def query(
        self,
        query_id: QueryId,
        predicates: Mapping[str | int, Iterable[str | int]] | None = None,
        weight: float = 1.0,
    ) -> PredicateQuery:
        """Convenience constructor: ``domain.query("q1", {"Postcode": ["A"]})``."""
        preds = {}
        for key, values in (predicates or {}).items():
            p = self.predicate(key, values)
            preds[p.attribute_index] = p
        return PredicateQuery(query_id, preds, weight)


@dataclass(frozen=True)
class Predicate:
    """Set of accepted values of one attribute, as a bitmask."""

    attribute_index: int
    cardinality: int
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.cardinality:
            raise ValueError(
                f"predicate on attribute {self.attribute_index}: value index out of range "
                f"for cardinality {self.cardinality}"
            )

    @classmethod
    def of(cls, attribute_index: int, cardinality: int, values: Iterable[int]) -> Predicate:
        return cls(attribute_index, cardinality, mask_from_indices(values, cardinality))

    @classmethod
    def tautology(cls, attribute_index: int, cardinality: int) -> Predicate:
        return cls(attribute_index, cardinality, (1 << cardinality) - 1)

    @classmethod
    def contradiction(cls, attribute_index: int, cardinality: int) -> Predicate:
        return cls(attribute_index, cardinality, 0)

    @property
    def values(self) -> tuple[int, ...]:
        return indices_from_mask(self.mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def is_tautology(self) -> bool:
        return self.mask == (1 << self.cardinality) - 1

    @property
    def is_contradiction(self) -> bool:
        return self.mask == 0

    def __contains__(self, value: int) -> bool:
        return bool(self.mask >> value & 1)


@dataclass(frozen=True, eq=True)
class PredicateQuery:
    """Counting query: a conjunction of per-attribute predicates plus a privacy weight."""

    id: QueryId
    predicates: Mapping[int, Predicate] = field(default_factory=dict, hash=False)
    weight: float = 1.0

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        preds = dict(sorted(self.predicates.items()))
        for key, p in preds.items():
            if key != p.attribute_index:
                raise ValueError(
                    f"query {self.id!r}: predicate keyed {key} is on attribute {p.attribute_index}"
                )
        object.__setattr__(self, "predicates", preds)
        w = float(self.weight)
        if not w > 0 or not math.isfinite(w):
            raise ValueError(f"query {self.id!r}: weight must be positive and finite, got {self.weight}")
        object.__setattr__(self, "weight", w)

    @property
    def is_contradiction(self) -> bool:
        return any(p.mask == 0 for p in self.predicates.values())

    def with_weight(self, weight: float) -> PredicateQuery:
        return PredicateQuery(self.id, self.predicates, weight)


@dataclass(frozen=True)
class Workload:
    """A domain together with an ordered list of predicate queries."""

    domain: Domain
    queries: tuple[PredicateQuery, ...]

    def __post_init__(self):
        queries = tuple(self.queries)
        object.__setattr__(self, "queries", queries)
        seen = set()
        cards = self.domain.cardinalities
        for q in queries:
            if q.id in seen:
                raise ValueError(f"duplicate query id {q.id!r}")
            seen.add(q.id)
            for i, p in q.predicates.items():
                if not 0 <= i < len(cards):
                    raise ValueError(f"query {q.id!r}: attribute index {i} outside domain")
                if p.cardinality != cards[i]:
                    raise ValueError(
                        f"query {q.id!r}: predicate cardinality {p.cardinality} does not match "
                        f"attribute {self.domain.attributes[i].name!r} ({cards[i]})"
                    )

    @property
    def t(self) -> int:
        return len(self.queries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(q.weight for q in self.queries)

    def query(self, query_id: QueryId) -> PredicateQuery:
        for q in self.queries:
            if q.id == query_id:
                return q
        raise KeyError(query_id)

    def subset(self, ids: Iterable[QueryId]) -> list[PredicateQuery]:
        wanted = set(ids)
        return [q for q in self.queries if q.id in wanted]

    def reweighted(self, weight: float | Sequence[float]) -> Workload:
        if isinstance(weight, (int, float)):
            weight = [weight] * self.t
        return Workload(self.domain, tuple(q.with_weight(w) for q, w in zip(self.queries, weight)))


def _check_query(q: PredicateQuery, d: Domain | None) -> None:
    if d is None:
        return
    for i, p in q.predicates.items():
        if not 0 <= i < d.m or p.cardinality != d.attributes[i].cardinality:
            raise ValueError(f"query {q.id!r} is not valid on this domain")


def predicates_disjoint(p: Predicate, q: Predicate) -> bool:
    """True iff the two predicates accept no common value."""
    if p.attribute_index != q.attribute_index:
        raise ValueError(
            f"predicates are on different attributes ({p.attribute_index} vs {q.attribute_index})"
        )
    return not (p.mask & q.mask)


def queries_overlap(a: PredicateQuery, b: PredicateQuery, d: Domain | None = None) -> bool:
    """True iff some row satisfies both queries.

    Two conjunctions are disjoint exactly when one attribute carries disjoint
    predicates; absent predicates are tautologies, so a contradiction in either
    query makes the pair disjoint.
    """
    _check_query(a, d)
    _check_query(b, d)
    if a.is_contradiction or b.is_contradiction:
        return False
    pa, pb = a.predicates, b.predicates
    if len(pb) < len(pa):
        pa, pb = pb, pa
    for i, p in pa.items():
        other = pb.get(i)
        if other is not None and not (p.mask & other.mask):
            return False
    return True


def joint_coverage(qs: Iterable[PredicateQuery]) -> dict[int, int] | None:
    """Per-attribute intersection of predicate masks, or None if some attribute is empty.

    Attributes missing from the result are unconstrained (tautology).
    """
    acc: dict[int, int] = {}
    for q in qs:
        for i, p in q.predicates.items():
            m = acc.get(i)
            m = p.mask if m is None else m & p.mask
            if not m:
                return None
            acc[i] = m
    return acc


def coverage_admits(cov: Mapping[int, int], q: PredicateQuery) -> dict[int, int] | None:
    """Intersect a joint coverage with one more query; None when it empties."""
    out = dict(cov)
    for i, p in q.predicates.items():
        m = out.get(i)
        m = p.mask if m is None else m & p.mask
        if not m:
            return None
        out[i] = m
    return out


def subset_coverage_nonempty(qs: Sequence[PredicateQuery], d: Domain | None = None) -> bool:
    """True iff at least one row satisfies every query in ``qs``."""
    if not qs:
        raise ValueError("subset_coverage_nonempty needs at least one query")
    for q in qs:
        _check_query(q, d)
    return joint_coverage(qs) is not None


def query_covers_row(q: PredicateQuery, row: Sequence[int], d: Domain) -> bool:
    """True iff ``row`` (a tuple of value indices) satisfies every predicate of ``q``."""
    if len(row) != d.m:
        raise ValueError(f"row has {len(row)} values, domain has {d.m} attributes")
    for i, v in enumerate(row):
        if not 0 <= v < d.attributes[i].cardinality:
            raise ValueError(f"row value {v} invalid for attribute {d.attributes[i].name!r}")
    return all(row[i] in p for i, p in q.predicates.items())
