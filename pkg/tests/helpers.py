"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np

from overlapdp.domain import Attribute, Domain, Predicate, PredicateQuery, Workload


def postcode_domain() -> Domain:
    return Domain((Attribute("Postcode", 3, ("A", "B", "C")), Attribute("Native", 2, ("Y", "N"))))


def three_query_example() -> Workload:
    """Three queries on Postcode x Native; q1, q2 overlap and q2, q3 overlap."""
    d = postcode_domain()
    return Workload(d, (
        d.query("q1", {"Postcode": ["A"], "Native": ["Y"]}),
        d.query("q2", {"Postcode": ["A", "B"]}),
        d.query("q3", {"Postcode": ["B"], "Native": ["N"]}),
    ))


def six_query_example() -> Workload:
    d = postcode_domain()
    return Workload(d, (
        d.query("q1", {"Postcode": ["A"], "Native": ["Y"]}),
        d.query("q2", {"Postcode": ["A", "B"]}),
        d.query("q3", {"Postcode": ["A", "C"], "Native": ["N"]}),
        d.query("q4", {"Native": ["Y"]}),
        d.query("q5", {"Postcode": ["C"]}),
        d.query("q6", {"Postcode": ["B"], "Native": ["N"]}),
    ))


SIX_QUERY_EDGES = {("q1", "q2"), ("q1", "q4"), ("q2", "q3"), ("q2", "q4"), ("q2", "q6"), ("q4", "q5"), ("q3", "q5")}


def pairwise_not_jointly() -> Workload:
    """One ternary attribute, predicates {1,2}, {0,2}, {0,1}: every pair meets, all three do not."""
    d = Domain.from_cardinalities([3])
    return Workload(d, tuple(
        PredicateQuery(f"p{k}", {0: Predicate.of(0, 3, vals)})
        for k, vals in enumerate(([1, 2], [0, 2], [0, 1]))
    ))


def random_workload(rng: np.random.Generator, max_m=5, max_card=4, max_t=10, weighted=False,
                    contradiction_rate=0.03) -> Workload:
    m = int(rng.integers(1, max_m + 1))
    cards = [int(c) for c in rng.integers(1, max_card + 1, size=m)]
    d = Domain.from_cardinalities(cards)
    t = int(rng.integers(1, max_t + 1))
    queries = []
    for k in range(t):
        preds = {}
        for i, c in enumerate(cards):
            if rng.random() < 0.5:
                continue
            if rng.random() < contradiction_rate:
                mask = 0
            else:
                mask = int(rng.integers(1, 1 << c))
            preds[i] = Predicate(i, c, mask)
        weight = float(rng.uniform(0.01, 2.0)) if weighted else 1.0
        queries.append(PredicateQuery(f"q{k}", preds, weight))
    return Workload(d, tuple(queries))
