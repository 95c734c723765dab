import math
from itertools import product

import numpy as np
import pytest

from overlapdp.domain import queries_overlap
from overlapdp.errors import CapacityError
from overlapdp.graph import build_query_graph
from overlapdp.oracle import brute_force_max_cut, gamma_by_row_scan
from overlapdp.search import max_overlap
from overlapdp.workload import (
    Distribution,
    census_domain,
    census_full_workload,
    census_workload_size,
    gen_census_workload,
    gen_distribution_workload,
    gen_uniform_workload,
    iter_census_queries,
    maxcut_to_overlap,
    read_maxcut_sidecar,
    write_maxcut_sidecar,
)


def same(w1, w2):
    return w1.domain == w2.domain and w1.queries == w2.queries


def test_uniform_generator_is_deterministic():
    assert same(gen_uniform_workload(4, 30, seed=7), gen_uniform_workload(4, 30, seed=7))
    assert not same(gen_uniform_workload(4, 30, seed=7), gen_uniform_workload(4, 30, seed=8))


def test_uniform_cardinalities_are_powers_of_ten():
    for s in range(20):
        w = gen_uniform_workload(3, 2, seed=s)
        assert all(c in {10 ** k for k in range(1, 7)} for c in w.domain.cardinalities)


def test_uniform_queries_have_valid_shape():
    w = gen_uniform_workload(6, 200, seed=1, exponent_range=(1, 2))
    for q in w.queries:
        assert 1 <= len(q.predicates) <= 6
        assert all(1 <= p.size <= p.cardinality for p in q.predicates.values())


def exact_pair_overlap_probability(n):
    """Two queries on one attribute of size n, sizes a, b ~ U{1..n}, uniform subsets."""
    total = 0.0
    for a, b in product(range(1, n + 1), repeat=2):
        total += 1 - math.comb(n - a, b) / math.comb(n, b)
    return total / n**2


def test_pair_overlap_rate_matches_closed_form():
    n_pairs = 20000
    w = gen_uniform_workload(1, 2 * n_pairs, seed=11, exponent_range=(1, 1))
    assert w.domain.cardinalities == (10,)
    hits = sum(queries_overlap(w.queries[2 * k], w.queries[2 * k + 1]) for k in range(n_pairs))
    p = exact_pair_overlap_probability(10)
    sd = math.sqrt(p * (1 - p) / n_pairs)
    assert abs(hits / n_pairs - p) < 4 * sd


def test_capacity_caps():
    with pytest.raises(CapacityError):
        gen_uniform_workload(20000, 1, seed=0, exponent_range=(6, 6))
    with pytest.raises(CapacityError):
        gen_uniform_workload(1000, 200, seed=0, exponent_range=(6, 6))


def test_all_uniform_distribution_equals_uniform_generator():
    dists = {q: Distribution() for q in ("num_predicates", "attributes", "num_values", "values")}
    assert same(gen_distribution_workload(5, 40, dists, seed=3, exponent_range=(1, 2)),
                gen_uniform_workload(5, 40, seed=3, exponent_range=(1, 2)))


def test_degenerate_exponential_gives_single_predicates():
    w = gen_distribution_workload(8, 100, {"num_predicates": Distribution("exponential", 1e-9)},
                                  seed=2, exponent_range=(1, 2))
    assert all(len(q.predicates) == 1 for q in w.queries)


def test_normal_attribute_choice_is_reproducible_and_centred():
    d = {"attributes": Distribution("normal", 0.1), "num_predicates": Distribution("exponential", 1e-9)}
    w1 = gen_distribution_workload(21, 300, d, seed=4, exponent_range=(1, 1))
    assert same(w1, gen_distribution_workload(21, 300, d, seed=4, exponent_range=(1, 1)))
    used = [next(iter(q.predicates)) for q in w1.queries]
    assert abs(np.mean(used) - 10) < 1.0


def test_distribution_parse_and_validation():
    assert Distribution.parse("exponential:0.5") == Distribution("exponential", 0.5)
    assert str(Distribution.parse("normal:0.2")) == "normal:0.2"
    with pytest.raises(ValueError):
        Distribution("poisson", 1)
    with pytest.raises(ValueError):
        Distribution("normal", -1)
    with pytest.raises(ValueError):
        gen_distribution_workload(2, 2, {"bogus": Distribution()})


def test_census_domain_and_queries():
    d = census_domain()
    assert d.cardinalities == (5000, 5, 4, 7, 2)
    assert d.size == 1_400_000
    w = gen_census_workload(200, seed=9)
    for q in w.queries:
        inc = q.predicates[0]
        hi = inc.size
        assert inc.mask == (1 << hi) - 1 and 1 <= hi <= 5000
        assert all(p.size == 1 for i, p in q.predicates.items() if i)
    assert same(w, gen_census_workload(200, seed=9))


def test_census_full_enumeration():
    assert census_workload_size() == 5000 * 6 * 5 * 8 * 3 == 3_600_000
    first = list(iter_census_queries(0, 3))
    assert first[0].predicates[0].size == 1 and len(first[0].predicates) == 5
    assert len(first[2].predicates) == 4  # Gender unconstrained
    last = next(iter_census_queries(3_599_999))
    assert last.predicates[0].size == 5000 and set(last.predicates) == {0}
    with pytest.raises(CapacityError):
        census_full_workload()
    assert census_full_workload(0, 10).t == 10


@pytest.mark.parametrize("n,edges,expected_t,gamma", [
    (3, [(0, 1), (1, 2), (0, 2)], 6, 2),
    (2, [(0, 1)], 2, 1),
    (3, [(0, 1), (1, 2)], 4, 2),
])
def test_maxcut_small_graphs(n, edges, expected_t, gamma):
    w = maxcut_to_overlap(n, edges)
    assert w.t == expected_t
    assert max_overlap(w, build_query_graph(w)).value == gamma == brute_force_max_cut(n, edges)
    assert gamma_by_row_scan(w).gamma == gamma


def test_maxcut_errors_and_sidecar(tmp_path):
    with pytest.raises(ValueError):
        maxcut_to_overlap(3, [])
    with pytest.raises(ValueError):
        maxcut_to_overlap(3, [(1, 1)])
    with pytest.raises(ValueError):
        maxcut_to_overlap(3, [(0, 5)])
    write_maxcut_sidecar(tmp_path / "g.json", 3, [(0, 1), (1, 2)])
    assert read_maxcut_sidecar(tmp_path / "g.json") == (3, [(0, 1), (1, 2)])
