"""Privacy accounting for predicate-query workloads via maximum query overlap."""

from overlapdp.composition import (
    EPS,
    GDP,
    CompositionRule,
    TradeoffCurve,
    clt_gdp_approx,
    f_eps_delta,
    g_mu,
    lce,
    max_overlap_budget,
    utility_gain,
)
from overlapdp.domain import Attribute, Domain, Predicate, PredicateQuery, Workload, queries_overlap
from overlapdp.errors import CapacityError, SearchTimeout, WorkloadFormatError
from overlapdp.formats import load_workload, save_workload
from overlapdp.graph import QueryGraph, build_query_graph
from overlapdp.mechanisms import DataSet, NoisyAnswer, average_l1_error, gaussian_answer, laplace_answer
from overlapdp.oracle import gamma_by_row_scan, gamma_by_subset_enumeration, l1_sensitivity_by_row_scan
from overlapdp.search import BoundKind, OverlapBound, SearchBudget, dsatur_coloring, max_overlap, max_weight_clique

__all__ = [
    "Attribute", "BoundKind", "CapacityError", "CompositionRule", "DataSet", "Domain", "EPS", "GDP",
    "NoisyAnswer", "OverlapBound", "Predicate", "PredicateQuery", "QueryGraph", "SearchBudget",
    "SearchTimeout", "TradeoffCurve", "Workload", "WorkloadFormatError", "average_l1_error",
    "build_query_graph", "clt_gdp_approx", "dsatur_coloring", "f_eps_delta", "g_mu",
    "gamma_by_row_scan", "gamma_by_subset_enumeration", "gaussian_answer", "l1_sensitivity_by_row_scan",
    "laplace_answer", "lce", "load_workload", "max_overlap", "max_overlap_budget", "max_weight_clique",
    "queries_overlap", "save_workload", "utility_gain",
]
