"""Capacity caps, overridable through environment variables.

Caps are read at call time so tests and the CLI can adjust them without
re-importing the package.
"""

from __future__ import annotations

import os

_DEFAULTS = {
    # Largest domain the row-scan oracle will enumerate.
    "OVERLAPDP_MAX_ROWS": 1_000_000,
    # Largest workload the subset-enumeration oracle accepts.
    "OVERLAPDP_MAX_SUBSET_QUERIES": 20,
    # Largest log10 |D| a generator may produce.
    "OVERLAPDP_MAX_LOG10_DOMAIN": 80_000,
    # Above this log10 |D|, Domain.size refuses to build the exact integer.
    "OVERLAPDP_MAX_EXACT_LOG10": 64,
    # Total predicate bitset bits a generator may allocate (~256 MiB).
    "OVERLAPDP_MAX_PREDICATE_BITS": 1 << 31,
}


def cap(name: str) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return _DEFAULTS[name]
    try:
        return int(float(raw))
    except ValueError as exc:
        raise ValueError(f"environment variable {name}={raw!r} is not a number") from exc


def max_rows() -> int:
    return cap("OVERLAPDP_MAX_ROWS")


def max_subset_queries() -> int:
    return cap("OVERLAPDP_MAX_SUBSET_QUERIES")


def max_log10_domain() -> int:
    return cap("OVERLAPDP_MAX_LOG10_DOMAIN")


def max_exact_log10() -> int:
    return cap("OVERLAPDP_MAX_EXACT_LOG10")


def max_predicate_bits() -> int:
    return cap("OVERLAPDP_MAX_PREDICATE_BITS")
