"""Exception types raised across the package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from overlapdp.search import OverlapBound


class CapacityError(RuntimeError):
    """An input exceeds a configured size cap (domain rows, subset count, memory)."""


class WorkloadFormatError(ValueError):
    """A workload, dataset or graph file could not be parsed.

    ``location`` carries a file/line or JSON path so the CLI can point at the
    offending input.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SearchTimeout(RuntimeError):
    """An exact search hit its deadline before proving optimality.

    ``best_so_far`` is the incumbent when the clock ran out. It is a lower
    bound on the true optimum and therefore UNSAFE to use as a privacy budget.
    """

    def __init__(self, message: str, best_so_far: OverlapBound | None = None):
        self.best_so_far = best_so_far
        super().__init__(message)
