"""Answering predicate queries with Laplace or Gaussian noise.

Randomness comes from an explicitly seeded Philox generator (counter based);
there is no module-level RNG state. No floating-point hardening is attempted,
so these mechanisms are for experiments, not production releases.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from overlapdp.domain import Domain, PredicateQuery, QueryId, Workload
from overlapdp.errors import WorkloadFormatError


class Mechanism(str, enum.Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class NoisyAnswer:
    query_id: QueryId
    true_count: int | None
    noisy_value: float
    scale: float
    mechanism: Mechanism

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("noise scale must be positive")
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))


@dataclass(frozen=True)
class DataSet:
    """Sparse histogram: row (tuple of value indices) -> count."""

    domain: Domain
    histogram: Mapping[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        cards = self.domain.cardinalities
        clean = {}
        for row, count in self.histogram.items():
            row = tuple(int(v) for v in row)
            if len(row) != len(cards) or any(not 0 <= v < c for v, c in zip(row, cards)):
                raise ValueError(f"row {row} is not in the domain")
            if count < 0 or int(count) != count:
                raise ValueError(f"row {row} has invalid count {count}")
            if count:
                clean[row] = clean.get(row, 0) + int(count)
        object.__setattr__(self, "histogram", clean)

    def answer(self, q: PredicateQuery) -> int:
        """Exact count of rows covered by ``q``."""
        preds = list(q.predicates.items())
        return sum(c for row, c in self.histogram.items() if all(row[i] in p for i, p in preds))


def _noisy(q, dataset, scale, mechanism, rng):
    true = dataset.answer(q) if dataset is not None else 0
    if mechanism is Mechanism.LAPLACE:
        noise = rng.laplace(0.0, scale)
    else:
        noise = rng.normal(0.0, scale)
    return NoisyAnswer(q.id, true if dataset is not None else None, true + float(noise), scale, mechanism)


def laplace_answer(q: PredicateQuery, dataset: DataSet | None, eps: float, sensitivity: float = 1.0,
                   rng_seed: int | np.random.Generator = 0) -> NoisyAnswer:
    """``q(D) + Lap(sensitivity / eps)``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
    return _noisy(q, dataset, sensitivity / eps, Mechanism.LAPLACE, rng)


def gaussian_answer(q: PredicateQuery, dataset: DataSet | None, mu: float, sensitivity: float = 1.0,
                    rng_seed: int | np.random.Generator = 0) -> NoisyAnswer:
    """``q(D) + N(0, (sensitivity / mu)^2)``; mu-GDP."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
    return _noisy(q, dataset, sensitivity / mu, Mechanism.GAUSSIAN, rng)


def answer_workload(w: Workload, dataset: DataSet | None, mechanism: Mechanism | str,
                    per_query_budget: float, seed: int = 0, sensitivity: float = 1.0) -> list[NoisyAnswer]:
    """Answer every query with the same per-query budget, from one seeded stream."""
    mechanism = Mechanism(mechanism)
    rng = make_rng(seed)
    fn = laplace_answer if mechanism is Mechanism.LAPLACE else gaussian_answer
    return [fn(q, dataset, per_query_budget, sensitivity, rng) for q in w.queries]


def expected_abs_noise(mechanism: Mechanism | str, scale: float) -> float:
    """E|Y| for Laplace scale ``b`` (= b) or Gaussian sd ``sigma`` (= sigma*sqrt(2/pi))."""
    if Mechanism(mechanism) is Mechanism.LAPLACE:
        return scale
    return scale * math.sqrt(2 / math.pi)


def noise_draws(mechanism: Mechanism | str, scale: float, size: int, seed: int = 0) -> np.ndarray:
    rng = make_rng(seed)
    if Mechanism(mechanism) is Mechanism.LAPLACE:
        return rng.laplace(0.0, scale, size)
    return rng.normal(0.0, scale, size)


def average_l1_error(answers: Sequence[NoisyAnswer]) -> float:
    """Mean of ``|noisy - true|``; answers without a true count are rejected."""
    if not answers:
        raise ValueError("no answers")
    if any(a.true_count is None for a in answers):
        raise ValueError("average l1 error needs true counts")
    return math.fsum(abs(a.noisy_value - a.true_count) for a in answers) / len(answers)


def read_dataset_csv(path, domain: Domain) -> DataSet:
    """Read rows of value labels (or indices) with a trailing ``count`` column.

    The header must name every domain attribute plus ``count``; columns may
    come in any order.
    """
    hist: dict[tuple[int, ...], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise WorkloadFormatError("empty dataset file", f"{path}:1") from None
        names = [a.name for a in domain.attributes]
        if sorted(header) != sorted(names + ["count"]):
            raise WorkloadFormatError(
                f"header must contain {names + ['count']}, got {header}", f"{path}:1"
            )
        cols = [header.index(n) for n in names]
        count_col = header.index("count")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise WorkloadFormatError("wrong number of fields", f"{path}:{lineno}")
            try:
                row = []
                for attr, c in zip(domain.attributes, cols):
                    raw = rec[c]
                    if attr.labels is not None and raw in attr.labels:
                        row.append(attr.index_of(raw))
                    else:
                        row.append(attr.index_of(int(raw)))
                count = int(rec[count_col])
                if count < 0:
                    raise ValueError("negative count")
            except ValueError as exc:
                raise WorkloadFormatError(str(exc), f"{path}:{lineno}") from None
            key = tuple(row)
            hist[key] = hist.get(key, 0) + count
    return DataSet(domain, hist)


def write_dataset_csv(dataset: DataSet, path) -> None:
    domain = dataset.domain
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([a.name for a in domain.attributes] + ["count"])
        for row, count in sorted(dataset.histogram.items()):
            writer.writerow([a.label_of(v) for a, v in zip(domain.attributes, row)] + [count])


def write_answers_csv(answers: Sequence[NoisyAnswer], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["query_id", "true_count", "noisy_value", "scale", "mechanism"])
    for a in answers:
        writer.writerow([a.query_id, "" if a.true_count is None else a.true_count,
                         repr(a.noisy_value), repr(a.scale), a.mechanism.value])
