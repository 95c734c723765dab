"""Privacy-budget arithmetic.

Composition rules turn a multiset of per-query budgets into one budget;
trade-off curves are grid samples of functions ``f: [0, 1] -> [0, 1]`` used to
state f-DP guarantees. Only closed forms are composed: Gaussian curves through
root-sum-squares and (eps, delta) families through the CLT approximation.
General tensor products of arbitrary curves are not computed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import special

DEFAULT_RESOLUTION = 10_001


class RuleKind(str, enum.Enum):
    EPS_SUM = "eps"
    GDP_ROOT_SUM_SQUARES = "gdp"


@dataclass(frozen=True)
class CompositionRule:
    """Sequential composition of per-query budgets.

    ``eps`` adds epsilons (basic composition); ``gdp`` takes the root of the
    sum of squared mu values. Both satisfy ``combine({w}) >= w`` and are
    monotone under multiset inclusion.
    """

    kind: RuleKind

    @classmethod
    def parse(cls, name: str | RuleKind | CompositionRule) -> CompositionRule:
        if isinstance(name, CompositionRule):
            return name
        return cls(RuleKind(name))

    def combine(self, weights: Iterable[float]) -> float:
        ws = list(weights)
        if self.kind is RuleKind.EPS_SUM:
            return math.fsum(ws)
        return math.sqrt(math.fsum(w * w for w in ws))

    def join(self, a: float, b: float) -> float:
        """Combine two already-composed budgets (disjoint query sets)."""
        if self.kind is RuleKind.EPS_SUM:
            return a + b
        return math.hypot(a, b)

    def repeat(self, w: float, k: int) -> float:
        """Budget of ``k`` queries of equal weight ``w``."""
        return w * k if self.kind is RuleKind.EPS_SUM else w * math.sqrt(k)

    def per_query_share(self, total: float, k: int) -> float:
        """Equal per-query weight whose ``k``-fold composition spends ``total``."""
        if k < 1:
            raise ValueError("k must be at least 1")
        return total / k if self.kind is RuleKind.EPS_SUM else total / math.sqrt(k)

    def __str__(self) -> str:
        return self.kind.value


EPS = CompositionRule(RuleKind.EPS_SUM)
GDP = CompositionRule(RuleKind.GDP_ROOT_SUM_SQUARES)


def eps_sequential(epss: Sequence[float]) -> float:
    return EPS.combine(epss)


def gdp_sequential(mus: Sequence[float]) -> float:
    return GDP.combine(mus)


def gdp_parallel(mus: Sequence[float]) -> float:
    """Disjoint Gaussian mechanisms compose to the largest mu."""
    if not len(mus):
        raise ValueError("gdp_parallel needs at least one mu")
    return float(max(mus))


def uniform_grid(n: int = DEFAULT_RESOLUTION) -> np.ndarray:
    if n < 2:
        raise ValueError("a grid needs at least two points")
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True, eq=False)
class TradeoffCurve:
    """A trade-off function sampled on a uniform alpha grid."""

    alpha: np.ndarray
    beta: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 1:
            raise ValueError("alpha and beta must be 1-D arrays of equal length")

    def __call__(self, x):
        """Linear interpolation between grid samples."""
        return np.interp(x, self.alpha, self.beta)

    def violations(self, tol: float = 1e-9) -> list[str]:
        """Names of trade-off-function properties the samples break."""
        out = []
        a, b = self.alpha, self.beta
        if np.any(b < -tol) or np.any(b > 1 + tol):
            out.append("range")
        if np.any(np.diff(b) > tol):
            out.append("non-increasing")
        if np.any(b > 1 - a + tol):
            out.append("below-identity")
        # Second divided differences on a uniform grid.
        if len(b) > 2 and np.any(b[2:] - 2 * b[1:-1] + b[:-2] < -tol):
            out.append("convex")
        return out

    def is_valid(self, tol: float = 1e-9) -> bool:
        return not self.violations(tol)


def _check_grid(alpha: np.ndarray | None) -> np.ndarray:
    return uniform_grid() if alpha is None else np.asarray(alpha, dtype=float)


def g_mu(mu: float, alpha: np.ndarray | None = None) -> TradeoffCurve:
    """Gaussian trade-off curve ``Phi(Phi^-1(1 - alpha) - mu)``."""
    if not mu >= 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    a = _check_grid(alpha)
    if mu == 0:
        beta = 1.0 - a
    else:
        # Phi^-1(1 - a) == -Phi^-1(a); the right side keeps precision near a = 0.
        with np.errstate(divide="ignore"):
            beta = special.ndtr(-special.ndtri(a) - mu)
    return TradeoffCurve(a, beta, f"G_{mu:g}")


def f_eps_delta(eps: float, delta: float, alpha: np.ndarray | None = None) -> TradeoffCurve:
    """Trade-off curve of an (eps, delta)-DP mechanism."""
    if not eps >= 0 or math.isinf(eps):
        raise ValueError(f"eps must be a finite non-negative number, got {eps}")
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    a = _check_grid(alpha)
    beta = np.maximum.reduce(
        [np.zeros_like(a), 1 - delta - math.exp(eps) * a, math.exp(-eps) * (1 - delta - a)]
    )
    return TradeoffCurve(a, beta, f"f_{eps:g},{delta:g}")


def _lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by x (monotone chain)."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            # Drop k when it is on or above the chord from j to i.
            cross = (x[k] - x[j]) * (y[i] - y[j]) - (y[k] - y[j]) * (x[i] - x[j])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull)


def lce(curves: Sequence[TradeoffCurve]) -> TradeoffCurve:
    """Lower convex envelope of the pointwise minimum of ``curves``.

    This is the trade-off curve of running the mechanisms on disjoint parts of
    the domain.
    """
    if not curves:
        raise ValueError("lce needs at least one curve")
    alpha = curves[0].alpha
    for c in curves[1:]:
        if c.alpha.shape != alpha.shape or not np.array_equal(c.alpha, alpha):
            raise ValueError("curves are sampled on different grids")
    low = np.minimum.reduce([c.beta for c in curves])
    idx = _lower_hull(alpha, low)
    beta = np.interp(alpha, alpha[idx], low[idx])
    label = "lce{" + ", ".join(c.label for c in curves) + "}"
    return TradeoffCurve(alpha, beta, label)


def curve_to_csv(curve: TradeoffCurve, path) -> None:
    np.savetxt(
        path,
        np.column_stack([curve.alpha, curve.beta]),
        delimiter=",",
        header="alpha,beta",
        comments="",
        fmt="%.17g",
    )


class CltApproximation(NamedTuple):
    """Parameters of the APPROXIMATE curve ``G_mu (x) f_{0, delta}``."""

    mu: float
    delta: float


def clt_gdp_approx(epss: Sequence[float], deltas: Sequence[float]) -> CltApproximation:
    """CLT approximation of composing many (eps_i, delta_i)-DP mechanisms.

    Returns ``mu = sqrt(sum eps_i^2)`` and ``delta = 1 - exp(-sum delta_i)``.
    The result is an approximation (error O(1/n) for pure DP), not a bound.
    """
    if len(epss) != len(deltas):
        raise ValueError("epss and deltas must have the same length")
    if not len(epss):
        raise ValueError("need at least one mechanism")
    if any(e < 0 for e in epss) or any(not 0 <= d <= 1 for d in deltas):
        raise ValueError("eps must be >= 0 and delta in [0, 1]")
    mu = math.sqrt(math.fsum(e * e for e in epss))
    delta = -math.expm1(-math.fsum(deltas))
    return CltApproximation(mu, delta)


@dataclass(frozen=True)
class BudgetStatement:
    """Scalar budget plus its trade-off curve, with caveats for the reader."""

    value: float
    rule: CompositionRule
    curve: TradeoffCurve
    kind: str
    note: str = ""


def max_overlap_budget(bound, rule: CompositionRule | str, alpha: np.ndarray | None = None) -> BudgetStatement:
    """Turn an overlap bound into a spendable budget and its curve.

    Exact overlaps and chromatic bounds are safe. A clique bound is accepted but
    may overstate the true overlap. A timed-out bound is refused.
    """
    from overlapdp.errors import SearchTimeout
    from overlapdp.search import BoundKind

    rule = CompositionRule.parse(rule)
    if bound.timed_out:
        raise SearchTimeout(
            "refusing to account a timed-out search: its value may underestimate the overlap",
            bound,
        )
    note = ""
    if bound.kind is BoundKind.EXACT_CLIQUE:
        note = "clique number may overestimate the maximum overlap but is still safe"
    elif bound.kind is BoundKind.APPROX_CHROMATIC:
        note = "SAFE-OVERESTIMATE: approximate chromatic bound"
    if rule.kind is RuleKind.GDP_ROOT_SUM_SQUARES:
        curve = g_mu(bound.value, alpha)
    else:
        curve = f_eps_delta(bound.value, 0.0, alpha)
    return BudgetStatement(bound.value, rule, curve, bound.kind.value, note)


def utility_gain(
    t: int,
    bound_value: float,
    noise_expectations: Sequence[float] | None = None,
    witness: Sequence[int] | None = None,
) -> float:
    """Fraction of expected absolute noise saved relative to sequential composition.

    With homogeneous weights this is ``1 - bound_value / t`` where
    ``bound_value`` is the overlap count. When ``noise_expectations`` (one
    E|Y_i| per query) and ``witness`` (positions of the maximizing subset) are
    given, the general ratio is used instead.
    """
    if noise_expectations is not None:
        if witness is None:
            raise ValueError("witness positions are required with noise_expectations")
        total = math.fsum(noise_expectations)
        if total <= 0:
            raise ValueError("noise expectations must sum to a positive value")
        return 1.0 - math.fsum(noise_expectations[i] for i in witness) / total
    if t < 1:
        raise ValueError("t must be at least 1")
    if not 0 <= bound_value <= t:
        raise ValueError(f"bound value {bound_value} outside [0, {t}]")
    return 1.0 - bound_value / t
