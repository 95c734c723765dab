import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from overlapdp.composition import (
    EPS,
    GDP,
    CompositionRule,
    clt_gdp_approx,
    curve_to_csv,
    eps_sequential,
    f_eps_delta,
    g_mu,
    gdp_parallel,
    gdp_sequential,
    lce,
    uniform_grid,
    utility_gain,
)

weights = st.lists(st.floats(0.01, 5.0), min_size=1, max_size=12)


def test_sequential_rules():
    assert eps_sequential([0.5, 0.25, 0.25]) == 1.0
    assert gdp_sequential([3.0, 4.0]) == pytest.approx(5.0)
    assert gdp_parallel([0.3, 0.9, 0.1]) == 0.9
    assert EPS.per_query_share(1.0, 4) == 0.25
    assert GDP.per_query_share(1.0, 4) == 0.5
    assert CompositionRule.parse("gdp") is not None and str(CompositionRule.parse("gdp")) == "gdp"
    with pytest.raises(ValueError):
        CompositionRule.parse("renyi")


@given(weights, weights)
def test_rules_are_monotone_and_join_consistent(a, b):
    for rule in (EPS, GDP):
        whole = rule.combine(a + b)
        assert whole >= rule.combine(a) - 1e-12
        assert rule.combine([a[0]]) == pytest.approx(a[0])
        assert rule.join(rule.combine(a), rule.combine(b)) == pytest.approx(whole, rel=1e-12)
        k = len(a)
        assert rule.repeat(a[0], k) == pytest.approx(rule.combine([a[0]] * k), rel=1e-12)


def test_g0_is_exactly_identity_complement():
    c = g_mu(0.0)
    assert np.array_equal(c.beta, 1.0 - c.alpha)


@pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_g_mu_matches_independent_normal(mu):
    nd = NormalDist()
    alpha = uniform_grid(1001)[1:-1]
    ours = g_mu(mu, alpha).beta
    ref = np.array([nd.cdf(nd.inv_cdf(1 - a) - mu) for a in alpha])
    assert np.max(np.abs(ours - ref)) < 1e-12


def test_g_one_at_known_point():
    # Phi(Phi^-1(0.95) - 1) = Phi(0.644854) = 0.740489 (table: Phi(0.64)=0.7389, Phi(0.65)=0.7422)
    assert float(g_mu(1.0, np.array([0.05])).beta[0]) == pytest.approx(0.740489, abs=1e-6)


@pytest.mark.parametrize("mu", [0.0, 0.3, 1.0, 3.0])
def test_gaussian_curves_are_trade_off_functions(mu):
    assert g_mu(mu).violations() == []


@pytest.mark.parametrize("eps,delta", [(0.0, 0.0), (0.5, 0.0), (1.0, 1e-5), (3.0, 0.1)])
def test_eps_delta_curves_are_trade_off_functions(eps, delta):
    c = f_eps_delta(eps, delta)
    assert c.violations() == []
    # corner values
    assert c.beta[0] == pytest.approx(1 - delta)
    assert c.beta[-1] == 0.0


def test_f_eps_zero_is_identity_complement():
    c = f_eps_delta(0.0, 0.0)
    assert np.allclose(c.beta, 1 - c.alpha, atol=1e-15)


def test_invalid_curve_parameters():
    with pytest.raises(ValueError):
        g_mu(-1)
    with pytest.raises(ValueError):
        f_eps_delta(-0.1, 0)
    with pytest.raises(ValueError):
        f_eps_delta(1, 1.5)


def test_lce_of_gaussian_family_is_the_largest_mu():
    fam = [g_mu(m) for m in (0.2, 0.7, 1.3, 0.9)]
    env = lce(fam)
    assert np.max(np.abs(env.beta - g_mu(1.3).beta)) <= 1e-9


def hull_oracle(alpha, low):
    pts = np.column_stack([alpha, low])
    # close the polygon from above so only the lower chain is interesting
    pts = np.vstack([pts, [[0.0, 10.0], [1.0, 10.0]]])
    hull = ConvexHull(pts)
    vs = sorted(v for v in hull.vertices if v < len(alpha))
    return np.interp(alpha, alpha[vs], low[vs])


def test_lce_of_mixed_family_matches_scipy_hull():
    alpha = uniform_grid(2001)
    fam = [f_eps_delta(1.0, 0.05, alpha), g_mu(1.5, alpha), f_eps_delta(0.3, 0.2, alpha)]
    env = lce(fam)
    low = np.minimum.reduce([c.beta for c in fam])
    assert np.max(np.abs(env.beta - hull_oracle(alpha, low))) < 1e-9
    assert np.all(env.beta <= low + 1e-12)
    assert env.violations() == []


def test_lce_rejects_mismatched_grids():
    with pytest.raises(ValueError):
        lce([g_mu(1.0), g_mu(1.0, uniform_grid(11))])
    with pytest.raises(ValueError):
        lce([])


def test_violations_detects_bad_curves():
    alpha = uniform_grid(5)
    from overlapdp.composition import TradeoffCurve

    assert "non-increasing" in TradeoffCurve(alpha, np.array([0.5, 0.6, 0.2, 0.1, 0.0])).violations()
    assert "below-identity" in TradeoffCurve(alpha, np.array([1.0, 0.9, 0.5, 0.2, 0.0])).violations()
    assert "convex" in TradeoffCurve(alpha, np.array([0.7, 0.7, 0.5, 0.0, 0.0])).violations()


def test_clt_approximation():
    approx = clt_gdp_approx([0.1] * 100, [1e-6] * 100)
    assert approx.mu == pytest.approx(1.0)
    assert approx.delta == pytest.approx(1 - math.exp(-1e-4))
    with pytest.raises(ValueError):
        clt_gdp_approx([0.1], [])


def test_curve_csv(tmp_path):
    c = g_mu(1.0, uniform_grid(11))
    curve_to_csv(c, tmp_path / "g.csv")
    data = np.loadtxt(tmp_path / "g.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], c.alpha) and np.array_equal(data[:, 1], c.beta)


def test_utility_gain_values():
    assert utility_gain(3, 2) == pytest.approx(1 / 3)
    assert round(utility_gain(41, 17), 3) == 0.585
    assert utility_gain(5, 5) == 0.0
    assert utility_gain(4, 0, [1, 2, 3, 4], [3]) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        utility_gain(3, 4)
