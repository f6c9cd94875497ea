import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_google, solve_pagerank
from wtn.balance import (analyze, balance_sensitivity, country_balance, diff_reports,
                         node_balance, product_balance)
from wtn.ingest import tensor_from_array
from wtn.ranks import RankVector
from wtn.synthetic import random_tensor


def rv(kind, probs, n_p=1):
    probs = np.asarray(probs, dtype=float)
    return RankVector(kind, probs, n_p, probs.size // n_p, 2018)


def test_country_balance_arithmetic():
    p = rv("pagerank", [0.04, 0.5, 0.46])
    p_star = rv("cheirank", [0.06, 0.5, 0.44])
    b = country_balance(p, p_star)
    assert b[0] == pytest.approx(0.2, abs=1e-15)
    assert b[1] == 0.0


def test_mismatched_vectors_rejected():
    with pytest.raises(ValueError):
        country_balance(rv("pagerank", [0.5, 0.5]), rv("cheirank", [0.2, 0.3, 0.5]))


def test_node_balance_uses_product_denominator():
    p = rv("pagerank", [0.1, 0.2, 0.3, 0.4], n_p=2)
    p_star = rv("cheirank", [0.2, 0.2, 0.1, 0.5], n_p=2)
    bpc = node_balance(p, p_star)
    np.testing.assert_allclose(bpc[0], [0.1 / 0.7, 0.0])
    np.testing.assert_allclose(bpc[1], [-0.2 / 1.3, 0.1 / 1.3])
    np.testing.assert_allclose(bpc.sum(axis=1), product_balance(p, p_star), atol=1e-15)


def test_symmetric_trade_has_zero_product_balance():
    values = np.zeros((2, 2, 2))
    values[:, 0, 1] = values[:, 1, 0] = [3.0, 5.0]
    a = analyze(tensor_from_array(values))
    np.testing.assert_allclose(a.balances.product, 0.0, atol=1e-15)


def test_report_identities(small_tensor):
    rep = analyze(small_tensor).balances
    np.testing.assert_array_less(np.abs(rep.node_volume).sum(axis=1), 1 + 1e-15)
    assert np.all(np.abs(rep.product_volume) <= 1e-14)
    for field in (rep.country, rep.country_volume, rep.product, rep.node, rep.node_volume):
        assert np.all(np.abs(field) <= 1.0)
    imp, exp = analyze(small_tensor).importrank, analyze(small_tensor).exportrank
    weighted = rep.node_volume * (imp.product_probs + exp.product_probs)[:, None]
    np.testing.assert_allclose(weighted.sum(axis=1), 0.0, atol=1e-15)


def test_year_diff_is_componentwise(rng):
    a = analyze(random_tensor(rng, 2, 5, year=2018)).balances
    b = analyze(random_tensor(rng, 2, 5, year=2020)).balances
    d = diff_reports(b, a)
    np.testing.assert_array_equal(d.country, b.country - a.country)
    np.testing.assert_array_equal(d.node_volume, b.node_volume - a.node_volume)
    assert (b - a).year == 2020


def test_single_product_sensitivity_is_zero(rng):
    m = random_tensor(rng, 1, 8)
    rep = balance_sensitivity(m, 0, 1e-3)
    assert np.max(np.abs(rep.values)) < 1e-10
    assert rep.scheme == "central" and rep.delta_used == 1e-3


def _oracle_balance(values, product, factor):
    values = values.copy()
    values[product] *= factor
    n_p, n_c = values.shape[:2]
    p = solve_pagerank(dense_google(values)[0]).reshape(n_p, n_c).sum(axis=0)
    ps = solve_pagerank(dense_google(values, inverted=True)[0]).reshape(n_p, n_c).sum(axis=0)
    return (ps - p) / (ps + p)


def test_sensitivity_matches_oracle_difference(small_tensor):
    delta = 1e-3
    rep = balance_sensitivity(small_tensor, 1, delta)
    expected = (_oracle_balance(small_tensor.values, 1, 1 + delta)
                - _oracle_balance(small_tensor.values, 1, 1 - delta)) / (2 * delta)
    np.testing.assert_allclose(rep.values, expected, atol=1e-8)
    assert np.any(np.abs(rep.values) > 1e-4)


def test_sensitivity_richardson_and_forward(small_tensor):
    rep = balance_sensitivity(small_tensor, 0, 1e-2)
    finer = balance_sensitivity(small_tensor, 0, 5e-3)
    # central differences: the delta vs delta/2 gap shrinks like delta^2
    assert 3.0 < rep.richardson_gap / finer.richardson_gap < 5.0
    assert balance_sensitivity(small_tensor, 0, richardson=False).richardson_gap is None
    fwd = balance_sensitivity(small_tensor, 0, 1e-4, scheme="forward")
    np.testing.assert_allclose(fwd.values, rep.values, atol=1e-3)


def test_sensitivity_argument_checks(small_tensor):
    with pytest.raises(ValueError):
        balance_sensitivity(small_tensor, 7)
    with pytest.raises(ValueError):
        balance_sensitivity(small_tensor, 0, 0.0)
    with pytest.raises(ValueError):
        balance_sensitivity(small_tensor, 0, scheme="backward")


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_balances_bounded(n_p, n_c, seed):
    rep = analyze(random_tensor(np.random.default_rng(seed), n_p, n_c, 0.4)).balances
    for field in (rep.country, rep.country_volume, rep.product, rep.node, rep.node_volume):
        assert np.all(np.abs(field) <= 1.0)
    assert np.all(np.abs(rep.product_volume) <= 1e-14)
