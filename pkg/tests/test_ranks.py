import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_google, solve_pagerank
from wtn.google import google_matrices
from wtn.ingest import tensor_from_array
from wtn.ranks import (ConvergenceError, RankVector, import_export_rank, pagerank, sort_index,
                       two_d_rank)
from wtn.synthetic import random_tensor


def test_cycle_gives_uniform_pagerank():
    v = np.zeros((1, 3, 3))
    v[0, 1, 0] = v[0, 2, 1] = v[0, 0, 2] = 2.0
    for alpha in (0.1, 0.5, 0.9):
        g, _ = google_matrices(tensor_from_array(v), alpha)
        np.testing.assert_allclose(pagerank(g).node_probs, 1 / 3, atol=1e-15)


def test_chain_fixed_point(chain_tensor):
    g, _ = google_matrices(chain_tensor, 0.5)
    pr = pagerank(g)
    np.testing.assert_allclose(pr.node_probs, np.array([4, 6, 7]) / 17, rtol=0, atol=1e-13)
    assert pr.converged and pr.iterations > 0
    assert pr.residual <= 1e-12


def test_pagerank_matches_linear_solve(small_tensor):
    g, g_star = google_matrices(small_tensor)
    for gm, inverted in ((g, False), (g_star, True)):
        oracle = solve_pagerank(dense_google(small_tensor.values, inverted=inverted)[0])
        assert np.abs(pagerank(gm).node_probs - oracle).sum() < 1e-12


def test_nonconvergence_carries_residual(small_tensor):
    g, _ = google_matrices(small_tensor, alpha=0.99)
    with pytest.raises(ConvergenceError) as info:
        pagerank(g, tol=1e-15, max_iter=3)
    assert info.value.residual > 1e-15
    assert info.value.iterations == 3


def test_residual_decreases(rng):
    g, _ = google_matrices(random_tensor(rng, 3, 30, 0.3))
    res = np.array(pagerank(g, tol=1e-14).residuals)
    noise = 1e-15
    assert np.all(np.diff(res) <= noise + 1e-12 * res[:-1])


def test_aggregations(small_tensor):
    g, _ = google_matrices(small_tensor)
    pr = pagerank(g)
    grid = pr.node_probs.reshape(3, 6)
    np.testing.assert_array_equal(pr.country_probs, grid.sum(axis=0))
    np.testing.assert_array_equal(pr.product_probs, grid.sum(axis=1))
    assert abs(pr.node_probs.sum() - 1) < 1e-10


def test_import_export_single_link():
    v = np.zeros((1, 2, 2))
    v[0, 1, 0] = 4.0  # A (0) exports to B (1)
    imp, exp = import_export_rank(tensor_from_array(v))
    assert imp.country_probs.tolist() == [0.0, 1.0]
    assert exp.country_probs.tolist() == [1.0, 0.0]


def test_import_rank_normalization():
    v = np.zeros((1, 3, 3))
    v[0, 1, 0], v[0, 2, 0] = 3.0, 1.0
    imp, _ = import_export_rank(tensor_from_array(v))
    assert imp.node_probs.tolist() == [0.0, 0.75, 0.25]


def test_import_export_product_symmetry(small_tensor):
    imp, exp = import_export_rank(small_tensor)
    np.testing.assert_allclose(imp.product_probs, exp.product_probs, rtol=1e-14)
    np.testing.assert_allclose(imp.product_probs,
                               small_tensor.product_volumes / small_tensor.total_volume,
                               rtol=1e-14)


def _rv(probs):
    return RankVector("pagerank", probs, 1, len(probs))


def test_sort_index_basic_and_ties():
    np.testing.assert_array_equal(sort_index(_rv([0.5, 0.3, 0.2]), "node").ordering, [0, 1, 2])
    np.testing.assert_array_equal(sort_index(_rv([0.25] * 4), "node").ordering, [0, 1, 2, 3])
    idx = sort_index(_rv([0.2, 0.4, 0.2, 0.2]), "country")
    np.testing.assert_array_equal(idx.ordering, [1, 0, 2, 3])
    np.testing.assert_array_equal(idx.positions, [2, 1, 3, 4])


def test_two_d_rank_table_rows():
    # entities: 0 = US (K=1, K*=2), 1 = CN (K=2, K*=1), 2 = DE (K=3, K*=3)
    kp = sort_index(_rv([0.5, 0.3, 0.2]), "node")
    kc = sort_index(_rv([0.3, 0.5, 0.2]), "node")
    k2 = two_d_rank(kp, kc)
    np.testing.assert_array_equal(k2.ordering, [1, 0, 2])
    assert k2.positions[2] == 3


def test_two_d_rank_top_entity_first():
    kp = sort_index(_rv([0.1, 0.2, 0.6, 0.1]), "node")
    kc = sort_index(_rv([0.3, 0.1, 0.5, 0.1]), "node")
    assert two_d_rank(kp, kc).ordering[0] == 2


def test_two_d_rank_mismatch():
    with pytest.raises(ValueError):
        two_d_rank(sort_index(_rv([0.5, 0.5]), "node"), sort_index(_rv([0.2, 0.3, 0.5]), "node"))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(2, 8), st.floats(0.2, 1.0), st.integers(0, 2**32 - 1),
       st.sampled_from([1e-3, 7.0, 1e6]))
def test_scale_invariance(n_p, n_c, density, seed, factor):
    m = random_tensor(np.random.default_rng(seed), n_p, n_c, density)
    g, g_star = google_matrices(m)
    h, h_star = google_matrices(m.scaled(factor))
    for a, b in ((pagerank(g), pagerank(h)), (pagerank(g_star), pagerank(h_star))):
        np.testing.assert_allclose(a.node_probs, b.node_probs, atol=1e-12)
    imp, exp = import_export_rank(m)
    imp2, exp2 = import_export_rank(m.scaled(factor))
    np.testing.assert_allclose(imp.node_probs, imp2.node_probs, atol=1e-14)
    np.testing.assert_allclose(exp.node_probs, exp2.node_probs, atol=1e-14)
