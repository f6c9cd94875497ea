import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import solve_pagerank
from wtn.google import google_matrices
from wtn.ingest import load_countries
from wtn.ranks import pagerank
from wtn.regomax import ReducedMatrix, reduce, reduced_for_product
from wtn.synthetic import random_tensor, world_tensor


def test_full_subset_is_identity(small_tensor):
    g, _ = google_matrices(small_tensor)
    gr = reduce(g, range(g.n))
    np.testing.assert_allclose(gr.matrix, g.to_dense(), atol=1e-12)


def test_thirty_node_reduction(rng):
    g, _ = google_matrices(random_tensor(rng, 3, 10, 0.4))
    subset = rng.choice(g.n, 5, replace=False)
    gr = reduce(g, subset)
    np.testing.assert_allclose(gr.matrix.sum(axis=0), 1.0, atol=1e-12)
    assert np.all(gr.matrix >= 0)
    assert gr.solve_residual < 1e-12
    # the restricted, renormalized PageRank is the stationary vector of G_R
    full = solve_pagerank(g.to_dense())[subset]
    np.testing.assert_allclose(solve_pagerank(gr.matrix), full / full.sum(), atol=1e-12)


def test_keeps_requested_order(small_tensor):
    g, _ = google_matrices(small_tensor)
    a = reduce(g, [4, 1, 7])
    b = reduce(g, [1, 4, 7])
    assert a.nodes == (4, 1, 7)
    np.testing.assert_allclose(a.matrix[np.ix_([1, 0, 2], [1, 0, 2])], b.matrix, atol=1e-14)


def test_bad_subsets(small_tensor):
    g, _ = google_matrices(small_tensor)
    for nodes in ([], [1, 1], [-1], [g.n]):
        with pytest.raises(ValueError):
            reduce(g, nodes)


def test_dense_input_accepted(small_tensor):
    g, _ = google_matrices(small_tensor)
    np.testing.assert_array_equal(reduce(g.to_dense(), [0, 3]).matrix, reduce(g, [0, 3]).matrix)


@pytest.fixture(scope="module")
def world():
    m = world_tensor(seed=3, density=0.3)
    g, _ = google_matrices(m)
    return m, g, pagerank(g)


def test_reduced_for_product_orders_by_product_pagerank(world):
    m, g, pr = world
    codes = ["US", "CN", "DE", "FR", "NL", "JP"]
    gr = reduced_for_product(g, codes, 3, m.countries, pr=pr, year=2018)
    probs = [pr.grid[3, m.countries.index(c)] for c in gr.labels]
    assert probs == sorted(probs, reverse=True)
    assert sorted(gr.labels) == sorted(codes)
    n_c = len(m.countries)
    assert all(node // n_c == 3 for node in gr.nodes)
    np.testing.assert_allclose(gr.matrix.sum(axis=0), 1.0, atol=1e-10)


def test_single_country_subset(world):
    m, g, pr = world
    gr = reduced_for_product(g, ["FR"], 0, m.countries, pr=pr)
    np.testing.assert_allclose(gr.matrix, [[1.0]], atol=1e-12)


def test_unknown_country(world):
    m, g, pr = world
    with pytest.raises(KeyError):
        reduced_for_product(g, ["US", "XX"], 0, m.countries, pr=pr)


def test_year_difference_on_same_subset(world):
    m, g, pr = world
    g2, _ = google_matrices(world_tensor(seed=4, density=0.3, year=2020))
    a = reduced_for_product(g, ["US", "CN", "DE"], 0, m.countries, pr=pr)
    b = reduce(g2, a.nodes, labels=a.labels)
    diff = b - a
    np.testing.assert_array_equal(diff, b.matrix - a.matrix)
    np.testing.assert_allclose(diff.sum(axis=0), 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        reduce(g2, a.nodes[::-1]) - a


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(3, 25), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_stochastic_and_rank_consistent(n_p, n_c, n_r, seed):
    rng = np.random.default_rng(seed)
    m = random_tensor(rng, n_p, n_c, rng.uniform(0.1, 0.8))
    g, g_star = google_matrices(m)
    n_r = min(n_r, g.n)
    subset = rng.choice(g.n, n_r, replace=False)
    for gm in (g, g_star):
        gr = reduce(gm, subset)
        np.testing.assert_allclose(gr.matrix.sum(axis=0), 1.0, atol=1e-10)
        p = pagerank(gm).node_probs[subset]
        p_r = solve_pagerank(gr.matrix)
        assert np.abs(p_r - p / p.sum()).sum() < 1e-8


def test_reduced_matrix_is_frozen(small_tensor):
    g, _ = google_matrices(small_tensor)
    gr = reduce(g, [0, 1])
    assert isinstance(gr, ReducedMatrix)
    with pytest.raises(ValueError):
        gr.matrix[0, 0] = 1.0
