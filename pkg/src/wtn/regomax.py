"""Reduced Google matrix of a node subset.

For a subset ``r`` of nodes and its complement ``s`` the reduced matrix is
the Schur complement

    G_R = G_rr + G_rs (1 - G_ss)^{-1} G_sr

which folds every path that leaves ``r``, wanders through ``s`` and comes
back into a single effective transition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as la

from .google import GoogleMatrix
from .ingest import CountryRegistry
from .ranks import RankVector, pagerank


class SingularBlockError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class ReducedMatrix:
    nodes: tuple[int, ...]
    matrix: np.ndarray
    labels: tuple[str, ...] = ()
    year: int | None = None
    solve_residual: float = 0.0

    @property
    def size(self) -> int:
        return len(self.nodes)

    def __sub__(self, other: ReducedMatrix) -> np.ndarray:
        if self.nodes != other.nodes:
            raise ValueError("reduced matrices are defined on different subsets")
        return self.matrix - other.matrix


def _check_subset(nodes: Sequence[int], n: int) -> tuple[int, ...]:
    nodes = tuple(int(i) for i in nodes)
    if not nodes:
        raise ValueError("subset must contain at least one node")
    if len(set(nodes)) != len(nodes):
        raise ValueError("subset contains duplicate nodes")
    if min(nodes) < 0 or max(nodes) >= n:
        raise ValueError("subset node out of range")
    return nodes


def reduce(g: GoogleMatrix | np.ndarray, nodes: Sequence[int], *,
           labels: Sequence[str] = (), year: int | None = None) -> ReducedMatrix:
    """Reduced Google matrix on ``nodes`` (kept in the given order).

    ``g`` may be a :class:`GoogleMatrix` or an already dense column-stochastic
    array.  The complement block system is solved by LU factorization.
    """
    dense = g.to_dense() if isinstance(g, GoogleMatrix) else np.asarray(g, dtype=np.float64)
    n = dense.shape[0]
    r = np.array(_check_subset(nodes, n))
    s = np.setdiff1d(np.arange(n), r)

    g_rr = dense[np.ix_(r, r)]
    residual = 0.0
    if s.size:
        g_rs = dense[np.ix_(r, s)]
        g_sr = dense[np.ix_(s, r)]
        a = np.eye(s.size) - dense[np.ix_(s, s)]
        try:
            lu = la.lu_factor(a, check_finite=False)
        except (la.LinAlgError, ValueError) as exc:
            raise SingularBlockError("1 - G_ss is singular") from exc
        if np.any(np.diag(lu[0]) == 0):
            raise SingularBlockError("1 - G_ss is singular")
        x = la.lu_solve(lu, g_sr, check_finite=False)
        residual = float(np.abs(a @ x - g_sr).max())
        g_r = g_rr + g_rs @ x
    else:
        g_r = g_rr.copy()
    g_r.setflags(write=False)
    return ReducedMatrix(tuple(int(i) for i in r), g_r, tuple(labels), year, residual)


def reduced_for_product(g: GoogleMatrix, countries: Sequence[str], product: int,
                        registry: CountryRegistry, *, pr: RankVector | None = None,
                        year: int | None = None) -> ReducedMatrix:
    """Reduced matrix on the nodes ``(product, c)`` for the given countries.

    Rows and columns are ordered by the product-specific PageRank of the
    nodes, descending, with registry order breaking ties.
    """
    if not 0 <= product < g.S.n_products:
        raise ValueError(f"product {product} out of range")
    idx = []
    for code in countries:
        try:
            idx.append(registry.index(code))
        except KeyError:
            raise KeyError(f"unknown country code {code!r}") from None
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate country in subset")
    if pr is None:
        pr = pagerank(g)
    probs = pr.grid[product]
    idx.sort(key=lambda c: (-probs[c], c))
    n_c = g.S.n_countries
    nodes = [product * n_c + c for c in idx]
    labels = [registry.code(c) for c in idx]
    return reduce(g, nodes, labels=labels, year=year)
