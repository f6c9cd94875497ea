"""Google matrix construction for the multiproduct trade network.

Nodes are (product, country) pairs flattened product-major:
``node = p * n_countries + c``.  Links only join nodes of the same
product; products are coupled through the personalization vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .ingest import MoneyTensor

DIRECT = "direct"
INVERTED = "inverted"
DANGLING_POLICY = "uniform_1_over_N"
DEFAULT_ALPHA = 0.5
# Mixing weight of the uniform floor applied when some product has no trade.
V_FLOOR = 1e-12


class ConfigError(ValueError):
    pass


def node_index(product: int, country: int, n_countries: int) -> int:
    return product * n_countries + country


@dataclass(frozen=True)
class StochasticMatrix:
    """Column-normalized flows, dangling columns kept implicit.

    ``matrix`` holds the non-dangling columns only; a column flagged in
    ``dangling`` stands for a uniform ``1/N`` column.
    """

    matrix: sp.csc_matrix
    dangling: np.ndarray
    n_countries: int
    n_products: int
    direction: str = DIRECT

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_dense(self) -> np.ndarray:
        dense = self.matrix.toarray()
        dense[:, self.dangling] = 1.0 / self.n
        return dense


def build_stochastic(m: MoneyTensor, direction: str = DIRECT) -> StochasticMatrix:
    """Normalize each exporter column of every product block to sum to one.

    With ``direction="inverted"`` the flows of every product are reversed
    before normalization, giving the matrix behind CheiRank.
    """
    if direction not in (DIRECT, INVERTED):
        raise ConfigError(f"unknown direction {direction!r}")
    if m.total_volume <= 0:
        raise ValueError("money tensor has no trade at all")

    n_p, n_c = m.n_products, m.n_countries
    n = n_p * n_c
    rows, cols, data = [], [], []
    dangling = np.zeros(n, dtype=bool)
    for p in range(n_p):
        block = m.values[p] if direction == DIRECT else m.values[p].T
        out_flow = block.sum(axis=0)
        has_out = out_flow > 0
        dangling[p * n_c:(p + 1) * n_c] = ~has_out
        r, c = np.nonzero(block)
        rows.append(r + p * n_c)
        cols.append(c + p * n_c)
        data.append(block[r, c] / out_flow[c])
    matrix = sp.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return StochasticMatrix(matrix, dangling, n_c, n_p, direction)


def build_personalization(m: MoneyTensor) -> np.ndarray:
    """Teleportation vector weighting products by their share of total volume.

    ``v[(p, c)] = (V_p / V) / n_countries``.  If a product has no trade its
    nodes would get zero weight; in that case the vector is mixed with a
    tiny uniform floor so that every entry stays strictly positive.
    """
    volumes = m.product_volumes
    total = volumes.sum()
    if total <= 0:
        raise ValueError("total trade volume must be positive")
    n_c = m.n_countries
    v = np.repeat(volumes / total / n_c, n_c)
    if np.any(v <= 0):
        v = (1.0 - V_FLOOR) * v + V_FLOOR / v.size
    return v


@dataclass(frozen=True)
class GoogleMatrix:
    """``G = alpha * S + (1 - alpha) * v 1^T`` kept in factored form."""

    S: StochasticMatrix
    v: np.ndarray
    alpha: float = DEFAULT_ALPHA
    dangling_policy: str = DANGLING_POLICY

    @property
    def n(self) -> int:
        return self.S.n

    @property
    def direction(self) -> str:
        return self.S.direction

    def matvec(self, x: np.ndarray) -> np.ndarray:
        dangling_mass = x[self.S.dangling].sum()
        y = self.alpha * (self.S.matrix @ x + dangling_mass / self.n)
        y += (1.0 - self.alpha) * x.sum() * self.v
        return y

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        return self.alpha * self.S.to_dense() + (1.0 - self.alpha) * self.v[:, None]


def assemble_google(S: StochasticMatrix, v: np.ndarray,
                    alpha: float = DEFAULT_ALPHA) -> GoogleMatrix:
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (S.n,) or np.any(v <= 0) or abs(v.sum() - 1.0) > 1e-12:
        raise ConfigError("personalization vector must be positive and sum to 1")
    return GoogleMatrix(S, v, float(alpha))


def google_matrices(m: MoneyTensor, alpha: float = DEFAULT_ALPHA) -> tuple[GoogleMatrix, GoogleMatrix]:
    """Return ``(G, G*)``, the direct and inverted-flow Google matrices."""
    v = build_personalization(m)
    return (assemble_google(build_stochastic(m, DIRECT), v, alpha),
            assemble_google(build_stochastic(m, INVERTED), v, alpha))
