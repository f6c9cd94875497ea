"""PageRank, CheiRank, ImportRank and ExportRank vectors and their indexes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .google import GoogleMatrix
from .ingest import MoneyTensor

PAGERANK = "pagerank"
CHEIRANK = "cheirank"
IMPORTRANK = "importrank"
EXPORTRANK = "exportrank"
KINDS = (PAGERANK, CHEIRANK, IMPORTRANK, EXPORTRANK)
LEVELS = ("node", "country", "product")

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class RankVector:
    """Probability over (product, country) nodes, product-major."""

    kind: str
    node_probs: np.ndarray
    n_products: int
    n_countries: int
    year: int | None = None
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    residuals: tuple = field(default=(), repr=False)

    def __post_init__(self):
        probs = np.array(self.node_probs, dtype=np.float64)
        if probs.shape != (self.n_products * self.n_countries,):
            raise ValueError("node_probs length does not match registries")
        probs.setflags(write=False)
        object.__setattr__(self, "node_probs", probs)

    @property
    def grid(self) -> np.ndarray:
        """Node probabilities as a ``(n_products, n_countries)`` array."""
        return self.node_probs.reshape(self.n_products, self.n_countries)

    @property
    def country_probs(self) -> np.ndarray:
        return self.grid.sum(axis=0)

    @property
    def product_probs(self) -> np.ndarray:
        return self.grid.sum(axis=1)

    def level(self, level: str) -> np.ndarray:
        if level == "node":
            return self.node_probs
        if level == "country":
            return self.country_probs
        if level == "product":
            return self.product_probs
        raise ValueError(f"unknown level {level!r}")


def pagerank(g: GoogleMatrix, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, *, kind: str | None = None,
             year: int | None = None, n_countries: int | None = None) -> RankVector:
    """Stationary vector of ``g`` by power iteration started from ``g.v``.

    Iterates until the L1 change between successive iterates,
    ``||G P - P||_1``, drops to ``tol``.  Since G contracts by ``alpha`` the
    distance to the fixed point is at most ``alpha / (1 - alpha)`` times
    that change, so for ``alpha > 0.5`` the test is tightened by this factor.
    Raises :class:`ConvergenceError` after ``max_iter`` steps.  Applied to
    ``G*`` this gives the CheiRank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if kind is None:
        kind = CHEIRANK if g.direction == "inverted" else PAGERANK
    n_c = n_countries or g.S.n_countries
    bound = max(1.0, g.alpha / (1.0 - g.alpha))
    x = g.v.copy()
    residuals = []
    for it in range(1, max_iter + 1):
        y = g.matvec(x)
        y /= y.sum()
        res = float(np.abs(y - x).sum())
        residuals.append(res)
        x = y
        if res * bound <= tol:
            return RankVector(kind, x, g.n // n_c, n_c, year, it, res, True, tuple(residuals))
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(residual {residuals[-1]:.3e})", residuals[-1], max_iter)


def cheirank(g_star: GoogleMatrix, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER, *, year: int | None = None) -> RankVector:
    return pagerank(g_star, tol, max_iter, kind=CHEIRANK, year=year)


def import_export_rank(m: MoneyTensor) -> tuple[RankVector, RankVector]:
    """Volume shares: ImportRank sums over exporters, ExportRank over importers."""
    total = m.total_volume
    if total <= 0:
        raise ValueError("total trade volume must be positive")
    imports = m.values.sum(axis=2) / total
    exports = m.values.sum(axis=1) / total
    n_p, n_c = m.n_products, m.n_countries
    return (RankVector(IMPORTRANK, imports.ravel(), n_p, n_c, m.year),
            RankVector(EXPORTRANK, exports.ravel(), n_p, n_c, m.year))


@dataclass(frozen=True)
class RankIndex:
    """Entities sorted by descending probability.

    ``ordering[k]`` is the entity holding rank ``k + 1``; ``positions[e]``
    is the 1-based rank of entity ``e``.
    """

    level: str
    ordering: np.ndarray
    probs: np.ndarray

    @property
    def positions(self) -> np.ndarray:
        pos = np.empty_like(self.ordering)
        pos[self.ordering] = np.arange(1, len(self.ordering) + 1)
        return pos

    def __len__(self):
        return len(self.ordering)


def sort_index(r: RankVector, level: str = "country") -> RankIndex:
    """Descending sort; equal probabilities keep ascending registry order."""
    probs = r.level(level)
    ordering = np.argsort(-probs, kind="stable")
    return RankIndex(level, ordering, probs)


@dataclass(frozen=True)
class TwoDRank:
    ordering: np.ndarray
    k: np.ndarray
    k_star: np.ndarray

    @property
    def positions(self) -> np.ndarray:
        pos = np.empty_like(self.ordering)
        pos[self.ordering] = np.arange(1, len(self.ordering) + 1)
        return pos


def two_d_rank(kp: RankIndex, kc: RankIndex) -> TwoDRank:
    """Combine PageRank and CheiRank indexes: ascending max(K, K*), then K*."""
    if len(kp) != len(kc) or kp.level != kc.level:
        raise ValueError("PageRank and CheiRank indexes cover different entities")
    k, k_star = kp.positions, kc.positions
    ordering = np.lexsort((k_star, np.maximum(k, k_star)))
    return TwoDRank(ordering, k, k_star)
