"""Trade balances derived from rank vectors, and their price sensitivity."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .google import DEFAULT_ALPHA, google_matrices
from .ingest import MoneyTensor
from .ranks import (DEFAULT_MAX_ITER, DEFAULT_TOL, EXPORTRANK, IMPORTRANK, RankVector,
                    import_export_rank, pagerank)

DEFAULT_DELTA = 1e-3
VOLUME_KINDS = (IMPORTRANK, EXPORTRANK)


def _ratio(diff, total, allow_empty=False):
    empty = total == 0
    # Google-matrix ranks are strictly positive; only raw volumes can vanish.
    assert allow_empty or not empty.any(), "balance undefined for zero probability mass"
    out = np.zeros(np.shape(diff))
    np.divide(diff, total, out=out, where=~empty)
    return out


def _normalized_difference(export_side, import_side, allow_empty=False):
    return _ratio(export_side - import_side, export_side + import_side, allow_empty)


def _volume_kinds(p, p_star):
    return p.kind in VOLUME_KINDS and p_star.kind in VOLUME_KINDS


def _check_pair(p: RankVector, p_star: RankVector):
    if (p.n_products, p.n_countries) != (p_star.n_products, p_star.n_countries):
        raise ValueError("rank vectors are defined on different node sets")
    if p.year != p_star.year:
        raise ValueError(f"rank vectors from different years ({p.year}, {p_star.year})")


def country_balance(p: RankVector, p_star: RankVector) -> np.ndarray:
    """``(P*_c - P_c) / (P*_c + P_c)`` for every country.

    Pass (ImportRank, ExportRank) to get the volume-based balance instead;
    a country without any trade then gets a balance of 0.
    """
    _check_pair(p, p_star)
    return _normalized_difference(p_star.country_probs, p.country_probs,
                                  _volume_kinds(p, p_star))


def product_balance(p: RankVector, p_star: RankVector) -> np.ndarray:
    _check_pair(p, p_star)
    return _normalized_difference(p_star.product_probs, p.product_probs,
                                  _volume_kinds(p, p_star))


def node_balance(p: RankVector, p_star: RankVector) -> np.ndarray:
    """Per (product, country) balance as an ``(n_products, n_countries)`` array.

    The denominator is the *product-level* mass ``P*_p + P_p``, not the
    node's own, so that summing a row over countries gives the product
    balance.
    """
    _check_pair(p, p_star)
    denom = (p_star.product_probs + p.product_probs)[:, None]
    return _ratio(p_star.grid - p.grid, np.broadcast_to(denom, p.grid.shape),
                  _volume_kinds(p, p_star))


@dataclass(frozen=True)
class BalanceReport:
    year: int | None
    country: np.ndarray           # B_c
    country_volume: np.ndarray    # B^_c
    product: np.ndarray           # B_p
    product_volume: np.ndarray    # B^_p, zero up to rounding
    node: np.ndarray              # B_pc, shape (n_products, n_countries)
    node_volume: np.ndarray       # B^_pc

    def __sub__(self, other: BalanceReport) -> BalanceReport:
        return diff_reports(self, other)


def balance_report(p: RankVector, p_star: RankVector,
                   imp: RankVector, exp: RankVector) -> BalanceReport:
    return BalanceReport(
        year=p.year,
        country=country_balance(p, p_star),
        country_volume=country_balance(imp, exp),
        product=product_balance(p, p_star),
        product_volume=product_balance(imp, exp),
        node=node_balance(p, p_star),
        node_volume=node_balance(imp, exp),
    )


def diff_reports(later: BalanceReport, earlier: BalanceReport) -> BalanceReport:
    """Component-wise ``later - earlier``; the year field keeps ``later.year``."""
    values = {}
    for f in fields(BalanceReport):
        a, b = getattr(later, f.name), getattr(earlier, f.name)
        values[f.name] = a if f.name == "year" else a - b
    return BalanceReport(**values)


@dataclass(frozen=True)
class Analysis:
    """Everything computed from one year's tensor in a single pass."""

    tensor: MoneyTensor
    pagerank: RankVector
    cheirank: RankVector
    importrank: RankVector
    exportrank: RankVector
    alpha: float

    @property
    def balances(self) -> BalanceReport:
        return balance_report(self.pagerank, self.cheirank,
                              self.importrank, self.exportrank)

    def rank(self, kind: str) -> RankVector:
        return getattr(self, kind)


def analyze(m: MoneyTensor, alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
            max_iter: int = DEFAULT_MAX_ITER) -> Analysis:
    """Build G and G*, run both power iterations and the volume ranks."""
    g, g_star = google_matrices(m, alpha)
    pr = pagerank(g, tol, max_iter, kind="pagerank", year=m.year)
    cr = pagerank(g_star, tol, max_iter, kind="cheirank", year=m.year)
    imp, exp = import_export_rank(m)
    return Analysis(m, pr, cr, imp, exp, alpha)


@dataclass(frozen=True)
class SensitivityReport:
    year: int | None
    product: int
    values: np.ndarray            # dB_c/d(delta) per country
    delta_used: float
    scheme: str
    # max |estimate(delta) - estimate(delta/2)|, None when not computed
    richardson_gap: float | None = None


def _balance_at(m: MoneyTensor, product: int, factor: float, **kw) -> np.ndarray:
    a = analyze(m.with_product_scaled(product, factor), **kw)
    return country_balance(a.pagerank, a.cheirank)


def _estimate(m, product, delta, scheme, base, **kw):
    if scheme == "central":
        plus = _balance_at(m, product, 1.0 + delta, **kw)
        minus = _balance_at(m, product, 1.0 - delta, **kw)
        return (plus - minus) / (2.0 * delta)
    plus = _balance_at(m, product, 1.0 + delta, **kw)
    return (plus - base) / delta


def balance_sensitivity(m: MoneyTensor, product: int, delta: float = DEFAULT_DELTA,
                        *, scheme: str = "central", richardson: bool = True,
                        alpha: float = DEFAULT_ALPHA, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER) -> SensitivityReport:
    """Finite-difference derivative of every country's balance with respect
    to a ``(1 + delta)`` rescaling of one product's flows.

    The full pipeline (G, G*, PageRank, CheiRank) is rebuilt for each
    perturbed tensor.  Unless ``richardson=False`` the estimate is repeated
    at ``delta / 2`` and the largest disagreement is stored as
    ``richardson_gap``.
    """
    if scheme not in ("central", "forward"):
        raise ValueError(f"unknown difference scheme {scheme!r}")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 <= product < m.n_products:
        raise ValueError(f"product {product} out of range")
    kw = dict(alpha=alpha, tol=tol, max_iter=max_iter)
    base = None
    if scheme == "forward":
        base = _balance_at(m, product, 1.0, **kw)
    est = _estimate(m, product, delta, scheme, base, **kw)
    gap = None
    if richardson:
        half = _estimate(m, product, delta / 2, scheme, base, **kw)
        gap = float(np.max(np.abs(est - half)))
    return SensitivityReport(m.year, product, est, delta, scheme, gap)
