"""Random trade data for tests, benchmarks and demos."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .ingest import (RECORD_HEADER, CountryRegistry, MoneyTensor, ProductRegistry,
                     load_countries, load_products, tensor_from_array)


def random_values(rng: np.random.Generator, n_products: int, n_countries: int,
                  density: float = 0.5) -> np.ndarray:
    """Heavy-tailed flows on a random sparse pattern, zero diagonal.

    Country sizes follow a lognormal law so that rankings are far from
    uniform and ties are practically impossible.
    """
    size = rng.lognormal(0.0, 1.5, n_countries)
    mask = rng.random((n_products, n_countries, n_countries)) < density
    flows = rng.lognormal(0.0, 1.0, mask.shape) * size[None, :, None] * size[None, None, :]
    flows *= rng.lognormal(0.0, 0.7, n_products)[:, None, None]
    values = np.where(mask, flows, 0.0)
    diag = np.arange(n_countries)
    values[:, diag, diag] = 0.0
    return values


def random_tensor(rng: np.random.Generator, n_products: int, n_countries: int,
                  density: float = 0.5, year: int = 0) -> MoneyTensor:
    values = random_values(rng, n_products, n_countries, density)
    if values.sum() == 0:
        values[0, 1 % n_countries, 0] = 1.0
    return tensor_from_array(values, year)


def world_tensor(seed: int = 0, year: int = 2018, density: float = 0.4,
                 countries: CountryRegistry | None = None,
                 products: ProductRegistry | None = None) -> MoneyTensor:
    """A synthetic tensor over the packaged 194-country, 10-product registries."""
    countries = countries or load_countries()
    products = products or load_products()
    rng = np.random.default_rng(seed)
    values = random_values(rng, len(products), len(countries), density)
    return MoneyTensor(year, values, countries, products)


def write_records(m: MoneyTensor, path: str | Path, *, rng: np.random.Generator | None = None,
                  noise: float = 0.05) -> int:
    """Write a tensor as importer and exporter reports in the record CSV format.

    Each cell is reported by the importer; the exporter's mirror report is
    drawn lower by up to ``noise`` (relative) so that the max-of-reports
    rule recovers the tensor exactly.
    Returns the number of rows written.
    """
    rng = rng or np.random.default_rng(0)
    codes = m.countries.codes
    p_idx, c_idx, cp_idx = np.nonzero(m.values)
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for p, c, cp in zip(p_idx, c_idx, cp_idx):
            value = m.values[p, c, cp]
            w.writerow([m.year, codes[c], codes[cp], int(p), "import", repr(float(value))])
            mirror = value * (1.0 - noise * rng.random())
            w.writerow([m.year, codes[cp], codes[c], int(p), "export", repr(float(mirror))])
            rows += 2
    return rows
