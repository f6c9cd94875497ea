"""Trade record parsing, country/product registries and money tensors.

A money tensor holds, for one year, the USD value of product ``p`` shipped
from exporter ``c'`` to importer ``c``.  It is stored densely as an array of
shape ``(n_products, n_countries, n_countries)`` indexed ``[p, c, c']``,
i.e. ``[product, importer, exporter]``.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

RECORD_HEADER = ("year", "reporter", "partner", "sitc", "flow", "value_usd")
FLOWS = ("import", "export")

# Codes used in the literature that differ from ISO 3166-1.
COUNTRY_ALIASES = {"UK": "GB"}


class IngestError(ValueError):
    """Raised when input data cannot be turned into a usable tensor."""


@dataclass(frozen=True)
class ProductRegistry:
    entries: tuple[tuple[int, str], ...]

    def __post_init__(self):
        codes = [code for code, _ in self.entries]
        if codes != list(range(len(codes))):
            raise IngestError(
                f"product codes must be contiguous from 0, got {codes}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def codes(self) -> list[int]:
        return [code for code, _ in self.entries]

    @property
    def labels(self) -> list[str]:
        return [label for _, label in self.entries]

    def __contains__(self, code) -> bool:
        return isinstance(code, (int, np.integer)) and 0 <= code < len(self)

    def label(self, code: int) -> str:
        return self.entries[code][1]


@dataclass(frozen=True)
class CountryRegistry:
    entries: tuple[tuple[str, str], ...]
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        for i, (iso2, _) in enumerate(self.entries):
            if iso2 in lookup:
                raise IngestError(f"duplicate country code {iso2!r}")
            lookup[iso2] = i
        object.__setattr__(self, "_lookup", lookup)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, iso2) -> bool:
        return self._resolve(iso2) is not None

    @property
    def codes(self) -> list[str]:
        return [iso2 for iso2, _ in self.entries]

    @property
    def names(self) -> list[str]:
        return [name for _, name in self.entries]

    def _resolve(self, iso2):
        if not isinstance(iso2, str):
            return None
        key = iso2.strip().upper()
        if key not in self._lookup:
            key = COUNTRY_ALIASES.get(key, key)
        return self._lookup.get(key)

    def index(self, iso2: str) -> int:
        """Dense index of a country code; ``KeyError`` if unknown."""
        i = self._resolve(iso2)
        if i is None:
            raise KeyError(f"unknown country code {iso2!r}")
        return i

    def code(self, index: int) -> str:
        return self.entries[index][0]


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def load_products(path: str | Path | None = None) -> ProductRegistry:
    """Read a ``sitc,label`` registry; the packaged SITC groups by default."""
    if path is None:
        text = resources.files("wtn").joinpath("data/products.csv").read_text("utf-8")
        handle = io.StringIO(text)
    else:
        handle = _open_text(path)
    with handle:
        rows = list(csv.DictReader(handle))
    entries = tuple(sorted((int(r["sitc"]), r["label"].strip()) for r in rows))
    return ProductRegistry(entries)


def load_countries(path: str | Path | None = None) -> CountryRegistry:
    """Read an ``iso2,name`` registry; the packaged 194 entities by default."""
    if path is None:
        text = resources.files("wtn").joinpath("data/countries.csv").read_text("utf-8")
        handle = io.StringIO(text)
    else:
        handle = _open_text(path)
    with handle:
        rows = list(csv.DictReader(handle))
    entries = tuple((r["iso2"].strip().upper(), r["name"].strip()) for r in rows)
    return CountryRegistry(entries)


@dataclass(frozen=True)
class TradeRecord:
    year: int
    reporter: str
    partner: str
    product: int
    flow: str
    value: float


@dataclass(frozen=True)
class RowError:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass
class ParseResult:
    records: list[TradeRecord]
    skipped: Counter
    errors: list[RowError]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def parse_records(stream: IO[str] | str | Path, countries: CountryRegistry,
                  products: ProductRegistry) -> ParseResult:
    """Parse a trade-record CSV into validated :class:`TradeRecord` objects.

    Unknown country or product codes and self-trades are skipped and counted
    in ``result.skipped``.  Malformed rows produce a :class:`RowError`
    carrying the line number and are otherwise ignored.  An input without
    any data row raises :class:`IngestError`.
    """
    handle = _open_text(stream)
    try:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise IngestError("empty record file")
        header = tuple(h.strip().lower() for h in header)
        if header != RECORD_HEADER:
            raise IngestError(
                f"bad header {','.join(header)!r}, expected {','.join(RECORD_HEADER)!r}")

        records: list[TradeRecord] = []
        skipped: Counter = Counter()
        errors: list[RowError] = []
        n_rows = 0
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            n_rows += 1
            if len(row) != len(RECORD_HEADER):
                errors.append(RowError(line, f"expected 6 fields, got {len(row)}"))
                continue
            year_s, reporter, partner, sitc_s, flow, value_s = (c.strip() for c in row)
            try:
                year = int(year_s)
                sitc = int(sitc_s)
                value = float(value_s)
            except ValueError as exc:
                errors.append(RowError(line, str(exc)))
                continue
            flow = flow.lower()
            if flow not in FLOWS:
                errors.append(RowError(line, f"unknown flow {flow!r}"))
                continue
            if not math.isfinite(value) or value < 0:
                errors.append(RowError(line, f"invalid value {value_s!r}"))
                continue
            if reporter not in countries or partner not in countries:
                skipped["unknown_country"] += 1
                continue
            if sitc not in products:
                skipped["unknown_product"] += 1
                continue
            reporter = countries.code(countries.index(reporter))
            partner = countries.code(countries.index(partner))
            if reporter == partner:
                skipped["self_trade"] += 1
                continue
            records.append(TradeRecord(year, reporter, partner, sitc, flow, value))
    finally:
        if isinstance(stream, (str, Path)):
            handle.close()

    if n_rows == 0:
        raise IngestError("record file has no data rows")
    for err in errors:
        logger.warning("skipping malformed row: %s", err)
    if skipped:
        logger.info("skipped records: %s", dict(skipped))
    return ParseResult(records, skipped, errors)


@dataclass(frozen=True)
class MoneyTensor:
    """Trade volumes of one year, ``values[p, c, c']`` = USD from c' to c."""

    year: int
    values: np.ndarray
    countries: CountryRegistry
    products: ProductRegistry

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        shape = (len(self.products), len(self.countries), len(self.countries))
        if values.shape != shape:
            raise IngestError(f"tensor shape {values.shape} != {shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise IngestError("money values must be finite and non-negative")
        diag = np.arange(shape[1])
        if np.any(values[:, diag, diag] != 0):
            raise IngestError("self-trade (diagonal) entries are not allowed")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_products(self) -> int:
        return self.values.shape[0]

    @property
    def n_countries(self) -> int:
        return self.values.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.n_products * self.n_countries

    @property
    def product_volumes(self) -> np.ndarray:
        """V_p, total traded volume of each product."""
        return self.values.reshape(self.n_products, -1).sum(axis=1)

    @property
    def total_volume(self) -> float:
        # summed from the per-product volumes so that sum(V_p) == V exactly
        return float(self.product_volumes.sum())

    @property
    def link_count(self) -> int:
        return int(np.count_nonzero(self.values > 0))

    def inverted(self) -> MoneyTensor:
        """Tensor with every flow reversed (exporter and importer swapped)."""
        return self._replace(self.values.transpose(0, 2, 1))

    def scaled(self, factor: float) -> MoneyTensor:
        return self._replace(self.values * factor)

    def with_product_scaled(self, product: int, factor: float) -> MoneyTensor:
        """Copy with every flow of one product multiplied by ``factor``."""
        values = self.values.copy()
        values[product] *= factor
        return self._replace(values)

    def _replace(self, values) -> MoneyTensor:
        return MoneyTensor(self.year, values, self.countries, self.products)


def build_money_tensor(records: Iterable[TradeRecord], year: int,
                       countries: CountryRegistry,
                       products: ProductRegistry) -> MoneyTensor:
    """Combine import and mirror export reports into one money tensor.

    Duplicate reports for the same (product, exporter, importer, flow) are
    summed first; the tensor cell is then the larger of the importer's
    report and the exporter's report.
    """
    shape = (len(products), len(countries), len(countries))
    imports = np.zeros(shape)
    exports = np.zeros(shape)
    for rec in records:
        if rec.year != year:
            raise IngestError(f"record for year {rec.year} passed to a {year} build")
        reporter = countries.index(rec.reporter)
        partner = countries.index(rec.partner)
        if reporter == partner:
            continue
        if rec.flow == "import":
            imports[rec.product, reporter, partner] += rec.value
        else:
            exports[rec.product, partner, reporter] += rec.value
    return MoneyTensor(year, np.maximum(imports, exports), countries, products)


def load_tensor(path: str | Path, year: int, countries: CountryRegistry | None = None,
                products: ProductRegistry | None = None) -> tuple[MoneyTensor, ParseResult]:
    """Parse a record file and build the money tensor for ``year``."""
    countries = countries or load_countries()
    products = products or load_products()
    parsed = parse_records(path, countries, products)
    records = [r for r in parsed.records if r.year == year]
    other = len(parsed.records) - len(records)
    if other:
        parsed.skipped["other_year"] += other
    return build_money_tensor(records, year, countries, products), parsed


def tensor_from_array(values: Sequence | np.ndarray, year: int = 0,
                      country_codes: Sequence[str] | None = None) -> MoneyTensor:
    """Wrap a raw ``[p, importer, exporter]`` array with generated registries."""
    values = np.asarray(values, dtype=np.float64)
    n_p, n_c, _ = values.shape
    if country_codes is None:
        country_codes = [f"C{i}" for i in range(n_c)]
    countries = CountryRegistry(tuple((c, c) for c in country_codes))
    products = ProductRegistry(tuple((p, f"product {p}") for p in range(n_p)))
    return MoneyTensor(year, values, countries, products)
