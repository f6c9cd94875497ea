"""``wtn`` command line front end.

Each subcommand loads the record file of the requested year(s), runs the
library call and serializes the result as CSV (default) or JSON, either to
stdout or into ``--out DIR`` together with a ``manifest.json`` that lists
every artifact with its SHA-256 checksum.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .balance import DEFAULT_DELTA, Analysis, analyze, balance_sensitivity, diff_reports
from .google import DANGLING_POLICY, DEFAULT_ALPHA, ConfigError, google_matrices
from .ingest import IngestError, MoneyTensor, load_countries, load_products, load_tensor
from .metrics import kendall_distance
from .netreduce import diff_networks, top_k_network
from .ranks import DEFAULT_MAX_ITER, DEFAULT_TOL, KINDS, LEVELS, ConvergenceError, sort_index, two_d_rank
from .regomax import reduce, reduced_for_product

logger = logging.getLogger("wtn")

EXIT_ERROR = 1
EXIT_MISSING = 2
DEFAULT_SUBSET_SIZE = 20


class MissingFileError(FileNotFoundError):
    pass


def fmt(x) -> str:
    """Fixed 12-significant-digit rendering used for every float output."""
    if isinstance(x, (float, np.floating)):
        s = format(float(x), ".12g")
        return "0" if s == "-0" else s
    return str(x)


def summarize_network_stats(m: MoneyTensor) -> tuple[int, float]:
    """Number of strictly positive cells and total traded volume."""
    return m.link_count, float(m.values.sum())


# -- configuration -----------------------------------------------------------

@dataclass
class RunConfig:
    alpha: float = DEFAULT_ALPHA
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    delta: float = DEFAULT_DELTA
    k: int = 4
    out: Path | None = None
    format: str = "csv"
    data_dir: Path = Path(".")
    data: dict[int, Path] = field(default_factory=dict)
    country_registry: Path | None = None
    product_registry: Path | None = None
    dangling_policy: str = DANGLING_POLICY

    def validate(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.dangling_policy != DANGLING_POLICY:
            raise ConfigError(f"unsupported dangling_policy {self.dangling_policy!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.format!r}")
        for path in (self.country_registry, self.product_registry):
            if path is not None and not Path(path).exists():
                raise MissingFileError(f"registry file not found: {path}")

    def data_path(self, year: int) -> Path:
        path = self.data.get(year, self.data_dir / f"{year}.csv")
        if not Path(path).exists():
            raise MissingFileError(f"data file not found: {path}")
        return Path(path)


_CONFIG_TYPES = {"alpha": float, "tol": float, "max_iter": int, "delta": float, "k": int,
                 "out": Path, "format": str, "data_dir": Path, "country_registry": Path,
                 "product_registry": Path, "dangling_policy": str}


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"config file not found: {path}")
    values: dict = {}
    data: dict[int, Path] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key.startswith("data."):
            data[int(key[5:])] = Path(value)
        elif key in _CONFIG_TYPES:
            values[key] = _CONFIG_TYPES[key](value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if data:
        values["data"] = data
    return values


def make_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for key in _CONFIG_TYPES:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            values[key] = _CONFIG_TYPES[key](cli_value)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- run context ---------------------------------------------------------------

class Session:
    """Loads tensors and analyses once per year within one command."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.countries = load_countries(cfg.country_registry)
        self.products = load_products(cfg.product_registry)
        self._tensors: dict[int, MoneyTensor] = {}
        self._analyses: dict[int, Analysis] = {}
        self._google: dict[int, tuple] = {}

    def tensor(self, year: int) -> MoneyTensor:
        if year not in self._tensors:
            path = self.cfg.data_path(year)
            m, parsed = load_tensor(path, year, self.countries, self.products)
            if parsed.errors:
                logger.warning("%s: %d malformed rows skipped", path, len(parsed.errors))
            self._tensors[year] = m
        return self._tensors[year]

    def analysis(self, year: int) -> Analysis:
        if year not in self._analyses:
            self._analyses[year] = analyze(self.tensor(year), self.cfg.alpha,
                                           self.cfg.tol, self.cfg.max_iter)
        return self._analyses[year]

    def google(self, year: int):
        if year not in self._google:
            self._google[year] = google_matrices(self.tensor(year), self.cfg.alpha)
        return self._google[year]

    def product(self, code: int) -> int:
        if code not in self.products:
            raise ValueError(f"unknown product code {code}")
        return code

    def node_label(self, node: int) -> str:
        n_c = len(self.countries)
        return f"{self.countries.code(node % n_c)}:{node // n_c}"

    def labels(self, level: str) -> list[str]:
        if level == "country":
            return self.countries.codes
        if level == "product":
            return [str(c) for c in self.products.codes]
        return [self.node_label(i) for i in range(len(self.countries) * len(self.products))]

    def subset(self, spec: str | None, year: int) -> list[str]:
        """Country list from a comma list, a file (one code per line or
        comma separated), or by default the top countries by 2DRank."""
        if spec:
            path = Path(spec)
            text = path.read_text(encoding="utf-8") if path.is_file() else spec
            codes = [c.strip() for c in text.replace("\n", ",").split(",") if c.strip()]
            for code in codes:
                if code not in self.countries:
                    raise KeyError(f"unknown country code {code!r}")
            return codes
        a = self.analysis(year)
        k2 = two_d_rank(sort_index(a.pagerank, "country"), sort_index(a.cheirank, "country"))
        return [self.countries.code(c) for c in k2.ordering[:DEFAULT_SUBSET_SIZE]]


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list]

    def render(self, form: str) -> str:
        if form == "json":
            records = [{h: (float(fmt(v)) if isinstance(v, (float, np.floating)) else v)
                        for h, v in zip(self.header, row)} for row in self.rows]
            return json.dumps(records, indent=1) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


# -- commands ----------------------------------------------------------------------

def cmd_rank(s: Session, args) -> list[Table]:
    r = s.analysis(args.year).rank(args.metric)
    idx = sort_index(r, args.level)
    labels = s.labels(args.level)
    rows = [[k + 1, labels[e], idx.probs[e]] for k, e in enumerate(idx.ordering)]
    return [Table(f"rank_{args.year}_{args.metric}_{args.level}",
                  ["rank", "entity", "probability"], rows)]


def cmd_balance(s: Session, args) -> list[Table]:
    report = s.analysis(args.year).balances
    name = f"balance_{args.year}"
    if args.diff_year is not None:
        report = diff_reports(s.analysis(args.diff_year).balances, report)
        name += f"_{args.diff_year}"
    rows = [[code, report.country[c], report.country_volume[c]]
            for c, code in enumerate(s.countries.codes)]
    return [Table(name, ["country", "B", "Bhat"], rows)]


def cmd_balance_matrix(s: Session, args) -> list[Table]:
    report = s.analysis(args.year).balances
    values = report.node_volume if args.volume else report.node
    rows = [[p] + list(values[p]) for p in s.products.codes]
    kind = "Bhat" if args.volume else "B"
    return [Table(f"balance_matrix_{args.year}_{kind}", ["product"] + s.countries.codes, rows)]


def cmd_sensitivity(s: Session, args) -> list[Table]:
    product = s.product(args.product)
    delta = args.delta if args.delta is not None else s.cfg.delta
    kw = dict(alpha=s.cfg.alpha, tol=s.cfg.tol, max_iter=s.cfg.max_iter)
    rep = balance_sensitivity(s.tensor(args.year), product, delta, **kw)
    logger.info("sensitivity p=%d: max |estimate(delta) - estimate(delta/2)| = %.3e",
                product, rep.richardson_gap)
    values = rep.values
    name = f"sensitivity_{args.year}_p{product}"
    if args.diff_year is not None:
        later = balance_sensitivity(s.tensor(args.diff_year), product, delta, **kw)
        values = later.values - values
        name = f"sensitivity_{args.year}_{args.diff_year}_p{product}"
    rows = [[code, values[c]] for c, code in enumerate(s.countries.codes)]
    return [Table(name, ["country", "dBddelta"], rows)]


def cmd_regomax(s: Session, args) -> list[Table]:
    product = s.product(args.product)
    countries = s.subset(args.countries, args.year)
    g, _ = s.google(args.year)
    gr = reduced_for_product(g, countries, product, s.countries,
                             pr=s.analysis(args.year).pagerank, year=args.year)
    matrix, name = gr.matrix, f"regomax_{args.year}_p{product}"
    if args.diff_year is not None:
        g2, _ = s.google(args.diff_year)
        later = reduce(g2, gr.nodes, labels=gr.labels, year=args.diff_year)
        matrix = later - gr
        name = f"regomax_{args.year}_{args.diff_year}_p{product}"
    rows = [[label] + list(matrix[i]) for i, label in enumerate(gr.labels)]
    return [Table(name, ["to\\from"] + list(gr.labels), rows)]


def cmd_network(s: Session, args) -> list[Table]:
    product = s.product(args.product)
    k = args.k if args.k is not None else s.cfg.k
    countries = s.subset(args.countries, args.year)
    g, _ = s.google(args.year)
    gr = reduced_for_product(g, countries, product, s.countries,
                             pr=s.analysis(args.year).pagerank, year=args.year)
    net = top_k_network(gr, k)
    if args.diff_year is None:
        rows = [[e.source, e.target, e.weight] for e in net.edges]
        return [Table(f"network_{args.year}_p{product}_k{k}", ["source", "target", "weight"], rows)]
    g2, _ = s.google(args.diff_year)
    later = top_k_network(reduce(g2, gr.nodes, labels=gr.labels, year=args.diff_year), k)
    diff = diff_networks(net, later)
    rows = [[e.source, e.target, e.cls, e.weight_a, e.weight_b] for e in diff.edges]
    return [Table(f"network_{args.year}_{args.diff_year}_p{product}_k{k}",
                  ["source", "target", "class", "weight_y1", "weight_y2"], rows)]


def cmd_kendall(s: Session, args) -> list[Table]:
    years = [int(y) for y in args.years.split(",") if y.strip()]
    if len(set(years)) != len(years) or len(years) < 2:
        raise ConfigError("--years needs at least two distinct years")
    positions = {y: sort_index(s.analysis(y).rank(args.metric), args.level).positions
                 for y in years}
    rows = [[a, b, kendall_distance(positions[a], positions[b])]
            for i, a in enumerate(years) for b in years[i + 1:]]
    return [Table(f"kendall_{args.metric}_{args.level}_{'_'.join(map(str, years))}",
                  ["year_a", "year_b", "distance"], rows)]


def cmd_stats(s: Session, args) -> list[Table]:
    years = [args.year] + ([args.diff_year] if args.diff_year is not None else [])
    stats = {y: summarize_network_stats(s.tensor(y)) for y in years}
    rows = [[y, links, volume] for y, (links, volume) in stats.items()]
    name = f"stats_{'_'.join(map(str, years))}"
    if args.diff_year is not None:
        (l1, v1), (l2, v2) = stats[args.year], stats[args.diff_year]
        rows.append(["relative_change", (l2 - l1) / l1, (v2 - v1) / v1])
    return [Table(name, ["year", "link_count", "total_volume"], rows)]


def _read_table(path: Path) -> tuple[list[str], dict[str, list[str]]]:
    if not path.exists():
        raise MissingFileError(f"artifact not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, {row[0]: row for row in reader}


def cmd_compare(s: Session | None, args) -> list[Table]:
    """Numeric difference (b - a) of two CSV artifacts produced by prior runs."""
    ha, ta = _read_table(Path(args.a))
    hb, tb = _read_table(Path(args.b))
    if ha != hb:
        raise ValueError("artifacts have different columns")
    rows = []
    for key, row_a in ta.items():
        row_b = tb.get(key)
        if row_b is None:
            continue
        for col, va, vb in zip(ha[1:], row_a[1:], row_b[1:]):
            try:
                fa, fb = float(va), float(vb)
            except ValueError:
                continue
            rows.append([key, col, fa, fb, fb - fa])
    name = f"compare_{Path(args.a).stem}_{Path(args.b).stem}"
    return [Table(name, [ha[0], "column", "a", "b", "diff"], rows)]


def cmd_synth(s: Session, args) -> list[Table]:
    from .synthetic import world_tensor, write_records
    m = world_tensor(args.seed, args.year, args.density, s.countries, s.products)
    path = Path(args.out_file or s.cfg.data_dir / f"{args.year}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    n = write_records(m, path, rng=np.random.default_rng(args.seed + 1))
    logger.info("wrote %d records to %s", n, path)
    return []


COMMANDS = {
    "rank": cmd_rank, "balance": cmd_balance, "balance-matrix": cmd_balance_matrix,
    "sensitivity": cmd_sensitivity, "regomax": cmd_regomax, "network": cmd_network,
    "kendall": cmd_kendall, "stats": cmd_stats, "compare": cmd_compare, "synth": cmd_synth,
}


# -- output ------------------------------------------------------------------------

def emit(tables: Sequence[Table], cfg: RunConfig, stdout=None) -> list[Path]:
    """Write tables to ``cfg.out`` (plus manifest) or to stdout."""
    stdout = stdout or sys.stdout
    if cfg.out is None:
        for t in tables:
            stdout.write(t.render(cfg.format))
        return []
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for t in tables:
        path = out / f"{t.name}.{cfg.format}"
        path.write_text(t.render(cfg.format), encoding="utf-8")
        written.append(path)
    manifest_path = out / "manifest.json"
    entries = {}
    if manifest_path.exists():
        entries = {e["file"]: e for e in json.loads(manifest_path.read_text())["artifacts"]}
    for path in written:
        entries[path.name] = {"file": path.name,
                              "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
                              "bytes": path.stat().st_size}
    manifest = {"artifacts": [entries[k] for k in sorted(entries)]}
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return written


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--data-dir", dest="data_dir", help="directory holding YEAR.csv record files")
    common.add_argument("--country-registry", dest="country_registry", help="iso2,name registry file")
    common.add_argument("--product-registry", dest="product_registry", help="sitc,label registry file")
    common.add_argument("--alpha", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wtn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", parents=[common], help="sorted rank probabilities")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--metric", choices=KINDS, default="pagerank")
    p.add_argument("--level", choices=LEVELS, default="country")

    p = sub.add_parser("balance", parents=[common], help="country trade balances")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--diff-year", type=int)

    p = sub.add_parser("balance-matrix", parents=[common], help="(product, country) balances")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--volume", action="store_true", help="ImportRank-ExportRank balance")

    p = sub.add_parser("sensitivity", parents=[common], help="dB_c/d(delta) for one product")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--product", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--diff-year", type=int)

    for name, helptext in (("regomax", "reduced Google matrix"),
                           ("network", "top-k reduced network")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--year", type=int, required=True)
        p.add_argument("--product", type=int, required=True)
        p.add_argument("--countries",
                       help="comma-separated iso2 codes or a file of them "
                            "(default: top 20 countries by 2DRank)")
        p.add_argument("--diff-year", type=int)
        if name == "network":
            p.add_argument("--k", type=int)

    p = sub.add_parser("kendall", parents=[common], help="Kendall tau distances between years")
    p.add_argument("--metric", choices=KINDS, default="pagerank")
    p.add_argument("--years", required=True)
    p.add_argument("--level", choices=LEVELS, default="country")

    p = sub.add_parser("stats", parents=[common], help="link count and total volume")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--diff-year", type=int)

    p = sub.add_parser("compare", parents=[common], help="difference of two prior CSV artifacts")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic record file")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--out-file")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        session = None if args.command == "compare" else Session(cfg)
        tables = COMMANDS[args.command](session, args)
        emit(tables, cfg)
    except MissingFileError as exc:
        print(f"wtn: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (IngestError, ConfigError, ConvergenceError, ValueError, KeyError,
            np.linalg.LinAlgError) as exc:
        print(f"wtn: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
