"""Command-line front end: table and figure data as CSV or JSON.

AWGN commands take linear per-symbol SNR; fading commands take the mean SNR
in dB unless ``--linear`` is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import aep, awgn, fading
from .aep import SeriesControl, Which
from .awgn import ModulationSpec, Scheme
from .errors import ConvergenceError, DomainError, KappaMuError
from .fading import KappaMuShadowedParams, McControl
from .specfun import Tolerance

TABLE2_POINTS = {
    4: (1, 2, 3, 4, 5, 6, 7),
    8: (2, 4, 6, 8, 10, 14, 16),
    16: (5, 10, 20, 30, 35, 40, 45),
}
TABLE4_POINTS = (0.5, 1, 1.5, 2, 2.5, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12)

COMMANDS = ("table2", "table4", "aep-sweep", "truncation", "diversity", "chi", "relerr", "sample")


@dataclass
class RunConfig:
    """Everything a command needs; JSON config files use these field names."""

    command: str = "table2"
    scheme: str = "mpsk:4"
    kappa: list[float] = field(default_factory=lambda: [1.0])
    mu: list[float] = field(default_factory=lambda: [2.0])
    m: list[float] = field(default_factory=lambda: [1.3])
    gamma_bar_db: list[float] = field(default_factory=lambda: [10.0])
    linear: bool = False
    grid: str | None = None
    max_terms: int = 1000
    rel_tol: float = 1e-14
    quad_rel_tol: float = 1e-10
    seed: int = 0
    samples: int = 0
    streams: int = 1
    sampler: str = "inverse_cdf"
    chi_row: str = "auto"
    truncation_terms: list[int] = field(default_factory=lambda: list(range(1, 11)))
    format: str = "csv"
    out: str | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise DomainError("format must be csv or json")
        ModulationSpec.parse(self.scheme)

    @property
    def modulation(self) -> ModulationSpec:
        return ModulationSpec.parse(self.scheme)

    @property
    def series(self) -> SeriesControl:
        return SeriesControl(self.max_terms, self.rel_tol)

    @property
    def quad(self) -> Tolerance:
        return Tolerance(rel=self.quad_rel_tol, max_iter=20_000)

    @property
    def mc(self) -> McControl:
        return McControl(max(self.samples, 1), self.seed, self.streams)

    @property
    def row_rule(self) -> int | str:
        return int(self.chi_row) if self.chi_row.isdigit() else self.chi_row

    def snr_values(self, default: Sequence[float]) -> np.ndarray:
        """Grid of SNR values; dB unless ``linear``."""
        vals = parse_grid(self.grid) if self.grid else np.asarray(default, dtype=float)
        return vals

    def gamma_bars(self) -> np.ndarray:
        vals = self.snr_values(self.gamma_bar_db)
        return vals if self.linear else 10.0 ** (vals / 10.0)

    def param_sets(self) -> list[tuple[float, float, float]]:
        return list(itertools.product(self.kappa, self.mu, self.m))


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive of stop) or a comma list."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise DomainError(f"bad grid {text!r}; use start:stop:step with step > 0")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = start + step * np.arange(n)
    else:
        vals = np.asarray([float(x) for x in text.split(",") if x.strip()], dtype=float)
    if vals.size == 0 or np.any(np.diff(vals) <= 0):
        raise DomainError("grid must be non-empty and ascending")
    return vals


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------- output


class Table:
    def __init__(self, columns: Sequence[str]) -> None:
        self.columns = list(columns)
        self.rows: list[list] = []

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width mismatch")
        self.rows.append(list(values))

    @staticmethod
    def _cell(v) -> str:
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        return str(v)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            cols = {c: [_jsonable(r[i]) for r in self.rows] for i, c in enumerate(self.columns)}
            return json.dumps(cols) + "\n"
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(self._cell(v) for v in r) + "\n")
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


# ---------------------------------------------------------------- commands


def cmd_table2(cfg: RunConfig) -> Table:
    t = Table(["M", "gamma", "exact", "approx", "rel_err"])
    for M, pts in TABLE2_POINTS.items():
        for g in pts:
            ex = awgn.mpsk_sep_exact(M, g, cfg.quad)
            ap = awgn.mpsk_sep_approx(M, g)
            t.add(M, float(g), ex, ap, awgn.relative_error(ap, ex))
    return t


def cmd_table4(cfg: RunConfig) -> Table:
    t = Table(["gamma", "exact", "approx", "rel_err"])
    for g in TABLE4_POINTS:
        ex = awgn.dqpsk_bep_exact(g)
        ap = awgn.dqpsk_bep_approx(g)
        t.add(float(g), ex, ap, awgn.relative_error(ap, ex))
    return t


def cmd_aep_sweep(cfg: RunConfig) -> Table:
    scheme = cfg.modulation
    cols = ["kappa", "mu", "m", "gamma_bar_db", "closed", "asymptotic", "oracle_approx", "oracle_exact"]
    if cfg.samples > 0:
        cols += ["monte_carlo", "mc_std_error"]
    t = Table(cols)
    for k, mu, m in cfg.param_sets():
        for gb in cfg.gamma_bars():
            p = KappaMuShadowedParams(k, mu, m, gb)
            closed = aep.aep_closed(p, scheme, cfg.series, cfg.row_rule).value
            row = [k, mu, m, 10.0 * math.log10(gb), closed,
                   aep.aep_asymptotic(p, scheme, cfg.row_rule),
                   aep.aep_quadrature_oracle(p, scheme, Which.APPROX_EP, cfg.quad, cfg.row_rule),
                   aep.aep_quadrature_oracle(p, scheme, Which.EXACT_EP, cfg.quad, cfg.row_rule)]
            if cfg.samples > 0:
                row += list(aep.aep_monte_carlo(p, scheme, Which.EXACT_EP, cfg.mc, cfg.sampler))
            t.add(*row)
    return t


def cmd_truncation(cfg: RunConfig) -> Table:
    t = Table(["kappa", "mu", "m", "gamma_bar_db", "L", "bound"])
    for k, mu, m in cfg.param_sets():
        for gb in cfg.gamma_bars():
            p = KappaMuShadowedParams(k, mu, m, gb)
            for L in cfg.truncation_terms:
                t.add(k, mu, m, 10.0 * math.log10(gb), int(L),
                      aep.truncation_bound(p, int(L), cfg.row_rule))
    return t


def cmd_diversity(cfg: RunConfig) -> Table:
    scheme = cfg.modulation
    t = Table(["kappa", "mu", "m", "gamma_bar_db", "ratio", "local_slope"])
    grid = cfg.gamma_bars()
    for k, mu, m in cfg.param_sets():
        p = KappaMuShadowedParams(k, mu, m, grid[0])
        if grid.size < 2:
            raise DomainError("diversity needs at least two grid points")
        ratio = aep.diversity_order(p, scheme, grid, "ratio", cfg.series, cfg.row_rule)
        local = aep.diversity_order(p, scheme, grid, "local", cfg.series, cfg.row_rule)
        for (gb, r), (_, s) in zip(ratio, local):
            t.add(k, mu, m, 10.0 * math.log10(gb), r, s)
    return t


def cmd_chi(cfg: RunConfig) -> Table:
    g = cfg.snr_values(np.linspace(0.1, 15.0, 150))
    t = Table(["gamma", "chi_exact", "chi_fitted"])
    for x, a, b in zip(g, np.atleast_1d(awgn.chi_exact(g)), np.atleast_1d(awgn.chi_fitted(g))):
        t.add(float(x), float(a), float(b))
    return t


def cmd_relerr(cfg: RunConfig) -> Table:
    g = cfg.snr_values(np.linspace(0.1, 15.0, 150))
    ex = np.atleast_1d(awgn.dqpsk_bep_exact_vec(g))
    ap = np.atleast_1d(awgn.dqpsk_bep_approx(g))
    t = Table(["gamma", "exact", "approx", "rel_err"])
    for x, e, a in zip(g, ex, ap):
        t.add(float(x), float(e), float(a), float(abs(a - e) / e))
    return t


def cmd_sample(cfg: RunConfig) -> Table:
    if cfg.samples < 1:
        raise DomainError("sample needs --samples >= 1")
    k, mu, m = cfg.param_sets()[0]
    gb = float(cfg.gamma_bars()[0])
    p = KappaMuShadowedParams(k, mu, m, gb)
    x = fading.sample(p, cfg.mc, cfg.sampler)
    t = Table(["gamma"])
    if cfg.out and cfg.format == "csv" and cfg.out.endswith(".bin"):
        fading.dump_samples(cfg.out, x, p, cfg.mc, cfg.sampler)
        return t
    for v in x:
        t.add(float(v))
    return t


HANDLERS = {
    "table2": cmd_table2,
    "table4": cmd_table4,
    "aep-sweep": cmd_aep_sweep,
    "truncation": cmd_truncation,
    "diversity": cmd_diversity,
    "chi": cmd_chi,
    "relerr": cmd_relerr,
    "sample": cmd_sample,
}


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kappamu-aep",
        description="Error probabilities of M-PSK and DQPSK over kappa-mu shadowed fading.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    ap.add_argument("--scheme", help="mpsk:M or dqpsk")
    ap.add_argument("--kappa", type=_floats, help="comma list")
    ap.add_argument("--mu", type=_floats, help="comma list")
    ap.add_argument("--m", type=_floats, help="comma list")
    ap.add_argument("--gamma-bar-db", type=_floats, help="mean SNR values (dB unless --linear)")
    ap.add_argument("--grid", help="start:stop:step or comma list; overrides --gamma-bar-db")
    ap.add_argument("--linear", action="store_true", default=None, help="mean SNR in linear units")
    ap.add_argument("--max-terms", type=int)
    ap.add_argument("--rel-tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--samples", type=int, help="Monte Carlo / sample count")
    ap.add_argument("--streams", type=int)
    ap.add_argument("--sampler", choices=("inverse_cdf", "physical"))
    ap.add_argument("--chi-row", help="auto, gamma_bar, or a row index 0-2")
    ap.add_argument("--terms", type=lambda s: [int(x) for x in s.split(",")],
                    help="truncation lengths L for the truncation command")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--out", help="output path (default stdout); .bin for raw sample dumps")
    return ap


_FLAG_TO_FIELD = {
    "scheme": "scheme", "kappa": "kappa", "mu": "mu", "m": "m", "gamma_bar_db": "gamma_bar_db",
    "grid": "grid", "linear": "linear", "max_terms": "max_terms", "rel_tol": "rel_tol",
    "seed": "seed", "samples": "samples", "streams": "streams", "sampler": "sampler",
    "chi_row": "chi_row", "terms": "truncation_terms", "format": "format", "out": "out",
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(base) - known
        if unknown:
            raise DomainError(f"unknown config fields: {sorted(unknown)}")
    base["command"] = args.command
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag)
        if v is not None:
            base[name] = v
    return RunConfig(**base)


def _diagnose(kind: str, exc: BaseException) -> None:
    rec = {"level": "error", "kind": kind, "message": str(exc)}
    if isinstance(exc, ConvergenceError):
        rec["estimate"] = _jsonable(exc.estimate)
        rec["error_bound"] = _jsonable(exc.error)
    sys.stderr.write(json.dumps(rec) + "\n")


def run(cfg: RunConfig) -> str:
    return HANDLERS[cfg.command](cfg).render(cfg.format)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        text = run(cfg)
    except DomainError as exc:
        _diagnose("domain", exc)
        return 2
    except ConvergenceError as exc:
        _diagnose("convergence", exc)
        return 3
    except (KappaMuError, ValueError) as exc:
        _diagnose("domain", exc)
        return 2
    if cfg.out and not (cfg.command == "sample" and cfg.out.endswith(".bin")):
        Path(cfg.out).write_text(text)
    elif not cfg.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
