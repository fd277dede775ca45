"""Monte Carlo replication of the finite-sample tables.

For every sample size n and replication r the harness draws the sample
keyed by ``(seed, r, n)``, fits the Grenander estimator once and applies
each requested boundary estimator to it.  Errors are scaled by n^(1/3) or
n^(2/5) and summarised per (estimator, n) cell with population variance, so
``mse == var + mean**2`` holds exactly up to rounding.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import chunks, map_chunks
from .boundary import (
    CSTAR,
    METHODS,
    DegenerateEstimate,
    adaptive_zero,
    adaptive_zero_k2,
    endpoint_one,
    numerical_derivative_zero,
    order_stat_zero,
    simple_zero,
    simple_zero_k2,
)
from .core import grenander
from .limits import Moments
from .penalized import DEFAULT_Q, penalized_zero
from .sampling import ConditionWarning, DistributionSpec, analytic_boundary, by_name, draw

SCALINGS = {"n_one_third": 1 / 3, "n_two_fifths": 2 / 5}
K2_METHODS = frozenset({"simple_k2", "adaptive_k2"})
FALLBACK_LIMIT = 0.01


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: DistributionSpec
    sample_sizes: tuple
    reps: int
    estimators: tuple
    scaling: str = "n_one_third"
    seed: int = 0
    alpha0: Optional[dict] = None  # n -> pilot alpha for the penalized estimator
    q: float = DEFAULT_Q
    c_star: float = CSTAR
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if any(n < 2 for n in self.sample_sizes):
            raise ConfigError("sample sizes must be at least 2")
        unknown = [e for e in self.estimators if e not in METHODS]
        if unknown:
            raise ConfigError(f"unknown estimator(s) {unknown}; choose from {METHODS}")
        if self.scaling not in SCALINGS:
            raise ConfigError(f"scaling must be one of {tuple(SCALINGS)}")
        for e in self.estimators:
            wanted = "n_two_fifths" if e in K2_METHODS else "n_one_third"
            if wanted != self.scaling:
                raise ConfigError(f"estimator {e} needs scaling {wanted}, not {self.scaling}")
        if "endpoint_one" in self.estimators and self.distribution.support_upper is None:
            raise ConfigError("endpoint_one needs a distribution with a finite support end")

    def digest(self) -> str:
        d = self.distribution
        payload = {
            "family": d.family,
            "params": {k: v for k, v in d.params.items() if not callable(v)},
            "sample_sizes": self.sample_sizes,
            "reps": self.reps,
            "estimators": self.estimators,
            "scaling": self.scaling,
            "seed": self.seed,
            "alpha0": None if self.alpha0 is None else sorted(self.alpha0.items()),
            "q": self.q,
            "c_star": self.c_star,
        }
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class Cell:
    estimator: str
    n: int
    mean: float
    var: float
    mse: float
    se_mean: float
    se_var: float
    se_mse: float
    count: int
    flags: dict = field(default_factory=dict)

    def flag_text(self) -> str:
        return ";".join(f"{k}={v}" for k, v in sorted(self.flags.items()) if v)


@dataclass(frozen=True)
class ExperimentReport:
    cells: tuple
    config_hash: str
    seed: int
    reps: int
    errors: Optional[dict] = None  # (estimator, n) -> scaled errors, kept for diagnostics

    def cell(self, estimator: str, n: int) -> Cell:
        for c in self.cells:
            if c.estimator == estimator and c.n == n:
                return c
        raise KeyError((estimator, n))

    def fallback_rate(self) -> float:
        worst = 0.0
        for c in self.cells:
            worst = max(worst, c.flags.get("fallback", 0) / self.reps)
        return worst


def _target(spec: DistributionSpec, estimator: str) -> float:
    if estimator == "endpoint_one":
        if spec.family == "uniform01":
            return 1.0
        if "f_upper" not in spec.params:
            raise ConfigError("endpoint_one needs params['f_upper'] for a custom family")
        return float(spec.params["f_upper"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditionWarning)
        return analytic_boundary(spec).f0


def _estimate(method: str, s, density, cfg: ExperimentConfig):
    """Returns (value, fallback_flag)."""
    if method == "simple_k1":
        return simple_zero(s, density).value, False
    if method == "adaptive_k1":
        return adaptive_zero(s, cfg.c_star, density).value, False
    if method == "simple_k2":
        return simple_zero_k2(s, density).value, False
    if method == "adaptive_k2":
        return adaptive_zero_k2(s, cfg.c_star, density).value, False
    if method == "order_stat":
        return order_stat_zero(s, 1.0, density).value, False
    if method == "numerical_derivative":
        return numerical_derivative_zero(s).value, False
    if method == "endpoint_one":
        return endpoint_one(s, cfg.distribution.support_upper, density).value, False
    alpha0 = None if cfg.alpha0 is None else cfg.alpha0.get(s.n)
    est = penalized_zero(s, alpha0, cfg.q)
    return est.value, est.tuning.fallback


def _run_chunk(lo: int, hi: int, cfg: ExperimentConfig, n: int):
    m = len(cfg.estimators)
    values = np.full((m, hi - lo), np.nan)
    fallback = np.zeros(m, dtype=int)
    degenerate = np.zeros(m, dtype=int)
    for i, rep in enumerate(range(lo, hi)):
        s = draw(cfg.distribution, n, cfg.seed, rep)
        density = grenander(s)
        for j, method in enumerate(cfg.estimators):
            try:
                values[j, i], fb = _estimate(method, s, density, cfg)
            except DegenerateEstimate:
                degenerate[j] += 1
                continue
            fallback[j] += fb
    return values, fallback, degenerate


def run_experiment(cfg: ExperimentConfig, keep_errors: bool = False) -> ExperimentReport:
    beta = SCALINGS[cfg.scaling]
    targets = [_target(cfg.distribution, e) for e in cfg.estimators]
    cells = []
    errors = {} if keep_errors else None
    for n in cfg.sample_sizes:
        parts = map_chunks(_run_chunk, chunks(cfg.reps, 1000), cfg.workers, cfg, n)
        values = np.concatenate([p[0] for p in parts], axis=1)
        fallback = sum(p[1] for p in parts)
        degenerate = sum(p[2] for p in parts)
        for j, method in enumerate(cfg.estimators):
            v = values[j]
            err = n**beta * (v[~np.isnan(v)] - targets[j])
            mom = Moments.of(err)
            flags = {"fallback": int(fallback[j]), "degenerate": int(degenerate[j])}
            cells.append(
                Cell(method, n, mom.mean, mom.var, mom.mse, mom.se_mean, mom.se_var,
                     mom.se_mse, mom.count, flags)
            )
            if keep_errors:
                errors[(method, n)] = err
    return ExperimentReport(tuple(cells), cfg.digest(), cfg.seed, cfg.reps, errors)


# ----------------------------------------------------------------------------
# output


CSV_COLUMNS = ("estimator", "n", "mean", "var", "mse", "se_mean", "se_var", "flags")
VARIANCE_NOTE = "# variance uses divisor reps (population convention); mse = var + mean^2"


def emit_table(report: ExperimentReport, fmt: str = "csv") -> str:
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "markdown":
        return _emit_markdown(report)
    raise ValueError("format must be 'csv' or 'markdown'")


def _emit_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    buf.write(VARIANCE_NOTE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cells:
        w.writerow([c.estimator, c.n, repr(c.mean), repr(c.var), repr(c.mse),
                    repr(c.se_mean), repr(c.se_var), c.flag_text()])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Rows of an ``emit_table(..., "csv")`` output with numeric fields converted."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = []
    for row in csv.DictReader(lines):
        flags = {}
        for item in filter(None, row["flags"].split(";")):
            key, val = item.split("=")
            flags[key] = int(val)
        rows.append({
            "estimator": row["estimator"],
            "n": int(row["n"]),
            **{k: float(row[k]) for k in ("mean", "var", "mse", "se_mean", "se_var")},
            "flags": flags,
        })
    return rows


def _emit_markdown(report: ExperimentReport) -> str:
    sizes = sorted({c.n for c in report.cells})
    methods = list(dict.fromkeys(c.estimator for c in report.cells))
    lines = [
        "| estimator | | " + " | ".join(f"{n:,}" for n in sizes) + " |",
        "|---|---|" + "---:|" * len(sizes),
    ]
    for m in methods:
        for stat, label in (("mean", "Mean"), ("var", "Var"), ("mse", "MSE")):
            vals = []
            for n in sizes:
                try:
                    vals.append(f"{getattr(report.cell(m, n), stat):.3f}")
                except KeyError:
                    vals.append("")
            head = m if stat == "mean" else ""
            lines.append(f"| {head} | {label} | " + " | ".join(vals) + " |")
    lines.append("")
    lines.append(f"reps = {report.reps}, seed = {report.seed}, config {report.config_hash}; "
                 "population variance")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# flat key = value configuration files


def parse_config(text: str) -> ExperimentConfig:
    """Build a config from ``key = value`` lines.

    Keys: distribution, sample_sizes (comma list), reps, estimators (comma
    list), scaling, seed, alpha0 (comma list of n:value), q, c_star, workers.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        raw[key] = val
    allowed = {"distribution", "sample_sizes", "reps", "estimators", "scaling", "seed",
               "alpha0", "q", "c_star", "workers"}
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) {sorted(extra)}")
    missing = {"distribution", "sample_sizes", "reps", "estimators"} - set(raw)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)}")
    try:
        dist = by_name(raw["distribution"])
        kwargs = {
            "distribution": dist,
            "sample_sizes": tuple(int(x) for x in _split(raw["sample_sizes"])),
            "reps": int(raw["reps"]),
            "estimators": tuple(_split(raw["estimators"])),
        }
        if "scaling" in raw:
            kwargs["scaling"] = raw["scaling"]
        for key, conv in (("seed", int), ("q", float), ("c_star", float), ("workers", int)):
            if key in raw:
                kwargs[key] = conv(raw[key])
        if "alpha0" in raw:
            kwargs["alpha0"] = {
                int(a): float(b) for a, b in (item.split(":") for item in _split(raw["alpha0"]))
            }
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kwargs)


def _split(text: str) -> Sequence[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


__all__ = [
    "Cell",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "FALLBACK_LIMIT",
    "emit_table",
    "parse_config",
    "parse_csv",
    "run_experiment",
]
