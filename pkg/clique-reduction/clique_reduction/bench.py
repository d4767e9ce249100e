"""
Seeded experiment sweeps: generate, reduce, aggregate, fit and plot.

Each (size, trial) pair draws its filtration from a seed derived from the root seed,
so the table is the same whichever worker ran which trial.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from matplotlib import rc_context
from matplotlib.figure import Figure
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .adversarial import WorstCaseParams, worst_case_filtration
from .config import get_setting
from .errors import DegenerateFit, ValidationError
from .flagfilt import Filtration, boundary_matrix
from .homology import fillup_lower_bound, model_tag
from .parallel import TrialFailure, map_trials
from .randmodels import Seed, er_order, vr_order
from .z2core import check_cost_bound, reduce

logger = logging.getLogger("clique-reduction.bench")

CSV_HEADER = ["model", "n", "trials", "mean_fillup", "sd_fillup", "mean_cost", "sd_cost", "mean_wallclock_ms"]

METRIC_COLUMNS = {"fill_up": "mean_fillup", "cost": "mean_cost"}


class ExperimentConfig(BaseModel):
    """One sweep: a model, the sizes to run (n, or p for ``worst``) and the trials per size."""

    model_config = ConfigDict(frozen=True)

    model: Literal["er", "vr", "worst"]
    sizes: tuple[int, ...]
    trials: int = Field(default_factory=lambda: get_setting("default_trials", 20), ge=1)
    seed: int = Field(ge=0, lt=2 ** 64)
    dim: Optional[int] = None
    record_wallclock: bool = Field(default_factory=lambda: get_setting("record_wallclock", False))
    workers: Optional[int] = None

    @field_validator("sizes")
    @classmethod
    def _increasing(cls, sizes):
        if not sizes:
            raise ValueError("at least one size is required")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        return sizes

    @model_validator(mode="after")
    def _model_parameters(self):
        if self.model == "vr":
            if self.dim is None or self.dim < 1:
                raise ValueError("the vr model needs dim >= 1")
        elif self.model == "worst":
            if any(p < 3 or p % 2 == 0 for p in self.sizes):
                raise ValueError("worst-case sizes are values of p: odd and >= 3")
        elif self.sizes[0] < 2:
            raise ValueError("the er model needs n >= 2")
        return self

    @property
    def tag(self) -> str:
        return model_tag(self.model, self.dim)

    def vertex_count(self, size: int) -> int:
        return WorstCaseParams(size).n if self.model == "worst" else size


class ExperimentRow(BaseModel):
    model: str
    n: int
    trials: int
    mean_fillup: float
    sd_fillup: float
    mean_cost: float
    sd_cost: float
    mean_wallclock_ms: float
    cost_bound_violations: int = 0
    lower_bound_violations: int = 0

    def csv_fields(self) -> list[str]:
        return [self.model, str(self.n), str(self.trials)] + [
            f"{value:.3f}" for value in (self.mean_fillup, self.sd_fillup, self.mean_cost,
                                         self.sd_cost, self.mean_wallclock_ms)
        ]


class RowFailure(BaseModel):
    size: int
    message: str


class ExperimentResult(BaseModel):
    config: ExperimentConfig
    rows: list[ExperimentRow]
    failures: list[RowFailure] = []

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class TrialOutcome:
    fill_up: int
    cost: int
    wallclock_ms: float
    cost_bound_ok: bool
    lower_bound_ok: bool


def run_trial(model: str, size: int, dim: Optional[int], seed: Seed, record_wallclock: bool) -> TrialOutcome:
    """Generate one filtration, reduce it once and check the per-trial bounds."""
    if model == "er":
        f = Filtration.from_edge_order(er_order(size, seed))
    elif model == "vr":
        f = Filtration.from_edge_order(vr_order(size, dim, seed).edge_order)
    else:
        f = worst_case_filtration(WorstCaseParams(size), seed).filtration
    matrix = boundary_matrix(f)
    # only the reduction is timed
    started = time.perf_counter() if record_wallclock else 0.0
    _, stats = reduce(matrix)
    elapsed = (time.perf_counter() - started) * 1000.0 if record_wallclock else 0.0
    return TrialOutcome(
        fill_up=stats.fill_up,
        cost=stats.cost,
        wallclock_ms=elapsed,
        cost_bound_ok=check_cost_bound(stats, matrix.c),
        lower_bound_ok=stats.fill_up >= fillup_lower_bound(f.n),
    )


def _aggregate(cfg: ExperimentConfig, size: int, outcomes: Sequence[TrialOutcome]) -> ExperimentRow:
    fills = np.array([o.fill_up for o in outcomes], dtype=np.float64)
    costs = np.array([o.cost for o in outcomes], dtype=np.float64)
    clocks = np.array([o.wallclock_ms for o in outcomes], dtype=np.float64)
    ddof = 1 if len(outcomes) > 1 else 0  # one trial reports sd 0
    return ExperimentRow(
        model=cfg.tag,
        n=cfg.vertex_count(size),
        trials=len(outcomes),
        mean_fillup=float(fills.mean()),
        sd_fillup=float(fills.std(ddof=ddof)),
        mean_cost=float(costs.mean()),
        sd_cost=float(costs.std(ddof=ddof)),
        mean_wallclock_ms=float(clocks.mean()),
        cost_bound_violations=sum(not o.cost_bound_ok for o in outcomes),
        lower_bound_violations=sum(not o.lower_bound_ok for o in outcomes),
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Run every trial of the sweep and fold them into one row per size.

    A size whose trials raise is reported as a RowFailure; the other rows are still produced.
    """
    purpose = f"experiment-{cfg.tag}"
    jobs = [
        (cfg.model, size, cfg.dim, Seed(cfg.seed).derive(f"{purpose}-{size}", trial), cfg.record_wallclock)
        for size in cfg.sizes for trial in range(cfg.trials)
    ]
    logger.info(f"Experiment {cfg.tag}: sizes {list(cfg.sizes)}, {cfg.trials} trials each, {len(jobs)} jobs")
    outcomes = map_trials(run_trial, jobs, cfg.workers, return_exceptions=True)

    rows, failures = [], []
    # outcomes come back in job order: size-major, trials contiguous
    for k, size in enumerate(cfg.sizes):
        chunk = outcomes[k * cfg.trials:(k + 1) * cfg.trials]
        errors = [o for o in chunk if isinstance(o, TrialFailure)]
        if errors:
            logger.error(f"Row {cfg.tag} size={size} aborted: {errors[0]}")
            failures.append(RowFailure(size=size, message=str(errors[0])))
            continue
        row = _aggregate(cfg, size, chunk)
        if row.cost_bound_violations or row.lower_bound_violations:
            logger.warning(f"Row {cfg.tag} n={row.n}: {row.cost_bound_violations} cost-bound and "
                           f"{row.lower_bound_violations} lower-bound violations")
        logger.info(f"Row {cfg.tag} n={row.n}: fill-up {row.mean_fillup:.1f}, cost {row.mean_cost:.1f}")
        rows.append(row)
    return ExperimentResult(config=cfg, rows=rows, failures=failures)


class FitResult(BaseModel):
    """y ~ lam * x^exponent, fitted by least squares on (ln x, ln y)."""

    model_config = ConfigDict(frozen=True)

    lam: float = Field(gt=0)
    exponent: float
    residual: float

    @property
    def annotation(self) -> str:
        return f"{self.lam:.4g}·n^{self.exponent:.3f}"

    def predict(self, x):
        return self.lam * np.power(x, self.exponent)


def loglog_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """
    Ordinary least squares on (ln x, ln y).

    Raises:
        DegenerateFit: With fewer than two distinct x values or any non-positive coordinate
    """
    data = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = data[:, 0], data[:, 1]
    if len(np.unique(x)) < 2:
        raise DegenerateFit("a log-log fit needs at least two distinct x values")
    if (x <= 0).any() or (y <= 0).any():
        raise DegenerateFit("a log-log fit needs strictly positive x and y")
    log_x, log_y = np.log(x), np.log(y)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = float(np.sum((log_y - (slope * log_x + intercept)) ** 2))
    return FitResult(lam=float(np.exp(intercept)), exponent=float(slope), residual=residual)


def fit_rows(rows: Sequence[ExperimentRow], metric: str) -> FitResult:
    column = METRIC_COLUMNS[metric]
    return loglog_fit([(row.n, getattr(row, column)) for row in rows])


def emit_csv(rows: Sequence[ExperimentRow], path: str) -> None:
    """Write the experiment table; numbers carry three decimals."""
    if not rows:
        raise ValidationError(f"refusing to write an empty table to {path}")
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_fields())


def read_table(path: str) -> list[dict[str, str]]:
    """Rows of a CSV file as dictionaries keyed by the header."""
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def emit_svg(rows: Sequence[ExperimentRow], fit: FitResult, path: str, metric: str = "fill_up") -> None:
    """
    Log-log scatter of one metric against n with the fitted power law.

    The output is reproducible: text stays as SVG text, ids are salted with a fixed
    string and no date is embedded. The fit annotation is the only text the figure adds.
    """
    if not rows:
        raise ValidationError(f"refusing to plot an empty table to {path}")
    column = METRIC_COLUMNS[metric]
    x = np.array([row.n for row in rows], dtype=np.float64)
    y = np.array([getattr(row, column) for row in rows], dtype=np.float64)
    # dense x grid for the fitted curve
    line_x = np.geomspace(x.min(), x.max(), 64) if x.min() > 0 else x

    with rc_context({"svg.fonttype": "none", "svg.hashsalt": "clique-reduction"}):
        fig = Figure(figsize=(6, 4.5))
        ax = fig.add_subplot()
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel(column)
        ax.scatter(x, y, color="tab:blue", zorder=3)
        ax.plot(line_x, fit.predict(line_x), color="tab:red", linewidth=1.2)
        ax.text(0.05, 0.92, fit.annotation, transform=ax.transAxes, gid="fit-annotation")
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug(f"Wrote {metric} plot of {len(rows)} rows to {path}")
