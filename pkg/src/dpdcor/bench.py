"""Epsilon sweeps: privacy-utility curves over repeated protocol trials.

A sweep fixes a dataset split and runs the full protocol `trials` times
per grid epsilon, recording each private estimate against the
non-private distance correlation (computed exactly once per sweep). Grid
values are TOTAL session budgets by default; 10% goes to the variance
release and the rest to projections (divided by K for the repeated
variant). The alternative "per-projection" semantics feeds the grid
value straight to each projection's budget, which is the right knob for
comparing variants at matched noise levels; it requires an explicit
eps_variance.
"""

from __future__ import annotations

import numbers
import os
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, minmax_columns
from .errors import ConfigError, DpdcorError, exit_code_for
from .estimators import unbiased_dcorr
from .privacy import PROTOCOL_VARIANTS
from .protocol import NORMALIZATIONS, ProtocolConfig, partition_rows, run_session
from . import serial

GRID_SEMANTICS = ("total", "per-projection")

CSV_COLUMNS = (
    "epsilon",
    "trial",
    "dcorr_private_raw",
    "dcorr_private_clamped",
    "dcorr_nonprivate",
    "l1_error",
    "total_epsilon",
    "total_delta",
)


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs besides the dataset itself.

    split_index j sends columns 1..j to Alice and the rest to Bob.
    eps_variance overrides the 10% variance allocation (required with
    grid_semantics="per-projection", where there is no total to split).
    zero_noise passes the protocol's noise-free testing hook through.
    """

    eps_grid: tuple[float, ...]
    trials: int
    k: int
    variant: str
    delta: float
    split_index: int
    seed: int | None = None
    normalization: str = "none"
    grid_semantics: str = "total"
    eps_variance: float | None = None
    zero_noise: bool = False

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        if len(grid) == 0:
            raise ConfigError("eps_grid must not be empty")
        if any(not (np.isfinite(e) and e > 0) for e in grid):
            raise ConfigError("eps_grid values must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("eps_grid must be strictly ascending")
        object.__setattr__(self, "eps_grid", grid)
        if not (isinstance(self.trials, numbers.Integral) and self.trials >= 1):
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.k, numbers.Integral) and self.k >= 1):
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if self.variant not in PROTOCOL_VARIANTS:
            raise ConfigError(f"variant must be one of {PROTOCOL_VARIANTS}, got {self.variant!r}")
        if not (isinstance(self.delta, numbers.Real) and 0.0 <= self.delta < 0.5):
            raise ConfigError(f"delta must lie in [0, 1/2), got {self.delta!r}")
        if not (isinstance(self.split_index, numbers.Integral) and self.split_index >= 1):
            raise ConfigError(f"split_index must be a positive integer, got {self.split_index!r}")
        if self.seed is not None and not isinstance(self.seed, numbers.Integral):
            raise ConfigError(f"seed must be an integer or None, got {self.seed!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.grid_semantics not in GRID_SEMANTICS:
            raise ConfigError(f"grid_semantics must be one of {GRID_SEMANTICS}, got {self.grid_semantics!r}")
        if self.eps_variance is not None and not (
            isinstance(self.eps_variance, numbers.Real) and self.eps_variance > 0
        ):
            raise ConfigError(f"eps_variance must be positive, got {self.eps_variance!r}")
        if self.grid_semantics == "per-projection" and self.eps_variance is None:
            raise ConfigError("per-projection grid semantics requires an explicit eps_variance")


@dataclass(frozen=True)
class SweepResult:
    """Per-trial records, per-epsilon aggregates, and the full run config.

    aborted carries the error text when a mid-sweep session failure cut
    the run short (records then hold the completed trials only and
    aborted_code the CLI exit code the failure maps to).
    """

    records: tuple[dict, ...]
    aggregates: tuple[dict, ...]
    nonprivate: float
    config: dict
    aborted: str | None = None
    aborted_code: int = 0


def allocate_budget(
    eps: float,
    k: int,
    variant: str,
    semantics: str = "total",
    eps_variance: float | None = None,
) -> tuple[float, float]:
    """Resolve one grid value into (eps_per_projection, eps_variance).

    Under "total" semantics eps is the whole session budget: 10% (or the
    explicit eps_variance) goes to the variance release and the
    remainder to projections, divided by k for the repeated variant.
    Under "per-projection" semantics eps feeds each projection directly
    and eps_variance must be given.
    """
    if semantics not in GRID_SEMANTICS:
        raise ConfigError(f"semantics must be one of {GRID_SEMANTICS}, got {semantics!r}")
    if not (eps > 0 and np.isfinite(eps)):
        raise ConfigError(f"epsilon must be positive, got {eps!r}")
    if semantics == "per-projection":
        if eps_variance is None:
            raise ConfigError("per-projection semantics requires an explicit eps_variance")
        return float(eps), float(eps_variance)
    eps_var = float(eps_variance) if eps_variance is not None else 0.1 * float(eps)
    remainder = float(eps) - eps_var
    if remainder <= 0:
        raise ConfigError(f"total epsilon {eps} leaves no projection budget after eps_variance {eps_var}")
    eps_per = remainder / int(k) if variant == "repeated" else remainder
    return eps_per, eps_var


def _trial_seed(seed: int | None, grid_index: int, trial: int) -> int | None:
    if seed is None:
        return None
    words = np.random.SeedSequence([int(seed), grid_index, trial]).generate_state(2)
    return int(words[0]) | (int(words[1]) << 32)


def run_sweep(ds: Dataset, cfg: SweepConfig) -> SweepResult:
    """Run the full epsilon sweep and collect records plus aggregates.

    The non-private reference is computed once on the (optionally
    min-max normalized) split and reused for every l1 error. Sessions run
    in-process with per-trial derived seeds. A session failure stops the
    sweep and flags the partial result instead of discarding it.
    """
    if ds.dim < 2:
        raise ConfigError("dataset must have at least 2 columns to split")
    if not (1 <= cfg.split_index < ds.dim):
        raise ConfigError(f"split_index must lie in [1, {ds.dim - 1}], got {cfg.split_index}")
    table = minmax_columns(ds.values) if cfg.normalization == "min-max" else ds.values
    j = int(cfg.split_index)
    X = table[:, :j]
    Y = table[:, j:]
    if cfg.variant == "disjoint":
        partition_rows(ds.n, cfg.k)  # fail fast: every block must keep >= 4 rows
    for eps in cfg.eps_grid:  # fail fast on infeasible allocations
        allocate_budget(eps, cfg.k, cfg.variant, cfg.grid_semantics, cfg.eps_variance)

    reference = unbiased_dcorr(X, Y)
    records: list[dict] = []
    aggregates: list[dict] = []
    aborted: str | None = None
    aborted_code = 0
    for gi, eps in enumerate(cfg.eps_grid):
        eps_per, eps_var = allocate_budget(eps, cfg.k, cfg.variant, cfg.grid_semantics, cfg.eps_variance)
        group: list[dict] = []
        for trial in range(cfg.trials):
            pcfg = ProtocolConfig(
                k=int(cfg.k),
                variant=cfg.variant,
                eps_per_projection=eps_per,
                delta=float(cfg.delta),
                eps_variance=eps_var,
                seed=_trial_seed(cfg.seed, gi, trial),
                normalization="none",
                zero_noise=cfg.zero_noise,
            )
            try:
                res = run_session(X, Y, pcfg, "in-process")
            except DpdcorError as e:
                aborted = f"{type(e).__name__} at epsilon={eps} trial={trial}: {e}"
                aborted_code = exit_code_for(e)
                break
            group.append(
                {
                    "epsilon": float(eps),
                    "trial": int(trial),
                    "dcorr_private_raw": float(res.dcorr_raw),
                    "dcorr_private_clamped": float(res.dcorr_clamped),
                    "dcorr_nonprivate": float(reference),
                    "l1_error": abs(float(res.dcorr_clamped) - float(reference)),
                    "total_epsilon": float(res.total_budget[0]),
                    "total_delta": float(res.total_budget[1]),
                }
            )
        records.extend(group)
        if aborted is not None:
            break
        l1 = np.array([r["l1_error"] for r in group], dtype=np.float64)
        aggregates.append(
            {
                "epsilon": float(eps),
                "count": int(l1.size),
                "mean_l1": float(l1.mean()),
                "var_l1": float(l1.var()),
                "min_l1": float(l1.min()),
                "max_l1": float(l1.max()),
            }
        )
    config_echo = {
        "dataset_source": ds.source,
        "n": ds.n,
        "dim": ds.dim,
        "dropped_rows": ds.dropped_rows,
        "eps_grid": list(cfg.eps_grid),
        "trials": int(cfg.trials),
        "k": int(cfg.k),
        "variant": cfg.variant,
        "delta": float(cfg.delta),
        "split_index": int(cfg.split_index),
        "seed": None if cfg.seed is None else int(cfg.seed),
        "normalization": cfg.normalization,
        "grid_semantics": cfg.grid_semantics,
        "eps_variance": None if cfg.eps_variance is None else float(cfg.eps_variance),
        "zero_noise": bool(cfg.zero_noise),
    }
    return SweepResult(
        records=tuple(records),
        aggregates=tuple(aggregates),
        nonprivate=float(reference),
        config=config_echo,
        aborted=aborted,
        aborted_code=aborted_code,
    )


def emit_report(result: SweepResult, path) -> tuple[str, str]:
    """Write records.csv and summary.json under `path` (created if needed).

    Output is byte-deterministic for identical results: floats at full
    precision, fixed column and key order, no timestamps. Returns the two
    file paths.
    """
    os.makedirs(path, exist_ok=True)
    csv_path = os.path.join(path, "records.csv")
    json_path = os.path.join(path, "summary.json")
    lines = [",".join(CSV_COLUMNS)]
    for r in result.records:
        lines.append(
            ",".join(
                [
                    serial.format_float(r["epsilon"]),
                    str(int(r["trial"])),
                    serial.format_float(r["dcorr_private_raw"]),
                    serial.format_float(r["dcorr_private_clamped"]),
                    serial.format_float(r["dcorr_nonprivate"]),
                    serial.format_float(r["l1_error"]),
                    serial.format_float(r["total_epsilon"]),
                    serial.format_float(r["total_delta"]),
                ]
            )
        )
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write("\n".join(lines) + "\n")
    summary = {
        "config": result.config,
        "nonprivate_dcorr": result.nonprivate,
        "aggregates": list(result.aggregates),
        "aborted": result.aborted,
        "records_csv": "records.csv",
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(serial.dumps(summary) + "\n")
    return csv_path, json_path
