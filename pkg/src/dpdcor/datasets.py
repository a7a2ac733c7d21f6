"""Dataset loading, synthesis, and column scaling for the two-party pipeline.

CSV ingest is deliberately forgiving at the row level (rows with missing
or non-parseable cells are dropped and counted) but strict at the column
level: a column that is entirely non-numeric is a hard error, since it
means the file does not contain the data the caller thinks it does.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError
from .estimators import as_data_matrix

SYNTH_RECIPES = ("independent", "linear", "quadratic", "sine")


@dataclass(frozen=True)
class Dataset:
    """A loaded numeric matrix plus ingest bookkeeping.

    values is the (n, d) float matrix; columns the column names in file
    order; source where the data came from (file path or synthetic
    recipe); dropped_rows how many input rows were discarded for missing
    or non-numeric cells.
    """

    values: np.ndarray
    columns: tuple[str, ...]
    source: str = "memory"
    dropped_rows: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", as_data_matrix(self.values, "values"))
        if len(self.columns) != self.values.shape[1]:
            raise DataError("column names do not match the matrix width")

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])


def load_csv(path, header: bool = True) -> Dataset:
    """Load a numeric CSV into a Dataset.

    With header=False, columns are named c1..cd. Cells that fail numeric
    parsing make their whole row drop (counted in dropped_rows); a column
    with no parseable cells at all raises DataError naming the column, as
    does a file with no usable rows.
    """
    try:
        # round_trip: full-precision floats written by this package must reload bit-exact
        frame = pd.read_csv(path, header=0 if header else None, skipinitialspace=True, float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DataError(f"cannot parse {path}: {e}")
    if frame.shape[1] == 0:
        raise DataError(f"{path} has no columns")
    if header:
        names = tuple(str(c) for c in frame.columns)
    else:
        names = tuple(f"c{i + 1}" for i in range(frame.shape[1]))
    numeric = frame.apply(lambda col: pd.to_numeric(col, errors="coerce"))
    for i, name in enumerate(names):
        if numeric.iloc[:, i].isna().all() and len(frame) > 0:
            raise DataError(f"column {name!r} has no numeric values")
    mask = numeric.notna().all(axis=1)
    kept = numeric[mask]
    dropped = int(len(frame) - len(kept))
    if len(kept) == 0:
        raise DataError(f"{path} has no fully numeric rows")
    values = kept.to_numpy(dtype=np.float64)
    if not np.isfinite(values).all():
        bad = ~np.isfinite(values).all(axis=1)
        values = values[~bad]
        dropped += int(bad.sum())
        if values.shape[0] == 0:
            raise DataError(f"{path} has no finite rows")
    return Dataset(values=values, columns=names, source=str(path), dropped_rows=dropped)


def split_features(ds: Dataset, split: int) -> tuple[np.ndarray, np.ndarray]:
    """Split the columns into Alice's first `split` and Bob's remainder.

    Both sides must end up non-empty.
    """
    if not (isinstance(split, numbers.Integral) and 1 <= split < ds.dim):
        raise ConfigError(f"split must lie in [1, {ds.dim - 1}] for a {ds.dim}-column dataset, got {split!r}")
    return ds.values[:, : int(split)].copy(), ds.values[:, int(split):].copy()


def synth_dataset(recipe: str, n: int, noise_sd: float = 0.1, seed=None) -> Dataset:
    """Generate a two-column (x, y) dataset with a known dependence shape.

    x is standard normal; y is independent standard normal, x + noise,
    x^2 + noise, or sin(4 x) + noise according to the recipe. Same seed,
    same table. Split with split_features(ds, 1) for protocol use.
    """
    if recipe not in SYNTH_RECIPES:
        raise ConfigError(f"recipe must be one of {SYNTH_RECIPES}, got {recipe!r}")
    if not (isinstance(n, numbers.Integral) and n >= 4):
        raise ConfigError(f"n must be an integer >= 4, got {n!r}")
    if not (isinstance(noise_sd, numbers.Real) and noise_sd >= 0):
        raise ConfigError(f"noise_sd must be non-negative, got {noise_sd!r}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(int(n))
    noise = float(noise_sd) * rng.standard_normal(int(n))
    if recipe == "independent":
        y = rng.standard_normal(int(n))
    elif recipe == "linear":
        y = x + noise
    elif recipe == "quadratic":
        y = x**2 + noise
    else:
        y = np.sin(4.0 * x) + noise
    return Dataset(
        values=np.column_stack([x, y]),
        columns=("x", "y"),
        source=f"synth:{recipe}",
    )


def minmax_columns(x) -> np.ndarray:
    """Rescale each column to [0, 1] by its own min and max.

    Constant columns map to all zeros. Applied per party to its own data
    only, so it leaks nothing across the protocol.
    """
    X = as_data_matrix(x, "x")
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    out = np.zeros_like(X)
    nz = span > 0
    out[:, nz] = (X[:, nz] - lo[nz]) / span[nz]
    return out
