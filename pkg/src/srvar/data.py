"""Datasets, CSV ingestion, simple transforms and the censored demo generator."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

DEMO_BOUND = 0.125
DEMO_VARIABLES = ("rate", "macro")

# Demo VAR(2) on (rate, macro). Rows: const, rate.L1, macro.L1, rate.L2, macro.L2.
_DEMO_COEFFICIENTS = np.array(
    [
        [0.01, 0.05],
        [1.30, 1.00],
        [0.00, 0.30],
        [-0.35, 0.00],
        [0.00, 0.00],
    ]
)
_DEMO_SHOCK_SD = np.array([0.25, 0.05])
_DEMO_LOGVOL_SD = 0.05
_DEMO_BURN = 100
_DEMO_MIN_CENSORED = 0.20
_DEMO_INTERCEPT_STEP = 0.02


@dataclass(frozen=True, eq=False)
class Dataset:
    """A T x N panel of observations.

    Construct through :meth:`from_arrays` or :func:`load_csv`; the value
    array is stored read-only.
    """

    values: np.ndarray
    variables: tuple[str, ...]
    time_index: tuple[dt.date, ...] | None = None

    @classmethod
    def from_arrays(
        cls,
        values,
        variables: Sequence[str],
        time_index: Sequence | None = None,
    ) -> "Dataset":
        arr = np.array(values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValidationError(f"values must be a 2-D matrix, got shape {arr.shape}")
        T, N = arr.shape
        if T < 1 or N < 1:
            raise ValidationError(f"empty dataset: shape {arr.shape}")
        variables = tuple(str(v) for v in variables)
        if len(variables) != N:
            raise ValidationError(f"{len(variables)} variable names for {N} columns")
        if len(set(variables)) != N:
            raise ValidationError(f"duplicate variable names in {list(variables)}")
        if not np.all(np.isfinite(arr)):
            t, j = np.argwhere(~np.isfinite(arr))[0]
            raise ValidationError(f"non-finite value at row {t}, variable {variables[j]!r}")
        index = None
        if time_index is not None:
            index = tuple(_as_date(x) for x in time_index)
            if len(index) != T:
                raise ValidationError(f"time index has {len(index)} entries for {T} rows")
            if any(b <= a for a, b in zip(index, index[1:])):
                raise ValidationError("time index must be strictly increasing")
        arr.flags.writeable = False
        return cls(arr, variables, index)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ValidationError(f"unknown variable {name!r}; have {list(self.variables)}") from None

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.time_index == other.time_index
            and self.values.shape == other.values.shape
            and bool(np.all(self.values == other.values))
        )

    __hash__ = None


def _as_date(x) -> dt.date:
    if isinstance(x, dt.datetime):
        return x.date()
    if isinstance(x, dt.date):
        return x
    if isinstance(x, np.datetime64):
        return dt.date.fromisoformat(str(x.astype("datetime64[D]")))
    return dt.date.fromisoformat(str(x))


def load_csv(path) -> Dataset:
    """Read a comma-separated file with a header row.

    A leading column named ``date`` holding ISO-8601 dates becomes the time
    index; every other column is a variable, in file order.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise ValidationError(f"{path}: missing header row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise ValidationError(f"{path}: no data rows")
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValidationError(f"{path}: line {i} has {len(r)} fields, header has {len(header)}")

    has_date = header[0].lower() == "date"
    index = None
    if has_date:
        try:
            index = [dt.date.fromisoformat(r[0].strip()) for r in body]
        except ValueError:
            # not ISO dates; keep the column as data and let parsing report it
            has_date = False
    names = header[1:] if has_date else header
    start = 1 if has_date else 0
    values = np.empty((len(body), len(names)))
    for i, r in enumerate(body):
        for j, cell in enumerate(r[start:]):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{path}: cannot parse {cell!r} at line {i + 2}, column {names[j]!r}"
                ) from None
    return Dataset.from_arrays(values, names, index)


def transform(ds: Dataset, op: str, variable: str) -> Dataset:
    """Apply ``level``, ``log`` or ``diff`` to one column.

    ``diff`` drops the first row of every column so the panel stays aligned.
    """
    j = ds.column(variable)
    if op == "level":
        return ds
    values = np.array(ds.values)
    if op == "log":
        if np.any(values[:, j] <= 0):
            raise ValidationError(f"log of non-positive value in {variable!r}")
        values[:, j] = np.log(values[:, j])
        return Dataset.from_arrays(values, ds.variables, ds.time_index)
    if op == "diff":
        if ds.T < 2:
            raise ValidationError("diff needs at least two rows")
        col = np.diff(values[:, j])
        values = values[1:]
        values[:, j] = col
        index = ds.time_index[1:] if ds.time_index is not None else None
        return Dataset.from_arrays(values, ds.variables, index)
    raise ValidationError(f"unknown transform {op!r}; expected level, log or diff")


@dataclass(frozen=True)
class DemoTruth:
    shadow_path: np.ndarray
    coefficients: np.ndarray
    volatility_path: np.ndarray
    latent: np.ndarray


def simulate_demo(T: int = 200, seed: int = 0) -> tuple[Dataset, DemoTruth]:
    """Simulate the two-variable censored demo system.

    The latent rate and a macro variable follow a VAR(2) with mildly
    time-varying shock volatility; the macro variable loads on lagged rates.
    The observed rate is ``max(shadow, 0.125)``. If the censored share falls
    below 20% the rate intercept is lowered and the draw is repeated from
    the same seed.

    Returns
    -------
    ds : Dataset
        Observed panel with variables ``("rate", "macro")``.
    truth : DemoTruth
        ``shadow_path`` (T,), ``coefficients`` (5, 2), ``volatility_path``
        (T, 2) of log-variances and ``latent`` (T, 2) uncensored panel.
    """
    if T < 50:
        raise ValidationError(f"simulate_demo needs T >= 50, got {T}")
    B = _DEMO_COEFFICIENTS.copy()
    while True:
        latent, h = _simulate_demo_once(T, seed, B)
        observed = latent.copy()
        observed[:, 0] = np.maximum(latent[:, 0], DEMO_BOUND)
        if np.mean(observed[:, 0] == DEMO_BOUND) >= _DEMO_MIN_CENSORED:
            break
        B[0, 0] -= _DEMO_INTERCEPT_STEP
    ds = Dataset.from_arrays(observed, DEMO_VARIABLES)
    truth = DemoTruth(latent[:, 0].copy(), B, h, latent)
    return ds, truth


def _simulate_demo_once(T: int, seed: int, B: np.ndarray):
    rng = np.random.default_rng(seed)
    total = T + _DEMO_BURN
    h = np.empty((total, 2))
    h[0] = 2 * np.log(_DEMO_SHOCK_SD)
    for t in range(1, total):
        h[t] = h[t - 1] + _DEMO_LOGVOL_SD * rng.standard_normal(2)
    y = np.zeros((total, 2))
    y[:2] = 0.5
    for t in range(2, total):
        x = np.concatenate([[1.0], y[t - 1], y[t - 2]])
        y[t] = x @ B + np.exp(h[t] / 2) * rng.standard_normal(2)
    return y[_DEMO_BURN:], h[_DEMO_BURN:]
