"""Delimited-text ingestion and standard preprocessing for raw series.

Tables are one row per time point, one column per channel, with a single
header row of channel labels.  Channels are node-major (all attributes of
node 0, then node 1, ...) unless told otherwise.  Preprocessing follows the
usual recipe for positive-valued records: log-ratio, linear detrend, scale
to unit mean square.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError, MissingValueError
from .spectral import MultiAttributeSeries

__all__ = ["RawTable", "read_table", "load_series", "preprocess", "write_series"]

MISSING_TOKENS = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class RawTable:
    """A parsed delimited table: header labels plus a float matrix.

    Missing cells are NaN in ``values``; downstream policies decide what to
    do with them.
    """

    labels: tuple
    values: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]


def read_table(path, delimiter: str = ",") -> RawTable:
    """Parse a delimited file with one header row into labels and floats."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need a header row and at least one data row")
    labels = tuple(cell.strip() for cell in rows[0])
    width = len(labels)
    values = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise InvalidInputError(
                f"{path}: row {i} has {len(row)} cells, header has {width}"
            )
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell.lower() in MISSING_TOKENS:
                values[i - 2, j] = np.nan
                continue
            try:
                values[i - 2, j] = float(cell)
            except ValueError as exc:
                raise InvalidInputError(
                    f"{path}: row {i}, column {labels[j]!r}: cannot parse {cell!r}"
                ) from exc
    return RawTable(labels=labels, values=values)


def load_series(
    path,
    p: int,
    m: int,
    delimiter: str = ",",
    layout: str = "node-major",
    forward_fill: bool = False,
) -> MultiAttributeSeries:
    """Load a delimited table as a multi-attribute series.

    The header must have exactly ``m * p`` columns.  ``layout='node-major'``
    expects column ``q*m + u`` to be attribute ``u`` of node ``q``;
    ``'attribute-major'`` expects column ``u*p + q`` and is reordered on
    load.  Missing cells raise unless ``forward_fill`` is set, which
    propagates the last seen value (the first row must be complete).
    """
    if layout not in ("node-major", "attribute-major"):
        raise InvalidInputError(f"unknown layout {layout!r}")
    table = read_table(path, delimiter=delimiter)
    if table.n_columns != m * p:
        raise InvalidInputError(
            f"{path}: expected {m * p} channels (p={p}, m={m}), found {table.n_columns}"
        )
    values = table.values
    missing = np.isnan(values)
    if missing.any():
        if not forward_fill:
            i, j = np.argwhere(missing)[0]
            raise MissingValueError(
                f"{path}: missing value at row {i + 2}, column {table.labels[j]!r} "
                "(enable forward fill to impute)"
            )
        if missing[0].any():
            raise MissingValueError(f"{path}: first data row is incomplete; cannot forward fill")
        values = values.copy()
        for j in range(values.shape[1]):
            col = values[:, j]
            gaps = np.isnan(col)
            if gaps.any():
                idx = np.where(gaps, 0, np.arange(len(col)))
                np.maximum.accumulate(idx, out=idx)
                values[:, j] = col[idx]
    if layout == "attribute-major":
        order = [u * p + q for q in range(p) for u in range(m)]
        values = values[:, order]
    return MultiAttributeSeries(data=values, p=p, m=m)


def preprocess(
    series: MultiAttributeSeries,
    detrend: bool = True,
    scale: bool = True,
    shift_scale: float = 1e-6,
) -> MultiAttributeSeries:
    """Log-ratio each channel, then optionally detrend and scale it.

    Channels containing non-positive values are first shifted up by
    ``shift_scale`` times their maximum; values still non-positive after the
    shift are an error.  Each channel becomes ``ln(x(t)/x(t-1))`` (one sample
    shorter), has its least-squares line removed, and is scaled to unit mean
    square.  All-zero channels skip the scaling with a warning.
    """
    x = series.data
    n = series.n
    if n < 3:
        raise InvalidInputError(f"need at least 3 samples to take log ratios, got n={n}")
    out = np.empty((n - 1, x.shape[1]))
    t = np.arange(n - 1, dtype=float)
    for j in range(x.shape[1]):
        col = x[:, j]
        if col.min() <= 0.0:
            col = col + shift_scale * col.max()
            if col.min() <= 0.0:
                raise InvalidInputError(
                    f"channel {j}: non-positive values persist after shift; cannot take logs"
                )
        ratio = np.log(col[1:] / col[:-1])
        if detrend:
            slope, intercept = np.polyfit(t, ratio, 1)
            ratio = ratio - (slope * t + intercept)
        if scale:
            rms = np.sqrt(np.mean(ratio**2))
            if rms > 0.0:
                ratio = ratio / rms
            else:
                warnings.warn(
                    f"channel {j} is constant after detrending; scaling skipped",
                    RuntimeWarning,
                    stacklevel=2,
                )
        out[:, j] = ratio
    return MultiAttributeSeries(data=out, p=series.p, m=series.m)


def write_series(series: MultiAttributeSeries, path, delimiter: str = ",") -> None:
    """Write a series as a delimited table with node-major channel labels."""
    labels = [f"node{q}_attr{u}" for q in range(series.p) for u in range(series.m)]
    header = delimiter.join(labels)
    np.savetxt(
        path,
        series.data,
        delimiter=delimiter,
        header=header,
        comments="",
        fmt="%.17g",
    )
