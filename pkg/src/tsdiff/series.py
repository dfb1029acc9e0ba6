"""Fixed-length univariate series: representation, resampling, scaling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Series:
    """A univariate signal with an identifier.

    Values are kept as an immutable float64 array; every operation in this
    module returns a new Series.
    """

    id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"series {self.id!r}: values must be 1-D, got shape {arr.shape}")
        if arr.size < 2:
            raise ValueError(f"series {self.id!r}: need at least 2 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"series {self.id!r}: values must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def length(self) -> int:
        return self.values.size


def resample_linear(s: Series, n: int) -> Series:
    """Resample to n points by linear interpolation over the index range.

    Input index i sits at position i/(length-1); the output samples positions
    j/(n-1), so both endpoints are preserved exactly and n == length is the
    identity.
    """
    if n < 2:
        raise ValueError(f"resample target length must be >= 2, got {n}")
    src = np.arange(s.length, dtype=np.float64)
    dst = np.arange(n, dtype=np.float64) * (s.length - 1) / (n - 1)
    return Series(s.id, np.interp(dst, src, s.values))


def minmax_scale(s: Series) -> Series:
    """Affinely map values onto [0, 1]; a constant series maps to all 0.5."""
    lo = s.values.min()
    hi = s.values.max()
    if hi == lo:
        return Series(s.id, np.full(s.length, 0.5))
    return Series(s.id, (s.values - lo) / (hi - lo))


def slope_sign(s: Series) -> int:
    """Sign of the least-squares linear-fit slope against uniform time.

    The sign only depends on the covariance between values and positions, so
    that is all we compute. Returns -1, 0, or +1.
    """
    t = np.arange(s.length, dtype=np.float64)
    cov = np.dot(t - t.mean(), s.values - s.values.mean())
    if cov > 0.0:
        return 1
    if cov < 0.0:
        return -1
    return 0


def read_series_csv(path: str | Path) -> list[Series]:
    """Load series from a CSV file, one series per row.

    A non-numeric first column is taken as the row's id; otherwise rows get
    sequential ids. Rows may have differing lengths (resample afterwards).
    """
    out: list[Series] = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            try:
                float(cells[0])
                sid, data = f"row{i}", cells
            except ValueError:
                sid, data = cells[0], cells[1:]
            try:
                values = np.array([float(c) for c in data], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}: row {i}: non-numeric sample: {exc}") from None
            out.append(Series(sid, values))
    if not out:
        raise ValueError(f"{path}: no series found")
    return out
