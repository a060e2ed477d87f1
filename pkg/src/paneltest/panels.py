"""Sample panels: m independent realisations of a process on a shared time grid.

A panel is the fundamental input of every test in this package. Rows are
realisations (one full time series each), columns are measurements at the
grid's time stamps. Panels serialise to CSV with the grid as header row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InputError


@dataclass
class SamplePanel:
    """An m x T matrix of realisations with a strictly increasing time grid.

    Parameters
    ----------
    values : array-like, shape (m, T)
        One realisation per row. All entries must be finite.
    grid : array-like, shape (T,), optional
        Time stamps of the columns. Defaults to 0, 1, ..., T-1.
    """

    values: np.ndarray
    grid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if values.ndim != 2:
            raise DimensionError(f"panel values must be 2-D, got ndim={values.ndim}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InputError(f"panel must be non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("panel contains non-finite values")
        if self.grid is None:
            grid = np.arange(values.shape[1], dtype=np.float64)
        else:
            grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 1 or grid.shape[0] != values.shape[1]:
            raise DimensionError(
                f"grid length {grid.shape} does not match T={values.shape[1]}"
            )
        if grid.shape[0] > 1 and not np.all(np.diff(grid) > 0):
            raise InputError("grid must be strictly increasing")
        self.values = values
        self.grid = grid

    @property
    def m(self) -> int:
        """Number of realisations (rows)."""
        return self.values.shape[0]

    @property
    def n_times(self) -> int:
        """Number of time points (columns)."""
        return self.values.shape[1]

    def take(self, indices) -> "SamplePanel":
        """Return a new panel holding the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.intp)
        return SamplePanel(self.values[idx], self.grid)

    def to_csv(self, path) -> None:
        """Write the panel: header row = grid stamps, one realisation per row."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(repr(float(t)) for t in self.grid)
            for row in self.values:
                writer.writerow(repr(float(v)) for v in row)

    @classmethod
    def from_csv(cls, path) -> "SamplePanel":
        """Read a panel written by :meth:`to_csv`."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = [r for r in reader if r]
        if len(rows) < 2:
            raise InputError(f"{path}: need a header row and at least one realisation")
        try:
            grid = np.array([float(v) for v in rows[0]])
            values = np.array([[float(v) for v in r] for r in rows[1:]])
        except ValueError as exc:
            raise InputError(f"{path}: non-numeric cell ({exc})") from exc
        if values.shape[1] != grid.shape[0]:
            raise InputError(
                f"{path}: rows have {values.shape[1]} columns, header has {grid.shape[0]}"
            )
        return cls(values, grid)


def check_same_grid_length(x: SamplePanel, y: SamplePanel) -> None:
    """Raise unless both panels share the number of time points."""
    if x.n_times != y.n_times:
        raise DimensionError(
            f"panels have different numbers of time points: {x.n_times} vs {y.n_times}"
        )
