"""Time grid plus named observable columns; the universal output record."""

from __future__ import annotations

import os
import tempfile

import numpy as np

#: numeric formatting used for every CSV cell (bit-stable diffs)
FMT = "%.15g"


class TimeSeries:
    """An ascending time grid with equal-length named columns.

    Columns may be real or complex; complex columns are split into
    ``<name>_re`` / ``<name>_im`` pairs on CSV export.
    """

    def __init__(self, times, columns: dict):
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly ascending")
        self.columns = {}
        for name, col in columns.items():
            col = np.asarray(col)
            if col.shape != self.times.shape:
                raise ValueError(f"column {name!r} length {col.shape} != times {self.times.shape}")
            self.columns[name] = col

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def names(self):
        return list(self.columns)

    def check_populations(self, names=None, tol: float = 1e-9):
        """Verify population-like columns stay in [0, 1 + tol]."""
        for name in (names if names is not None else self.columns):
            col = self.columns[name]
            if np.iscomplexobj(col):
                continue
            if col.size and (col.min() < -tol or col.max() > 1.0 + tol):
                raise ValueError(
                    f"column {name!r} outside [0,1]: min={col.min()}, max={col.max()}"
                )

    def to_csv(self, path):
        """Write ``t,<columns...>`` with 15 significant digits, LF endings."""
        header = ["t"]
        cols = []
        for name, col in self.columns.items():
            if np.iscomplexobj(col):
                header += [f"{name}_re", f"{name}_im"]
                cols += [col.real, col.imag]
            else:
                header.append(name)
                cols.append(col)
        rows = np.column_stack([self.times] + cols) if cols else self.times.reshape(-1, 1)
        write_csv(path, header, rows)


def write_csv(path, header, rows):
    """Atomically write a CSV file (temp file + rename).

    Numeric cells are formatted with 15 significant digits; string cells
    pass through unchanged.
    """
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(c if isinstance(c, str) else FMT % c for c in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
