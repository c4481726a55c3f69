"""Dataset loading, preprocessing, and ordinal label encodings.

The pipeline is CSV -> :class:`RawTable` -> :class:`Dataset` ->
:class:`OrdinalEncoding`.  Preprocessing follows fixed conventions so that
results are reproducible bit for bit:

* numeric columns are standardized with the *population* standard
  deviation (divide by n);
* a K-level categorical becomes K-1 indicator columns, dropping the
  lexicographically first level;
* columns with more than ``missing_threshold`` missing cells are dropped
  first, then any row still containing a missing value is dropped;
* labels are remapped monotonically onto {1, ..., m+1}.

All values are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

MISSING_TOKENS = frozenset({"", "?", "NA"})
_DELIMITERS = (",", ";", "\t")


class PreprocessWarning(UserWarning):
    """Non-fatal preprocessing events, e.g. a constant column was dropped."""


@dataclass(frozen=True)
class RawTable:
    """A rectangular table of text cells plus the label column position."""

    columns: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]
    label_col: int

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def c(self) -> int:
        return len(self.columns)

    def __post_init__(self):
        if not 0 <= self.label_col < len(self.columns):
            raise ValueError(f"label column index {self.label_col} out of range")
        for i, row in enumerate(self.cells):
            if len(row) != len(self.columns):
                raise ValueError(
                    f"ragged row {i + 1}: {len(row)} cells, expected {len(self.columns)}"
                )


@dataclass(frozen=True)
class PreprocessOptions:
    missing_threshold: float = 0.10
    standardize: bool = True
    dummy_encode: bool = True
    drop_columns: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.missing_threshold <= 1.0:
            raise ValueError("missing_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class Dataset:
    """Standardized feature matrix with ordinal labels in {1, ..., m+1}."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return int(self.y.max()) - 1

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=int))
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y row counts differ")
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names length must equal feature count")
        if self.y.size and self.y.min() < 1:
            raise ValueError("labels must start at 1")
        self.X.setflags(write=False)
        self.y.setflags(write=False)


@dataclass(frozen=True)
class OrdinalEncoding:
    """The indicator tensors consumed by every likelihood formula.

    ``delta[i, k-1]`` is 1 iff sample i has label k (k <= m).
    ``psi[i, k-1]`` is -1 below the sample's label, +1 at it (when the
    label is <= m), and 0 past it; row i has exactly ``min(y_i, m)``
    nonzero entries.
    """

    delta: np.ndarray
    psi: np.ndarray
    direction: str

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"unknown direction {self.direction!r}")
        self.delta.setflags(write=False)
        self.psi.setflags(write=False)


def _detect_delimiter(header_line: str) -> str:
    counts = [header_line.count(d) for d in _DELIMITERS]
    best = max(range(len(_DELIMITERS)), key=lambda i: counts[i])
    return _DELIMITERS[best] if counts[best] > 0 else ","


def load_csv(path, label: str) -> RawTable:
    """Read a delimited text file into a :class:`RawTable`.

    The delimiter is auto-detected among comma, semicolon, and tab from
    the header line.  Rows whose cell count differs from the header are
    rejected with their 1-based data row number.
    """
    try:
        with open(path, encoding="utf-8-sig", newline="") as fh:
            first = fh.readline()
            if not first:
                raise ValueError(f"{path}: empty file, header row required")
            delim = _detect_delimiter(first)
            fh.seek(0)
            reader = csv.reader(fh, delimiter=delim)
            header = [c.strip().strip('"') for c in next(reader)]
            rows = []
            for lineno, row in enumerate(reader, start=1):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ValueError(
                        f"{path}: ragged row {lineno}: "
                        f"{len(row)} cells, expected {len(header)}"
                    )
                rows.append(tuple(cell.strip().strip('"') for cell in row))
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    if label not in header:
        raise ValueError(f"{path}: label column {label!r} not found in header {header}")
    return RawTable(
        columns=tuple(header), cells=tuple(rows), label_col=header.index(label)
    )


def _is_missing(cell: str) -> bool:
    return cell in MISSING_TOKENS


def _try_floats(cells):
    out = np.empty(len(cells))
    for i, cell in enumerate(cells):
        try:
            out[i] = float(cell)
        except ValueError:
            return None
    return out


def _order_labels(cells) -> list[str]:
    """Distinct label values in their natural order (numeric if possible)."""
    distinct = sorted(set(cells))
    try:
        return sorted(distinct, key=int)
    except ValueError:
        pass
    try:
        return sorted(distinct, key=float)
    except ValueError:
        return distinct


def preprocess(table: RawTable, opts: PreprocessOptions = PreprocessOptions()) -> Dataset:
    """Apply the missing-value, dummy, and standardization rules.

    Column drops happen before row drops; labels are remapped to a
    contiguous {1, ..., m+1} preserving their natural order.
    """
    n, c = table.n, table.c
    drop = set(opts.drop_columns)
    unknown = drop - set(table.columns)
    if unknown:
        raise ValueError(f"drop_columns not in table: {sorted(unknown)}")
    if table.columns[table.label_col] in drop:
        raise ValueError("cannot drop the label column")

    keep_cols = []
    for j, name in enumerate(table.columns):
        if name in drop:
            continue
        if j != table.label_col:
            miss = sum(_is_missing(row[j]) for row in table.cells)
            if n and miss / n > opts.missing_threshold:
                continue
        keep_cols.append(j)

    keep_rows = [
        i
        for i, row in enumerate(table.cells)
        if not any(_is_missing(row[j]) for j in keep_cols)
    ]
    if not keep_rows:
        raise ValueError("preprocessing dropped every row")

    label_cells = [table.cells[i][table.label_col] for i in keep_rows]
    order = _order_labels(label_cells)
    if len(order) < 2:
        raise ValueError(
            f"label column has a single distinct value {order[0]!r}; nothing to model"
        )
    rank = {v: k + 1 for k, v in enumerate(order)}
    y = np.array([rank[v] for v in label_cells], dtype=int)

    feature_cols: list[np.ndarray] = []
    feature_names: list[str] = []
    for j in keep_cols:
        if j == table.label_col:
            continue
        name = table.columns[j]
        cells = [table.cells[i][j] for i in keep_rows]
        values = _try_floats(cells)
        if values is not None:
            if opts.standardize:
                mean = values.mean()
                std = values.std()
                if std <= 1e-12 * max(1.0, abs(mean)):
                    warnings.warn(
                        f"dropping constant column {name!r}", PreprocessWarning
                    )
                    continue
                values = (values - mean) / std
            feature_cols.append(values)
            feature_names.append(name)
        else:
            if not opts.dummy_encode:
                raise ValueError(
                    f"column {name!r} is categorical but dummy encoding is disabled"
                )
            levels = sorted(set(cells))
            if len(levels) == 1:
                warnings.warn(f"dropping constant column {name!r}", PreprocessWarning)
                continue
            for level in levels[1:]:
                feature_cols.append(
                    np.array([1.0 if cell == level else 0.0 for cell in cells])
                )
                feature_names.append(f"{name}={level}")

    X = (
        np.column_stack(feature_cols)
        if feature_cols
        else np.zeros((len(keep_rows), 0))
    )
    return Dataset(X=X, y=y, feature_names=tuple(feature_names))


def encode_labels(data: Dataset, direction: str = "forward") -> OrdinalEncoding:
    """Build the delta/psi indicator matrices for the chosen direction.

    The backward encoding applies the per-level binary models from the top
    label downward, which is the forward encoding of the reversed labels
    y' = m + 2 - y.
    """
    m = data.m
    y = data.y if direction == "forward" else (m + 2 - data.y)
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    ks = np.arange(1, m + 1)
    delta = (y[:, None] == ks).astype(np.int8)
    psi = np.zeros((data.n, m), dtype=np.int8)
    psi[ks < y[:, None]] = -1
    psi[(ks == y[:, None])] = 1
    return OrdinalEncoding(delta=delta, psi=psi, direction=direction)


def dataset_to_csv(data: Dataset, path, label: str = "y") -> None:
    """Write a canonical comma-separated fixture file (17 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([*data.feature_names, label]) + "\n")
        for i in range(data.n):
            cells = [format(v, ".17g") for v in data.X[i]]
            cells.append(str(int(data.y[i])))
            fh.write(",".join(cells) + "\n")
