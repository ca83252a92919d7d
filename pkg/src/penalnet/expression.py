"""Expression matrices: loading, standardization and node-wise response views."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


@dataclass(frozen=True)
class ExpressionMatrix:
    """An ``n x p`` matrix of expression values, one column per gene.

    ``constant`` flags columns that had zero variance when the matrix was
    standardized; such columns are centered but not scaled.
    """

    values: np.ndarray
    gene_names: tuple[str, ...]
    standardized: bool = False
    constant: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DataError("expression values must be a 2-D matrix")
        n, p = values.shape
        if n < 2 or p < 2:
            raise DataError(f"need at least 2 samples and 2 genes, got {n}x{p}")
        if not np.all(np.isfinite(values)):
            raise DataError("expression matrix contains non-finite values")
        names = tuple(str(g) for g in self.gene_names)
        if len(names) != p:
            raise DataError(f"{len(names)} gene names for {p} columns")
        if any(not g for g in names):
            raise DataError("empty gene name")
        if len(set(names)) != p:
            seen = set()
            dup = next(g for g in names if g in seen or seen.add(g))
            raise DataError(f"duplicate gene name {dup!r}")
        constant = tuple(bool(c) for c in self.constant) or (False,) * p
        if len(constant) != p:
            raise DataError("constant-column flags do not match column count")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gene_names", names)
        object.__setattr__(self, "constant", constant)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class ResponseView:
    """Gene ``response_index`` as response, every other gene as predictor."""

    response_index: int
    y: np.ndarray
    X_minus: np.ndarray

    @property
    def predictor_indices(self) -> np.ndarray:
        p = self.X_minus.shape[1] + 1
        return np.delete(np.arange(p), self.response_index)


def load_expression(path, transpose: bool = False) -> ExpressionMatrix:
    """Read a tab-separated expression file.

    The first row holds gene names. By default every following row is one
    sample; with ``transpose=True`` every following row is the profile of one
    gene, in header order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter="\t") if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")

    names = [c.strip() for c in rows[0]]
    cells = rows[1:]
    width = len(cells[0]) if cells else 0
    data = np.empty((len(cells), width))
    for i, row in enumerate(cells):
        if len(row) != width:
            raise DataError(f"{path}: line {i + 2} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at line {i + 2}, column {j + 1}"
                ) from None
            if not np.isfinite(data[i, j]):
                raise DataError(f"{path}: non-finite value at line {i + 2}, column {j + 1}")

    if transpose:
        if len(names) != data.shape[0]:
            raise DataError(f"{path}: header has {len(names)} names but {data.shape[0]} gene rows")
        data = data.T
    elif len(names) != width:
        raise DataError(f"{path}: header has {len(names)} names but rows have {width} fields")
    return ExpressionMatrix(data, names)


def save_expression(m: ExpressionMatrix, path) -> None:
    """Write ``m`` in sample-per-row layout with 17 significant digits.

    ``path`` may also be an open text stream.
    """
    lines = ["\t".join(m.gene_names)] + ["\t".join(f"{v:.17g}" for v in row) for row in m.values]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def standardize(m: ExpressionMatrix) -> ExpressionMatrix:
    """Center every column and scale it to unit standard deviation (divisor n).

    Constant columns are centered to zero and flagged instead of scaled.
    """
    if m.standardized:
        raise DataError("matrix is already standardized")
    X = m.values
    centered = X - X.mean(axis=0)
    sd = np.sqrt((centered**2).mean(axis=0))
    scale = np.abs(X).max(axis=0)
    constant = sd <= 1e-12 * np.maximum(scale, 1.0)
    out = centered.copy()
    out[:, constant] = 0.0
    out[:, ~constant] /= sd[~constant]
    return ExpressionMatrix(out, m.gene_names, standardized=True, constant=tuple(constant))


def response_view(m: ExpressionMatrix, a: int) -> ResponseView:
    if not m.standardized:
        raise DataError("response views require a standardized matrix")
    p = m.n_genes
    if not 0 <= a < p:
        raise IndexError(f"gene index {a} out of range for {p} genes")
    y = m.values[:, a].copy()
    X = np.delete(m.values, a, axis=1)
    return ResponseView(a, y, np.ascontiguousarray(X))


def reinsert(view: ResponseView) -> np.ndarray:
    """Rebuild the full matrix from a response view."""
    return np.insert(view.X_minus, view.response_index, view.y, axis=1)
