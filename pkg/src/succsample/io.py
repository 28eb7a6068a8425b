"""Reading instances from text files.

Two formats:

``points``
    one point per line, whitespace-separated coordinates, optionally ending
    in a ``w=<real>`` token (default weight 1).  Blank lines and lines
    starting with ``#`` are skipped.
``matrix``
    first line ``n``, then n lines of n reals.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InputFormatError, MetricValidationError, ValidationError
from .metric import EUCLIDEAN, EXPLICIT, Instance

FORMATS = ("points", "matrix")


def _float(tok, path, lineno):
    try:
        return float(tok)
    except ValueError:
        raise InputFormatError(f"not a number: {tok!r}", path, lineno) from None


def read_points(path, mode: str = EUCLIDEAN) -> Instance:
    coords, weights = [], []
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            toks = s.split()
            w = 1.0
            if toks[-1].startswith("w="):
                w = _float(toks[-1][2:], path, lineno)
                toks = toks[:-1]
            if any(t.startswith("w=") for t in toks):
                raise InputFormatError("weight token must come last", path, lineno)
            if not toks:
                raise InputFormatError("no coordinates", path, lineno)
            row = [_float(t, path, lineno) for t in toks]
            if dim is None:
                dim = len(row)
            elif len(row) != dim:
                raise InputFormatError(f"expected {dim} coordinates, got {len(row)}", path, lineno)
            if not np.isfinite(w) or w < 0:
                raise InputFormatError(f"weight must be finite and >= 0, got {w}", path, lineno)
            coords.append(row)
            weights.append(w)
    if not coords:
        raise InputFormatError("no points", path)
    return Instance.from_coordinates(np.array(coords), np.array(weights), mode=mode)


def read_matrix(path, weights=None) -> Instance:
    with open(path) as fh:
        lines = [(i, ln.split()) for i, ln in enumerate(fh, 1) if ln.strip()]
    if not lines:
        raise InputFormatError("empty matrix file", path)
    lineno, head = lines[0]
    if len(head) != 1:
        raise InputFormatError("first line must hold n", path, lineno)
    try:
        n = int(head[0])
    except ValueError:
        raise InputFormatError(f"bad n: {head[0]!r}", path, lineno) from None
    if n < 1:
        raise InputFormatError(f"n must be >= 1, got {n}", path, lineno)
    rows = lines[1:]
    if len(rows) != n:
        raise InputFormatError(f"expected {n} matrix rows, found {len(rows)}", path)
    M = np.empty((n, n))
    for r, (lineno, toks) in enumerate(rows):
        if len(toks) != n:
            raise InputFormatError(f"expected {n} entries, got {len(toks)}", path, lineno)
        M[r] = [_float(t, path, lineno) for t in toks]
    check_matrix(M)
    return Instance.from_matrix(M, weights)


def check_matrix(M):
    if np.any(M < 0):
        i, j = np.argwhere(M < 0)[0]
        raise MetricValidationError(f"negative distance d({i},{j})={M[i, j]}")
    if np.any(np.diag(M) != 0):
        i = int(np.flatnonzero(np.diag(M) != 0)[0])
        raise MetricValidationError(f"nonzero self-distance d({i},{i})={M[i, i]}")
    bad = np.argwhere(M != M.T)
    if bad.size:
        i, j = bad[0]
        raise MetricValidationError(f"matrix is not symmetric: d({i},{j})={M[i, j]} but d({j},{i})={M[j, i]}")


def parse_input(path, format: str = "points", mode: str | None = None) -> Instance:
    """Load an instance from ``path`` in the given format."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    if format == "points":
        return read_points(path, mode or EUCLIDEAN)
    if format == "matrix":
        if mode not in (None, EXPLICIT):
            raise ValidationError("matrix files only support the explicit-matrix metric")
        return read_matrix(path)
    raise ValidationError(f"unknown format {format!r}; expected one of {FORMATS}")


def write_points(path, inst: Instance):
    X = inst.metric.coordinates
    with open(path, "w") as fh:
        for row, w in zip(X, inst.raw_weights):
            coords = " ".join(repr(float(v)) for v in row)
            fh.write(coords if w == 1 else f"{coords} w={float(w)!r}")
            fh.write("\n")
