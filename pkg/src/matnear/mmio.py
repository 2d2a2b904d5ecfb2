"""Minimal Matrix Market reader/writer.

Supports array and coordinate formats with real or complex values and
general/symmetric/skew-symmetric/hermitian storage.  Pattern and integer
fields are rejected for matrix values.  Parse failures carry the 1-based
line number.  Writing uses 17 significant digits, so write-then-read
round-trips are bit exact for double-precision values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedFieldError
from .structures import SparsityPattern

__all__ = ["MatrixData", "read_matrix", "write_matrix"]

_FIELDS = {"real", "complex", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric", "skew-symmetric", "hermitian"}


@dataclass
class MatrixData:
    """A dense matrix with the sparsity pattern of its source file."""

    matrix: np.ndarray
    pattern: SparsityPattern | None
    fmt: str
    field: str
    symmetry: str


def _parse_value(tokens, field, line_no):
    try:
        if field == "complex":
            if len(tokens) != 2:
                raise ValueError
            return complex(float(tokens[0]), float(tokens[1]))
        if len(tokens) != 1:
            raise ValueError
        return float(tokens[0])
    except ValueError:
        raise ParseError(f"bad {field} value {' '.join(tokens)!r}", line_no) from None


def read_matrix(path) -> MatrixData:
    """Read a Matrix Market file into a dense matrix.

    Symmetric storage is expanded to the full matrix; the coordinate
    pattern (with its symmetric completion) is retained for use as a
    sparse perturbation structure.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file", 1)
    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket" or header[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' header", 1)
    fmt, field, symmetry = (w.lower() for w in header[2:5])
    if fmt not in ("array", "coordinate"):
        raise ParseError(f"unsupported format {fmt!r}", 1)
    if field not in _FIELDS:
        raise ParseError(f"unknown field {field!r}", 1)
    if field in ("pattern", "integer"):
        raise UnsupportedFieldError(
            f"field {field!r} not supported for matrix values", 1
        )
    if symmetry not in _SYMMETRIES:
        raise ParseError(f"unknown symmetry {symmetry!r}", 1)

    i = 1
    while i < len(lines) and (lines[i].startswith("%") or not lines[i].strip()):
        i += 1
    if i >= len(lines):
        raise ParseError("missing size line", len(lines))
    size = lines[i].split()
    line_no = i + 1
    dtype = complex if field == "complex" else float

    if fmt == "array":
        if len(size) != 2:
            raise ParseError("array size line must be 'rows cols'", line_no)
        m, n = int(size[0]), int(size[1])
        M = np.zeros((m, n), dtype=dtype)
        entries = []
        for j in range(i + 1, len(lines)):
            s = lines[j].strip()
            if not s or s.startswith("%"):
                continue
            entries.append((_parse_value(s.split(), field, j + 1), j + 1))
        if symmetry == "general":
            expected = m * n
            coords = [(r, c) for c in range(n) for r in range(m)]
        else:
            if m != n:
                raise ParseError("symmetric array matrix must be square", line_no)
            expected = n * (n + 1) // 2
            coords = [(r, c) for c in range(n) for r in range(c, n)]
        if len(entries) != expected:
            raise ParseError(
                f"expected {expected} entries, found {len(entries)}",
                entries[-1][1] if entries else line_no,
            )
        for (val, _), (r, c) in zip(entries, coords):
            M[r, c] = val
            if symmetry == "symmetric":
                M[c, r] = val
            elif symmetry == "skew-symmetric":
                M[c, r] = -val
            elif symmetry == "hermitian":
                M[c, r] = np.conj(val)
        return MatrixData(M, None, fmt, field, symmetry)

    if len(size) != 3:
        raise ParseError("coordinate size line must be 'rows cols nnz'", line_no)
    m, n, nnz = int(size[0]), int(size[1]), int(size[2])
    M = np.zeros((m, n), dtype=dtype)
    pairs = []
    count = 0
    for j in range(i + 1, len(lines)):
        s = lines[j].strip()
        if not s or s.startswith("%"):
            continue
        tokens = s.split()
        if len(tokens) < 3:
            raise ParseError("coordinate entry needs 'i j value'", j + 1)
        try:
            r, c = int(tokens[0]) - 1, int(tokens[1]) - 1
        except ValueError:
            raise ParseError(f"bad indices {tokens[:2]}", j + 1) from None
        if not (0 <= r < m and 0 <= c < n):
            raise ParseError(f"index ({r + 1}, {c + 1}) out of range", j + 1)
        val = _parse_value(tokens[2:], field, j + 1)
        M[r, c] = val
        pairs.append((r, c))
        if symmetry != "general" and r != c:
            pairs.append((c, r))
            if symmetry == "symmetric":
                M[c, r] = val
            elif symmetry == "skew-symmetric":
                M[c, r] = -val
            elif symmetry == "hermitian":
                M[c, r] = np.conj(val)
        count += 1
    if count != nnz:
        raise ParseError(f"expected {nnz} entries, found {count}", len(lines))
    return MatrixData(M, SparsityPattern.from_pairs(pairs), fmt, field, symmetry)


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(path, M: np.ndarray, fmt: str = "array") -> None:
    """Write a dense matrix as a general real/complex Matrix Market file."""
    M = np.asarray(M)
    is_complex = np.iscomplexobj(M)
    field = "complex" if is_complex else "real"
    m, n = M.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix {fmt} {field} general\n")
        if fmt == "array":
            fh.write(f"{m} {n}\n")
            for c in range(n):
                for r in range(m):
                    v = M[r, c]
                    if is_complex:
                        fh.write(f"{_fmt_float(v.real)} {_fmt_float(v.imag)}\n")
                    else:
                        fh.write(f"{_fmt_float(v)}\n")
        elif fmt == "coordinate":
            rows, cols = np.nonzero(M)
            fh.write(f"{m} {n} {rows.size}\n")
            for r, c in zip(rows.tolist(), cols.tolist()):
                v = M[r, c]
                if is_complex:
                    fh.write(
                        f"{r + 1} {c + 1} {_fmt_float(v.real)} {_fmt_float(v.imag)}\n"
                    )
                else:
                    fh.write(f"{r + 1} {c + 1} {_fmt_float(v)}\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
