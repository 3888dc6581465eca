"""Exact matrix determinant and rank by fraction-free elimination."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import UsageError


def _rows(M) -> list[list]:
    from .tensor import Tensor

    if isinstance(M, Tensor):
        if M.kind == "float64":
            raise UsageError("exact elimination needs int or rational entries")
        arr = M.data
    else:
        arr = np.asarray(M, dtype=object)
    if arr.ndim != 2:
        raise UsageError("expected a matrix")
    rows = [list(r) for r in arr.tolist()]
    for r in rows:
        for x in r:
            if isinstance(x, (float, np.floating)):
                raise UsageError("exact elimination needs int or rational entries")
    return rows


def bareiss_det(M):
    """Determinant of a square int/rational matrix.

    Bareiss elimination: every intermediate division is exact, so integer
    input never leaves the integers.  Rational input is cleared of
    denominators first and the common factor divided out at the end.
    """
    rows = _rows(M)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise UsageError(f"determinant needs a square matrix, got {n}x{len(rows[0]) if rows else 0}")
    if n == 0:
        return 1
    scale = 1
    if any(isinstance(x, Fraction) for r in rows for x in r):
        for i, r in enumerate(rows):
            lcm = math.lcm(*(Fraction(x).denominator for x in r))
            rows[i] = [int(Fraction(x) * lcm) for x in r]
            scale *= lcm
    a = [[int(x) for x in r] for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0 if scale == 1 else Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    det = sign * a[n - 1][n - 1]
    if scale != 1:
        return Fraction(det, scale)
    return det


def _integer_rows(rows: list[list]) -> list[list[int]]:
    out = []
    for r in rows:
        if all(isinstance(x, int) for x in r):
            out.append(list(r))
            continue
        fr = [Fraction(x) for x in r]
        lcm = math.lcm(*(x.denominator for x in fr)) if fr else 1
        out.append([int(x * lcm) for x in fr])
    return out


def exact_rank(M) -> int:
    """Rank over the rationals of an int/rational matrix (integer elimination)."""
    rows = _integer_rows(_rows(M))
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        p = prow[col]
        for i in range(rank + 1, len(rows)):
            q = rows[i][col]
            if q:
                new = [x * p - q * y for x, y in zip(rows[i], prow)]
                g = math.gcd(*new)
                rows[i] = [x // g for x in new] if g > 1 else new
        rank += 1
        if rank == len(rows):
            break
    return rank
