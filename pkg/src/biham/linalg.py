"""Exact linear algebra over Fraction and RatFn entries.

Everything here is plain Gaussian elimination with exact division; entries
only need +, -, *, / and an is-zero test, which both Fraction and RatFn
supply.  Used for inverting the flat-coordinate pairing, Jacobians of point
transformations, metric inversion and the undetermined-coefficient solver.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, TypeVar

from .algebra import AlgebraError, RatFn

T = TypeVar("T")


class SingularMatrixError(AlgebraError):
    """Matrix inversion or solving hit a singular matrix."""


def _is_zero(x) -> bool:
    return x.is_zero if isinstance(x, RatFn) else x == 0


def mat_mul(a: Sequence[Sequence[T]], b: Sequence[Sequence[T]]) -> tuple[tuple[T, ...], ...]:
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = a[i][0] * b[0][j]
            for k in range(1, inner):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_inverse(m: Sequence[Sequence[T]], one: T) -> tuple[tuple[T, ...], ...]:
    """Inverse by Gauss-Jordan elimination; raises on singular input."""
    n = len(m)
    zero = one - one
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not _is_zero(aug[r][col])), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = one / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r == col or _is_zero(aug[r][col]):
                continue
            factor = aug[r][col]
            aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def mat_det(m: Sequence[Sequence[T]], one: T) -> T:
    """Determinant by fraction-full elimination (entries form a field)."""
    n = len(m)
    zero = one - one
    work = [list(row) for row in m]
    det = one
    for col in range(n):
        pivot = next((r for r in range(col, n) if not _is_zero(work[r][col])), None)
        if pivot is None:
            return zero
        if pivot != col:
            work[col], work[pivot] = work[pivot], work[col]
            det = zero - det
        det = det * work[col][col]
        inv = one / work[col][col]
        for r in range(col + 1, n):
            if _is_zero(work[r][col]):
                continue
            factor = work[r][col] * inv
            work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return det


def solve_fraction_system(
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
) -> list[Fraction] | None:
    """One exact solution of a (possibly rectangular) linear system, or None.

    Free variables are set to zero after forward elimination with a fixed
    pivot order, so the returned solution is deterministic.
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    a = [list(map(Fraction, row)) + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if a[i][n] != 0:
            return None  # inconsistent
    x = [Fraction(0)] * n
    for row, col in pivots:
        x[col] = a[row][n]
    return x
