"""Small immutable matrices (1x1 up to 3x3) over Fraction or float entries.

Matrices are tuples of row tuples so they can be hashed, compared and used
as carrier elements of rule-backed structures.  Exact mode uses
``fractions.Fraction`` entries; approximate mode uses floats compared
componentwise at a fixed tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

Matrix = tuple

FLOAT_TOLERANCE = 1e-9


def mat(rows) -> Matrix:
    return tuple(tuple(row) for row in rows)


def dim(a: Matrix) -> int:
    return len(a)


def identity(n: int, one=Fraction(1)) -> Matrix:
    zero = one - one
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def mat_scale(c, a: Matrix) -> Matrix:
    return tuple(tuple(c * x for x in row) for row in a)


def det(a: Matrix):
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if n == 3:
        return (
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        )
    raise ValueError(f"det supports 1x1..3x3 matrices, got {n}x{n}")


def inverse(a: Matrix) -> Matrix:
    d = det(a)
    n = len(a)
    if n == 1:
        one = 1.0 if isinstance(d, float) else Fraction(1)
        return ((one / d,),)
    if n == 2:
        return (
            (a[1][1] / d, -a[0][1] / d),
            (-a[1][0] / d, a[0][0] / d),
        )
    if n == 3:
        cof = [
            [
                a[1][1] * a[2][2] - a[1][2] * a[2][1],
                -(a[1][0] * a[2][2] - a[1][2] * a[2][0]),
                a[1][0] * a[2][1] - a[1][1] * a[2][0],
            ],
            [
                -(a[0][1] * a[2][2] - a[0][2] * a[2][1]),
                a[0][0] * a[2][2] - a[0][2] * a[2][0],
                -(a[0][0] * a[2][1] - a[0][1] * a[2][0]),
            ],
            [
                a[0][1] * a[1][2] - a[0][2] * a[1][1],
                -(a[0][0] * a[1][2] - a[0][2] * a[1][0]),
                a[0][0] * a[1][1] - a[0][1] * a[1][0],
            ],
        ]
        # adjugate is the transpose of the cofactor matrix
        return tuple(tuple(cof[j][i] / d for j in range(3)) for i in range(3))
    raise ValueError(f"inverse supports 1x1..3x3 matrices, got {n}x{n}")


def mat_close(a: Matrix, b: Matrix, tol: float = FLOAT_TOLERANCE) -> bool:
    if len(a) != len(b):
        return False
    return all(
        abs(x - y) <= tol for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


def sqrt_exact(q: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def fmt_number(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def fmt_matrix(a: Matrix) -> str:
    rows = ", ".join("[" + ", ".join(fmt_number(x) for x in row) + "]" for row in a)
    return "[" + rows + "]"
