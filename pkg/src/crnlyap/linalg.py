"""Exact linear algebra over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`. Nothing here ever
rounds; rank and null spaces are integer/rational invariants.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Vector = tuple[Fraction, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    # float -> exact binary expansion; ints exact
    return Fraction(value)


def to_rows(vectors: Sequence[Sequence]) -> list[list[Fraction]]:
    return [[as_fraction(v) for v in vec] for vec in vectors]


def row_echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form by Gauss-Jordan elimination.

    Returns the reduced matrix (nonzero rows only) and the pivot columns.
    The input is not modified.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    n_rows, n_cols = len(m), len(m[0])
    pivots: list[int] = []
    piv_r = 0
    for c in range(n_cols):
        if piv_r == n_rows:
            break
        sel = next((i for i in range(piv_r, n_rows) if m[i][c] != 0), None)
        if sel is None:
            continue
        m[piv_r], m[sel] = m[sel], m[piv_r]
        p = m[piv_r][c]
        if p != 1:
            m[piv_r] = [v / p for v in m[piv_r]]
        prow = m[piv_r]
        for i in range(n_rows):
            if i != piv_r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], prow)]
        pivots.append(c)
        piv_r += 1
    return m[:piv_r], pivots


def rank(vectors: Sequence[Sequence]) -> int:
    rows = to_rows(vectors)
    if not rows:
        return 0
    return len(row_echelon(rows)[1])


def transpose(rows: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*rows)]


def column_basis(matrix_rows: Sequence[Sequence]) -> list[Vector]:
    """Independent columns of a matrix given by rows (pivot columns)."""
    rows = to_rows(matrix_rows)
    if not rows or not rows[0]:
        return []
    _, piv = row_echelon(rows)
    cols = transpose(rows)
    return [tuple(cols[j]) for j in piv]


def null_space(rows_in: Sequence[Sequence], n: int) -> list[Vector]:
    """Basis of {x : A x = 0} for A given by rows, x of length n."""
    rows = to_rows(rows_in)
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    red, piv = row_echelon(rows)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for r, pc in enumerate(piv):
            x[pc] = -red[r][f]
        basis.append(_normalize(x))
    return basis


def _normalize(x: list[Fraction]) -> Vector:
    # clear denominators and common factors so bases print as small integers
    dens = [v.denominator for v in x if v != 0]
    if not dens:
        return tuple(x)
    L = lcm(*dens)
    ints = [int(v * L) for v in x]
    g = 0
    for v in ints:
        g = gcd(g, v)
    first = next(v for v in ints if v != 0)
    if first < 0:
        g = -g
    return tuple(Fraction(v, g) for v in ints)


def orthogonal_complement(basis: Sequence[Sequence], n: int | None = None) -> list[Vector]:
    """Rational basis of the orthogonal complement of span(basis) in Q^n.

    ``n`` is required only when ``basis`` is empty.
    """
    if not basis:
        if n is None:
            raise ValueError("dimension n required for an empty basis")
        return null_space([], n)
    lengths = {len(v) for v in basis}
    if len(lengths) != 1:
        raise ValueError("basis vectors must share a common length")
    dim = lengths.pop()
    if n is not None and n != dim:
        raise ValueError(f"basis vectors have length {dim}, expected {n}")
    return null_space(basis, dim)


def same_span(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    """Span equality by mutual rank tests."""
    ra, rb = rank(a), rank(b)
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(list(a) + list(b)) == ra


def mat_vec(rows: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> Vector:
    return tuple(sum((a * b for a, b in zip(r, x)), Fraction(0)) for r in rows)
