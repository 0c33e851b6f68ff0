"""Exact rank and nullspace over Q via fraction-free (Bareiss) elimination.

Rows may contain ``int`` or ``Fraction`` entries; each row is scaled to
integers before elimination so every intermediate value is an exact integer.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


def integer_row(row: Sequence) -> list[int]:
    """Scale a rational row to a primitive integer row (same span)."""
    den = 1
    for x in row:
        if isinstance(x, Fraction):
            den = lcm(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def echelon(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.  Returns (reduced rows, pivot columns)."""
    mat = [integer_row(r) for r in rows if any(r)]
    pivots: list[int] = []
    prev = 1
    rank = 0
    for col in range(ncols):
        if rank == len(mat):
            break
        piv = None
        best = None
        for i in range(rank, len(mat)):
            v = mat[i][col]
            if v:
                size = abs(v)
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        prow = mat[rank]
        p = prow[col]
        for i in range(rank + 1, len(mat)):
            row = mat[i]
            a = row[col]
            if a:
                mat[i] = [(p * row[j] - a * prow[j]) // prev if j >= col else 0
                          for j in range(ncols)]
            elif p != prev:
                mat[i] = [(p * row[j]) // prev if j >= col else 0
                          for j in range(ncols)]
        prev = p
        pivots.append(col)
        rank += 1
    return mat[:rank], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    rows = list(rows)
    if not rows:
        return 0
    if ncols is None:
        ncols = len(rows[0])
    return len(echelon(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {v : rows . v = 0} with exact rational entries."""
    ech, pivots = echelon(rows, ncols)
    # back-substitute on the echelon form using Fractions (small: ncols columns)
    red = [[Fraction(v) for v in r] for r in ech]
    for i in range(len(red) - 1, -1, -1):
        c = pivots[i]
        p = red[i][c]
        red[i] = [v / p for v in red[i]]
        for k in range(i):
            f = red[k][c]
            if f:
                red[k] = [a - f * b for a, b in zip(red[k], red[i])]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -red[i][fcol]
        basis.append(v)
    return basis


PRIME = (1 << 61) - 1


def rank_mod_p(rows: Sequence[Sequence], ncols: int, p: int = PRIME) -> int | None:
    """Rank of the reduction mod p, or None if a denominator is divisible by p.

    Never exceeds the rank over Q, so it gives an exact upper bound on nullity.
    """
    mat = []
    for r in rows:
        row = []
        for x in r:
            if isinstance(x, Fraction):
                if x.denominator % p == 0:
                    return None
                row.append(x.numerator * pow(x.denominator, -1, p) % p)
            else:
                row.append(int(x) % p)
        if any(row):
            mat.append(row)
    rk = 0
    for col in range(ncols):
        piv = next((i for i in range(rk, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rk], mat[piv] = mat[piv], mat[rk]
        prow = mat[rk]
        inv = pow(prow[col], -1, p)
        prow = mat[rk] = [v * inv % p for v in prow]
        for i in range(rk + 1, len(mat)):
            a = mat[i][col]
            if a:
                row = mat[i]
                mat[i] = [(row[j] - a * prow[j]) % p if j >= col else 0 for j in range(ncols)]
        rk += 1
        if rk == len(mat):
            break
    return rk
