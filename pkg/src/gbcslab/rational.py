"""Exact rank over the rationals.

Gaussian elimination with Fraction arithmetic gives a tolerance-free rank for
integer matrices.  It is deliberately independent of the SVD path in
``linalg`` so the two can vouch for each other in tests and reports.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _to_fractions(a) -> list[list[Fraction]]:
    rows = []
    for row in np.asarray(a).tolist():
        frow = []
        for x in row:
            if isinstance(x, Fraction):
                frow.append(x)
            elif isinstance(x, int):
                frow.append(Fraction(x))
            else:
                xf = float(x)
                if xf != round(xf):
                    raise ValueError(f"entry {x!r} is not an exact integer")
                frow.append(Fraction(int(round(xf))))
        rows.append(frow)
    return rows


def rank_exact(a) -> int:
    """Rank of an integer (or Fraction) matrix by fraction-arithmetic elimination."""
    rows = _to_fractions(a)
    if not rows or not rows[0]:
        raise ValueError("matrix must be nonempty")
    n_rows, n_cols = len(rows), len(rows[0])
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pr = rows[r]
        for i in range(r + 1, n_rows):
            if rows[i][c] != 0:
                factor = rows[i][c] / pr[c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], pr)]
        r += 1
        if r == n_rows:
            break
    return r
