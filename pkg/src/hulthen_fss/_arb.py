"""Small helpers around python-flint ``arb``/``arb_mat`` for the extended-precision path."""

from __future__ import annotations

import numpy as np
from flint import arb, arb_mat, ctx


class working_precision:
    """Context manager setting flint's binary precision."""

    def __init__(self, bits: int):
        self.bits = int(bits)

    def __enter__(self):
        self._saved = ctx.prec
        ctx.prec = self.bits
        return self

    def __exit__(self, *exc):
        ctx.prec = self._saved
        return False


def to_numpy(m: arb_mat) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in m.tolist()], dtype=float)


def from_rows(rows) -> arb_mat:
    return arb_mat([list(r) for r in rows])


def column(values) -> arb_mat:
    values = list(values)
    return arb_mat(len(values), 1, [v if isinstance(v, arb) else arb(float(v)) for v in values])


def identity(n: int) -> arb_mat:
    out = arb_mat(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def cholesky(m: arb_mat) -> arb_mat:
    """Lower-triangular L with L L^T = m; raises ValueError when a pivot is not positive.

    Radii are dropped after every operation: arb trims midpoint bits once a
    radius grows, which would silently cost accuracy here.
    """
    n = m.nrows()
    a = [[x.mid() for x in row] for row in m.tolist()]
    L = [[arb(0)] * n for _ in range(n)]
    for j in range(n):
        s = a[j][j]
        for k in range(j):
            s = (s - L[j][k] * L[j][k]).mid()
        if not float(s) > 0:
            raise ValueError(f"non-positive pivot {float(s)!r} at column {j}")
        d = s.sqrt().mid()
        L[j][j] = d
        for i in range(j + 1, n):
            t = a[i][j]
            for k in range(j):
                t = (t - L[i][k] * L[j][k]).mid()
            L[i][j] = (t / d).mid()
    return arb_mat(L)


def solve(m: arb_mat, rhs: arb_mat) -> arb_mat:
    return m.solve(rhs, nonstop=True, algorithm="approx")


def dot(u: arb_mat, v: arb_mat):
    return (u.transpose() * v)[0, 0]


def norm2(v: arb_mat):
    return dot(v, v).sqrt()


def mid(x) -> arb:
    """Drop the error radius; the approximate algorithms carry no useful enclosure."""
    return x.mid()
