"""Smith normal form over the integers and finitely generated abelian groups.

Matrices are lists of lists of Python ints.  ``smith_normal_form(M)`` returns
``(U, S, V)`` with ``M == U @ S @ V`` and U, V unimodular.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


def identity(n: int) -> list:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(n: int, m: int) -> list:
    return [[0] * m for _ in range(n)]


def matmul(a: list, b: list) -> list:
    if not a:
        return []
    inner = len(b)
    m = len(b[0]) if b else 0
    if any(len(row) != inner for row in a):
        raise ValueError("shape mismatch in matmul")
    bt = list(zip(*b)) if b else [()] * m
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a: list) -> list:
    return [list(r) for r in zip(*a)]


def shape(a: list, cols: int | None = None) -> tuple:
    return (len(a), len(a[0]) if a else (cols or 0))


def det(a: list) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def smith_normal_form(M: list, ncols: int | None = None):
    """Return ``(U, S, V)`` with ``M = U S V``.

    S is diagonal with nonnegative entries ``d_1 | d_2 | ...``.  Pivots are
    chosen by minimal absolute value.  ``ncols`` gives the width of a matrix
    with no rows.
    """
    n = len(M)
    m = len(M[0]) if M else (ncols or 0)
    S = [list(r) for r in M]
    U = identity(n)
    V = identity(m)

    # row op: row_i += k * row_j  (U gets column_j -= k * column_i)
    def add_row(i, j, k):
        S[i] = [x + k * y for x, y in zip(S[i], S[j])]
        for r in U:
            r[j] -= k * r[i]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        for r in U:
            r[i], r[j] = r[j], r[i]

    def neg_row(i):
        S[i] = [-x for x in S[i]]
        for r in U:
            r[i] = -r[i]

    # column op: col_i += k * col_j  (V gets row_j -= k * row_i)
    def add_col(i, j, k):
        for r in S:
            r[i] += k * r[j]
        V[j] = [x - k * y for x, y in zip(V[j], V[i])]

    def swap_cols(i, j):
        for r in S:
            r[i], r[j] = r[j], r[i]
        V[i], V[j] = V[j], V[i]

    t = 0
    while t < min(n, m):
        best = None
        for i in range(t, n):
            for j in range(t, m):
                x = S[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, n):
                if S[i][t]:
                    add_row(i, t, -(S[i][t] // S[t][t]))
                    if S[i][t]:
                        done = False
            for j in range(t + 1, m):
                if S[t][j]:
                    add_col(j, t, -(S[t][j] // S[t][t]))
                    if S[t][j]:
                        done = False
            if not done:
                # move the smallest leftover in row/column t to the pivot
                cands = [(abs(S[i][t]), i, t) for i in range(t + 1, n) if S[i][t]]
                cands += [(abs(S[t][j]), t, j) for j in range(t + 1, m) if S[t][j]]
                _, i, j = min(cands)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, m)
                        if S[i][j] % S[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if S[t][t] < 0:
            neg_row(t)
        t += 1
    return U, S, V


def diagonal(S: list) -> list:
    return [S[i][i] for i in range(min(len(S), len(S[0]) if S else 0))]


def rank(M: list) -> int:
    if not M or not M[0]:
        return 0
    return sum(1 for d in diagonal(smith_normal_form(M)[1]) if d)


@dataclass(frozen=True)
class AbGroup:
    """``Z^rank`` plus cyclic torsion with invariant factors ``d_1 | d_2 | ...``."""

    rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        if self.rank < 0 or any(d < 2 for d in self.torsion):
            raise ValueError("invalid abelian group data")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError("torsion must be a divisibility chain")

    @classmethod
    def from_orders(cls, rank: int = 0, orders=()) -> "AbGroup":
        """Normalize a direct sum of ``Z^rank`` and cyclic groups of the given orders."""
        orders = [abs(d) for d in orders]
        rank += sum(1 for d in orders if d == 0)
        orders = [d for d in orders if d > 1]
        if not orders:
            return cls(rank, ())
        diag = [[0] * len(orders) for _ in orders]
        for i, d in enumerate(orders):
            diag[i][i] = d
        inv = tuple(d for d in diagonal(smith_normal_form(diag)[1]) if d > 1)
        return cls(rank, inv)

    def __add__(self, other: "AbGroup") -> "AbGroup":
        return AbGroup.from_orders(self.rank + other.rank, self.torsion + other.torsion)

    @property
    def order(self):
        """Cardinality, or None when infinite."""
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __str__(self):
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str) -> "AbGroup":
        text = text.strip()
        if text == "0":
            return cls()
        rank, orders = 0, []
        for part in re.split(r"\s*(?:⊕|\+)\s*", text):
            m = re.fullmatch(r"Z(?:\^(\d+))?", part)
            if m:
                rank += int(m.group(1) or 1)
                continue
            m = re.fullmatch(r"Z/(\d+)", part)
            if not m:
                raise ValueError(f"cannot parse abelian group {text!r}")
            orders.append(int(m.group(1)))
        return cls.from_orders(rank, orders)

    def to_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion), "str": str(self)}


def coker_ker(M: list, ncols: int | None = None):
    """Cokernel and kernel of ``M: Z^cols -> Z^rows``; the kernel is free."""
    n = len(M)
    m = len(M[0]) if M else (ncols or 0)
    if n == 0 or m == 0:
        return AbGroup(n), AbGroup(m)
    d = diagonal(smith_normal_form(M)[1])
    r = sum(1 for x in d if x)
    coker = AbGroup.from_orders(n - r, [x for x in d if x])
    return coker, AbGroup(m - r)
