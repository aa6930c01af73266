"""KH_0 and KH_1 of twisted Katsura algebras over a field, the modules
coker(I - D*) and coker(I - D), and the stabilize/conjugate manipulations.

The ring W = Z ⊕ U (U the unit group of the field, written additively
through a :class:`UnitsModel`) multiplies as ``(n, a)(m, b) = (nm, m a + n b)``.
A W-matrix is stored as a pair ``(Z, L)``: the integer parts and, for each
generator of U, the matrix of exponents of the unit parts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .errors import EncodingError, SchemaError
from .katsura import KatsuraTriple, is_kspi
from .scalars import Field, is_prime
from .snf import AbGroup, coker_ker, det, identity, matmul, smith_normal_form, diagonal, zeros

DEFAULT_PRIME_CAP = 10 ** 6


class UnitsModel:
    """A finitely generated subgroup of the unit group as ``Z^r ⊕ torsion``.

    ``orders[s]`` is the order of generator s (0 for infinite order) and
    ``encode`` maps a unit to its exponent vector.
    """

    def __init__(self, orders, encoder, generators=None, name=""):
        self.orders = list(orders)
        self._encode = encoder
        self.generators = list(generators or [])
        self.name = name

    @property
    def size(self) -> int:
        return len(self.orders)

    @property
    def group(self) -> AbGroup:
        return AbGroup.from_orders(0, self.orders)

    def encode(self, u) -> list:
        vec = self._encode(u)
        return [x % o if o else x for x, o in zip(vec, self.orders)]

    @classmethod
    def trivial(cls) -> "UnitsModel":
        return cls([], lambda u: [], name="trivial")

    @classmethod
    def free(cls, k: int) -> "UnitsModel":
        """Abstract free model; units are given directly as exponent vectors."""
        return cls([0] * k, lambda u: list(u) if isinstance(u, (list, tuple)) else [int(u)],
                   name=f"free rank {k}")

    @classmethod
    def prime_field(cls, p: int, cap: int = DEFAULT_PRIME_CAP) -> "UnitsModel":
        if not is_prime(p):
            raise SchemaError(f"{p} is not prime")
        if p == 2:
            return cls.trivial()
        if p > cap:
            raise EncodingError(f"p = {p} exceeds the discrete-log cap {cap}")
        n = p - 1
        factors = [q for q in range(2, n + 1) if n % q == 0 and is_prime(q)]
        g = next(x for x in range(2, p) if all(pow(x, n // q, p) != 1 for q in factors))
        table = {}
        y = 1
        for k in range(n):
            table[y] = k
            y = y * g % p
        field = Field.prime(p)

        def enc(u):
            v = int(field(u).value) if not isinstance(u, int) else u % p
            if v not in table:
                raise EncodingError(f"{u} is not a unit of F_{p}")
            return [table[v]]

        return cls([n], enc, generators=[g], name=f"F_{p}* = <{g}>")

    @classmethod
    def rationals(cls, primes=()) -> "UnitsModel":
        """Generated by -1 and the given primes; other units are rejected."""
        primes = sorted(set(int(p) for p in primes))
        for p in primes:
            if not is_prime(p):
                raise SchemaError(f"{p} is not prime")

        def enc(u):
            q = Fraction(u)
            if q == 0:
                raise EncodingError("0 is not a unit")
            vec = [1 if q < 0 else 0]
            num, den = abs(q.numerator), q.denominator
            for p in primes:
                k = 0
                while num % p == 0:
                    num //= p
                    k += 1
                while den % p == 0:
                    den //= p
                    k -= 1
                vec.append(k)
            if num != 1 or den != 1:
                raise EncodingError(f"unit {q} is not in the span of -1 and primes {primes}")
            return vec

        return cls([2] + [0] * len(primes), enc, generators=[-1] + primes,
                   name="Q* ⊇ <-1" + "".join(f", {p}" for p in primes) + ">")

    @classmethod
    def for_field(cls, field: Field, primes=(), cap: int = DEFAULT_PRIME_CAP) -> "UnitsModel":
        if field.is_rational:
            return cls.rationals(primes)
        return cls.prime_field(field.p, cap)

    def to_json(self) -> dict:
        return {"name": self.name, "group": str(self.group), "orders": self.orders,
                "generators": [str(g) for g in self.generators]}


# W-matrices

@dataclass
class WMatrix:
    """A matrix over W: integer parts ``Z`` and one exponent matrix per unit generator."""

    Z: list
    L: list
    rows: int
    cols: int

    @classmethod
    def integer(cls, Z: list, k: int, cols: int | None = None) -> "WMatrix":
        r = len(Z)
        c = len(Z[0]) if Z else (cols or 0)
        return cls([list(x) for x in Z], [zeros(r, c) for _ in range(k)], r, c)

    @property
    def k(self) -> int:
        return len(self.L)

    def __matmul__(self, other: "WMatrix") -> "WMatrix":
        if self.cols != other.rows or self.k != other.k:
            raise ValueError("W-matrix shape mismatch")
        Z = matmul(self.Z, other.Z) if self.rows and other.cols else zeros(self.rows, other.cols)
        L = []
        for a, b in zip(self.L, other.L):
            x = matmul(a, other.Z) if self.rows and other.cols else zeros(self.rows, other.cols)
            y = matmul(self.Z, b) if self.rows and other.cols else zeros(self.rows, other.cols)
            L.append([[p + q for p, q in zip(r1, r2)] for r1, r2 in zip(x, y)])
        return WMatrix(Z, L, self.rows, other.cols)

    def block(self, r0, r1, c0, c1) -> "WMatrix":
        return WMatrix([row[c0:c1] for row in self.Z[r0:r1]],
                       [[row[c0:c1] for row in m[r0:r1]] for m in self.L], r1 - r0, c1 - c0)

    def underlying(self, units: UnitsModel) -> list:
        """Integer matrix of the group map W^cols -> W^rows, torsion relations appended.

        Coordinates per index: the Z part first, then one per unit generator.
        """
        k = self.k
        if units.size != k:
            raise ValueError("units model does not match the W-matrix")
        w = k + 1
        M = zeros(self.rows * w, self.cols * w)
        for i in range(self.rows):
            for j in range(self.cols):
                z = self.Z[i][j]
                M[i * w][j * w] = z
                for s in range(k):
                    M[i * w + 1 + s][j * w] = self.L[s][i][j]
                    M[i * w + 1 + s][j * w + 1 + s] = z
        for i in range(self.rows):
            for s, o in enumerate(units.orders):
                if o:
                    col = [0] * (self.rows * w)
                    col[i * w + 1 + s] = o
                    for r, x in zip(M, col):
                        r.append(x)
        return M

    def coker(self, units: UnitsModel) -> AbGroup:
        return coker_ker(self.underlying(units), ncols=self._ncols(units))[0]

    def _ncols(self, units):
        torsion = sum(1 for o in units.orders if o) * self.rows
        return self.cols * (self.k + 1) + torsion

    def ker_rank(self, units: UnitsModel) -> int:
        """Rank of the kernel of the underlying map with U replaced by Z^k."""
        M = self.underlying(UnitsModel.free(self.k))
        return coker_ker(M, ncols=self.cols * (self.k + 1))[1].rank

    def to_json(self) -> dict:
        return {"Z": self.Z, "L": self.L}


def _as_int_matrix(rows, cols, f):
    return [[f(i, j) for j in range(cols)] for i in range(rows)]


def _incl(k: KatsuraTriple):
    """The E^0 x reg(E) inclusion matrix I."""
    return _as_int_matrix(len(k.cols), len(k.rows), lambda i, j: int(k.cols[i] == k.rows[j]))


def _log_C(k: KatsuraTriple, units: UnitsModel, field: Field):
    """``logC[s][w][v]``: exponent of generator s in ``C[w][v]`` (w in reg, v in E^0)."""
    C = k.units(field)
    logs = [zeros(len(k.rows), len(k.cols)) for _ in range(units.size)]
    for i in range(len(k.rows)):
        for j in range(len(k.cols)):
            vec = units.encode(C[i][j])
            for s, x in enumerate(vec):
                logs[s][i][j] = x
    return logs


def i_minus_at(k: KatsuraTriple) -> list:
    I = _incl(k)
    return [[I[v][w] - k.A[w][v] for w in range(len(k.rows))] for v in range(len(k.cols))]


def i_minus_bt(k: KatsuraTriple) -> list:
    I = _incl(k)
    return [[I[v][w] - k.B[w][v] for w in range(len(k.rows))] for v in range(len(k.cols))]


def d_star(k: KatsuraTriple, units: UnitsModel, field: Field) -> WMatrix:
    """``I - D*`` as a (2 E^0) x (2 reg) W-matrix.

    Upper-left ``I - A^t``, lower-right ``I - B^t``, upper-right the unit
    block ``-C*`` with ``C*[v][w] = C[w][v]^-1``, so its exponents are ``log C[w][v]``.
    """
    n, m = len(k.rows), len(k.cols)
    ia, ib = i_minus_at(k), i_minus_bt(k)
    logs = _log_C(k, units, field)
    Z = zeros(2 * m, 2 * n)
    L = [zeros(2 * m, 2 * n) for _ in range(units.size)]
    for v in range(m):
        for w in range(n):
            Z[v][w] = ia[v][w]
            Z[m + v][n + w] = ib[v][w]
            for s in range(units.size):
                L[s][v][n + w] = logs[s][w][v]
    return WMatrix(Z, L, 2 * m, 2 * n)


def d_checked(k: KatsuraTriple, units: UnitsModel, field: Field) -> WMatrix:
    """``I - D`` with ``D = [[A, 0], [C, B]]`` as a (2 reg) x (2 E^0) W-matrix."""
    n, m = len(k.rows), len(k.cols)
    I = _incl(k)
    logs = _log_C(k, units, field)
    Z = zeros(2 * n, 2 * m)
    L = [zeros(2 * n, 2 * m) for _ in range(units.size)]
    for w in range(n):
        for v in range(m):
            Z[w][v] = I[v][w] - k.A[w][v]
            Z[n + w][m + v] = I[v][w] - k.B[w][v]
            for s in range(units.size):
                L[s][n + w][v] = -logs[s][w][v]
    return WMatrix(Z, L, 2 * n, 2 * m)


def phi1_matrix(k: KatsuraTriple, units: UnitsModel, field: Field) -> tuple:
    """Integer matrix of ``Phi_1: U^reg ⊕ Z^reg -> U^E0 ⊕ Z^E0`` with torsion columns.

    ``Phi_1(u, x) = ((I - A^t) u + C*(x), (I - B^t) x)`` where
    ``C*(x)_v = -sum_w x_w log C[w][v]``.  Codomain coordinates: (v, s) for the
    unit part in row ``v*k + s``, then the integer part.
    """
    n, m, kk = len(k.rows), len(k.cols), units.size
    ia, ib = i_minus_at(k), i_minus_bt(k)
    logs = _log_C(k, units, field)
    rows = m * kk + m
    M = zeros(rows, 0)
    cols = []
    for w in range(n):
        for s in range(kk):
            col = [0] * rows
            for v in range(m):
                col[v * kk + s] = ia[v][w]
            cols.append(col)
    for w in range(n):
        col = [0] * rows
        for v in range(m):
            for s in range(kk):
                col[v * kk + s] = -logs[s][w][v]
            col[m * kk + v] = ib[v][w]
        cols.append(col)
    for v in range(m):
        for s, o in enumerate(units.orders):
            if o:
                col = [0] * rows
                col[v * kk + s] = o
                cols.append(col)
    M = [[c[r] for c in cols] for r in range(rows)]
    return M, len(cols)


@dataclass
class KHResult:
    KH0: AbGroup
    KH1: AbGroup
    witness: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"KH0": str(self.KH0), "KH1": str(self.KH1), "witness": self.witness}


def kh_groups(k: KatsuraTriple, units: UnitsModel, field: Field) -> KHResult:
    """``KH_0 = coker(I - A^t)``, ``KH_1 = coker(Phi_1) ⊕ ker(I - A^t)``."""
    ia = i_minus_at(k)
    coker_a, ker_a = coker_ker(ia, ncols=len(k.rows))
    M, ncols = phi1_matrix(k, units, field)
    coker_phi, _ = coker_ker(M, ncols=ncols)
    kh1 = coker_phi + ker_a
    snf_a = diagonal(smith_normal_form(ia)[1]) if ia and ia[0] else []
    snf_p = diagonal(smith_normal_form(M)[1]) if M and ncols else []
    witness = {
        "units": units.to_json(),
        "I_minus_At": ia,
        "snf_I_minus_At": snf_a,
        "coker_I_minus_At": str(coker_a),
        "ker_I_minus_At": str(ker_a),
        "Phi1_shape": [len(M), ncols],
        "snf_Phi1": snf_p,
        "coker_Phi1": str(coker_phi),
        "exact_sequence": f"0 -> {coker_phi} -> KH1 -> {ker_a} -> 0 (split, kernel free)",
    }
    return KHResult(coker_a, kh1, witness)


def bf_modules(k: KatsuraTriple, units: UnitsModel, field: Field) -> tuple:
    """Underlying groups of ``coker(I - D*)`` and ``coker(I - D)``."""
    return d_star(k, units, field).coker(units), d_checked(k, units, field).coker(units)


# stabilization and conjugation

def stabilize(M: list, N: list, P: list) -> WMatrix:
    """``[[M,0,P,0],[0,I,0,0],[0,0,N,0],[0,0,0,I]]`` with P the unit-exponent block.

    P entries are integers (one unit generator) or exponent vectors.
    """
    n = len(M)
    k = 1
    for row in P:
        for x in row:
            if isinstance(x, (list, tuple)):
                k = len(x)
    Z = zeros(4 * n, 4 * n)
    L = [zeros(4 * n, 4 * n) for _ in range(k)]
    for i in range(n):
        Z[n + i][n + i] = 1
        Z[3 * n + i][3 * n + i] = 1
        for j in range(n):
            Z[i][j] = M[i][j]
            Z[2 * n + i][2 * n + j] = N[i][j]
            x = P[i][j]
            vec = list(x) if isinstance(x, (list, tuple)) else [x]
            for s in range(k):
                L[s][i][2 * n + j] = vec[s]
    return WMatrix(Z, L, 4 * n, 4 * n)


def standard_U(n: int) -> list:
    U = identity(4 * n)
    for i in range(n):
        U[i][n + i] = 1
    return U


def standard_V(n: int, Y: list) -> list:
    V = zeros(4 * n, 4 * n)
    for i in range(n):
        V[i][n + i] = -1
        V[n + i][i] = 1
        V[2 * n + i][3 * n + i] = -1
        V[3 * n + i][2 * n + i] = -1
        for j in range(n):
            V[n + i][n + j] = Y[i][j]
    return V


@dataclass
class ConjugateResult:
    matrix: WMatrix
    A: list
    B: list
    C_log: list
    katsura_form: bool
    problems: list
    kspi: dict | None
    invariant: bool

    def to_json(self) -> dict:
        return {"A": self.A, "B": self.B, "C_exponents": self.C_log,
                "katsura_form": self.katsura_form, "problems": self.problems,
                "kspi": self.kspi, "invariants_preserved": self.invariant}


def conjugate(E: WMatrix, U: list, V: list, units: UnitsModel | None = None) -> ConjugateResult:
    """Form ``U E V`` and read off ``[[I - A^t, C*], [0, I - B^t]]``.

    The result is checked for a Katsura triple (``A >= 0`` and the vanishing
    conditions); failures are reported, not raised.
    """
    for name, X in (("U", U), ("V", V)):
        if abs(det(X)) != 1:
            raise SchemaError(f"{name} is not unimodular")
    units = units or UnitsModel.free(E.k)
    W = WMatrix.integer(U, E.k) @ E @ WMatrix.integer(V, E.k)
    size = W.rows // 2
    problems = []
    lower_left = W.block(size, 2 * size, 0, size)
    if any(any(r) for r in lower_left.Z) or any(any(any(r) for r in m) for m in lower_left.L):
        problems.append("lower-left block is not zero")
    ul, lr, ur = W.block(0, size, 0, size), W.block(size, 2 * size, size, 2 * size), \
        W.block(0, size, size, 2 * size)
    if any(any(any(r) for r in m) for m in ul.L) or any(any(any(r) for r in m) for m in lr.L):
        problems.append("diagonal blocks carry unit parts")
    At = [[int(i == j) - ul.Z[i][j] for j in range(size)] for i in range(size)]
    Bt = [[int(i == j) - lr.Z[i][j] for j in range(size)] for i in range(size)]
    A = [list(r) for r in zip(*At)]
    B = [list(r) for r in zip(*Bt)]
    # C*[v][w] = C[w][v]^-1, and the block stores C* itself
    C_log = [[[-m[j][i] for m in ur.L] for j in range(size)] for i in range(size)]
    if any(any(r) for r in ur.Z):
        problems.append("upper-right block has integer parts")
    for i in range(size):
        for j in range(size):
            if A[i][j] < 0:
                problems.append(f"A[{i}][{j}] = {A[i][j]} < 0")
            elif A[i][j] == 0 and B[i][j] != 0:
                problems.append(f"A[{i}][{j}] = 0 but B[{i}][{j}] = {B[i][j]}")
            elif A[i][j] == 0 and any(C_log[i][j]):
                problems.append(f"A[{i}][{j}] = 0 but C[{i}][{j}] != 1")
    kspi = None
    if not problems:
        if any(not any(r) for r in A):
            problems.append("A has a zero row")
        else:
            rep = is_kspi(KatsuraTriple.create(A, B))
            kspi = rep.to_json()
    before = (E.coker(units), E.ker_rank(units))
    after = (W.coker(units), W.ker_rank(units))
    return ConjugateResult(W, A, B, C_log, not problems, problems, kspi, before == after)


def search_Y(M: list, N: list, P: list, bound: int = 3, limit: int | None = None) -> dict:
    """Try small-entry Y in the standard V to reach a KSPI triple.

    Returns the first success, or a report of how many candidates failed.
    """
    n = len(M)
    E = stabilize(M, N, P)
    U = standard_U(n)
    tried = 0
    reasons: dict = {}
    for entries in itertools.product(range(-bound, bound + 1), repeat=n * n):
        Y = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
        res = conjugate(E, U, standard_V(n, Y))
        tried += 1
        if res.katsura_form and res.kspi and res.kspi["kspi"]:
            return {"found": True, "Y": Y, "tried": tried, "result": res.to_json()}
        key = res.problems[0].split("=")[0] if res.problems else (res.kspi or {}).get("failed", "")
        reasons[key] = reasons.get(key, 0) + 1
        if limit is not None and tried >= limit:
            break
    return {"found": False, "tried": tried, "failure_reasons": reasons}
