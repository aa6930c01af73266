import random
from fractions import Fraction

import pytest

from twisted_ep.errors import EncodingError, SchemaError
from twisted_ep.katsura import KatsuraTriple
from twisted_ep.ktheory import (UnitsModel, WMatrix, bf_modules, conjugate, d_star, kh_groups, standard_U,
                                standard_V, search_Y, stabilize)
from twisted_ep.scalars import Field
from twisted_ep.snf import AbGroup, coker_ker, det, identity, matmul

from helpers import F7, Q

F2 = Field.prime(2)
F3 = Field.prime(3)


def cyclic_span_size(gens, n):
    span, frontier = {0}, [0]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = (x + g) % n
            if y not in span:
                span.add(y)
                frontier.append(y)
    return len(span)


def random_unimodular(rng, n, steps=12):
    M = identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            M = [[-x for x in r] for r in M]
            continue
        k = rng.randint(-2, 2)
        M[i] = [a + k * b for a, b in zip(M[i], M[j])]
    return M


def block_upper(rng, n):
    """Unimodular [[X, Y], [0, Z]] with n x n blocks."""
    X, Z = random_unimodular(rng, n), random_unimodular(rng, n)
    out = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = X[i][j]
            out[n + i][n + j] = Z[i][j]
            out[i][n + j] = rng.randint(-2, 2)
    return out


def test_units_models():
    u = UnitsModel.prime_field(7)
    g = u.generators[0]
    for x in range(1, 7):
        (e,) = u.encode(F7(x))
        assert pow(g, e, 7) == x
    assert u.group == AbGroup(0, (6,))
    assert UnitsModel.prime_field(2).size == 0
    with pytest.raises(EncodingError):
        u.encode(F7(0))
    with pytest.raises(EncodingError):
        UnitsModel.prime_field(1_000_003, cap=1000)
    with pytest.raises(SchemaError):
        UnitsModel.prime_field(9)
    q = UnitsModel.rationals([2, 3])
    assert q.encode(Fraction(-12)) == [1, 2, 1]
    assert q.encode(Fraction(3, 4)) == [0, -2, 1]
    with pytest.raises(EncodingError):
        q.encode(Fraction(5))


@pytest.mark.parametrize("n", range(2, 9))
def test_kh0_leavitt(n):
    res = kh_groups(KatsuraTriple.create([[n]], [[1]]), UnitsModel.trivial(), F2)
    assert res.KH0 == AbGroup.from_orders(0, [n - 1])


def test_kh_examples():
    res = kh_groups(KatsuraTriple.create([[2]], [[1]]), UnitsModel.prime_field(3), F3)
    assert res.KH0.is_zero()
    res = kh_groups(KatsuraTriple.create([[3]], [[1]]), UnitsModel.trivial(), F2)
    assert str(res.KH0) == "Z/2"
    # one loop: Phi_1 = 0, so KH_1 = U ⊕ Z from its cokernel plus Z from ker(I - A^t)
    res = kh_groups(KatsuraTriple.create([[1]], [[1]]), UnitsModel.prime_field(3), F3)
    assert res.KH0 == AbGroup(1)
    assert res.KH1 == AbGroup(2, (2,))
    assert res.witness["ker_I_minus_At"] == "Z"


@pytest.mark.parametrize("a", [2, 3, 4, 5, 7])
@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_kh1_over_f7_against_enumeration(a, j):
    units = UnitsModel.prime_field(7)
    g = units.generators[0]
    k = KatsuraTriple.create([[a]], [[1]], [[pow(g, j, 7)]])
    res = kh_groups(k, units, F7)
    assert res.KH0 == AbGroup.from_orders(0, [a - 1])
    torsion = 6 // cyclic_span_size([(1 - a) % 6, j % 6], 6)
    assert res.KH1 == AbGroup.from_orders(1, [torsion])


def test_kh1_generator_example():
    units = UnitsModel.prime_field(7)
    k = KatsuraTriple.create([[3]], [[1]], [[units.generators[0]]])
    res = kh_groups(k, units, F7)
    assert str(res.KH0) == "Z/2" and str(res.KH1) == "Z"


def random_square_triple(rng, n, field, trivial_c=False):
    while True:
        A = [[rng.randint(0, 3) for _ in range(n)] for _ in range(n)]
        if all(any(r) for r in A):
            break
    B = [[rng.randint(-3, 3) if a else 0 for a in r] for r in A]
    if trivial_c or field.p == 2:
        C = None
    else:
        C = [[rng.randint(1, field.p - 1) if a else 1 for a in r] for r in A]
    return KatsuraTriple.create(A, B, C)


@pytest.mark.parametrize("seed", range(15))
def test_trivial_units_regression(seed):
    rng = random.Random(seed)
    k = random_square_triple(rng, rng.randint(1, 3), F2)
    res = kh_groups(k, UnitsModel.trivial(), F2)
    n = len(k.rows)
    ia = [[int(i == j) - k.A[j][i] for j in range(n)] for i in range(n)]
    ib = [[int(i == j) - k.B[j][i] for j in range(n)] for i in range(n)]
    assert res.KH0 == coker_ker(ia)[0]
    assert res.KH1 == coker_ker(ib)[0] + coker_ker(ia)[1]


@pytest.mark.parametrize("seed", range(10))
def test_permutation_invariance(seed):
    rng = random.Random(50 + seed)
    n = rng.randint(2, 3)
    k = random_square_triple(rng, n, F7)
    perm = list(range(n))
    rng.shuffle(perm)
    P = lambda M: [[M[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
    k2 = KatsuraTriple.create(P(k.A), P(k.B), P(k.C))
    units = UnitsModel.prime_field(7)
    r1, r2 = kh_groups(k, units, F7), kh_groups(k2, units, F7)
    assert (r1.KH0, r1.KH1) == (r2.KH0, r2.KH1)
    assert bf_modules(k, units, F7) == bf_modules(k2, units, F7)


def test_kh_over_rationals():
    k = KatsuraTriple.create([[2]], [[1]], [[Fraction(-2)]])
    res = kh_groups(k, UnitsModel.rationals([2]), Q)
    assert res.KH0.is_zero()
    with pytest.raises(EncodingError):
        kh_groups(k, UnitsModel.rationals([3]), Q)


def test_bf_examples():
    bf, bfc = bf_modules(KatsuraTriple.create([[2]], [[1]]), UnitsModel.trivial(), F2)
    assert bf == AbGroup(1) and bfc == AbGroup(1)
    rng = random.Random(3)
    for _ in range(10):
        k = random_square_triple(rng, 2, F2)
        n = 2
        ia = [[int(i == j) - k.A[j][i] for j in range(n)] for i in range(n)]
        ib = [[int(i == j) - k.B[j][i] for j in range(n)] for i in range(n)]
        bf, _ = bf_modules(k, UnitsModel.trivial(), F2)
        assert bf == coker_ker(ia)[0] + coker_ker(ib)[0]


def test_wmatrix_product_rule():
    a = WMatrix([[1, 2], [0, 1]], [[[0, 1], [1, 0]]], 2, 2)
    b = WMatrix([[2, 0], [1, 1]], [[[1, 0], [0, 2]]], 2, 2)
    c = a @ b
    assert c.Z == matmul(a.Z, b.Z)
    expect = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(matmul(a.L[0], b.Z), matmul(a.Z, b.L[0]))]
    assert c.L[0] == expect


def test_stabilize_shape():
    E = stabilize([[1]], [[1]], [[0]])
    assert E.Z == identity(4) and E.L == [[[0] * 4 for _ in range(4)]]
    E = stabilize([[2, 1], [0, 1]], [[1, 0], [3, 1]], [[1, 0], [0, 2]])
    assert E.L[0][0][4] == 1 and E.L[0][1][5] == 2
    nonzero = {(i, j) for i in range(8) for j in range(8) if E.L[0][i][j]}
    assert all(i < 2 and 4 <= j < 6 for i, j in nonzero)


def test_stabilize_preserves_invariants():
    rng = random.Random(8)
    units = UnitsModel.free(1)
    for _ in range(20):
        n = rng.randint(1, 3)
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        N = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        P = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        E = stabilize(M, N, P)
        Z = [[0] * (2 * n) for _ in range(2 * n)]
        L = [[0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            for j in range(n):
                Z[i][j], Z[n + i][n + j], L[i][n + j] = M[i][j], N[i][j], P[i][j]
        small = WMatrix(Z, [L], 2 * n, 2 * n)
        assert E.coker(units) == small.coker(units)
        assert E.ker_rank(units) == small.ker_rank(units)


def test_conjugate_identity():
    E = stabilize([[1, -1], [0, 2]], [[0, 1], [1, 1]], [[1, 0], [0, 1]])
    res = conjugate(E, identity(8), identity(8))
    assert res.matrix == E and res.invariant


@pytest.mark.parametrize("seed", range(20))
def test_conjugation_invariance(seed):
    rng = random.Random(200 + seed)
    n = rng.randint(1, 3)
    M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    N = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
    P = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
    E = stabilize(M, N, P)
    U, V = block_upper(rng, 2 * n), block_upper(rng, 2 * n)
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    res = conjugate(E, U, V)
    assert res.invariant
    units = UnitsModel.free(1)
    assert res.matrix.coker(units) == E.coker(units)


def test_conjugate_rejects_non_unimodular():
    E = stabilize([[1]], [[1]], [[0]])
    U = identity(4)
    U[0][0] = 2
    with pytest.raises(SchemaError):
        conjugate(E, U, identity(4))


def test_standard_transforms_give_negative_a():
    n = 1
    E = stabilize([[2]], [[1]], [[1]])
    res = conjugate(E, standard_U(n), standard_V(n, [[0]]))
    assert not res.katsura_form
    assert any("< 0" in p for p in res.problems)
    assert res.invariant


def test_search_y_reports_failure():
    out = search_Y([[2]], [[1]], [[1]], bound=2)
    assert out["found"] is False and out["tried"] == 5
    assert sum(out["failure_reasons"].values()) == 5


def test_d_star_blocks():
    units = UnitsModel.prime_field(7)
    k = KatsuraTriple.create([[2, 1], [1, 1]], [[1, 0], [1, 1]], [[3, 2], [1, 6]])
    D = d_star(k, units, F7)
    assert [r[:2] for r in D.Z[:2]] == [[-1, -1], [-1, 0]]
    assert [r[2:] for r in D.Z[2:]] == [[0, -1], [0, 0]]
    assert all(x == 0 for r in D.L[0][2:] for x in r)
    # exponent of C[w][v] sits at (v, w) of the upper-right block
    assert D.L[0][1][2] == units.encode(F7(2))[0]
