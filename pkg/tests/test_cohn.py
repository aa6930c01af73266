import random

import pytest

from twisted_ep.cohn import CohnAlgebra
from twisted_ep.ep import EPTuple
from twisted_ep.errors import DivergenceError, DomainError, MembershipError, UnsupportedTupleError
from twisted_ep.graph import Graph, paths_up_to
from twisted_ep.groups import CyclicGroup, Integers
from twisted_ep.katsura import KatsuraTriple, build_tuple
from twisted_ep.semigroup import STriple

from helpers import F7, Q, random_path, random_tuple


def kat(A, B, C=None, field=F7):
    return CohnAlgebra(build_tuple(KatsuraTriple.create(A, B, C), field))


def random_elem(rng, alg, terms=3, n=3, gbound=3):
    t = alg.tuple
    out = alg.zero()
    for _ in range(rng.randint(1, terms)):
        while True:
            a = random_path(rng, t.graph, n)
            b = random_path(rng, t.graph, n)
            g = t.group.random(rng, gbound)
            if t.act_vertex(g, b.rng) == a.rng:
                break
        out = out + alg.triple(a, g, b, t.field.random_unit(rng))
    return out


def random_kernel(rng, alg, terms=2, n=2, gbound=3):
    t = alg.tuple
    out = alg.zero()
    reg = t.graph.regular_vertices()
    for _ in range(terms):
        v = rng.choice(reg)
        g = t.group.random(rng, gbound)
        w = t.act_vertex(t.group.inv(g), v)
        a = [p for p in paths_up_to(t.graph, n, range_=v)]
        b = [p for p in paths_up_to(t.graph, n, range_=w)]
        out = out + alg.kernel_elem(rng.choice(a), g, rng.choice(b)) * t.field.random_unit(rng)
    return out


def test_cuntz_krieger_relations():
    alg = kat([[2]], [[1]], [[3]])
    e0, e1 = alg.edge("e0"), alg.edge("e1")
    assert (alg.ghost(["e0"]) * e1).is_zero()
    assert alg.ghost(["e0"]) * e0 == alg.vertex("v")


def test_group_times_edge():
    alg = kat([[2]], [[1]], [[3]])
    x = alg.vertex_group("v", 1) * alg.edge("e0")
    # c(t, e0) = -3 and t(e0) = e1, phi(t, e0) = 1
    assert x == alg.triple(["e1"], 0, ["v"], F7(-3))


def test_q_examples():
    alg = CohnAlgebra(EPTuple.trivial(Graph(["v"], [("e0", "v", "v"), ("e1", "v", "v")])))
    q = alg.q("v")
    assert q == alg.vertex("v") - alg.triple(["e0"], 0, ["e0"]) - alg.triple(["e1"], 0, ["e1"])
    assert q * q == q
    with pytest.raises(DomainError):
        CohnAlgebra(EPTuple.trivial(Graph(["v"], []))).q("v")


@pytest.mark.parametrize("kind", ["trivial", "Z/2", "klein", "S3", "Z"])
def test_q_products(kind):
    rng = random.Random(5)
    t = random_tuple(rng, kind, max_v=3, max_e=5)
    alg = CohnAlgebra(t)
    reg = t.graph.regular_vertices()
    grp = t.group
    for _ in range(40):
        if not reg:
            break
        v, w = rng.choice(reg), rng.choice(reg)
        g, h = grp.random(rng, 3), grp.random(rng, 3)
        lhs = alg.q(v, g) * alg.q(w, h)
        rhs = alg.q(v, grp.mul(g, h)) if v == t.act_vertex(g, w) else alg.zero()
        assert lhs == rhs


@pytest.mark.parametrize("kind", ["trivial", "Z/2", "Z/6", "Z", "klein"])
def test_associativity_random(kind):
    rng = random.Random(9)
    t = random_tuple(rng, kind, max_v=3, max_e=5)
    alg = CohnAlgebra(t)
    for _ in range(50):
        x, y, z = (random_elem(rng, alg, 2, 2) for _ in range(3))
        assert (x * y) * z == x * (y * z)


def test_kernel_basis_examples():
    alg = kat([[2]], [[1]], [[3]])
    v = alg.graph.vertex_path("v")
    assert alg.to_kernel_basis(alg.q("v")) == {(v, "v", 0, v): F7.one}
    a, b = alg.graph.path(["e0", "e1"]), alg.graph.path(["e1"])
    x = alg.kernel_elem(a, 2, b)
    assert alg.to_kernel_basis(x) == {(a, "v", 2, b): F7.one}
    coeffs = alg.to_kernel_basis(alg.q("v", 1) + alg.q("v"))
    assert coeffs == {(v, "v", 1, v): F7.one, (v, "v", 0, v): F7.one}
    with pytest.raises(MembershipError):
        alg.to_kernel_basis(alg.vertex("v"))


@pytest.mark.parametrize("A,B", [([[2]], [[1]]), ([[3]], [[-2]]), ([[1, 1], [1, 1]], [[0, 1], [2, 0]])])
def test_kernel_basis_round_trip(A, B):
    rng = random.Random(2)
    alg = kat(A, B)
    for _ in range(30):
        k = random_kernel(rng, alg)
        coeffs = alg.to_kernel_basis(k)
        assert alg.from_kernel_basis(coeffs) == k


def test_nf_examples():
    alg = CohnAlgebra(EPTuple.trivial(Graph(["v"], [("e0", "v", "v"), ("e1", "v", "v")])))
    assert alg.section == {"v": "e0"}
    assert alg.nf(alg.triple(["e0"], 0, ["e0"])) == alg.vertex("v") - alg.triple(["e1"], 0, ["e1"])
    kalg = kat([[2]], [[1]], [[3]])
    for g in range(-3, 4):
        assert kalg.nf(kalg.q("v", g)).is_zero()
    x = kalg.vertex_group("v", 2)
    y = sum((kalg.triple([e], kalg.tuple.phi(2, kalg.tuple.act_edge(-2, e)),
                         [kalg.tuple.act_edge(-2, e)], kalg.tuple.c(2, kalg.tuple.act_edge(-2, e)))
             for e in ["e0", "e1"]), kalg.zero())
    assert kalg.equal_in_L(x, y)
    assert not kalg.equal_in_L(kalg.vertex("v"), kalg.triple(["e1"], 0, ["e1"]))


@pytest.mark.parametrize("A,B", [([[2]], [[1]]), ([[3]], [[2]]), ([[2]], [[0]]),
                                 ([[1, 1], [1, 1]], [[0, 1], [1, 0]]), ([[1, 1], [1, 1]], [[2, -1], [3, 1]])])
def test_nf_projection_and_confluence(A, B):
    rng = random.Random(3)
    alg = kat(A, B, [[rng.randint(1, 6) if a else 1 for a in row] for row in A])
    for i in range(40):
        x = random_elem(rng, alg)
        y = alg.nf(x)
        assert alg.nf(y) == y
        assert alg.nf(x + random_kernel(rng, alg)) == y
        assert alg.nf(x, strategy="shuffled", seed=i) == y
        assert all(alg.is_normal(k) for k, _ in y)


def test_quotient_product_associative():
    rng = random.Random(4)
    alg = kat([[2]], [[1]], [[3]])
    for _ in range(30):
        x, y, z = (alg.nf(random_elem(rng, alg, 2, 2)) for _ in range(3))
        assert alg.nf(alg.nf(x * y) * z) == alg.nf(x * alg.nf(y * z))


def test_unsupported_tuple():
    # Z/4 swapping two loops with phi = 1: t^2 fixes both edges strongly but t does not
    g = Graph(["v"], [("e", "v", "v"), ("f", "v", "v")])
    t = EPTuple.from_generator(g, CyclicGroup(4), Q, edges={"e": "f", "f": "e"}, phi={"e": 0, "f": 0})
    alg = CohnAlgebra(t)
    assert alg.stratification.other == ["v"]
    with pytest.raises(UnsupportedTupleError):
        alg.nf(alg.vertex("v"))


def test_overlapping_section_refused():
    # v1 strongly fixed; v2 can only use the edge into v1, which carries phi = t^3
    alg = kat([[1, 1], [1, 1]], [[0, 0], [3, 0]])
    with pytest.raises(UnsupportedTupleError):
        alg.nf(alg.vertex("v1"))


def test_overlap_avoided_by_section_choice():
    # v2 has an injective loop, so its section avoids the strongly fixed vertex
    alg = kat([[1, 1], [1, 1]], [[0, 0], [3, -1]])
    assert alg.section["v2"] == "e_v2_v2_0"
    rng = random.Random(11)
    for _ in range(30):
        x = random_elem(rng, alg)
        y = alg.nf(x)
        assert alg.nf(x + random_kernel(rng, alg)) == y


def test_divergence_cap():
    alg = kat([[2]], [[1]])
    x = alg.triple(["e0", "e0", "e0"], 0, ["e0", "e0", "e0"])
    with pytest.raises(DivergenceError):
        alg.nf(x, cap=2)


def test_json_round_trip():
    rng = random.Random(6)
    alg = kat([[2]], [[1]], [[3]])
    x = random_elem(rng, alg)
    assert alg.from_json(x.to_json()) == x
