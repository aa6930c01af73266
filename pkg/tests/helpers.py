"""Random tuple generators and independent oracles shared by the tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

from twisted_ep.ep import EPTuple
from twisted_ep.graph import Graph, Path
from twisted_ep.groups import CyclicGroup, Integers, TableGroup, klein_four, symmetric_group_3
from twisted_ep.scalars import Field

Q = Field.rationals()
F7 = Field.prime(7)


def random_graph(rng: random.Random, max_v: int = 5, max_e: int = 8) -> Graph:
    n = rng.randint(1, max_v)
    vs = [f"v{i}" for i in range(n)]
    m = rng.randint(0, max_e)
    edges = [(f"e{j}", rng.choice(vs), rng.choice(vs)) for j in range(m)]
    return Graph(vs, edges)


def _random_unit(rng, field):
    if field.is_rational:
        return rng.choice([Fraction(1), Fraction(-1), Fraction(2), Fraction(-1, 3), Fraction(5, 2)])
    return field(rng.randint(1, field.p - 1))


def random_cyclic_tuple(rng: random.Random, order: int | None, field: Field = Q,
                        max_v: int = 5, max_e: int = 8) -> EPTuple:
    """A tuple for Z (order None) or Z/order built from generator data.

    Vertices are permuted by a random permutation whose order divides the
    group order; edges come in orbits following that permutation, phi(t, e)
    is ``t^(1 + d r)`` (d the vertex permutation order) and c is random with
    the orbit constraints needed for finite groups.
    """
    n = rng.randint(1, max_v)
    vs = [f"v{i}" for i in range(n)]
    # vertex permutation: cycles of lengths dividing the order
    lengths = [1] if order is None else [d for d in range(1, order + 1) if order % d == 0]
    if order is None:
        lengths = [1, 2, 3]
    perm = {}
    pool = vs[:]
    rng.shuffle(pool)
    while pool:
        L = min(rng.choice(lengths), len(pool))
        if order is not None and order % L:
            L = 1
        cyc, pool = pool[:L], pool[L:]
        for i, v in enumerate(cyc):
            perm[v] = cyc[(i + 1) % L]
    d = 1
    for v in vs:
        k, w = 1, perm[v]
        while w != v:
            w, k = perm[w], k + 1
        d = d * k // math.gcd(d, k)

    def vpow(v, k):
        for _ in range(k):
            v = perm[v]
        return v

    edges, eperm, phi, c = [], {}, {}, {}
    budget = rng.randint(0, max_e)
    idx = 0
    while budget > 0:
        s, r = rng.choice(vs), rng.choice(vs)
        q = 1
        while (vpow(s, q), vpow(r, q)) != (s, r):
            q += 1
        if order is None:
            mult = rng.choice([1, 1, 2])
        else:
            mults = [j for j in range(1, order // q + 1) if order % (q * j) == 0]
            mult = rng.choice(mults)
        L = q * mult
        if L > budget:
            if q > budget:
                break
            L = q
        names = [f"e{idx + i}" for i in range(L)]
        idx += L
        budget -= L
        rs = [rng.randint(-2, 2) for _ in range(L)]
        cs = [_random_unit(rng, field) for _ in range(L)]
        if order is not None:
            rs[-1] = -sum(rs[:-1])
            prod = field.one
            for x in cs[:-1]:
                prod = prod * x
            cs[-1] = field.one / prod
        for i, e in enumerate(names):
            edges.append((e, vpow(s, i), vpow(r, i)))
            eperm[e] = names[(i + 1) % L]
            phi[e] = 1 + d * rs[i]
            c[e] = cs[i]
    graph = Graph(vs, edges)
    group = Integers() if order is None else CyclicGroup(order)
    return EPTuple.from_generator(graph, group, field, vertices=perm, edges=eperm, phi=phi, c=c)


def _characters(group: TableGroup):
    """Homomorphisms G -> {+1, -1} found by brute force."""
    els = group.elements()
    out = []
    for vals in itertools.product([1, -1], repeat=len(els)):
        if vals[group.identity] != 1:
            continue
        if all(vals[group.mul(a, b)] == vals[a] * vals[b] for a in els for b in els):
            out.append(vals)
    return out


def random_table_tuple(rng: random.Random, group: TableGroup, field: Field = Q,
                       max_v: int = 4, max_e: int = 6) -> EPTuple:
    """Table-group tuple: G acts through a character on a graph with an
    involution, phi(g, e) = g and c(g, e) a character value."""
    chars = _characters(group)
    n = rng.randint(1, max_v)
    vs = [f"v{i}" for i in range(n)]
    half = [v for v in vs]
    vinv = {v: v for v in vs}
    if n >= 2 and rng.random() < 0.5:
        vinv[vs[0]], vinv[vs[1]] = vs[1], vs[0]
    edges, einv = [], {}
    idx = 0
    while idx < rng.randint(0, max_e):
        s, r = rng.choice(half), rng.choice(half)
        a, b = f"e{idx}", f"e{idx + 1}"
        if (vinv[s], vinv[r]) == (s, r) and rng.random() < 0.5:
            edges.append((a, s, r))
            einv[a] = a
            idx += 1
        else:
            edges.append((a, s, r))
            edges.append((b, vinv[s], vinv[r]))
            einv[a], einv[b] = b, a
            idx += 2
    graph = Graph(vs, edges)
    rho = rng.choice(chars)
    twist = {e: rng.choice(chars) for e in graph.edges}
    act_v, act_e, phi, c = {}, {}, {}, {}
    for g in group.elements():
        flip = rho[g] == -1
        act_v[g] = {v: (vinv[v] if flip else v) for v in vs}
        act_e[g] = {e: (einv[e] if flip else e) for e in graph.edges}
        phi[g] = {e: g for e in graph.edges}
    # c(g, e) = chi(g) needs chi constant along edge orbits
    for e in graph.edges:
        twist[einv[e]] = twist[e]
    for g in group.elements():
        c[g] = {e: field(twist[e][g]) for e in graph.edges}
    return EPTuple.from_tables(graph, group, field, act_v=act_v, act_e=act_e, phi=phi, c=c)


def random_tuple(rng: random.Random, kind: str, field: Field = Q, **kw) -> EPTuple:
    if kind == "trivial":
        g = random_graph(rng, kw.get("max_v", 5), kw.get("max_e", 8))
        return EPTuple.trivial(g, field)
    if kind == "Z":
        return random_cyclic_tuple(rng, None, field, **kw)
    if kind.startswith("Z/"):
        return random_cyclic_tuple(rng, int(kind[2:]), field, **kw)
    if kind == "klein":
        return random_table_tuple(rng, klein_four(), field)
    if kind == "S3":
        return random_table_tuple(rng, symmetric_group_3(), field)
    raise ValueError(kind)


def random_path(rng: random.Random, graph: Graph, max_len: int) -> Path:
    v = rng.choice(graph.vertices)
    p = graph.vertex_path(v)
    for _ in range(rng.randint(0, max_len)):
        outs = graph.out_edges[p.rng]
        if not outs:
            break
        p = graph.extend(p, rng.choice(outs))
    return p


# naive oracles for generator actions

class NaiveCyclic:
    """Evaluates the action, phi and c of t^k by stepping the generator k times."""

    def __init__(self, t: EPTuple):
        g = t._gen
        self.t = t
        self.vperm = g["vperm"]
        self.eperm = g["eperm"]
        self.phi1 = g["phi"]
        self.c1 = g["c"]
        self.vinv = {w: v for v, w in self.vperm.items()}
        self.einv = {f: e for e, f in self.eperm.items()}

    def edge(self, k, e):
        for _ in range(abs(k)):
            e = self.eperm[e] if k > 0 else self.einv[e]
        return e

    def phi(self, k, e):
        # phi(t^{k+1}, e) = phi(t, t^k e) + phi(t^k, e);  phi(t^-1, e) = -phi(t, t^-1 e)
        total = 0
        if k >= 0:
            for j in range(k):
                total += self.phi1[self.edge(j, e)]
        else:
            for j in range(1, -k + 1):
                total -= self.phi1[self.edge(-j, e)]
        return self.t.group.power(total)

    def c(self, k, e):
        field = self.t.field
        total = field.one
        if k >= 0:
            for j in range(k):
                total = total * self.c1[self.edge(j, e)]
        else:
            for j in range(1, -k + 1):
                total = total / self.c1[self.edge(-j, e)]
        return total


def coker_count_mod(M: list, rows: int, N: int) -> int:
    """|coker(M) ⊗ Z/N| by enumerating the subgroup of (Z/N)^rows spanned by the columns."""
    cols = [tuple(M[i][j] % N for i in range(rows)) for j in range(len(M[0]) if M else 0)]
    span = {tuple([0] * rows)}
    frontier = list(span)
    while frontier:
        nxt = []
        for x in frontier:
            for c in cols:
                y = tuple((a + b) % N for a, b in zip(x, c))
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return N ** rows // len(span)


def abgroup_count_mod(G, N: int) -> int:
    out = N ** G.rank
    for d in G.torsion:
        out *= math.gcd(d, N)
    return out
