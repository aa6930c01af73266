"""Twisted Katsura triples (A, B, C) and the Z-actions they define.

Vertex v regular, w any vertex, ``a = A[v][w]`` edges ``e_0 .. e_{a-1}``
from v to w.  The generator t fixes vertices and acts by

    t(e_n)   = e_{(B + n) mod a}
    phi(t, e_n) = t^{floor((B + n) / a)}
    c(t, e_n)   = (-1)^{(a-1) B} C   if n == 0, else 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .ep import EPTuple, Verdict, validate
from .errors import ConstructionError, SchemaError
from .graph import Graph
from .groups import Integers
from .scalars import Field


@dataclass
class KatsuraTriple:
    A: list
    B: list
    C: list
    rows: list
    cols: list

    @classmethod
    def create(cls, A, B, C=None, cols=None, rows=None, field: Field | None = None) -> "KatsuraTriple":
        """Check shapes and the vanishing conditions.

        ``C`` entries may be field elements or strings; they stay as given
        until :meth:`units` converts them for a particular field.
        """
        A = [[int(x) for x in row] for row in A]
        B = [[int(x) for x in row] for row in B]
        n = len(A)
        m = len(A[0]) if A else 0
        if n == 0 or m == 0:
            raise ConstructionError("A must be a nonempty matrix")
        if C is None:
            C = [[1] * m for _ in range(n)]
        for name, mat in (("A", A), ("B", B), ("C", C)):
            if len(mat) != n or any(len(r) != m for r in mat):
                raise ConstructionError(f"{name} must have shape {n}x{m}")
        if cols is None:
            cols = ["v"] if m == 1 else [f"v{j + 1}" for j in range(m)]
        cols = [str(c) for c in cols]
        if len(cols) != m or len(set(cols)) != m:
            raise ConstructionError("column labels must be distinct and match A")
        if rows is None:
            if n != m:
                raise ConstructionError("non-square A needs explicit row labels")
            rows = list(cols)
        rows = [str(r) for r in rows]
        if len(rows) != n or len(set(rows)) != n or not set(rows) <= set(cols):
            raise ConstructionError("row labels must be distinct column labels")
        k = cls(A, B, C, rows, cols)
        k._check(field)
        return k

    def _check(self, field):
        for i, v in enumerate(self.rows):
            if not any(self.A[i]):
                raise ConstructionError(f"row {v} of A is zero; rows must be regular vertices")
            for j, w in enumerate(self.cols):
                a, b, c = self.A[i][j], self.B[i][j], self.C[i][j]
                if a < 0:
                    raise ConstructionError(f"A[{v},{w}] = {a} is negative")
                if a == 0 and b != 0:
                    raise ConstructionError(f"A[{v},{w}] = 0 but B[{v},{w}] = {b}")
                if field is not None:
                    u = field.parse(str(c)) if isinstance(c, str) else field(c)
                    if not u:
                        raise ConstructionError(f"C[{v},{w}] is not a unit")
                    if a == 0 and u != field.one:
                        raise ConstructionError(f"A[{v},{w}] = 0 but C[{v},{w}] != 1")

    @classmethod
    def from_json(cls, data: dict, field: Field | None = None) -> "KatsuraTriple":
        if not isinstance(data, dict):
            raise SchemaError("a Katsura triple is a JSON object")
        extra = set(data) - {"A", "B", "C", "vertices", "rows", "name"}
        if extra:
            raise SchemaError(f"unknown triple keys {sorted(extra)}")
        try:
            return cls.create(data["A"], data["B"], data.get("C"), cols=data.get("vertices"),
                              rows=data.get("rows"), field=field)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed triple: {exc!r}") from exc

    def to_json(self, field: Field | None = None) -> dict:
        C = self.C
        if field is not None:
            C = [[field.format(x) for x in row] for row in self.units(field)]
        else:
            C = [[str(x) for x in row] for row in C]
        return {"A": self.A, "B": self.B, "C": C, "vertices": self.cols, "rows": self.rows}

    def units(self, field: Field) -> list:
        return [[field.parse(x) if isinstance(x, str) else field(x) for x in row] for row in self.C]

    @property
    def square(self) -> bool:
        return self.rows == self.cols

    def pairs(self):
        """All (i, j, v, w) with A[v][w] != 0."""
        for i, v in enumerate(self.rows):
            for j, w in enumerate(self.cols):
                if self.A[i][j]:
                    yield i, j, v, w


def edge_id(k: KatsuraTriple, v: str, w: str, n: int) -> str:
    if len(k.cols) == 1:
        return f"e{n}"
    return f"e_{v}_{w}_{n}"


def build_graph(k: KatsuraTriple) -> Graph:
    edges = []
    for i, j, v, w in k.pairs():
        for n in range(k.A[i][j]):
            edges.append((edge_id(k, v, w, n), v, w))
    return Graph(k.cols, edges)


def twist_sign(a: int, b: int) -> int:
    return -1 if ((a - 1) * b) % 2 else 1


def build_tuple(k: KatsuraTriple, field: Field | None = None, check: bool = True) -> EPTuple:
    """The twisted EP-tuple (Z, E_A, phi, c) of the triple."""
    field = field or Field.rationals()
    k._check(field)
    graph = build_graph(k)
    units = k.units(field)
    perm, phi, c = {}, {}, {}
    for i, j, v, w in k.pairs():
        a, b = k.A[i][j], k.B[i][j]
        for n in range(a):
            e = edge_id(k, v, w, n)
            perm[e] = edge_id(k, v, w, (b + n) % a)
            phi[e] = (b + n) // a
            c[e] = field(twist_sign(a, b)) * units[i][j] if n == 0 else field.one
    t = EPTuple.from_generator(graph, Integers(), field, edges=perm, phi=phi, c=c)
    if check:
        rep = validate(t, samples=50)
        if not rep.ok:
            raise ConstructionError(f"constructed tuple fails validation: {rep.failures[:3]}")
    return t


# KSPI

def _reachable(graph: Graph, v: str, strict: bool) -> set:
    seen = set() if strict else {v}
    stack = [graph.rng[e] for e in graph.out_edges[v]]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(graph.rng[e] for e in graph.out_edges[x])
    return seen


def first_return_loops(graph: Graph, v: str, max_len: int, limit: int = 64) -> int:
    """Count closed paths at v meeting v only at their ends, up to length and count caps."""
    count = 0
    stack = [(graph.rng[e], 1) for e in graph.out_edges[v]]
    while stack and count < limit:
        x, n = stack.pop()
        if x == v:
            count += 1
            continue
        if n >= max_len:
            continue
        stack.extend((graph.rng[e], n + 1) for e in graph.out_edges[x])
    return count


@dataclass
class KSPIReport:
    holds: bool
    failed: str | None
    diagnostics: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kspi": self.holds, "failed": self.failed, "diagnostics": self.diagnostics}


def is_kspi(k: KatsuraTriple) -> KSPIReport:
    """Check the KSPI bullets in order and name the first one that fails.

    (a) zero pattern, (b) every ordered pair of vertices joined by a path of
    positive length, (c) two distinct first-return loops at every vertex,
    (d) ``B[v][v] == 1``.
    """
    diag = {}
    bad = [(v, w) for i, j, v, w in _all_entries(k) if k.A[i][j] == 0 and k.B[i][j] != 0]
    diag["zero_pattern_violations"] = [list(p) for p in bad]
    graph = build_graph(k)
    vs = list(k.cols)
    strict = {v: _reachable(graph, v, True) for v in vs}
    missing_strict = [[v, w] for v in vs for w in vs if w not in strict[v]]
    missing_loose = [[v, w] for v in vs for w in vs if w != v and w not in strict[v]]
    diag["unreachable_pairs"] = missing_strict
    diag["unreachable_pairs_allowing_trivial_path"] = missing_loose
    cap = len(graph.edges) + 1
    loops = {v: first_return_loops(graph, v, cap, limit=64) for v in vs}
    loop_edges = {v: sum(1 for e in graph.out_edges[v] if graph.rng[e] == v) for v in vs}
    diag["first_return_loops"] = loops
    diag["loop_edges"] = loop_edges
    diag["loop_length_cap"] = cap
    bvv = {}
    for v in vs:
        if v in k.rows:
            bvv[v] = k.B[k.rows.index(v)][k.cols.index(v)]
        else:
            bvv[v] = None
    diag["B_diagonal"] = bvv
    failed = None
    if bad:
        failed = "zero-pattern: A[v][w] = 0 must force B[v][w] = 0"
    elif missing_strict:
        v, w = missing_strict[0]
        failed = f"connectivity: no path of positive length from {v} to {w}"
    elif any(n < 2 for n in loops.values()):
        v = next(v for v in vs if loops[v] < 2)
        failed = f"two-loops: vertex {v} has {loops[v]} first-return loop(s)"
    elif any(b != 1 for b in bvv.values()):
        v = next(v for v in vs if bvv[v] != 1)
        failed = f"diagonal: B[{v}][{v}] = {bvv[v]} != 1"
    return KSPIReport(failed is None, failed, diag)


def _all_entries(k):
    for i, v in enumerate(k.rows):
        for j, w in enumerate(k.cols):
            yield i, j, v, w


# the Hausdorff side condition

@dataclass
class HausdorffReport:
    verdict: Verdict
    details: list

    def to_json(self) -> dict:
        return {"verdict": {"true": "holds", "false": "fails"}.get(self.verdict.value, "undetermined"),
                "details": self.details}


def _ratios(k: KatsuraTriple, graph: Graph) -> dict:
    out = {}
    ri = {v: i for i, v in enumerate(k.rows)}
    ci = {w: j for j, w in enumerate(k.cols)}
    for e in graph.edges:
        i, j = ri[graph.src[e]], ci[graph.rng[e]]
        out[e] = Fraction(k.B[i][j], k.A[i][j])
    return out


def _integral_cycle(graph: Graph, ratios: dict, u: str, cap: int) -> list | None:
    """A closed path at u of length <= cap whose ratio product is an integer."""
    frontier = {(u, Fraction(1)): ()}
    for _ in range(cap):
        nxt = {}
        for (x, val), path in frontier.items():
            for e in graph.out_edges[x]:
                key = (graph.rng[e], val * ratios[e])
                if key in nxt:
                    continue
                p = path + (e,)
                if key[0] == u and key[1].denominator == 1:
                    return list(p)
                nxt[key] = p
        frontier = nxt
        if not frontier:
            break
    return None


def _reaches_cycle(graph: Graph, u: str) -> bool:
    seen, stack = set(), [u]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        for e in graph.out_edges[x]:
            y = graph.rng[e]
            if y == x or x in _reachable(graph, y, True):
                return True
            stack.append(y)
    return False


def hausdorff_condition(k: KatsuraTriple, path_len_cap: int = 12, l_cap: int | None = None,
                        state_cap: int = 200_000) -> HausdorffReport:
    """Bounded check that for A[v][w] != 0 = B[v][w] and every l only finitely
    many paths ``e_1 .. e_n`` from w have ``l * prod_{i<n} B/A`` integral.

    Paths are tracked as (vertex, value) states.  "fails" needs an explicit
    infinite family: a reachable state with integral value followed by a
    closed path with integral ratio product (or value 0 followed by any
    cycle).  "holds" needs no integral state in the second half of the
    length window.  Anything else is "undetermined".
    """
    graph = build_graph(k)
    ratios = _ratios(k, graph)
    if l_cap is None:
        l_cap = 1
        for row in k.A:
            for a in row:
                if a:
                    l_cap = l_cap * a // math.gcd(l_cap, a)
    details = []
    overall = Verdict.TRUE
    cycle_cache: dict = {}
    for i, j, v, w in k.pairs():
        if k.B[i][j] != 0:
            continue
        for l in range(1, l_cap + 1):
            verdict, info = _check_pair(graph, ratios, w, l, path_len_cap, state_cap, cycle_cache)
            details.append({"v": v, "w": w, "l": l, "verdict": verdict.value, **info})
            if verdict is Verdict.FALSE:
                return HausdorffReport(Verdict.FALSE, details)
            if verdict is Verdict.UNDETERMINED:
                overall = Verdict.UNDETERMINED
    return HausdorffReport(overall, details)


def _check_pair(graph, ratios, w, l, cap, state_cap, cycle_cache):
    states = {(w, Fraction(l)): 1}
    late_integral = 0
    for depth in range(cap + 1):
        for (u, x) in states:
            if x.denominator != 1 or not graph.out_edges[u]:
                continue
            if x == 0 and _reaches_cycle(graph, u):
                return Verdict.FALSE, {"witness_vertex": u, "prefix_length": depth, "value": "0"}
            if x != 0:
                if u not in cycle_cache:
                    cycle_cache[u] = _integral_cycle(graph, ratios, u, cap)
                cyc = cycle_cache[u]
                if cyc is not None:
                    return Verdict.FALSE, {"witness_vertex": u, "prefix_length": depth,
                                           "value": str(x), "cycle": cyc}
            if depth > cap // 2:
                late_integral += 1
        if depth == cap:
            break
        nxt = {}
        for (u, x), cnt in states.items():
            for e in graph.out_edges[u]:
                key = (graph.rng[e], x * ratios[e])
                nxt[key] = nxt.get(key, 0) + cnt
        states = nxt
        if not states:
            return Verdict.TRUE, {"exhausted_at": depth + 1}
        if len(states) > state_cap:
            return Verdict.UNDETERMINED, {"reason": "state cap exceeded", "depth": depth + 1}
    if late_integral == 0:
        return Verdict.TRUE, {"window": [cap // 2 + 1, cap]}
    return Verdict.UNDETERMINED, {"integral_states_in_window": late_integral}


# K-regularity conditions

def kreg_conditions(k: KatsuraTriple) -> dict:
    """The two sufficient matrix conditions and per-pair flatness verdicts."""
    cond_i = all((k.B[i][j] == 0) == (k.A[i][j] == 0) for i, j, _, _ in _all_entries(k))
    cond_ii = True
    pairs = []
    for i, v in enumerate(k.rows):
        support = [j for j in range(len(k.cols)) if k.A[i][j]]
        zeros = [j for j in support if k.B[i][j] == 0]
        if zeros and len(zeros) != len(support):
            cond_ii = False
        for j in support:
            if k.B[i][j] != 0:
                verdict = "flat"
            elif len(zeros) != len(support):
                verdict = "not flat"
            else:
                # over a field the unit differences are zero or invertible
                verdict = "flat"
            pairs.append({"v": v, "w": k.cols[j], "verdict": verdict})
    return {"cond_i": cond_i, "cond_ii": cond_ii, "pairs": pairs}


# the elements u_{v,w}

def u_element(alg, k: KatsuraTriple, v: str, w: str, power: int = 1):
    """``u_{v,w}^n`` computed by repeated multiplication; negative n uses u^-1."""
    i, j = k.rows.index(v), k.cols.index(w)
    a = k.A[i][j]
    if a == 0:
        raise ConstructionError(f"A[{v}][{w}] = 0")
    gr = alg.graph
    es = [gr.edge_path(edge_id(k, v, w, n)) for n in range(a)]
    if power >= 0:
        base = alg.triple(es[0], 1, es[a - 1])
        for n in range(a - 1):
            base = base + alg.triple(es[n + 1], 0, es[n])
        n = power
    else:
        base = alg.triple(es[a - 1], -1, es[0])
        for n in range(1, a):
            base = base + alg.triple(es[n - 1], 0, es[n])
        n = -power
    out = u_unit(alg, k, v, w)
    for _ in range(n):
        out = out * base
    return out


def u_unit(alg, k: KatsuraTriple, v: str, w: str):
    """``m = sum_i e_i e_i*``, the unit of the corner where u lives."""
    i, j = k.rows.index(v), k.cols.index(w)
    gr = alg.graph
    out = alg.zero()
    for n in range(k.A[i][j]):
        p = gr.edge_path(edge_id(k, v, w, n))
        out = out + alg.triple(p, 0, p)
    return out


def u_power_formula(alg, k: KatsuraTriple, v: str, w: str, n: int):
    """``sum_i e_{(i+n) mod a} t^{floor((n+i)/a)} e_i*``."""
    i, j = k.rows.index(v), k.cols.index(w)
    a = k.A[i][j]
    gr = alg.graph
    out = alg.zero()
    for m in range(a):
        out = out + alg.triple(gr.edge_path(edge_id(k, v, w, (m + n) % a)), (m + n) // a,
                               gr.edge_path(edge_id(k, v, w, m)))
    return out


def u_closed_form(alg, k: KatsuraTriple, v: str, w: str):
    """``(-1)^{(a-1)b} C^-1 t (e_0 e_0*) + sum_{i>=1} t (e_i e_i*)`` with b = B[v][w]."""
    i, j = k.rows.index(v), k.cols.index(w)
    a, b = k.A[i][j], k.B[i][j]
    field = alg.field
    cval = k.units(field)[i][j]
    t = alg.group_element(1)
    gr = alg.graph
    out = alg.zero()
    for m in range(a):
        p = gr.edge_path(edge_id(k, v, w, m))
        term = t * alg.triple(p, 0, p)
        if m == 0:
            term = term * (field(twist_sign(a, b)) / cval)
        out = out + term
    return out
