"""Twisted Exel-Pardo tuples (G, E, phi, c).

A tuple bundles a graph, a group acting on it by graph automorphisms, an
EP 1-cocycle ``phi: G x E^1 -> G`` and a unit-valued 1-cocycle
``c: G x E^1 -> U(field)``.  Cyclic groups (Z and Z/m) are stored through the
action of the generator ``t`` only; every other value is derived from the
cocycle laws.  Table groups carry full tables.

For a generator action each edge orbit ``f, t(f), ..., t^{p-1}(f)`` is finite,
and ``phi(t^{k+p}, f) = phi(t^k, f) + phi(t^p, f)`` because ``t^p`` fixes f.
The drift ``phi(t^p, f)`` is constant along the orbit, so values for any k
come from one period of prefix sums.  The same holds multiplicatively for c.
"""

from __future__ import annotations

import enum
import itertools
import random
from collections import Counter
from dataclasses import dataclass, field as dc_field

from .errors import SchemaError
from .graph import Graph, Path
from .groups import CyclicGroup, Group, Integers, TableGroup, group_from_json
from .scalars import Field


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined"

    def __bool__(self):
        return self is Verdict.TRUE

    @classmethod
    def of(cls, flag: bool) -> "Verdict":
        return cls.TRUE if flag else cls.FALSE


def _orbits(perm: dict, items) -> dict:
    """Map each item to ``(orbit_tuple, position)`` for a permutation."""
    seen = {}
    for x in items:
        if x in seen:
            continue
        orbit = [x]
        y = perm[x]
        while y != x:
            if y in seen or len(orbit) > len(perm):
                raise SchemaError("generator action is not a bijection")
            orbit.append(y)
            y = perm[y]
        orbit = tuple(orbit)
        for i, z in enumerate(orbit):
            seen[z] = (orbit, i)
    return seen


class _EdgeOrbit:
    """Prefix sums of phi(t, .) and prefix products of c(t, .) along one orbit."""

    __slots__ = ("edges", "period", "phi_prefix", "c_prefix")

    def __init__(self, edges, phi1, c1, one):
        self.edges = edges
        p = self.period = len(edges)
        self.phi_prefix = [0]
        self.c_prefix = [one]
        for j in range(2 * p):
            e = edges[j % p]
            self.phi_prefix.append(self.phi_prefix[-1] + phi1[e])
            self.c_prefix.append(self.c_prefix[-1] * c1[e])

    @property
    def drift(self) -> int:
        return self.phi_prefix[self.period]

    @property
    def twist_drift(self):
        return self.c_prefix[self.period]


class EPTuple:
    """A twisted EP-tuple over an exact coefficient field.

    Use :meth:`from_generator` for Z and Z/m, :meth:`from_tables` for table
    groups, or :meth:`from_json`.
    """

    def __init__(self, graph: Graph, group: Group, field: Field):
        self.graph = graph
        self.group = group
        self.field = field
        self._gen = None
        self._tables = None
        self._path_cache: dict = {}

    # construction

    @classmethod
    def from_generator(cls, graph: Graph, group: Group, field: Field, *,
                       vertices: dict | None = None, edges: dict | None = None,
                       phi: dict | None = None, c: dict | None = None) -> "EPTuple":
        """Tuple for a cyclic group given by the action of its generator t.

        ``phi`` maps an edge to the exponent k with phi(t, e) = t^k (default 1);
        ``c`` maps an edge to c(t, e) (default 1).
        """
        if not isinstance(group, (Integers, CyclicGroup)):
            raise SchemaError("generator data needs a cyclic group")
        self = cls(graph, group, field)
        vperm = {v: v for v in graph.vertices}
        vperm.update(vertices or {})
        eperm = {e: e for e in graph.edges}
        eperm.update(edges or {})
        for x in vperm.values():
            if not graph.is_vertex(x):
                raise SchemaError(f"action maps a vertex to unknown {x!r}")
        for x in eperm.values():
            if not graph.is_edge(x):
                raise SchemaError(f"action maps an edge to unknown {x!r}")
        phi1 = {e: 1 for e in graph.edges}
        phi1.update({e: int(k) for e, k in (phi or {}).items()})
        c1 = {e: field.one for e in graph.edges}
        c1.update({e: field(x) for e, x in (c or {}).items()})
        for e, x in c1.items():
            if not x:
                raise SchemaError(f"c(t, {e}) = 0 is not a unit")
        if isinstance(group, CyclicGroup) and group.m == 1:
            phi1 = {e: 0 for e in graph.edges}
        self._gen = {
            "vperm": vperm, "eperm": eperm, "phi": phi1, "c": c1,
            "vorb": _orbits(vperm, graph.vertices),
            "eorb": _orbits(eperm, graph.edges),
        }
        orbit_data = {}
        for e in graph.edges:
            orbit, _ = self._gen["eorb"][e]
            if orbit not in orbit_data:
                orbit_data[orbit] = _EdgeOrbit(orbit, phi1, c1, field.one)
        self._gen["odata"] = orbit_data
        return self

    @classmethod
    def from_tables(cls, graph: Graph, group: TableGroup, field: Field, *,
                    act_v: dict | None = None, act_e: dict | None = None,
                    phi: dict | None = None, c: dict | None = None) -> "EPTuple":
        """Tuple for a finite table group; tables are keyed by group element.

        Missing entries default to the identity action, ``phi(g, e) = g`` and
        ``c(g, e) = 1``.
        """
        self = cls(graph, group, field)
        tv, te, tp, tc = {}, {}, {}, {}
        for g in group.elements():
            tv[g] = {v: v for v in graph.vertices}
            tv[g].update((act_v or {}).get(g, {}))
            te[g] = {e: e for e in graph.edges}
            te[g].update((act_e or {}).get(g, {}))
            tp[g] = {e: g for e in graph.edges}
            tp[g].update((phi or {}).get(g, {}))
            tc[g] = {e: field.one for e in graph.edges}
            tc[g].update({e: field(x) for e, x in (c or {}).get(g, {}).items()})
            for x in tv[g].values():
                if not graph.is_vertex(x):
                    raise SchemaError(f"action maps a vertex to unknown {x!r}")
            for x in te[g].values():
                if not graph.is_edge(x):
                    raise SchemaError(f"action maps an edge to unknown {x!r}")
            for x in tp[g].values():
                if x not in group.elements():
                    raise SchemaError(f"phi value {x!r} is not a group element")
            for e, x in tc[g].items():
                if not x:
                    raise SchemaError(f"c({group.format(g)}, {e}) = 0 is not a unit")
        self._tables = {"v": tv, "e": te, "phi": tp, "c": tc}
        return self

    @classmethod
    def trivial(cls, graph: Graph, field: Field | None = None) -> "EPTuple":
        return cls.from_generator(graph, CyclicGroup(1), field or Field.rationals())

    # basic maps on generators

    def act_vertex(self, g, v: str) -> str:
        if self._gen is not None:
            orbit, i = self._gen["vorb"][v]
            return orbit[(i + g) % len(orbit)]
        return self._tables["v"][g][v]

    def act_edge(self, g, e: str) -> str:
        if self._gen is not None:
            orbit, i = self._gen["eorb"][e]
            return orbit[(i + g) % len(orbit)]
        return self._tables["e"][g][e]

    def _orbit_eval(self, g, e):
        orbit, i = self._gen["eorb"][e]
        od = self._gen["odata"][orbit]
        q, r = divmod(g, od.period)
        ph = od.phi_prefix[i + r] - od.phi_prefix[i] + q * od.drift
        cc = (od.c_prefix[i + r] / od.c_prefix[i]) * od.twist_drift ** q
        return ph, cc

    def phi(self, g, e: str):
        if self._gen is not None:
            if g == 0:
                return self.group.identity
            return self.group.power(self._orbit_eval(g, e)[0])
        return self._tables["phi"][g][e]

    def c(self, g, e: str):
        if self._gen is not None:
            if g == 0:
                return self.field.one
            return self.field(self._orbit_eval(g, e)[1])
        return self._tables["c"][g][e]

    # extensions to paths

    def act_full(self, g, p: Path):
        """Return ``(g(p), phi(g, p), c(g, p))`` by one left-to-right fold."""
        key = (g, p)
        hit = self._path_cache.get(key)
        if hit is not None:
            return hit
        grp = self.group
        if not p.edges:
            v = self.act_vertex(g, p.src)
            out = (Path(v, (), v), g, self.field.one)
        else:
            h = g
            coeff = self.field.one
            image = []
            for e in p.edges:
                image.append(self.act_edge(h, e))
                coeff = coeff * self.c(h, e)
                h = self.phi(h, e)
            image = tuple(image)
            src = self.graph.src[image[0]]
            out = (Path(src, image, self.graph.rng[image[-1]]), h, coeff)
            del grp
        if len(self._path_cache) > 200_000:
            self._path_cache.clear()
        self._path_cache[key] = out
        return out

    def act_path(self, g, p: Path) -> Path:
        return self.act_full(g, p)[0]

    def phi_path(self, g, p: Path):
        return self.act_full(g, p)[1]

    def c_path(self, g, p: Path):
        return self.act_full(g, p)[2]

    # cyclic orbit data

    def edge_period(self, e: str) -> int:
        if self._gen is None:
            raise ValueError("orbit data exists only for generator actions")
        return len(self._gen["eorb"][e][0])

    def edge_drift(self, e: str) -> int:
        """``phi(t^p, e)`` as an exponent, p the orbit period of e."""
        orbit, _ = self._gen["eorb"][e]
        return self._gen["odata"][orbit].drift

    def solve_nabla(self, f: str, target: str, h) -> list:
        """Group elements g with ``g(f) == target`` and ``phi(g, f) == h``.

        For Z with zero drift the solutions form a coset of p*Z; only its
        smallest nonnegative member is returned.
        """
        if isinstance(self.group, Integers):
            orbit, i = self._gen["eorb"][f]
            if target not in orbit:
                return []
            p = len(orbit)
            r0 = (orbit.index(target) - i) % p
            base = self.phi(r0, f)
            drift = self.edge_drift(f)
            if drift == 0:
                return [r0] if base == h else []
            m, rem = divmod(h - base, drift)
            return [] if rem else [r0 + m * p]
        return [g for g in self.group.elements()
                if self.act_edge(g, f) == target and self.phi(g, f) == h]

    # JSON

    @classmethod
    def from_json(cls, data: dict, field: Field | None = None) -> "EPTuple":
        try:
            graph = Graph.from_json(data)
            group = group_from_json(data.get("group", {"kind": "trivial"}))
            if field is None:
                field = Field.parse_name(data.get("field", "Q"))
            action = data.get("action", {})
            phis = data.get("phi", {})
            cs = data.get("c", {})
            known = {"vertices", "edges", "group", "field", "action", "phi", "c", "name"}
            extra = set(data) - known
            if extra:
                raise SchemaError(f"unknown tuple keys {sorted(extra)}")
            if isinstance(group, (Integers, CyclicGroup)):
                extra_g = (set(action) | set(phis) | set(cs)) - {"t"}
                if extra_g:
                    raise SchemaError(f"cyclic groups are keyed by generator 't', got {sorted(extra_g)}")
                act = action.get("t", {})
                phi = {e: group.parse(x) if not isinstance(group, CyclicGroup) else _exp(x)
                       for e, x in phis.get("t", {}).items()}
                if isinstance(group, Integers):
                    phi = {e: int(k) for e, k in phi.items()}
                c = {e: field.parse(x) for e, x in cs.get("t", {}).items()}
                return cls.from_generator(graph, group, field,
                                          vertices=act.get("vertices", {}),
                                          edges=act.get("edges", {}), phi=phi, c=c)
            act_v = {group.parse(g): m.get("vertices", {}) for g, m in action.items()}
            act_e = {group.parse(g): m.get("edges", {}) for g, m in action.items()}
            phi = {group.parse(g): {e: group.parse(x) for e, x in m.items()} for g, m in phis.items()}
            c = {group.parse(g): {e: field.parse(x) for e, x in m.items()} for g, m in cs.items()}
            return cls.from_tables(graph, group, field, act_v=act_v, act_e=act_e, phi=phi, c=c)
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"malformed tuple: {exc!r}") from exc

    def to_json(self) -> dict:
        out = self.graph.to_json()
        out["group"] = self.group.to_json()
        out["field"] = self.field.name
        fmt = self.field.format
        if self._gen is not None:
            g = self._gen
            out["action"] = {"t": {
                "vertices": {v: w for v, w in g["vperm"].items() if v != w},
                "edges": {e: f for e, f in g["eperm"].items() if e != f}}}
            out["phi"] = {"t": {e: self.group.format(self.group.power(k)) for e, k in g["phi"].items()}}
            out["c"] = {"t": {e: fmt(x) for e, x in g["c"].items() if x != self.field.one}}
            return out
        t = self._tables
        name = self.group.format
        out["action"] = {name(g): {"vertices": {v: w for v, w in t["v"][g].items() if v != w},
                                   "edges": {e: f for e, f in t["e"][g].items() if e != f}}
                         for g in self.group.elements()}
        out["phi"] = {name(g): {e: name(h) for e, h in t["phi"][g].items()} for g in self.group.elements()}
        out["c"] = {name(g): {e: fmt(x) for e, x in t["c"][g].items() if x != self.field.one}
                    for g in self.group.elements()}
        return out

    def __repr__(self):
        return (f"EPTuple(|E0|={len(self.graph.vertices)}, |E1|={len(self.graph.edges)}, "
                f"G={self.group!r}, field={self.field.name})")


def _exp(x) -> int:
    from .groups import _parse_power
    return x if isinstance(x, int) else _parse_power(x)


# validation

@dataclass
class ValidationReport:
    failures: list = dc_field(default_factory=list)
    checked: Counter = dc_field(default_factory=Counter)
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, law: str, **witness):
        self.failures.append({"law": law, **witness})

    def to_json(self) -> dict:
        return {"valid": self.ok, "exhaustive": self.exhaustive,
                "checked": dict(self.checked), "failures": self.failures}


def _sample_pairs(t: EPTuple, window: int, samples: int, bound: int, seed: int):
    grp = t.group
    if grp.is_finite:
        els = grp.elements()
        return list(itertools.product(els, els))
    rng = random.Random(seed)
    pairs = list(itertools.product(range(-window, window + 1), repeat=2))
    pairs += [(rng.randint(-bound, bound), rng.randint(-bound, bound)) for _ in range(samples)]
    return pairs


def validate(t: EPTuple, *, window: int = 4, samples: int = 200, bound: int = 1000,
             seed: int = 0, max_failures: int = 50) -> ValidationReport:
    """Check the action, cocycle, EP and twist laws.

    Exhaustive for finite groups.  For Z the generator data is checked
    directly and the laws on all pairs in ``[-window, window]`` plus
    ``samples`` random pairs of size up to ``bound``.
    """
    rep = ValidationReport(exhaustive=t.group.is_finite)
    grp, gr = t.group, t.graph
    one = grp.identity
    fmt = grp.format

    def enough():
        return len(rep.failures) >= max_failures

    for v in gr.vertices:
        if t.act_vertex(one, v) != v:
            rep.fail("identity-acts-trivially", g=fmt(one), x=v)
    for e in gr.edges:
        if t.act_edge(one, e) != e:
            rep.fail("identity-acts-trivially", g=fmt(one), x=e)
        if t.phi(one, e) != one:
            rep.fail("phi-normalized", g=fmt(one), edge=e)
        if t.c(one, e) != t.field.one:
            rep.fail("c-normalized", g=fmt(one), edge=e)

    elements = grp.elements() if grp.is_finite else sorted(set(range(-window, window + 1)) | {1, -1})
    for g in elements:
        for e in gr.edges:
            ge = t.act_edge(g, e)
            rep.checked["equivariance"] += 1
            if gr.src[ge] != t.act_vertex(g, gr.src[e]) or gr.rng[ge] != t.act_vertex(g, gr.rng[e]):
                rep.fail("equivariance", g=fmt(g), edge=e)
            h = t.phi(g, e)
            for v in gr.vertices:
                rep.checked["ep-condition"] += 1
                if t.act_vertex(h, v) != t.act_vertex(g, v):
                    rep.fail("ep-condition", g=fmt(g), edge=e, vertex=v, phi=fmt(h))
                    break
            if not t.c(g, e):
                rep.fail("c-unit", g=fmt(g), edge=e)
        if enough():
            return rep

    if isinstance(grp, CyclicGroup) and grp.m > 1:
        # t^m must act as the identity with trivial cocycle values
        for x in gr.vertices:
            if t._gen["vorb"][x][0].__len__() and grp.m % len(t._gen["vorb"][x][0]):
                rep.fail("action-order", g=f"t^{grp.m}", x=x)
        for e in gr.edges:
            p = t.edge_period(e)
            if grp.m % p:
                rep.fail("action-order", g=f"t^{grp.m}", x=e)
                continue
            ph, cc = t._orbit_eval(grp.m, e)
            if ph % grp.m:
                rep.fail("phi-cocycle", g=f"t^{grp.m}", edge=e, value=ph)
            if cc != t.field.one:
                rep.fail("c-cocycle", g=f"t^{grp.m}", edge=e, value=t.field.format(cc))

    for g, h in _sample_pairs(t, window, samples, bound, seed):
        gh = grp.mul(g, h)
        for v in gr.vertices:
            rep.checked["action"] += 1
            if t.act_vertex(g, t.act_vertex(h, v)) != t.act_vertex(gh, v):
                rep.fail("action", g=fmt(g), h=fmt(h), x=v)
        for e in gr.edges:
            he = t.act_edge(h, e)
            rep.checked["action"] += 1
            if t.act_edge(g, he) != t.act_edge(gh, e):
                rep.fail("action", g=fmt(g), h=fmt(h), x=e)
            rep.checked["phi-cocycle"] += 1
            lhs = t.phi(gh, e)
            rhs = grp.mul(t.phi(g, he), t.phi(h, e))
            if lhs != rhs:
                rep.fail("phi-cocycle", g=fmt(g), h=fmt(h), edge=e, lhs=fmt(lhs), rhs=fmt(rhs))
            rep.checked["c-cocycle"] += 1
            lc = t.c(gh, e)
            rc = t.c(g, he) * t.c(h, e)
            if lc != rc:
                rep.fail("c-cocycle", g=fmt(g), h=fmt(h), edge=e,
                         lhs=t.field.format(lc), rhs=t.field.format(rc))
        if enough():
            break
    return rep


def act_path(t: EPTuple, g, alpha: Path) -> Path:
    return t.act_path(g, alpha)


def phi_path(t: EPTuple, g, alpha: Path):
    return t.phi_path(g, alpha)


def c_path(t: EPTuple, g, alpha: Path):
    return t.c_path(g, alpha)


# the maps nabla_e and the stratification of regular vertices

@dataclass
class NablaResult:
    edge: str
    image: Counter
    injective: Verdict
    exhaustive: bool
    certificate: dict

    @property
    def trivial_image(self) -> bool:
        """True when every g strongly fixes the edge."""
        return self.certificate.get("trivial_image", False)


def nabla(t: EPTuple, e: str, bound: int = 64) -> NablaResult:
    """``g -> (g^-1(e), phi(g, g^-1(e)))`` with its image and injectivity.

    Finite groups are enumerated.  For Z the image is listed over
    ``|k| <= bound`` and injectivity is decided exactly: the map is injective
    iff the drift ``phi(t^p, e)`` of e's orbit is nonzero.
    """
    grp = t.group
    image = Counter()
    for g in grp.sample(bound):
        f = t.act_edge(grp.inv(g), e)
        image[(f, t.phi(g, f))] += 1
    if grp.is_finite:
        inj = all(n == 1 for n in image.values())
        trivial = set(image) == {(e, grp.identity)}
        return NablaResult(e, image, Verdict.of(inj), True, {"trivial_image": trivial})
    p = t.edge_period(e)
    drift = t.edge_drift(e)
    cert = {"period": p, "drift": drift, "trivial_image": p == 1 and t.phi(1, e) == 0}
    if drift == 0:
        cert["strong_fixer"] = grp.format(p)
    return NablaResult(e, image, Verdict.of(drift != 0), False, cert)


def strongly_fixes(t: EPTuple, g, e: str) -> bool:
    return t.act_edge(g, e) == e and t.phi(g, e) == t.group.identity


@dataclass
class Stratification:
    regular: list
    reg0: list
    reg1: list
    other: list
    injective_edges: dict
    pseudo_free: Verdict
    partially_pseudo_free: Verdict

    @property
    def partition_holds(self) -> Verdict:
        return Verdict.of(not self.other)

    def to_json(self) -> dict:
        return {"regular": self.regular, "reg0": self.reg0, "reg1": self.reg1,
                "other": self.other, "partition_holds": self.partition_holds.value,
                "pseudo_free": self.pseudo_free.value,
                "partially_pseudo_free": self.partially_pseudo_free.value,
                "injective_edges": {e: v.value for e, v in self.injective_edges.items()}}


def stratify_regular(t: EPTuple, bound: int = 64) -> Stratification:
    """Split reg(E) into strongly-fixed (reg0), pseudo-free-at-v (reg1), other.

    reg1 excludes reg0; the two only overlap for the trivial group, where
    every edge is both strongly fixed and has injective nabla.
    """
    gr = t.graph
    results = {e: nabla(t, e, bound) for e in gr.edges}
    inj = {e: r.injective for e, r in results.items()}
    regular = gr.regular_vertices()
    reg0, reg1, other = [], [], []
    has_injective = []
    for v in regular:
        outs = gr.out_edges[v]
        if any(inj[e] for e in outs):
            has_injective.append(v)
        if all(results[e].trivial_image for e in outs):
            reg0.append(v)
        elif any(inj[e] for e in outs):
            reg1.append(v)
        else:
            other.append(v)
    pf = Verdict.of(all(inj.values()))
    ppf = Verdict.of(len(has_injective) == len(regular))
    return Stratification(regular, reg0, reg1, other, inj, pf, ppf)


def section_overlap(t: EPTuple, strat: Stratification, e: str) -> bool:
    """True when a pseudo-free section edge e makes the excluded set overlap.

    This happens when ``r(e)`` is strongly fixed and some ``h`` has
    ``phi(h, h^-1 e) != 1``: the triple ``(alpha e, phi(h, h^-1 e), beta h^-1 e)``
    is then excluded twice, and the union of the kernel basis and the
    remaining triples is linearly dependent.  For an infinite group an
    injective nabla always has such an h.
    """
    if t.graph.rng[e] not in set(strat.reg0):
        return False
    grp = t.group
    if not grp.is_finite:
        return True
    return any(t.phi(h, t.act_edge(grp.inv(h), e)) != grp.identity for h in grp.elements())


def default_section(t: EPTuple, strat: Stratification | None = None) -> dict:
    """Pick e_v for each regular v.

    On pseudo-free vertices this is an injective edge, preferring one that
    does not trigger :func:`section_overlap`.
    """
    strat = strat or stratify_regular(t)
    out = {}
    reg1 = set(strat.reg1)
    for v in strat.regular:
        edges = t.graph.out_edges[v]
        if v in reg1:
            inj = [e for e in edges if strat.injective_edges[e]]
            out[v] = next((e for e in inj if not section_overlap(t, strat, e)), inj[0])
        else:
            out[v] = edges[0]
    return out


def check_section(t: EPTuple, section: dict, strat: Stratification) -> list:
    """Return a list of problems with a user-supplied section (empty if fine)."""
    problems = []
    for v in strat.regular:
        e = section.get(v)
        if e is None:
            problems.append(f"no section edge for regular vertex {v}")
        elif not t.graph.is_edge(e) or t.graph.src[e] != v:
            problems.append(f"section edge {e!r} does not start at {v}")
        elif v in strat.reg1 and not strat.injective_edges[e]:
            problems.append(f"nabla is not injective on section edge {e} at {v} in reg1")
    extra = set(section) - set(strat.regular)
    if extra:
        problems.append(f"section given on non-regular vertices {sorted(extra)}")
    return problems
