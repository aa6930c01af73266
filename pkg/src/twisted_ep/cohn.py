"""The twisted Cohn algebra on the basis B = {(alpha, g, beta)}, the ideal K
spanned by the elements alpha q_v g beta*, and normal forms in the quotient.

The normal form rewrites every term lying in the set of excluded basis
elements (determined by a section v -> e_v of the source map) modulo K:

* contraction: ``(alpha a, h, beta f)`` with ``a = e_{s(a)}``, ``g(f) = a`` and
  ``phi(g, f) = h`` is replaced by
  ``c(g, f)^-1 [(alpha, g, beta) - sum_{e != a} c(g, g^-1 e) (alpha e, phi(g, g^-1 e), beta g^-1 e)]``;
* expansion at strongly fixed vertices: ``(alpha, h, beta)`` with ``r(alpha)``
  strongly fixed and ``h != 1`` becomes ``sum_e c(h, e) (alpha e, 1, beta e)``.

When a pseudo-free vertex can only use a section edge ending at a strongly
fixed vertex, with nontrivial phi values along it, the two kinds of excluded
triples overlap and no unique representative exists; such tuples are refused
with UnsupportedTupleError.
"""

from __future__ import annotations

import heapq
import itertools
import random

from .ep import EPTuple, Stratification, check_section, default_section, section_overlap, stratify_regular
from .errors import DivergenceError, DomainError, MembershipError, SchemaError, UnsupportedTupleError
from .graph import Path
from .semigroup import STriple, ZERO, make_triple, mul_with_omega

DEFAULT_CAP = 10 ** 6


class AlgElem:
    """A finite linear combination of basis triples."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: "CohnAlgebra", terms: dict | None = None):
        self.alg = alg
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def copy(self) -> "AlgElem":
        return AlgElem(self.alg, dict(self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def _coerce(self, other):
        if isinstance(other, AlgElem):
            return other
        return self.alg.scalar(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        _accumulate(out, other.terms.items())
        return AlgElem(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgElem(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, AlgElem):
            return self.alg.mul(self, other)
        s = self.alg.field(other)
        return AlgElem(self.alg, {k: v * s for k, v in self.terms.items()})

    def __rmul__(self, other):
        s = self.alg.field(other)
        return AlgElem(self.alg, {k: s * v for k, v in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers need an explicit inverse")
        result = self.alg.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, AlgElem):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        key = self.alg.term_key
        return sorted(self.terms.items(), key=lambda kv: key(kv[0]))

    def to_json(self) -> list:
        return [self.alg.term_to_json(k, v) for k, v in self.sorted_terms()]

    def __repr__(self):
        if not self.terms:
            return "0"
        fmt = self.alg.tuple.field.format
        gfmt = self.alg.tuple.group.format
        return " + ".join(f"{fmt(v)}*({k.alpha},{gfmt(k.g)},{k.beta})" for k, v in self.sorted_terms())


def _accumulate(target: dict, items):
    for k, v in items:
        s = target.get(k)
        s = v if s is None else s + v
        if s:
            target[k] = s
        else:
            target.pop(k, None)


class CohnAlgebra:
    """Arithmetic in C(G, E, phi_c) and its quotient by K."""

    def __init__(self, t: EPTuple, section: dict | None = None):
        self.tuple = t
        self.graph = t.graph
        self.field = t.field
        self._strat: Stratification | None = None
        self._section = section
        self._section_checked = False

    # element constructors

    def elem(self, terms) -> AlgElem:
        out = {}
        _accumulate(out, ((k, self.field(v)) for k, v in terms))
        return AlgElem(self, out)

    def zero(self) -> AlgElem:
        return AlgElem(self)

    def triple(self, alpha, g, beta, coeff=1) -> AlgElem:
        gr = self.graph
        a = alpha if isinstance(alpha, Path) else gr.path(alpha)
        b = beta if isinstance(beta, Path) else gr.path(beta)
        return AlgElem(self, {make_triple(self.tuple, a, g, b): self.field(coeff)})

    def vertex(self, v: str) -> AlgElem:
        p = self.graph.vertex_path(v)
        return AlgElem(self, {STriple(p, self.tuple.group.identity, p): self.field.one})

    def one(self) -> AlgElem:
        out = self.zero()
        for v in self.graph.vertices:
            out = out + self.vertex(v)
        return out

    def scalar(self, s) -> AlgElem:
        return self.one() * s

    def path(self, alpha) -> AlgElem:
        a = alpha if isinstance(alpha, Path) else self.graph.path(alpha)
        r = self.graph.vertex_path(a.rng)
        return AlgElem(self, {STriple(a, self.tuple.group.identity, r): self.field.one})

    def ghost(self, beta) -> AlgElem:
        b = beta if isinstance(beta, Path) else self.graph.path(beta)
        r = self.graph.vertex_path(b.rng)
        return AlgElem(self, {STriple(r, self.tuple.group.identity, b): self.field.one})

    def edge(self, e: str) -> AlgElem:
        return self.path(self.graph.edge_path(e))

    def vertex_group(self, v: str, g) -> AlgElem:
        """The element ``v g``, i.e. the triple ``(v, g, g^-1 v)``."""
        t = self.tuple
        w = t.act_vertex(t.group.inv(g), v)
        return self.triple(self.graph.vertex_path(v), g, self.graph.vertex_path(w))

    def group_element(self, g) -> AlgElem:
        out = self.zero()
        for v in self.graph.vertices:
            out = out + self.vertex_group(v, g)
        return out

    # products

    def mul(self, x: AlgElem, y: AlgElem) -> AlgElem:
        t = self.tuple
        out: dict = {}
        for s, a in x.terms.items():
            for u, b in y.terms.items():
                st, w = mul_with_omega(t, s, u)
                if st is ZERO:
                    continue
                _accumulate(out, ((st, a * b * w),))
        return AlgElem(self, out)

    def star(self, x: AlgElem) -> AlgElem:
        """The linear map ``(alpha, g, beta) -> (beta, g^-1, alpha)`` on coefficients.

        This is an anti-automorphism of the untwisted semigroup algebra only;
        with a nontrivial twist it does not reverse products.
        """
        inv = self.tuple.group.inv
        return AlgElem(self, {STriple(k.beta, inv(k.g), k.alpha): v for k, v in x.terms.items()})

    # the ideal K

    def _kernel_terms(self, alpha: Path, g, beta: Path):
        t = self.tuple
        gr = self.graph
        v = alpha.rng
        if not gr.out_edges[v]:
            raise DomainError(f"q_v needs a regular vertex, {v} is a sink")
        if t.act_vertex(g, beta.rng) != v:
            raise DomainError("r(alpha) = g(r(beta)) fails for a kernel element")
        gi = t.group.inv(g)
        yield STriple(alpha, g, beta), self.field.one
        for e in gr.out_edges[v]:
            f = t.act_edge(gi, e)
            yield (STriple(gr.extend(alpha, e), t.phi(g, f), gr.extend(beta, f)),
                   -t.c(g, f))

    def kernel_elem(self, alpha, g, beta) -> AlgElem:
        """``alpha q_v g beta*`` with ``v = r(alpha)`` expanded in B."""
        gr = self.graph
        a = alpha if isinstance(alpha, Path) else gr.path(alpha)
        b = beta if isinstance(beta, Path) else gr.path(beta)
        return self.elem(self._kernel_terms(a, g, b))

    def q(self, v: str, g=None) -> AlgElem:
        t = self.tuple
        g = t.group.identity if g is None else g
        w = t.act_vertex(t.group.inv(g), v)
        return self.kernel_elem(self.graph.vertex_path(v), g, self.graph.vertex_path(w))

    def from_kernel_basis(self, coeffs: dict) -> AlgElem:
        """Inverse of :meth:`to_kernel_basis`; keys are ``(alpha, v, g, beta)``."""
        out: dict = {}
        for (alpha, v, g, beta), lam in coeffs.items():
            if alpha.rng != v:
                raise DomainError("kernel basis key needs r(alpha) = v")
            _accumulate(out, ((k, lam * c) for k, c in self._kernel_terms(alpha, g, beta)))
        return AlgElem(self, out)

    def to_kernel_basis(self, x: AlgElem, cap: int = DEFAULT_CAP) -> dict:
        """Coordinates of x in the basis ``alpha q_v g beta*`` of K.

        Terms of minimal ``|alpha|`` are the leading terms of kernel basis
        elements, so they are peeled off level by level.
        """
        if not self.nf(x, cap=cap).is_zero():
            raise MembershipError("element is not in the ideal K")
        rest = dict(x.terms)
        out: dict = {}
        steps = 0
        while rest:
            steps += 1
            if steps > cap:
                raise DivergenceError("kernel-basis extraction exceeded the step cap")
            m = min(len(k.alpha) for k in rest)
            level = [k for k in rest if len(k.alpha) == m]
            for k in level:
                lam = rest.get(k)
                if not lam:
                    continue
                v = k.alpha.rng
                if not self.graph.out_edges[v]:
                    raise MembershipError(f"term {k} ends at a sink and cannot lie in K")
                out[(k.alpha, v, k.g, k.beta)] = lam
                _accumulate(rest, ((kk, -lam * c) for kk, c in self._kernel_terms(k.alpha, k.g, k.beta)))
        back = self.from_kernel_basis(out)
        assert back == x, "kernel basis round trip failed"
        return out

    # normal forms in the quotient

    @property
    def stratification(self) -> Stratification:
        if self._strat is None:
            self._strat = stratify_regular(self.tuple)
        return self._strat

    @property
    def section(self) -> dict:
        strat = self.stratification
        if strat.other:
            raise UnsupportedTupleError(
                f"regular vertices {strat.other} are neither strongly fixed nor pseudo-free")
        if self._section is None:
            self._section = default_section(self.tuple, strat)
        if not self._section_checked:
            problems = check_section(self.tuple, self._section, strat)
            if problems:
                raise SchemaError("; ".join(problems))
            clash = [v for v in strat.reg1 if section_overlap(self.tuple, strat, self._section[v])]
            if clash:
                raise UnsupportedTupleError(
                    f"section edges at {clash} end at strongly fixed vertices with nontrivial "
                    "phi values; the excluded triples overlap and B' u B'' is not independent")
            self._section_checked = True
        return self._section

    def _expand(self, alpha: Path, h, beta: Path):
        t = self.tuple
        gr = self.graph
        hi = t.group.inv(h)
        out = []
        for e in gr.out_edges[alpha.rng]:
            f = t.act_edge(hi, e)
            out.append((STriple(gr.extend(alpha, e), t.phi(h, f), gr.extend(beta, f)), t.c(h, f)))
        return out

    def _rewrite(self, k: STriple):
        """Return the replacement terms for a reducible triple, or None."""
        t = self.tuple
        gr = self.graph
        grp = t.group
        section = self.section
        alpha, h, beta = k
        u = alpha.rng
        if u in self._reg0 and h != grp.identity:
            return self._expand(alpha, h, beta)
        if alpha.edges and beta.edges:
            a = alpha.edges[-1]
            v = gr.src[a]
            f = beta.edges[-1]
            if section.get(v) == a:
                if v in self._reg0:
                    g = grp.identity if (f == a and h == grp.identity) else None
                else:
                    sols = t.solve_nabla(f, a, h)
                    g = sols[0] if sols else None
                if g is not None:
                    a0 = Path(alpha.src, alpha.edges[:-1], v)
                    b0 = Path(beta.src, beta.edges[:-1], gr.src[f])
                    inv = t.field.one / t.c(g, f)
                    out = [(STriple(a0, g, b0), inv)]
                    gi = grp.inv(g)
                    for e in gr.out_edges[v]:
                        if e == a:
                            continue
                        fe = t.act_edge(gi, e)
                        out.append((STriple(gr.extend(a0, e), t.phi(g, fe), gr.extend(b0, fe)),
                                    -inv * t.c(g, fe)))
                    return out
        return None

    def is_normal(self, k: STriple) -> bool:
        self._prepare()
        return self._rewrite(k) is None

    def _prepare(self):
        self.section  # raises on unsupported tuples
        self._reg0 = set(self.stratification.reg0)

    def nf(self, x: AlgElem, strategy: str = "innermost", cap: int = DEFAULT_CAP,
           seed: int | None = None) -> AlgElem:
        """Representative of x + K supported on the complement of the excluded set."""
        self._prepare()
        if strategy not in ("innermost", "shuffled"):
            raise ValueError(f"unknown strategy {strategy!r}")
        rng = random.Random(seed)
        pending: dict = {}
        result: dict = {}
        heap: list = []
        counter = itertools.count()

        def push(items):
            for k, v in items:
                if k not in pending and strategy == "innermost":
                    heapq.heappush(heap, (-len(k.alpha), next(counter), k))
                _accumulate(pending, ((k, v),))

        push(x.terms.items())
        steps = 0
        while pending:
            if strategy == "innermost":
                _, _, k = heapq.heappop(heap)
                if k not in pending:
                    continue
            else:
                k = rng.choice(list(pending))
            lam = pending.pop(k)
            repl = self._rewrite(k)
            if repl is None:
                _accumulate(result, ((k, lam),))
                continue
            steps += 1
            if steps > cap:
                raise DivergenceError(f"normal form exceeded {cap} rewrite steps")
            push((kk, lam * c) for kk, c in repl)
        return AlgElem(self, result)

    def equal_in_L(self, x: AlgElem, y: AlgElem, **kw) -> bool:
        return self.nf(x - y, **kw).is_zero()

    # serialization

    def term_key(self, k: STriple):
        gr = self.graph
        grp = self.tuple.group
        return (len(k.alpha), gr.path_key(k.alpha), len(k.beta), gr.path_key(k.beta), grp.format(k.g))

    def term_to_json(self, k: STriple, coeff) -> dict:
        return {"alpha": k.alpha.to_list(), "g": self.tuple.group.format(k.g),
                "beta": k.beta.to_list(), "coeff": self.field.format(coeff)}

    def term_from_json(self, d: dict):
        try:
            extra = set(d) - {"alpha", "g", "beta", "coeff"}
            if extra:
                raise SchemaError(f"unknown term keys {sorted(extra)}")
            gr = self.graph
            alpha = gr.path(d["alpha"])
            beta = gr.path(d["beta"])
            g = self.tuple.group.parse(d.get("g", "1"))
            coeff = self.field.parse(str(d.get("coeff", "1")))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed term: {exc!r}") from exc
        try:
            key = make_triple(self.tuple, alpha, g, beta)
        except DomainError as exc:
            raise SchemaError(str(exc)) from exc
        return key, coeff

    def from_json(self, data) -> AlgElem:
        if not isinstance(data, list):
            raise SchemaError("an element is a list of terms")
        return self.elem(self.term_from_json(d) for d in data)
