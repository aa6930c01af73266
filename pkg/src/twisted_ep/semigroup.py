"""The pointed inverse semigroup S(G, E, phi) and its 2-cocycle omega."""

from __future__ import annotations

from typing import NamedTuple

from .ep import EPTuple
from .errors import DomainError
from .graph import Path, concat, strip_prefix


class STriple(NamedTuple):
    """A nonzero element ``(alpha, g, beta)`` with ``r(alpha) == g(r(beta))``."""

    alpha: Path
    g: object
    beta: Path


class _Zero:
    __slots__ = ()

    def __repr__(self):
        return "ZERO"

    def __bool__(self):
        return False


ZERO = _Zero()


def make_triple(t: EPTuple, alpha: Path, g, beta: Path) -> STriple:
    if t.act_vertex(g, beta.rng) != alpha.rng:
        raise DomainError(f"({alpha}, {t.group.format(g)}, {beta}) violates r(alpha) = g(r(beta))")
    return STriple(alpha, g, beta)


def mul_with_omega(t: EPTuple, x, y):
    """Return ``(xy, omega(x, y))``; the coefficient is 0 exactly when xy is ZERO."""
    if x is ZERO or y is ZERO:
        return ZERO, t.field.zero
    alpha, g, beta = x
    gamma, h, theta = y
    grp = t.group
    gamma1 = strip_prefix(gamma, beta)
    beta1 = strip_prefix(beta, gamma)
    if gamma1 is not None:
        image, phi_g, coeff = t.act_full(g, gamma1)
        out = STriple(concat(alpha, image), grp.mul(phi_g, h), theta)
        if beta1 is not None:
            # beta == gamma: the other branch must agree
            assert out == STriple(alpha, grp.mul(g, h), theta) and coeff == t.field.one
        return out, coeff
    if beta1 is not None:
        hi = grp.inv(h)
        pre = t.act_path(hi, beta1)
        _, phi_h, coeff = t.act_full(h, pre)
        return STriple(alpha, grp.mul(g, phi_h), concat(theta, pre)), coeff
    return ZERO, t.field.zero


def mul(t: EPTuple, x, y):
    return mul_with_omega(t, x, y)[0]


def omega(t: EPTuple, x, y):
    return mul_with_omega(t, x, y)[1]


def star(t: EPTuple, x):
    if x is ZERO:
        return ZERO
    alpha, g, beta = x
    return STriple(beta, t.group.inv(g), alpha)


def format_triple(t: EPTuple, x) -> str:
    if x is ZERO:
        return "0"
    alpha, g, beta = x
    return f"({alpha}, {t.group.format(g)}, {beta})"
