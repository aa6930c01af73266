"""Exact coefficient fields: the rationals and prime fields F_p.

Rationals are plain :class:`fractions.Fraction` values; prime field elements
are :class:`ModP` instances.  A :class:`Field` object converts, parses and
formats values for one concrete field.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import SchemaError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class ModP:
    """An element of F_p with canonical representative in [0, p)."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.value = value % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ValueError(f"mixing F_{self.p} and F_{other.p}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return ModP(-self.value, self.p)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return ModP(pow(self.value, n, self.p), self.p)

    def inverse(self) -> "ModP":
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_%d" % self.p)
        return ModP(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * ModP(o, self.p).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(o, self.p) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, ModP):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} mod {self.p}"


def _clean(text: str) -> str:
    return text.strip().replace("−", "-").replace(" ", "")


class Field:
    """Descriptor of a coefficient field: ``Field.rationals()`` or ``Field.prime(p)``."""

    def __init__(self, p: int = 0):
        if p and not is_prime(p):
            raise SchemaError(f"F_{p}: {p} is not prime")
        self.p = p

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls(p)

    @classmethod
    def parse_name(cls, name: str) -> "Field":
        """Parse ``"Q"``, ``"F7"``, ``"Fp:7"`` or ``"GF(7)"``."""
        s = name.strip().upper().replace("GF(", "F").replace(")", "").replace("FP:", "F")
        if s in ("Q", "QQ"):
            return cls.rationals()
        if s.startswith("F") and s[1:].isdigit():
            return cls.prime(int(s[1:]))
        raise SchemaError(f"unknown field {name!r}; expected Q or Fp such as F7")

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    @property
    def name(self) -> str:
        return "Q" if self.p == 0 else f"F{self.p}"

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, x):
        if self.p == 0:
            if isinstance(x, ModP):
                raise ValueError("cannot coerce an F_p element into Q")
            return Fraction(x)
        if isinstance(x, ModP):
            if x.p != self.p:
                raise ValueError(f"cannot coerce F_{x.p} element into F_{self.p}")
            return x
        if isinstance(x, Fraction):
            return ModP(x.numerator, self.p) / x.denominator
        return ModP(int(x), self.p)

    def parse(self, text) -> object:
        """Parse ``"-2/3"``, ``"5"`` or ``"5 mod 7"`` into this field."""
        if isinstance(text, int):
            return self(text)
        s = _clean(str(text))
        if "mod" in s:
            val, _, mod = s.partition("mod")
            if self.p == 0 or int(mod) != self.p:
                raise SchemaError(f"{text!r} is not an element of {self.name}")
            s = val
        try:
            q = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"cannot parse field element {text!r}") from exc
        if self.p and q.denominator % self.p == 0:
            raise SchemaError(f"{text!r} has denominator divisible by {self.p}")
        return self(q)

    def format(self, x) -> str:
        if self.p == 0:
            return str(Fraction(x))
        return f"{self(x).value} mod {self.p}"

    def is_unit(self, x) -> bool:
        return bool(x)

    def random_element(self, rng: random.Random, size: int = 5):
        if self.p:
            return ModP(rng.randrange(self.p), self.p)
        den = rng.randint(1, size)
        return Fraction(rng.randint(-size, size), den)

    def random_unit(self, rng: random.Random, size: int = 5):
        while True:
            x = self.random_element(rng, size)
            if x:
                return x

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return f"Field({self.name})"
