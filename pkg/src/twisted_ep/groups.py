"""Group models: the integers, finite cyclic groups, and finite table groups.

Elements are canonical hashable values: ints for the integers and for Z/m
(representatives in [0, m)), table indices for table groups.  Cyclic groups
are written multiplicatively with generator ``t``.
"""

from __future__ import annotations

import itertools
import random
import re

from .errors import SchemaError

_POWER = re.compile(r"^t(?:\^\(?(-?\d+)\)?)?$")


def _parse_power(text: str) -> int:
    s = str(text).strip().replace("−", "-").replace(" ", "")
    if s in ("1", "e", "id", "t^0"):
        return 0
    m = _POWER.match(s)
    if not m:
        raise SchemaError(f"cannot parse group element {text!r}; expected 1, t or t^k")
    return int(m.group(1)) if m.group(1) is not None else 1


def _format_power(k: int) -> str:
    if k == 0:
        return "1"
    if k == 1:
        return "t"
    return f"t^{k}"


class Group:
    kind = "abstract"
    identity = 0

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    is_finite = True

    def elements(self) -> list:
        raise NotImplementedError

    def parse(self, text):
        raise NotImplementedError

    def format(self, a) -> str:
        raise NotImplementedError

    def random(self, rng: random.Random, bound: int = 8):
        return rng.choice(self.elements())

    def sample(self, bound: int = 8) -> list:
        """All elements (finite) or the window ``t^-bound .. t^bound``."""
        return self.elements()

    @property
    def order(self) -> int:
        return len(self.elements())

    def generators(self) -> list:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class Integers(Group):
    """The infinite cyclic group <t>, element t^k stored as k."""

    kind = "integers"
    is_finite = False

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def power(self, k: int) -> int:
        return k

    def elements(self):
        raise ValueError("the integers are infinite")

    def sample(self, bound: int = 8) -> list:
        return list(range(-bound, bound + 1))

    def random(self, rng, bound: int = 8):
        return rng.randint(-bound, bound)

    def parse(self, text):
        if isinstance(text, int):
            return text
        return _parse_power(text)

    def format(self, a) -> str:
        return _format_power(a)

    def generators(self):
        return [1]

    def to_json(self):
        return {"kind": "integers"}

    def __eq__(self, other):
        return isinstance(other, Integers)

    def __hash__(self):
        return hash("Z")

    def __repr__(self):
        return "Integers()"


class CyclicGroup(Group):
    """Z/m written multiplicatively as <t | t^m>; m = 1 is the trivial group."""

    kind = "cyclic"

    def __init__(self, m: int):
        if m < 1:
            raise SchemaError("cyclic group order must be positive")
        self.m = m

    def mul(self, a, b):
        return (a + b) % self.m

    def inv(self, a):
        return (-a) % self.m

    def power(self, k: int) -> int:
        return k % self.m

    def elements(self):
        return list(range(self.m))

    def parse(self, text):
        if isinstance(text, int):
            return text % self.m
        return _parse_power(text) % self.m

    def format(self, a) -> str:
        return _format_power(a)

    def generators(self):
        return [1] if self.m > 1 else []

    def to_json(self):
        return {"kind": "cyclic", "order": self.m}

    def __eq__(self, other):
        return isinstance(other, CyclicGroup) and other.m == self.m

    def __hash__(self):
        return hash(("C", self.m))

    def __repr__(self):
        return f"CyclicGroup({self.m})"


def trivial_group() -> CyclicGroup:
    return CyclicGroup(1)


class TableGroup(Group):
    """A finite group given by a multiplication table over named elements."""

    kind = "table"

    def __init__(self, names, table):
        self.names = [str(n) for n in names]
        n = len(self.names)
        if n == 0 or len(set(self.names)) != n:
            raise SchemaError("table group needs distinct element names")
        self.index = {name: i for i, name in enumerate(self.names)}
        try:
            self.table = [[self.index[str(x)] if not isinstance(x, int) else x for x in row]
                          for row in table]
        except KeyError as exc:
            raise SchemaError(f"unknown element {exc} in multiplication table") from exc
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise SchemaError("multiplication table must be square of size |G|")
        self._check_axioms()

    def _check_axioms(self):
        n = len(self.names)
        t = self.table
        ids = [e for e in range(n) if all(t[e][x] == x and t[x][e] == x for x in range(n))]
        if not ids:
            raise SchemaError("multiplication table has no identity")
        self.identity = ids[0]
        for a, b, c in itertools.product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise SchemaError(
                    f"table is not associative at ({self.names[a]},{self.names[b]},{self.names[c]})")
        self._inv = []
        for a in range(n):
            inv = [b for b in range(n) if t[a][b] == self.identity]
            if not inv or t[inv[0]][a] != self.identity:
                raise SchemaError(f"element {self.names[a]} has no inverse")
            self._inv.append(inv[0])

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inv[a]

    def elements(self):
        return list(range(len(self.names)))

    def parse(self, text):
        if isinstance(text, int) and 0 <= text < len(self.names):
            return text
        try:
            return self.index[str(text).strip()]
        except KeyError as exc:
            raise SchemaError(f"unknown group element {text!r}") from exc

    def format(self, a) -> str:
        return self.names[a]

    def generators(self):
        return [g for g in self.elements() if g != self.identity]

    def to_json(self):
        return {"kind": "table", "elements": list(self.names),
                "table": [[self.names[x] for x in row] for row in self.table]}

    def __eq__(self, other):
        return isinstance(other, TableGroup) and other.names == self.names and other.table == self.table

    def __hash__(self):
        return hash(("T", tuple(self.names)))

    def __repr__(self):
        return f"TableGroup({self.names})"


def klein_four() -> TableGroup:
    names = ["1", "a", "b", "ab"]
    tab = [[i ^ j for j in range(4)] for i in range(4)]
    return TableGroup(names, tab)


def symmetric_group_3() -> TableGroup:
    perms = list(itertools.permutations(range(3)))
    names = ["".join(map(str, p)) for p in perms]
    idx = {p: i for i, p in enumerate(perms)}
    tab = [[idx[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms]
    g = TableGroup(names, tab)
    return g


def group_from_json(data: dict) -> Group:
    try:
        kind = data["kind"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("group needs a 'kind'") from exc
    if kind == "trivial":
        return trivial_group()
    if kind in ("integers", "Z"):
        return Integers()
    if kind == "cyclic":
        return CyclicGroup(int(data["order"]))
    if kind == "table":
        return TableGroup(data["elements"], data["table"])
    raise SchemaError(f"unknown group kind {kind!r}")
