"""Concrete finitely generated groups with a designated normal subgroup N.

Elements are plain hashable values that double as canonical keys:

* ``Zd``          integer tuples
* ``Heisenberg``  integer triples ``(x, y, z)``
* ``F2``          freely reduced strings over ``aAbB`` (upper case = inverse)
* ``F2xZ``        pairs ``(word, k)``

The zone of ``g`` is the canonical key of the coset ``gN``, which is itself
an element of the quotient model returned by :meth:`GroupModel.quotient`.
"""
from __future__ import annotations

import re
from typing import Any, Hashable, Iterable

from .errors import EncodingError, NoSubgroup, UnsupportedModel

Element = Hashable

_AXIS_LETTERS = "abcdefgh"


def _flip(label: str) -> str:
    return label.lower() if label.isupper() else label.upper()


class GroupModel:
    """Common interface; subclasses supply the arithmetic."""

    family = "abstract"
    quotient_amenable = "unknown"
    subgroup_infinite_index = True
    subgroup_infinite = True

    def __init__(self):
        self.generators: dict[str, Element] = {}
        # generators of N, used by jump edges of the box model
        self.subgroup_generators: dict[str, Element] = {}
        self.has_subgroup = True

    # -- arithmetic -------------------------------------------------------
    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def check(self, a) -> Element:
        """Return the canonical encoding of ``a`` or raise EncodingError."""
        raise NotImplementedError

    def zone_of(self, g) -> Element:
        raise NotImplementedError

    def quotient(self) -> "GroupModel":
        raise NotImplementedError

    def word_length(self, g) -> int | None:
        """Closed-form word length, or None when only BFS knows it."""
        return None

    # -- helpers ----------------------------------------------------------
    def inverse_label(self, label: str) -> str:
        return _flip(label)

    def right_neighbors(self, g) -> list[tuple[str, Element]]:
        return [(lab, self.mul(g, s)) for lab, s in self.generators.items()]

    def power(self, g, k: int):
        base = g if k >= 0 else self.inv(g)
        out = self.identity
        for _ in range(abs(k)):
            out = self.mul(out, base)
        return out

    def in_subgroup(self, g) -> bool:
        return self.zone_of(g) == self.quotient().identity

    def zone_distance(self, z1, z2) -> int | None:
        """Distance between the cosets z1, z2, i.e. quotient word length of z1^-1 z2."""
        q = self.quotient()
        return q.word_length(q.mul(q.inv(z1), z2))

    def shortlex_key(self, g):
        return (self.word_length(g) or 0, g)

    def to_json(self, g) -> Any:
        return list(g) if isinstance(g, tuple) else g

    def from_json(self, data) -> Element:
        return self.check(tuple(data) if isinstance(data, list) else data)

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{self.name}>"


class Zd(GroupModel):
    """Free abelian group Z^d; N is spanned by the axes in ``n_axes``.

    By default N is the last d-k coordinates, so zones are the first k.
    """

    family = "Zd"
    quotient_amenable = "yes"

    def __init__(self, d: int, k: int | None = None, n_axes: Iterable[int] | None = None):
        super().__init__()
        if d < 1 or d > len(_AXIS_LETTERS):
            raise UnsupportedModel(f"Zd needs 1 <= d <= {len(_AXIS_LETTERS)}")
        if n_axes is None:
            k = d if k is None else k
            if not 0 <= k <= d:
                raise UnsupportedModel("Zd needs 0 <= k <= d")
            n_axes = range(k, d)
        self.d = d
        self.n_axes = tuple(sorted(set(n_axes)))
        if any(a < 0 or a >= d for a in self.n_axes):
            raise UnsupportedModel("n_axes out of range")
        self.q_axes = tuple(a for a in range(d) if a not in self.n_axes)
        self.k = len(self.q_axes)
        self.name = f"Z{d}" if not self.n_axes else f"Z{d}/N{list(self.n_axes)}"
        self.subgroup_infinite = bool(self.n_axes)
        self.subgroup_infinite_index = bool(self.q_axes)
        for a in range(d):
            e = tuple(1 if i == a else 0 for i in range(d))
            lab = _AXIS_LETTERS[a]
            self.generators[lab] = e
            self.generators[lab.upper()] = tuple(-x for x in e)
            if a in self.n_axes:
                self.subgroup_generators[lab] = e
                self.subgroup_generators[lab.upper()] = tuple(-x for x in e)
        self._zero = (0,) * d
        self._quotient = None

    @property
    def identity(self):
        return self._zero

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def check(self, a):
        try:
            t = tuple(int(x) for x in a)
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"not an integer vector: {a!r}") from exc
        if len(t) != self.d or any(x != y for x, y in zip(a, t)):
            raise EncodingError(f"expected {self.d} integer coordinates, got {a!r}")
        return t

    def zone_of(self, g):
        if len(self.q_axes) == self.d:
            return g
        return tuple(g[a] for a in self.q_axes)

    def quotient(self):
        if self._quotient is None:
            self._quotient = self if not self.n_axes else Zd(self.k, self.k)
        return self._quotient

    def word_length(self, g):
        return sum(abs(x) for x in g)

    def descriptor(self):
        return {"family": "Zd", "d": self.d, "n_axes": list(self.n_axes)}


class Heisenberg(GroupModel):
    """Integer Heisenberg group, (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y').

    Generators a=(1,0,0), b=(0,1,0); N is the centre, generated by (0,0,1).
    """

    family = "Heisenberg"
    quotient_amenable = "yes"
    name = "Heisenberg"

    def __init__(self):
        super().__init__()
        self.generators = {
            "a": (1, 0, 0),
            "A": (-1, 0, 0),
            "b": (0, 1, 0),
            "B": (0, -1, 0),
        }
        self.subgroup_generators = {"c": (0, 0, 1), "C": (0, 0, -1)}
        self._quotient = Zd(2, 2)

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inv(self, a):
        return (-a[0], -a[1], -a[2] + a[0] * a[1])

    def check(self, a):
        try:
            t = tuple(int(x) for x in a)
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"not an integer triple: {a!r}") from exc
        if len(t) != 3:
            raise EncodingError(f"expected a triple, got {a!r}")
        return t

    def zone_of(self, g):
        return (g[0], g[1])

    def quotient(self):
        return self._quotient

    def descriptor(self):
        return {"family": "Heisenberg"}


_WORD_TOKEN = re.compile(r"([abAB])(⁻¹|\^-1|\^\{-1\})?")


def reduce_word(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == _flip(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def parse_word(text: str) -> str:
    """Parse ``"ab⁻¹"``, ``"ab^-1"`` or ``"aB"`` into a reduced word."""
    pos, letters = 0, []
    text = text.replace(" ", "")
    while pos < len(text):
        m = _WORD_TOKEN.match(text, pos)
        if not m:
            raise EncodingError(f"bad free-group word {text!r}")
        ch = m.group(1)
        letters.append(_flip(ch) if m.group(2) else ch)
        pos = m.end()
    return reduce_word("".join(letters))


class F2(GroupModel):
    """Free group on a, b. N is trivial, so zones are the elements themselves."""

    family = "F2"
    quotient_amenable = "no"
    subgroup_infinite = False
    name = "F2"

    def __init__(self):
        super().__init__()
        self.generators = {"a": "a", "A": "A", "b": "b", "B": "B"}

    @property
    def identity(self):
        return ""

    def mul(self, a, b):
        i = 0
        while i < len(a) and i < len(b) and a[-1 - i] == _flip(b[i]):
            i += 1
        return a[: len(a) - i] + b[i:]

    def inv(self, a):
        return "".join(_flip(c) for c in reversed(a))

    def check(self, a):
        if not isinstance(a, str):
            raise EncodingError(f"free-group words are strings, got {a!r}")
        return parse_word(a)

    def zone_of(self, g):
        return g

    def quotient(self):
        return self

    def word_length(self, g):
        return len(g)

    def shortlex_key(self, g):
        return (len(g), tuple("aAbB".index(c) for c in g))

    def descriptor(self):
        return {"family": "F2"}


class F2xZ(GroupModel):
    """F2 x Z with N the Z factor; elements are (word, k)."""

    family = "F2xZ"
    quotient_amenable = "no"
    name = "F2xZ"

    def __init__(self):
        super().__init__()
        self._free = F2()
        self.generators = {
            "a": ("a", 0),
            "A": ("A", 0),
            "b": ("b", 0),
            "B": ("B", 0),
            "t": ("", 1),
            "T": ("", -1),
        }
        self.subgroup_generators = {"t": ("", 1), "T": ("", -1)}

    @property
    def identity(self):
        return ("", 0)

    def mul(self, a, b):
        return (self._free.mul(a[0], b[0]), a[1] + b[1])

    def inv(self, a):
        return (self._free.inv(a[0]), -a[1])

    def check(self, a):
        try:
            w, k = a
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"expected (word, int), got {a!r}") from exc
        if not isinstance(k, int):
            raise EncodingError(f"Z coordinate must be an int, got {k!r}")
        return (self._free.check(w), k)

    def zone_of(self, g):
        return g[0]

    def quotient(self):
        return self._free

    def word_length(self, g):
        return len(g[0]) + abs(g[1])

    def to_json(self, g):
        return [g[0], g[1]]

    def from_json(self, data):
        return self.check((data[0], data[1]))

    def descriptor(self):
        return {"family": "F2xZ"}


STOCK_MODELS = {
    "z": lambda: Zd(1, 1),
    "z2": lambda: Zd(2, 1),
    "z2h": lambda: Zd(2, n_axes=(0,)),
    "z3": lambda: Zd(3, 2),
    "heis": Heisenberg,
    "f2": F2,
    "f2xz": F2xZ,
}


def make_model(spec) -> GroupModel:
    """Build a model from a stock name or a descriptor dict.

    >>> make_model({"family": "Zd", "d": 2, "k": 1}).zone_of((3, 7))
    (3,)
    """
    if isinstance(spec, GroupModel):
        return spec
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in STOCK_MODELS:
            return STOCK_MODELS[key]()
        raise UnsupportedModel(f"unknown model name {spec!r}")
    if not isinstance(spec, dict) or "family" not in spec:
        raise UnsupportedModel(f"bad model descriptor {spec!r}")
    fam = str(spec["family"]).lower()
    if fam == "zd":
        model = Zd(int(spec["d"]), spec.get("k"), spec.get("n_axes"))
    elif fam == "heisenberg":
        model = Heisenberg()
    elif fam == "f2":
        model = F2()
    elif fam == "f2xz":
        model = F2xZ()
    else:
        raise UnsupportedModel(f"unsupported family {spec['family']!r}")
    if spec.get("subgroup") == "none":
        model.has_subgroup = False
    return model


# Validated functional interface -----------------------------------------

def mul(model: GroupModel, a, b):
    return model.mul(model.check(a), model.check(b))


def inv(model: GroupModel, a):
    return model.inv(model.check(a))


def identity(model: GroupModel):
    return model.identity


def zone_of(model: GroupModel, g):
    if not model.has_subgroup:
        raise NoSubgroup(f"{model.name} has no designated subgroup")
    return model.zone_of(model.check(g))
