"""Exact arithmetic for the three group models.

Free group elements are reduced words over signed integer letters (``i``
stands for a_i, ``-i`` for its inverse).  Lattice elements are integer
vectors.  Affine elements are pairs ``(m, b)`` acting as ``x -> 2**m x + b``
with ``b`` a dyadic rational.
"""

from __future__ import annotations

import re
from collections import deque
from fractions import Fraction
from typing import Iterator, List, Sequence, Union


class ModelMismatch(TypeError):
    pass


Word = tuple  # a reduced free-group word is a plain tuple of letters


def word(letters: Sequence[int] = ()) -> Word:
    """Freely reduce a letter sequence."""
    out: List[int] = []
    for x in letters:
        x = int(x)
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(x != 0 for x in w) and all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def wmul(a: Word, b: Word) -> Word:
    """Concatenate and cancel; both inputs must be reduced."""
    i = 0
    la = len(a)
    n = la if la < len(b) else len(b)
    while i < n and a[la - 1 - i] == -b[i]:
        i += 1
    if i == 0:
        return a + b
    return a[: la - i] + b[i:]


def winv(a: Word) -> Word:
    return tuple(-x for x in reversed(a))


E: Word = ()


_tuple_new = tuple.__new__


class Vec(tuple):
    """Element of Z^d under addition."""

    __slots__ = ()

    def __new__(cls, coords: Sequence[int] = ()):
        return tuple.__new__(cls, (int(c) for c in coords))

    def __mul__(self, other):
        if not isinstance(other, Vec) or len(other) != len(self):
            raise ModelMismatch("lattice elements of different models")
        return _tuple_new(Vec, tuple(x + y for x, y in zip(self, other)))

    def __rmul__(self, other):
        raise ModelMismatch(f"cannot multiply {type(other).__name__} by Vec")

    def inverse(self) -> "Vec":
        return _tuple_new(Vec, tuple(-x for x in self))

    def __add__(self, other):
        raise TypeError("use * for the group law")

    def __repr__(self):
        return f"Vec({tuple(self)})"

    def __str__(self):
        return format_element(self)


def _is_dyadic(b: Fraction) -> bool:
    d = b.denominator
    return d & (d - 1) == 0


class Affine(tuple):
    """The map x -> 2**m * x + b, stored as ``(m, b)``."""

    __slots__ = ()

    def __new__(cls, m: int, b=0):
        b = Fraction(b)
        if not _is_dyadic(b):
            raise ValueError(f"offset {b} is not dyadic")
        return tuple.__new__(cls, (int(m), b))

    @property
    def m(self) -> int:
        return self[0]

    @property
    def b(self) -> Fraction:
        return self[1]

    @property
    def scale(self) -> Fraction:
        return Fraction(2) ** self[0]

    def __mul__(self, other):
        # (g*h)(x) = g(h(x))
        if not isinstance(other, Affine):
            raise ModelMismatch(f"cannot multiply Affine by {type(other).__name__}")
        m, b = self
        m2, b2 = other
        return _tuple_new(Affine, (m + m2, Fraction(2) ** m * b2 + b))

    def __rmul__(self, other):
        raise ModelMismatch(f"cannot multiply {type(other).__name__} by Affine")

    def inverse(self) -> "Affine":
        m, b = self
        return _tuple_new(Affine, (-m, -(Fraction(2) ** -m) * b))

    def __call__(self, x):
        return self.scale * x + self.b

    def __add__(self, other):
        raise TypeError("use * for the group law")

    def __repr__(self):
        return f"Affine(m={self[0]}, b={self[1]})"

    def __str__(self):
        return format_element(self)


GroupElement = Union[Word, Vec, Affine]


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    if type(g) is not type(h):
        raise ModelMismatch(f"{type(g).__name__} and {type(h).__name__}")
    if type(g) is tuple:
        return wmul(g, h)
    return g * h


def invert(g: GroupElement) -> GroupElement:
    if type(g) is tuple:
        return winv(g)
    return g.inverse()


def length(g: GroupElement) -> int:
    """Word length with respect to the standard generators.

    For Z^d this is the l1 norm; for affine elements it is only defined
    through breadth-first search (see :meth:`AffineModel.ball`).
    """
    if isinstance(g, Vec):
        return sum(abs(c) for c in g)
    if type(g) is tuple:
        return len(g)
    raise TypeError("affine word length has no closed form; use AffineModel.ball")


# ---------------------------------------------------------------------------
# letter order and text form
# ---------------------------------------------------------------------------


def letter_key(x: int) -> int:
    """Canonical letter order a1 < a1' < a2 < a2' < ..."""
    return 2 * abs(x) + (x < 0)


def letters(r: int) -> List[int]:
    if r < 1:
        raise ValueError("rank must be positive")
    return sorted([i for i in range(1, r + 1)] + [-i for i in range(1, r + 1)], key=letter_key)


def canonical_key(w: Word):
    return (len(w), tuple(letter_key(x) for x in w))


def format_letter(x: int) -> str:
    return f"a{abs(x)}" + ("'" if x < 0 else "")


def format_word(w: Sequence[int]) -> str:
    if not w:
        return "e"
    return " ".join(format_letter(x) for x in w)


_LETTER = re.compile(r"a(\d+)('*)")


def parse_word(text: str) -> Word:
    """Parse ``"a1 a2' a1"``; ``"e"`` or empty is the identity.

    Letters may also be glued (``"a1a2'"``); the result is reduced.
    """
    s = text.strip()
    if s in ("", "e"):
        return E
    out = []
    pos = 0
    s = s.replace(" ", "")
    while pos < len(s):
        m = _LETTER.match(s, pos)
        if not m or m.group(1) == "0":
            raise ValueError(f"bad word {text!r} at offset {pos}")
        i = int(m.group(1))
        out.append(-i if len(m.group(2)) % 2 else i)
        pos = m.end()
    return word(out)


def format_element(g: GroupElement) -> str:
    if isinstance(g, Vec):
        if len(g) == 1:
            return str(g[0])
        return "(" + ",".join(str(c) for c in g) + ")"
    if isinstance(g, Affine):
        return f"aff({g.m},{g.b})"
    if type(g) is tuple:
        return format_word(g)
    raise TypeError(type(g))


def parse_element(text: str, model: "Model") -> GroupElement:
    return model.parse(text)


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


class Model:
    name = "abstract"

    def identity(self) -> GroupElement:
        raise NotImplementedError

    def generators(self) -> List[GroupElement]:
        raise NotImplementedError

    def sphere(self, k: int) -> List[GroupElement]:
        raise NotImplementedError

    def ball(self, k: int) -> List[GroupElement]:
        out: List[GroupElement] = []
        for j in range(k + 1):
            out.extend(self.sphere(j))
        return out

    def parse(self, text: str) -> GroupElement:
        raise NotImplementedError

    def format(self, g: GroupElement) -> str:
        return format_element(g)

    def sort_key(self, g):
        return g


class FreeGroup(Model):
    """The free group F_r on a_1..a_r."""

    name = "free"

    def __init__(self, r: int):
        if r < 1:
            raise ValueError("rank must be positive")
        self.r = r
        self.letters = letters(r)

    def __repr__(self):
        return f"FreeGroup({self.r})"

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.r == self.r

    def __hash__(self):
        return hash(("free", self.r))

    def identity(self) -> Word:
        return E

    def generators(self) -> List[Word]:
        return [(x,) for x in self.letters]

    def sphere_size(self, k: int) -> int:
        if k == 0:
            return 1
        return 2 * self.r * (2 * self.r - 1) ** (k - 1)

    def ball_size(self, k: int) -> int:
        return sum(self.sphere_size(j) for j in range(k + 1))

    def iter_sphere(self, k: int) -> Iterator[Word]:
        """Reduced words of length k in canonical order.

        Each layer extends the previous one by every letter except the
        inverse of the last letter, so no non-reduced word is ever built.
        """
        if k < 0:
            raise ValueError("radius must be non-negative")
        if k == 0:
            yield E
            return
        lets = self.letters
        layer = [(x,) for x in lets]
        for _ in range(k - 1):
            layer = [w + (x,) for w in layer for x in lets if x != -w[-1]]
        yield from layer

    def sphere(self, k: int) -> List[Word]:
        return list(self.iter_sphere(k))

    def iter_ball(self, k: int) -> Iterator[Word]:
        for j in range(k + 1):
            yield from self.iter_sphere(j)

    def ball(self, k: int) -> List[Word]:
        return list(self.iter_ball(k))

    def check(self, g) -> Word:
        if type(g) is not tuple:
            raise ModelMismatch(f"{g!r} is not a free group word")
        if any(abs(x) > self.r for x in g):
            raise ModelMismatch(f"{g} uses generators outside rank {self.r}")
        return g

    def parse(self, text: str) -> Word:
        return self.check(parse_word(text))

    def sort_key(self, g):
        return canonical_key(g)


class Lattice(Model):
    """Z^d with the l1 word metric."""

    name = "lattice"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be positive")
        self.d = d

    def __repr__(self):
        return f"Lattice({self.d})"

    def __eq__(self, other):
        return isinstance(other, Lattice) and other.d == self.d

    def __hash__(self):
        return hash(("lattice", self.d))

    def identity(self) -> Vec:
        return Vec((0,) * self.d)

    def generators(self) -> List[Vec]:
        out = []
        for i in range(self.d):
            for s in (1, -1):
                c = [0] * self.d
                c[i] = s
                out.append(Vec(c))
        return out

    def sphere(self, k: int) -> List[Vec]:
        if k < 0:
            raise ValueError("radius must be non-negative")
        out = []

        def rec(prefix, rem, left):
            if left == 1:
                if rem == 0:
                    out.append(Vec(prefix + [0]))
                else:
                    out.append(Vec(prefix + [-rem]))
                    out.append(Vec(prefix + [rem]))
                return
            for c in range(-rem, rem + 1):
                rec(prefix + [c], rem - abs(c), left - 1)

        rec([], k, self.d)
        return sorted(out, key=self.sort_key)

    def box(self, n: int, half_open: bool = False) -> List[Vec]:
        """The Folner box [-n, n]^d, or [-n, n)^d when ``half_open``."""
        hi = n if half_open else n + 1
        out = [()]
        for _ in range(self.d):
            out = [t + (c,) for t in out for c in range(-n, hi)]
        return [Vec(t) for t in out]

    def check(self, g) -> Vec:
        if not isinstance(g, Vec) or len(g) != self.d:
            raise ModelMismatch(f"{g!r} is not in Z^{self.d}")
        return g

    def parse(self, text: str) -> Vec:
        s = text.strip()
        if s.startswith("("):
            s = s[1:-1]
        return self.check(Vec(int(c) for c in s.split(",")))

    def sort_key(self, g):
        # e1 < -e1 < e2 < -e2, matching a1 < a1' < a2 when Z = F_1
        return (length(g), tuple((-abs(c), c < 0) for c in g))


class AffineModel(Model):
    """The subgroup of Aff(R) generated by x -> x + 1 and x -> 2x."""

    name = "affine"

    def __init__(self):
        self._spheres: List[List[Affine]] = [[Affine(0, 0)]]
        self._seen = {Affine(0, 0)}

    def __repr__(self):
        return "AffineModel()"

    def __eq__(self, other):
        return isinstance(other, AffineModel)

    def __hash__(self):
        return hash("affine")

    def identity(self) -> Affine:
        return Affine(0, 0)

    def generators(self) -> List[Affine]:
        return [Affine(0, 1), Affine(0, -1), Affine(1, 0), Affine(-1, 0)]

    def sphere(self, k: int) -> List[Affine]:
        if k < 0:
            raise ValueError("radius must be non-negative")
        gens = self.generators()
        while len(self._spheres) <= k:
            nxt = []
            for g in self._spheres[-1]:
                for s in gens:
                    h = g * s
                    if h not in self._seen:
                        self._seen.add(h)
                        nxt.append(h)
            self._spheres.append(sorted(nxt, key=self.sort_key))
        return list(self._spheres[k])

    def parse(self, text: str) -> Affine:
        m = re.fullmatch(r"\s*aff\(\s*(-?\d+)\s*,\s*([^)]+)\)\s*", text)
        if not m:
            raise ValueError(f"bad affine element {text!r}")
        return Affine(int(m.group(1)), Fraction(m.group(2).strip()))

    def sort_key(self, g):
        return (g.m, g.b)


def model_of(g: GroupElement, rank: int = 0) -> Model:
    if type(g) is tuple:
        return FreeGroup(max([rank, 1] + [abs(x) for x in g]))
    if isinstance(g, Vec):
        return Lattice(len(g))
    if isinstance(g, Affine):
        return AffineModel()
    raise TypeError(type(g))


def sphere(r: int, k: int) -> List[Word]:
    return FreeGroup(r).sphere(k)


def ball(r: int, k: int) -> List[Word]:
    return FreeGroup(r).ball(k)


def bfs_ball(gens: Sequence[GroupElement], identity: GroupElement, k: int) -> List[GroupElement]:
    """Ball of radius k in the Cayley graph of an arbitrary generating list."""
    seen = {identity}
    frontier = deque([(identity, 0)])
    out = [identity]
    while frontier:
        g, d = frontier.popleft()
        if d == k:
            continue
        for s in gens:
            h = multiply(g, s)
            if h not in seen:
                seen.add(h)
                out.append(h)
                frontier.append((h, d + 1))
    return out
