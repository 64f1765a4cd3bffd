"""Clopen subsets of the boundary of F_r and the harmonic measure on them.

A clopen set is a prefix tree.  A node is ``True`` (everything below is in),
``False`` (nothing below is in) or an interned :class:`Node` holding one
child per letter.  The slot of the letter that would cancel the incoming
edge is always ``False``.  Nodes are hash-consed, so two trees describe the
same set exactly when they are the same object.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .groups import E, Word, format_word, letter_key, letters, parse_word, winv, wmul, word

# ---------------------------------------------------------------------------
# interned tree nodes
# ---------------------------------------------------------------------------


class Node:
    __slots__ = ("children", "_hash", "__weakref__")

    def __init__(self, children: tuple):
        self.children = children
        self._hash = hash(children)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Node({len(self.children)})"


Tree = Union[bool, Node]

_INTERN: Dict[tuple, Node] = {}


def letter_index(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def index_letter(i: int) -> int:
    return (i // 2 + 1) * (-1 if i % 2 else 1)


def _bad_slot(incoming: Optional[int]) -> int:
    """Slot that must stay empty below an edge labelled ``incoming``."""
    return -1 if incoming is None else letter_index(-incoming)


def mk(children: tuple, incoming: Optional[int]) -> Tree:
    """Canonical node for ``children`` reached via letter ``incoming``."""
    bad = _bad_slot(incoming)
    all_true = True
    all_false = True
    for i, c in enumerate(children):
        if i == bad:
            continue
        if c is not True:
            all_true = False
        if c is not False:
            all_false = False
    if all_true:
        return True
    if all_false:
        return False
    node = _INTERN.get(children)
    if node is None:
        node = _INTERN[children] = Node(children)
    return node


def _kids(t: Tree, n: int) -> tuple:
    if isinstance(t, Node):
        return t.children
    return (t,) * n


# ---------------------------------------------------------------------------
# harmonic weights from the stationarity equations
# ---------------------------------------------------------------------------


def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Gauss-Jordan elimination over the rationals.

    Rows may be redundant but must be consistent and pin down every unknown.
    """
    m, n = len(rows), len(rows[0])
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if a[i][col] != 0), None)
        if piv is None:
            raise ArithmeticError("stationarity system does not determine the weights")
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        a[rank] = [v / p for v in a[rank]]
        for i in range(m):
            if i != rank and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[rank])]
        rank += 1
    if any(a[i][n] != 0 for i in range(rank, m)):
        raise ArithmeticError("inconsistent stationarity system")
    return [a[i][n] for i in range(n)]


@lru_cache(maxsize=None)
def harmonic_weights(r: int, depth: int = 2) -> Tuple[Fraction, ...]:
    """Measures ``(x_1, x_2, ...)`` of cylinders of each length.

    Assumes only that the stationary measure is invariant under the letter
    permutations (so a cylinder's mass depends on its length).  The
    unknowns are fixed by normalisation together with the stationarity
    equation on one cylinder of every length ``1..depth``; every translate
    is expanded with the cylinder calculus below.  For r = 1 long cylinders
    coincide with short ones, so fewer unknowns survive.
    """
    q = Fraction(1, 2 * r)
    eqs: List[Dict[int, Fraction]] = [{1: Fraction(2 * r)}]
    rhs: List[Fraction] = [Fraction(1)]

    def expand(t: Tree, coef: Fraction, into: Dict[int, Fraction]):
        for cyl in maximal_cylinders(r, t):
            if not cyl:
                raise ArithmeticError("translate produced the full boundary")
            into[len(cyl)] = into.get(len(cyl), Fraction(0)) + coef

    for k in range(1, depth + 1):
        w = (1,) * k
        eq: Dict[int, Fraction] = {}
        base = cylinder_tree(r, w)
        expand(base, Fraction(1), eq)
        for s in letters(r):
            expand(translate_tree(r, (-s,), base), -q, eq)
        eqs.append(eq)
        rhs.append(Fraction(0))
    cols = sorted({k for e in eqs for k in e})
    if cols != list(range(1, len(cols) + 1)):
        raise ArithmeticError("cylinder lengths in the system are not contiguous")
    rows = [[e.get(k, Fraction(0)) for k in cols] for e in eqs]
    return tuple(_solve_exact(rows, rhs))


@lru_cache(maxsize=None)
def _branching(r: int) -> Tuple[Fraction, Fraction]:
    xs = harmonic_weights(r)
    root = xs[0]
    if len(xs) == 1:
        # only one cylinder length is distinct; deeper cylinders are the same sets
        return root, Fraction(1)
    ratios = {xs[i + 1] / xs[i] for i in range(len(xs) - 1)}
    if len(ratios) != 1:
        raise ArithmeticError("stationary cylinder masses are not geometric")
    return root, ratios.pop()


def cylinder_mass(r: int, w: Sequence[int]) -> Fraction:
    return tree_measure(r, cylinder_tree(r, tuple(w)))


# ---------------------------------------------------------------------------
# tree algebra
# ---------------------------------------------------------------------------


def cylinder_tree(r: int, w: Sequence[int]) -> Tree:
    w = tuple(w)
    n = 2 * r
    t: Tree = True
    for i in range(len(w) - 1, -1, -1):
        kids = [False] * n
        kids[letter_index(w[i])] = t
        t = mk(tuple(kids), w[i - 1] if i > 0 else None)
    return t


_memo_bin: Dict[tuple, Tree] = {}
_memo_not: Dict[tuple, Tree] = {}


def t_not(r: int, t: Tree, incoming: Optional[int] = None) -> Tree:
    if t is True:
        return False
    if t is False:
        return True
    key = (t, incoming)
    got = _memo_not.get(key)
    if got is not None:
        return got
    bad = _bad_slot(incoming)
    kids = tuple(
        False if i == bad else t_not(r, c, index_letter(i)) for i, c in enumerate(t.children)
    )
    out = mk(kids, incoming)
    _memo_not[key] = out
    return out


def t_or(r: int, a: Tree, b: Tree, incoming: Optional[int] = None) -> Tree:
    if a is True or b is True:
        return True
    if a is False:
        return b
    if b is False or a is b:
        return a
    key = ("or", a, b, incoming)
    got = _memo_bin.get(key)
    if got is not None:
        return got
    kids = tuple(
        t_or(r, x, y, index_letter(i)) for i, (x, y) in enumerate(zip(a.children, b.children))
    )
    out = mk(kids, incoming)
    _memo_bin[key] = out
    return out


def t_and(r: int, a: Tree, b: Tree, incoming: Optional[int] = None) -> Tree:
    if a is False or b is False:
        return False
    if a is True:
        return b
    if b is True or a is b:
        return a
    key = ("and", a, b, incoming)
    got = _memo_bin.get(key)
    if got is not None:
        return got
    kids = tuple(
        t_and(r, x, y, index_letter(i)) for i, (x, y) in enumerate(zip(a.children, b.children))
    )
    out = mk(kids, incoming)
    _memo_bin[key] = out
    return out


def translate_letter(r: int, s: int, t: Tree) -> Tree:
    """The tree of ``s . U`` for a single letter ``s``.

    Rays starting with s^-1 lose that letter and land below the other root
    slots; every other ray gains s in front.
    """
    if t is True or t is False:
        return t
    n = 2 * r
    si, sinv = letter_index(s), letter_index(-s)
    kids = t.children
    under_inv = _kids(kids[sinv], n)
    shifted = list(kids)
    shifted[sinv] = False
    root = list(under_inv)
    root[si] = mk(tuple(shifted), s)
    return mk(tuple(root), None)


def translate_tree(r: int, g: Sequence[int], t: Tree) -> Tree:
    for s in reversed(g):
        t = translate_letter(r, s, t)
    return t


def tree_depth(t: Tree) -> int:
    if not isinstance(t, Node):
        return 0
    return 1 + max(tree_depth(c) for c in t.children)


def maximal_cylinders(r: int, t: Tree, prefix: Word = E) -> List[Word]:
    """Prefixes of the maximal cylinders contained in the set, in canonical order."""
    if t is True:
        return [prefix]
    if t is False:
        return []
    out = []
    for i in sorted(range(2 * r), key=lambda i: letter_key(index_letter(i))):
        c = t.children[i]
        if c is not False:
            out.extend(maximal_cylinders(r, c, prefix + (index_letter(i),)))
    return out


_memo_measure: Dict[tuple, Fraction] = {}


def _rel_measure(r: int, t: Tree) -> Fraction:
    """Mass of the set inside a non-root cylinder, relative to that cylinder."""
    if t is True:
        return Fraction(1)
    if t is False:
        return Fraction(0)
    key = (r, t)
    got = _memo_measure.get(key)
    if got is None:
        _, ratio = _branching(r)
        got = ratio * sum((_rel_measure(r, c) for c in t.children), Fraction(0))
        _memo_measure[key] = got
    return got


def tree_measure(r: int, t: Tree) -> Fraction:
    if t is True:
        return Fraction(1)
    if t is False:
        return Fraction(0)
    root, _ = _branching(r)
    return root * sum((_rel_measure(r, c) for c in t.children), Fraction(0))


def clear_caches() -> None:
    _memo_bin.clear()
    _memo_not.clear()
    _memo_measure.clear()


# ---------------------------------------------------------------------------
# public value type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderUnion:
    """A clopen subset of the boundary of F_r in canonical tree form."""

    r: int
    tree: Tree

    # -- constructors --
    @classmethod
    def full(cls, r: int) -> "CylinderUnion":
        return cls(r, True)

    @classmethod
    def empty(cls, r: int) -> "CylinderUnion":
        return cls(r, False)

    @classmethod
    def cylinder(cls, r: int, w: Sequence[int]) -> "CylinderUnion":
        w = tuple(w)
        if word(w) != w:
            raise ValueError(f"cylinder prefix {format_word(w)} is not reduced")
        if any(abs(x) > r for x in w):
            raise ValueError("prefix uses letters outside the alphabet")
        return cls(r, cylinder_tree(r, w))

    @classmethod
    def union_of(cls, r: int, words: Sequence[Sequence[int]]) -> "CylinderUnion":
        out = cls.empty(r)
        for w in words:
            out = out | cls.cylinder(r, w)
        return out

    # -- algebra --
    def _same(self, other: "CylinderUnion"):
        if not isinstance(other, CylinderUnion) or other.r != self.r:
            raise ValueError("cylinder unions over different alphabets")

    def __or__(self, other: "CylinderUnion") -> "CylinderUnion":
        self._same(other)
        return CylinderUnion(self.r, t_or(self.r, self.tree, other.tree))

    def __and__(self, other: "CylinderUnion") -> "CylinderUnion":
        self._same(other)
        return CylinderUnion(self.r, t_and(self.r, self.tree, other.tree))

    def __invert__(self) -> "CylinderUnion":
        return CylinderUnion(self.r, t_not(self.r, self.tree))

    def __sub__(self, other: "CylinderUnion") -> "CylinderUnion":
        return self & ~other

    def __eq__(self, other):
        return isinstance(other, CylinderUnion) and other.r == self.r and other.tree is self.tree

    def __hash__(self):
        return hash((self.r, self.tree))

    def is_empty(self) -> bool:
        return self.tree is False

    def is_full(self) -> bool:
        return self.tree is True

    def issubset(self, other: "CylinderUnion") -> bool:
        return (self & ~other).is_empty()

    def isdisjoint(self, other: "CylinderUnion") -> bool:
        return (self & other).is_empty()

    def depth(self) -> int:
        return tree_depth(self.tree)

    def cylinders(self) -> List[Word]:
        return maximal_cylinders(self.r, self.tree)

    def translate(self, g: Sequence[int]) -> "CylinderUnion":
        return CylinderUnion(self.r, translate_tree(self.r, tuple(g), self.tree))

    def contains_ray(self, rays: Iterator[int]) -> bool:
        t = self.tree
        for x in rays:
            if not isinstance(t, Node):
                break
            t = t.children[letter_index(x)]
        if isinstance(t, Node):
            raise ValueError("ray too short to decide membership")
        return t

    def __contains__(self, x: "BoundaryPoint") -> bool:
        return self.contains_ray(x.iter_letters())

    def measure(self) -> Fraction:
        return tree_measure(self.r, self.tree)

    def spec(self) -> str:
        return format_cyl(self)

    def __repr__(self):
        s = format_cyl(self)
        if len(s) > 80:
            s = s[:77] + "..."
        return f"CylinderUnion(r={self.r}, {s})"


def union_translates(F: Sequence[Sequence[int]], U: CylinderUnion) -> CylinderUnion:
    """``F U`` as one clopen set."""
    out = CylinderUnion.empty(U.r)
    for f in F:
        out = out | U.translate(f)
    return out


def cyl_measure(u: CylinderUnion) -> Fraction:
    return u.measure()


def translate(g: Sequence[int], u: CylinderUnion) -> CylinderUnion:
    return u.translate(g)


# ---------------------------------------------------------------------------
# eventually periodic boundary points
# ---------------------------------------------------------------------------


def _primitive_root(v: tuple) -> tuple:
    n = len(v)
    for p in range(1, n + 1):
        if n % p == 0 and v[:p] * (n // p) == v:
            return v[:p]
    return v


class MalformedPoint(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryPoint:
    """The infinite reduced word ``u v v v ...`` in normal form."""

    u: Word
    v: Word

    def __post_init__(self):
        u, v = tuple(self.u), tuple(self.v)
        if not v:
            raise MalformedPoint("period must be nonempty")
        if word(u) != u or word(v) != v:
            raise MalformedPoint("preperiod and period must be reduced")
        if v[-1] == -v[0]:
            raise MalformedPoint("period is not cyclically reduced")
        if u and u[-1] == -v[0]:
            raise MalformedPoint("preperiod cancels against the period")
        v = _primitive_root(v)
        while u and u[-1] == v[-1]:
            u = u[:-1]
            v = v[-1:] + v[:-1]
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def iter_letters(self) -> Iterator[int]:
        yield from self.u
        while True:
            yield from self.v

    def prefix(self, n: int) -> Word:
        out = list(self.u[:n])
        while len(out) < n:
            out.extend(self.v)
        return tuple(out[:n])

    def tail(self, j: int) -> "BoundaryPoint":
        """The ray with its first j letters removed."""
        lu = len(self.u)
        if j <= lu:
            return BoundaryPoint(self.u[j:], self.v)
        o = (j - lu) % len(self.v)
        return BoundaryPoint(E, self.v[o:] + self.v[:o])

    def act(self, g: Sequence[int]) -> "BoundaryPoint":
        """``g . x`` by concatenation and reduction."""
        g = tuple(g)
        pre = self.prefix(len(g))
        j = 0
        lg = len(g)
        while j < lg and g[lg - 1 - j] == -pre[j]:
            j += 1
        t = self.tail(j)
        return BoundaryPoint(g[: lg - j] + t.u, t.v)

    def spec(self) -> str:
        return f"point:u=({format_word(self.u) if self.u else ''}),v=({format_word(self.v)})"

    def __str__(self):
        return self.spec()


def act_prefix(g: Sequence[int], x: BoundaryPoint, n: int) -> Word:
    """First n letters of ``g . x`` without building the point."""
    lg = len(g)
    pre = x.prefix(lg + n)
    j = 0
    while j < lg and g[lg - 1 - j] == -pre[j]:
        j += 1
    return (tuple(g[: lg - j]) + pre[j:])[:n]


def ray_in(u: CylinderUnion, g: Sequence[int], x: BoundaryPoint) -> bool:
    """Whether ``g . x`` lies in ``u``."""
    t = u.tree
    if not isinstance(t, Node):
        return t
    d = tree_depth(t)
    for c in act_prefix(g, x, d):
        t = t.children[letter_index(c)]
        if not isinstance(t, Node):
            return t
    raise AssertionError("tree deeper than its depth")


# ---------------------------------------------------------------------------
# text forms
# ---------------------------------------------------------------------------


def format_cyl(u: CylinderUnion) -> str:
    if u.is_full():
        return "full"
    if u.is_empty():
        return "empty"
    pos = u.cylinders()
    neg = (~u).cylinders()

    def join(ws):
        return "+".join(f"cyl:[{format_word(w)}]" for w in ws)

    if len(neg) < len(pos):
        return f"~({join(neg)})"
    return join(pos)


_CYL_TOKEN = re.compile(r"\s*(cyl:\[[^\]]*\]|full|empty|[~+&()])")


def parse_cyl(text: str, r: int) -> CylinderUnion:
    """Parse ``cyl:[a1 a2']``, unions ``+``, intersections ``&``, complement ``~``."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _CYL_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad cylinder spec at {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take():
        nonlocal i
        if i >= len(toks):
            raise ValueError("cylinder spec ends early")
        i += 1
        return toks[i - 1]

    def atom():
        t = take()
        if t == "~":
            return ~atom()
        if t == "(":
            v = expr()
            if take() != ")":
                raise ValueError("unbalanced parentheses in cylinder spec")
            return v
        if t == "full":
            return CylinderUnion.full(r)
        if t == "empty":
            return CylinderUnion.empty(r)
        if t.startswith("cyl:["):
            return CylinderUnion.cylinder(r, _strict_word(t[5:-1]))
        raise ValueError(f"unexpected token {t!r}")

    def term():
        v = atom()
        while peek() == "&":
            take()
            v = v & atom()
        return v

    def expr():
        v = term()
        while peek() == "+":
            take()
            v = v | term()
        return v

    out = expr()
    if i != len(toks):
        raise ValueError(f"trailing tokens in cylinder spec: {toks[i:]}")
    return out


def _strict_word(text: str) -> Word:
    w = parse_word(text)
    n = len([x for x in text.split() if x != "e"])
    if len(w) != n:
        raise ValueError(f"{text!r} is not a reduced word")
    return w


_POINT = re.compile(r"\s*point:u=\(([^)]*)\),v=\(([^)]*)\)\s*")


def parse_point(text: str) -> BoundaryPoint:
    m = _POINT.fullmatch(text)
    if not m:
        raise MalformedPoint(f"bad point spec {text!r}")
    try:
        return BoundaryPoint(_strict_word(m.group(1)), _strict_word(m.group(2)))
    except MalformedPoint:
        raise
    except ValueError as e:
        raise MalformedPoint(str(e)) from None


# ---------------------------------------------------------------------------
# measure calculus on top of the action
# ---------------------------------------------------------------------------


def stationarity_check(u: CylinderUnion) -> Fraction:
    """``|sum_s sigma_1(s) nu(s^-1 U) - nu(U)|``."""
    q = Fraction(1, 2 * u.r)
    avg = sum((u.translate((-s,)).measure() for s in letters(u.r)), Fraction(0)) * q
    return abs(avg - u.measure())


def poisson_transform(u: CylinderUnion, g: Sequence[int]) -> Fraction:
    """``P chi_U (g) = nu({z : g z in U}) = nu(g^-1 U)``."""
    return u.translate(winv(tuple(g))).measure()


def harmonicity_defect(u: CylinderUnion, radius: int) -> Fraction:
    """max over |g| <= radius of ``|Pf(g) - sum_s sigma_1(s) Pf(g s)|``."""
    from .groups import FreeGroup

    q = Fraction(1, 2 * u.r)
    fg = FreeGroup(u.r)
    cache: Dict[Word, Fraction] = {}

    def pf(g):
        v = cache.get(g)
        if v is None:
            v = cache[g] = poisson_transform(u, g)
        return v

    worst = Fraction(0)
    for g in fg.iter_ball(radius):
        avg = q * sum((pf(wmul(g, (s,))) for s in fg.letters), Fraction(0))
        worst = max(worst, abs(pf(g) - avg))
    return worst


def rn_ratio(r: int, s: Sequence[int], depth: int) -> List[Tuple[Word, Fraction]]:
    """``nu(s [w]) / nu([w])`` over all cylinders of the given depth."""
    from .groups import FreeGroup

    s = tuple(s)
    if depth < len(s) + 1:
        raise ValueError("depth must exceed |s|")
    out = []
    for w in FreeGroup(r).iter_sphere(depth):
        c = CylinderUnion.cylinder(r, w)
        out.append((w, c.translate(s).measure() / c.measure()))
    return out
