"""Subsets of a group with decidable membership, products, and densities."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .boundary import BoundaryPoint, CylinderUnion, Node, letter_index, parse_cyl, parse_point, tree_depth
from .groups import (
    FreeGroup,
    GroupElement,
    Lattice,
    Model,
    ModelMismatch,
    Vec,
    Word,
    format_element,
    invert,
    length,
    multiply,
    word,
)
from .measures import DEFAULT_SUPPORT_CAP, FiniteMeasure, walk_powers


class BudgetExceeded(RuntimeError):
    pass


DEFAULT_BUDGET = 2_000_000


def _ball_members(model: Model, R: int) -> List[GroupElement]:
    if isinstance(model, Lattice):
        return model.ball(R)
    return model.ball(R)


class GroupSet:
    """Base class.  Subclasses implement :meth:`contains`.

    ``radius`` is the declared support radius (every member lies in
    ball(radius)) or None when unbounded / unknown.
    """

    model: Model
    radius: Optional[int] = None

    def contains(self, g) -> bool:
        raise NotImplementedError

    def __contains__(self, g) -> bool:
        return self.contains(g)

    def witness(self, g):
        """Replayable evidence that g is a member, or None."""
        return True if self.contains(g) else None

    def members(self, R: int) -> List[GroupElement]:
        return [g for g in _ball_members(self.model, R) if self.contains(g)]

    def finite_members(self, cap: int) -> Optional[List[GroupElement]]:
        """All members, if the set is known to be small."""
        if self.radius is None:
            return None
        if isinstance(self.model, FreeGroup) and self.model.ball_size(self.radius) > cap:
            return None
        return self.members(self.radius)

    def has_product(self) -> bool:
        return False

    def spec(self) -> str:
        raise NotImplementedError

    def raw(self) -> dict:
        """Description used by the independent verifier."""
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec()}>"

    # combinators
    def __and__(self, other):
        return AndSet(self, other)

    def __or__(self, other):
        return OrSet(self, other)

    def __invert__(self):
        return NotSet(self)


def _fmt(model, g) -> str:
    return format_element(g)


class AllSet(GroupSet):
    def __init__(self, model: Model):
        self.model = model

    def contains(self, g) -> bool:
        return True

    def spec(self):
        return "all"

    def raw(self):
        return {"type": "all"}


class ExplicitSet(GroupSet):
    def __init__(self, model: Model, elements: Iterable[GroupElement]):
        self.model = model
        self.elements = frozenset(elements)
        self._sorted = sorted(self.elements, key=model.sort_key)
        self.radius = max((length(g) for g in self.elements), default=0) if not _is_affine(model) else None

    def contains(self, g) -> bool:
        return g in self.elements

    def members(self, R: int):
        return [g for g in self._sorted if length(g) <= R]

    def finite_members(self, cap: int):
        return list(self._sorted)

    def spec(self):
        return "explicit:[" + ",".join(_fmt(self.model, g) for g in self._sorted) + "]"

    def raw(self):
        return {"type": "explicit", "elements": [_fmt(self.model, g) for g in self._sorted]}


def _is_affine(model) -> bool:
    return type(model).__name__ == "AffineModel"


class PrefixSet(GroupSet):
    """Reduced words starting with the given reduced word."""

    def __init__(self, model: FreeGroup, w: Word):
        if not isinstance(model, FreeGroup):
            raise TypeError("prefix sets live in free groups")
        self.model = model
        self.w = word(w)

    def contains(self, g) -> bool:
        return g[: len(self.w)] == self.w

    def spec(self):
        return "prefix:" + _fmt(self.model, self.w)

    def raw(self):
        return {"type": "prefix", "word": _fmt(self.model, self.w)}


class SliceSet(GroupSet):
    """``A_x = {g : g.x in U}`` for a clopen U and an eventually periodic x."""

    def __init__(self, U: CylinderUnion, x: BoundaryPoint):
        if not isinstance(x, BoundaryPoint):
            raise TypeError("slice point must be a BoundaryPoint")
        if any(abs(c) > U.r for c in x.u + x.v):
            raise ValueError("point uses letters outside the alphabet")
        self.model = FreeGroup(U.r)
        self.U = U
        self.x = x
        self.depth = tree_depth(U.tree)
        self._pre: Word = x.prefix(64)
        self._idx = {c: letter_index(c) for c in self.model.letters}

    def _prefix(self, n: int) -> Word:
        if n > len(self._pre):
            self._pre = self.x.prefix(2 * n)
        return self._pre

    def contains(self, g) -> bool:
        t = self.U.tree
        if not isinstance(t, Node):
            return t
        lg = len(g)
        d = self.depth
        pre = self._prefix(lg + d)
        j = 0
        while j < lg and g[lg - 1 - j] == -pre[j]:
            j += 1
        idx = self._idx
        for c in g[: lg - j]:
            t = t.children[idx[c]]
            if not isinstance(t, Node):
                return t
        for c in pre[j : j + d]:
            t = t.children[idx[c]]
            if not isinstance(t, Node):
                return t
        raise AssertionError("slice tree deeper than its depth")

    def spec(self):
        return f"slice:{self.U.spec()}@{self.x.spec()}"

    def raw(self):
        return {
            "type": "slice",
            "r": self.U.r,
            "cylinders": [_fmt(self.model, w) for w in self.U.cylinders()],
            "u": _fmt(self.model, self.x.u),
            "v": _fmt(self.model, self.x.v),
        }


@dataclass(frozen=True)
class Homomorphism:
    """``tau(a_i) = weights[i-1]`` on F_r, or a dot product on Z^d."""

    weights: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))

    def __call__(self, g) -> int:
        if isinstance(g, Vec):
            if len(g) != len(self.weights):
                raise ValueError("dimension mismatch")
            return sum(a * b for a, b in zip(g, self.weights))
        w = self.weights
        return sum(w[x - 1] if x > 0 else -w[-x - 1] for x in g)

    def is_zero(self) -> bool:
        return not any(self.weights)


_CMP = {
    ">": lambda a, b: a > b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


class SignSet(GroupSet):
    """``{g : tau(g) <op> k}``."""

    def __init__(self, model: Model, tau: Homomorphism, op: str = ">", k: int = 0):
        size = model.r if isinstance(model, FreeGroup) else getattr(model, "d", None)
        if len(tau.weights) != size:
            raise ValueError(f"homomorphism needs {size} weights")
        if op not in _CMP:
            raise ValueError(f"unknown comparison {op!r}")
        self.model = model
        self.tau = tau
        self.op = op
        self.k = k
        self._f = _CMP[op]

    def contains(self, g) -> bool:
        return self._f(self.tau(g), self.k)

    def spec(self):
        return f"sign:tau=({','.join(map(str, self.tau.weights))}){self.op}{self.k}"

    def raw(self):
        return {"type": "sign", "weights": list(self.tau.weights), "op": self.op, "k": self.k}


class CongruenceSet(GroupSet):
    """Vectors with every coordinate congruent to ``offset`` mod ``m``."""

    def __init__(self, model: Lattice, m: int, offset: int = 0):
        if not isinstance(model, Lattice):
            raise TypeError("congruence sets live in Z^d")
        if m < 1:
            raise ValueError("modulus must be positive")
        self.model = model
        self.m = m
        self.offset = offset % m

    def contains(self, g) -> bool:
        return all(c % self.m == self.offset for c in g)

    def spec(self):
        return f"cong:{self.m}Z" + (f"+{self.offset}" if self.offset else "")

    def raw(self):
        return {"type": "cong", "m": self.m, "offset": self.offset}


class AndSet(GroupSet):
    def __init__(self, a: GroupSet, b: GroupSet):
        _same_model(a, b)
        self.model, self.a, self.b = a.model, a, b
        radii = [x.radius for x in (a, b) if x.radius is not None]
        self.radius = min(radii) if radii else None

    def contains(self, g):
        return self.a.contains(g) and self.b.contains(g)

    def witness(self, g):
        wa = self.a.witness(g)
        if wa is None:
            return None
        wb = self.b.witness(g)
        return None if wb is None else [wa, wb]

    def has_product(self):
        return self.a.has_product() or self.b.has_product()

    def spec(self):
        return f"and({self.a.spec()},{self.b.spec()})"

    def raw(self):
        return {"type": "and", "sets": [self.a.raw(), self.b.raw()]}


class OrSet(GroupSet):
    def __init__(self, a: GroupSet, b: GroupSet):
        _same_model(a, b)
        self.model, self.a, self.b = a.model, a, b
        if a.radius is not None and b.radius is not None:
            self.radius = max(a.radius, b.radius)

    def contains(self, g):
        return self.a.contains(g) or self.b.contains(g)

    def witness(self, g):
        wa = self.a.witness(g)
        if wa is not None:
            return {"side": 0, "w": wa}
        wb = self.b.witness(g)
        return None if wb is None else {"side": 1, "w": wb}

    def has_product(self):
        return self.a.has_product() or self.b.has_product()

    def spec(self):
        return f"or({self.a.spec()},{self.b.spec()})"

    def raw(self):
        return {"type": "or", "sets": [self.a.raw(), self.b.raw()]}


class NotSet(GroupSet):
    def __init__(self, a: GroupSet):
        self.model, self.a = a.model, a

    def contains(self, g):
        return not self.a.contains(g)

    def has_product(self):
        return self.a.has_product()

    def spec(self):
        return f"not({self.a.spec()})"

    def raw(self):
        return {"type": "not", "set": self.a.raw()}


class InverseSet(GroupSet):
    """``A^-1``: membership of g is membership of g^-1 in A."""

    def __init__(self, a: GroupSet):
        self.model, self.a = a.model, a
        self.radius = a.radius

    def contains(self, g):
        return self.a.contains(invert(g))

    def witness(self, g):
        return self.a.witness(invert(g))

    def has_product(self):
        return self.a.has_product()

    def spec(self):
        return f"inv({self.a.spec()})"

    def raw(self):
        return {"type": "inv", "set": self.a.raw()}


def inverse_set(a: GroupSet) -> GroupSet:
    if isinstance(a, InverseSet):
        return a.a
    return InverseSet(a)


def _same_model(a: GroupSet, b: GroupSet):
    if a.model != b.model:
        raise ValueError(f"sets live in different groups: {a.model} vs {b.model}")


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

SMALL_FACTOR = 20_000


class ProductSet(GroupSet):
    """``{ab : a in A, |a| <= R_f, b in B, |b| <= R_f}``.

    Membership is decided by a search.  ``exhaustive`` says whether the
    search visits every factorisation inside the factor ball; when it does
    not, a negative answer only means that no witness was found.
    """

    def __init__(self, a: GroupSet, b: GroupSet, factor_radius: int, slack: int = 2):
        _same_model(a, b)
        if factor_radius < 0:
            raise ValueError("factor radius must be non-negative")
        self.model, self.a, self.b = a.model, a, b
        self.factor_radius = factor_radius
        self.slack = slack
        self._cache: Dict[GroupElement, Optional[Tuple]] = {}
        self._left = a.finite_members(SMALL_FACTOR)
        self._right = None if self._left is not None else b.finite_members(SMALL_FACTOR)
        if self._left is not None:
            self._left = [x for x in self._left if length(x) <= factor_radius]
        if self._right is not None:
            self._right = [x for x in self._right if length(x) <= factor_radius]
        self._slice_diff = self._left is None and self._right is None and _slice_difference(a, b)
        if self._left is not None or self._right is not None:
            self.strategy = "finite-factor"
            self.exhaustive = True
        elif isinstance(self.model, Lattice):
            self.strategy = "lattice-scan"
            self.exhaustive = True
            self._left = [x for x in self.model.ball(factor_radius) if a.contains(x)]
        elif self._slice_diff:
            self.strategy = "slice-difference"
            self.exhaustive = False
        elif isinstance(self.model, FreeGroup):
            self.strategy = "split"
            self.exhaustive = slack >= factor_radius
            self._tails = self.model.ball(slack)
        else:
            raise TypeError(f"no product search for {self.model}")
        ra, rb = a.radius, b.radius
        if ra is not None and rb is not None:
            self.radius = ra + rb
        self.exact = self.exhaustive and ra is not None and rb is not None and max(ra, rb) <= factor_radius

    def has_product(self):
        return True

    def find(self, h) -> Optional[Tuple[GroupElement, GroupElement]]:
        if h in self._cache:
            return self._cache[h]
        got = self._search(h)
        self._cache[h] = got
        return got

    def contains(self, h) -> bool:
        return self.find(h) is not None

    def witness(self, h):
        f = self.find(h)
        if f is None:
            return None
        a, b = f
        return {
            "a": format_element(a),
            "b": format_element(b),
            "wa": self.a.witness(a),
            "wb": self.b.witness(b),
        }

    def _search(self, h):
        Rf = self.factor_radius
        A, B = self.a, self.b
        if self.strategy in ("finite-factor", "lattice-scan"):
            if self._left is not None:
                for a in self._left:
                    b = multiply(invert(a), h)
                    if length(b) <= Rf and B.contains(b):
                        return a, b
                return None
            for b in self._right:
                a = multiply(h, invert(b))
                if length(a) <= Rf and A.contains(a):
                    return a, b
            return None
        if self.strategy == "slice-difference":
            return _slice_difference_search(A, B, h, Rf)
        # split search: h = p q, a = p t, b = t^-1 q
        n = len(h)
        for i in range(n + 1):
            p, q = h[:i], h[i:]
            for t in self._tails:
                a = multiply(p, t)
                if len(a) > Rf:
                    continue
                b = multiply(invert(t), q)
                if len(b) > Rf:
                    continue
                if A.contains(a) and B.contains(b):
                    return a, b
        return None

    def spec(self):
        return f"prod({self.a.spec()},{self.b.spec()},{self.factor_radius})"

    def raw(self):
        return {"type": "prod", "sets": [self.a.raw(), self.b.raw()], "factor_radius": self.factor_radius}


def _slice_difference(a: GroupSet, b: GroupSet) -> bool:
    return (
        isinstance(a, SliceSet)
        and isinstance(b, InverseSet)
        and isinstance(b.a, SliceSet)
        and b.a.x == a.x
    )


def _slice_difference_search(A: SliceSet, B: InverseSet, h: Word, Rf: int):
    """``h in U_x V_x^-1`` iff some c with c.x in Z = V cap h^-1 U exists.

    The witness is ``a = h c``, ``b = c^-1``.  Candidates c steer x into a
    maximal cylinder [w] of Z: c = w t (x_1..x_k)^-1.
    """
    V = B.a.U
    x = A.x
    Z = V & A.U.translate(invert(h))
    if Z.is_empty():
        return None
    letters = A.model.letters
    pre = x.prefix(4)
    cands = []
    for w in Z.cylinders():
        if len(w) > Rf + 4:
            continue
        for k in range(0, 4):
            back = tuple(-c for c in reversed(pre[:k]))
            for t in [()] + [(s,) for s in letters]:
                c = multiply(multiply(w, t), back)
                if len(c) <= Rf:
                    cands.append(c)
    best = None
    for c in sorted(set(cands), key=lambda c: (len(c), A.model.sort_key(c))):
        a = multiply(h, c)
        if len(a) > Rf:
            continue
        if B.a.contains(c) and A.contains(a):
            key = (max(len(a), len(c)), A.model.sort_key(c))
            if best is None or key < best[0]:
                best = (key, a, invert(c))
    return None if best is None else (best[1], best[2])


def product_set(a: GroupSet, b: GroupSet, R: int, factor_radius: int) -> "WindowSet":
    """The window ``{ab : a in A, b in B, |a|,|b| <= R_f} cap ball(R)``."""
    P = ProductSet(a, b, factor_radius)
    model = a.model
    left = a.finite_members(SMALL_FACTOR) if P.strategy != "lattice-scan" else P._left
    right = b.finite_members(SMALL_FACTOR) if P.strategy != "lattice-scan" else b.members(factor_radius)
    if left is not None and right is not None and len(left) * len(right) <= DEFAULT_BUDGET:
        left = [x for x in left if length(x) <= factor_radius]
        right = [x for x in right if length(x) <= factor_radius]
        got = set()
        for x in left:
            for y in right:
                z = multiply(x, y)
                if length(z) <= R:
                    got.add(z)
        members = sorted(got, key=model.sort_key)
        exact = a.radius is not None and b.radius is not None and max(a.radius, b.radius) <= factor_radius
        return WindowSet(R, tuple(members), f"double-loop {P.spec()}", exact)
    members = [g for g in _ball_members(model, R) if P.contains(g)]
    return WindowSet(R, tuple(members), f"{P.strategy} {P.spec()}", P.exact)


@dataclass(frozen=True)
class WindowSet:
    """Finite shadow of a set inside ball(radius)."""

    radius: int
    members: Tuple[GroupElement, ...]
    provenance: str
    exact: bool = False

    @property
    def flag(self) -> str:
        return "EXACT" if self.exact else "INNER"

    def __contains__(self, g):
        return g in set(self.members)

    def __len__(self):
        return len(self.members)


# ---------------------------------------------------------------------------
# spec language
# ---------------------------------------------------------------------------


class SpecError(ValueError):
    pass


def _split_top(text: str, sep: str = ",") -> List[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def _call_args(text: str, name: str) -> List[str]:
    inner = text[len(name) + 1 : -1]
    if not text.endswith(")"):
        raise SpecError(f"unterminated {name}(...)")
    return [p.strip() for p in _split_top(inner)]


_SIGN = re.compile(r"sign:tau=\(([-\d,\s]+)\)\s*(>=|<=|!=|>|<|=)\s*(-?\d+)")
_CONG = re.compile(r"cong:(\d+)Z(?:\+(\d+))?")


def parse_set(text: str, model: Model) -> GroupSet:
    """Parse the set-spec mini-language (see README)."""
    try:
        return _parse_set(text, model)
    except SpecError:
        raise
    except (ValueError, ModelMismatch) as e:
        raise SpecError(f"{text!r}: {e}") from None


def _parse_set(text: str, model: Model) -> GroupSet:
    s = text.strip()
    if s == "all":
        return AllSet(model)
    if s.startswith("explicit:[") and s.endswith("]"):
        body = s[len("explicit:[") : -1].strip()
        parts = [p for p in _split_top(body)] if body else []
        return ExplicitSet(model, [model.parse(p.strip()) for p in parts])
    if s.startswith("prefix:"):
        if not isinstance(model, FreeGroup):
            raise SpecError("prefix: needs a free group")
        if not s[len("prefix:") :].strip():
            raise SpecError("prefix: needs a word")
        w = model.parse(s[len("prefix:") :])
        return PrefixSet(model, w)
    if s.startswith("slice:"):
        if not isinstance(model, FreeGroup):
            raise SpecError("slice: needs a free group")
        body = s[len("slice:") :]
        if "@" not in body:
            raise SpecError("slice spec needs <cyl>@<point>")
        cyl, pt = body.split("@", 1)
        return SliceSet(parse_cyl(cyl, model.r), parse_point(pt))
    if s.startswith("sign:"):
        m = _SIGN.fullmatch(s)
        if not m:
            raise SpecError(f"bad sign spec {s!r}")
        tau = Homomorphism(tuple(int(x) for x in m.group(1).split(",")))
        return SignSet(model, tau, m.group(2), int(m.group(3)))
    if s.startswith("cong:"):
        m = _CONG.fullmatch(s)
        if not m or not isinstance(model, Lattice):
            raise SpecError(f"bad congruence spec {s!r} (needs Z^d)")
        return CongruenceSet(model, int(m.group(1)), int(m.group(2) or 0))
    for name in ("and", "or"):
        if s.startswith(name + "("):
            args = _call_args(s, name)
            if len(args) < 2:
                raise SpecError(f"{name} needs two or more sets")
            out = parse_set(args[0], model)
            for a in args[1:]:
                nxt = parse_set(a, model)
                out = AndSet(out, nxt) if name == "and" else OrSet(out, nxt)
            return out
    if s.startswith("not("):
        (arg,) = _call_args(s, "not")
        return NotSet(parse_set(arg, model))
    if s.startswith("inv("):
        (arg,) = _call_args(s, "inv")
        return inverse_set(parse_set(arg, model))
    if s.startswith("prod("):
        args = _call_args(s, "prod")
        if len(args) != 3:
            raise SpecError("prod(A,B,R_f) needs an explicit factor radius")
        return ProductSet(parse_set(args[0], model), parse_set(args[1], model), int(args[2]))
    raise SpecError(f"unknown set spec {s!r}")


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------


@dataclass
class DensityProfile:
    family: str
    values: List[Tuple[int, Fraction]] = field(default_factory=list)
    tail: int = 0

    def value(self, n: int) -> Fraction:
        for m, v in self.values:
            if m == n:
                return v
        raise KeyError(n)

    @property
    def last(self) -> Fraction:
        return self.values[-1][1]

    def _tail_vals(self):
        k = self.tail or max(1, len(self.values) // 2)
        return [v for _, v in self.values[-k:]]

    @property
    def running_sup(self) -> Fraction:
        return max(self._tail_vals())

    @property
    def running_inf(self) -> Fraction:
        return min(self._tail_vals())

    def to_csv(self) -> str:
        lines = ["n,value,float"]
        for n, v in self.values:
            lines.append(f"{n},{v.numerator}/{v.denominator},{float(v):.6f}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {
            "family": self.family,
            "values": [[n, f"{v.numerator}/{v.denominator}"] for n, v in self.values],
        }


def sphere_counts(B: GroupSet, k_max: int, budget: int = DEFAULT_BUDGET) -> List[Tuple[int, int]]:
    """``(|B cap S_k|, |S_k|)`` for k = 0..k_max."""
    model = B.model
    if isinstance(model, FreeGroup) and model.ball_size(k_max) > budget:
        raise BudgetExceeded(f"ball({k_max}) has {model.ball_size(k_max)} elements > budget {budget}")
    out = []
    spent = 0
    for k in range(k_max + 1):
        sph = model.iter_sphere(k) if isinstance(model, FreeGroup) else model.sphere(k)
        hit = tot = 0
        f = B.contains
        for g in sph:
            tot += 1
            if f(g):
                hit += 1
        spent += tot
        if spent > budget:
            raise BudgetExceeded(f"enumeration exceeded {budget} elements")
        out.append((hit, tot))
    return out


def density_profile(
    B: GroupSet,
    family: str = "spherical",
    n_max: int = 12,
    p: Optional[FiniteMeasure] = None,
    budget: int = DEFAULT_BUDGET,
    cap: Optional[int] = DEFAULT_SUPPORT_CAP,
) -> DensityProfile:
    """Exact ``beta_n(B)`` for n = 1..n_max.

    spherical: ``(1/n) sum_{k<n} sigma_k(B)``; folner: ``|B cap F_n| / |F_n|``
    with F_n the ball (box for Z^d); walk: ``(1/n) sum_{k=1}^n p^{*k}(B)``.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    prof = DensityProfile(family)
    if family == "spherical":
        acc = Fraction(0)
        for n, (hit, tot) in enumerate(sphere_counts(B, n_max - 1, budget), start=1):
            acc += Fraction(hit, tot)
            prof.values.append((n, acc / n))
    elif family == "folner":
        model = B.model
        hit = tot = 0
        seen = set()
        for n in range(1, n_max + 1):
            F = model.box(n) if isinstance(model, Lattice) else model.ball(n)
            if len(F) > budget:
                raise BudgetExceeded(f"F_{n} has {len(F)} elements > budget {budget}")
            for g in F:
                if g not in seen:
                    seen.add(g)
                    tot += 1
                    hit += B.contains(g)
            prof.values.append((n, Fraction(hit, tot)))
    elif family == "walk":
        if p is None:
            raise ValueError("walk family needs a step measure")
        acc = Fraction(0)
        for n, mu in enumerate(walk_powers(p, n_max, cap), start=1):
            acc += mu.mass(B.contains)
            prof.values.append((n, acc / n))
    else:
        raise ValueError(f"unknown averaging family {family!r}")
    return prof


def tau_sphere_counts(tau: Homomorphism, r: int, k_max: int) -> List[Dict[int, int]]:
    """Histogram of tau over each sphere, by last-letter dynamic programming."""
    lets = FreeGroup(r).letters
    out: List[Dict[int, int]] = [{0: 1}]
    if k_max == 0:
        return out
    state: Dict[Tuple[int, int], int] = {(x, tau((x,))): 1 for x in lets}
    step = {x: tau((x,)) for x in lets}
    for k in range(1, k_max + 1):
        hist: Dict[int, int] = {}
        for (_, t), c in state.items():
            hist[t] = hist.get(t, 0) + c
        out.append(hist)
        if k == k_max:
            break
        nxt: Dict[Tuple[int, int], int] = {}
        for (last, t), c in state.items():
            for y in lets:
                if y != -last:
                    key = (y, t + step[y])
                    nxt[key] = nxt.get(key, 0) + c
        state = nxt
    return out


def tau_split_profile(tau: Homomorphism, r: int, n_max: int):
    """Spherical profiles of ``T = {tau >= 1}``, ``T^-1 = {tau <= -1}`` and ``ker tau``."""
    if tau.is_zero():
        raise ValueError("tau must be non-zero")
    if len(tau.weights) != r:
        raise ValueError("tau needs one weight per generator")
    profs = [DensityProfile("spherical") for _ in range(3)]
    acc = [Fraction(0)] * 3
    for n, hist in enumerate(tau_sphere_counts(tau, r, n_max - 1), start=1):
        tot = sum(hist.values())
        parts = [
            sum(c for t, c in hist.items() if t >= 1),
            sum(c for t, c in hist.items() if t <= -1),
            hist.get(0, 0),
        ]
        for i in range(3):
            acc[i] += Fraction(parts[i], tot)
            profs[i].values.append((n, acc[i] / n))
    return tuple(profs)
