"""Boundary constructions: SAT shrinking, fat Cantor sets, detaching witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .boundary import CylinderUnion, union_translates
from .groups import FreeGroup, Word, canonical_key, winv, wmul


class NotFound(RuntimeError):
    """No witness inside the search budget."""


class InfeasibleSchedule(ValueError):
    pass


def _check_proper(u: CylinderUnion, name: str):
    if u.is_full() or u.is_empty():
        raise ValueError(f"{name} must be proper (neither empty nor full)")


def detaching_witness(K: CylinderUnion, L: CylinderUnion, R_w: int) -> Word:
    """First s in ball(R_w), canonical order, with ``K cap sL`` empty."""
    _check_proper(K, "K")
    _check_proper(L, "L")
    for s in FreeGroup(K.r).iter_ball(R_w):
        if K.isdisjoint(L.translate(s)):
            return s
    raise NotFound(f"no detaching element in ball({R_w})")


def _steer_letter(r: int, w: Word) -> int:
    """A letter that neither cancels nor repeats the last letter of w."""
    last = w[-1] if w else None
    for t in FreeGroup(r).letters:
        if last is None or (t != -last and t != last):
            return t
    # r = 1: only a1 and a1' exist
    return last


def sat_search(B: CylinderUnion, eps, max_len: int = 64) -> Word:
    """g with ``nu(g^-1 B) < eps``.

    Descends into the complement: take the first maximal cylinder [w]
    inside B^c and push B away along g = w t^k.
    """
    eps = Fraction(eps)
    if B.is_full():
        raise ValueError("B is conull; no translate shrinks it")
    if B.measure() < eps:
        return ()
    w = (~B).cylinders()[0]
    t = _steer_letter(B.r, w)
    g = w
    while len(g) <= max_len:
        if B.translate(winv(g)).measure() < eps:
            return g
        g = g + (t,)
    raise NotFound(f"no shrinking translate up to length {max_len}")


@dataclass
class ShrinkStep:
    n: int
    s: Word
    eps_n: Fraction
    measure: Fraction  # nu(F_n s_n B)


@dataclass
class ShrinkResult:
    B: CylinderUnion
    eps: Fraction
    steps: List[ShrinkStep] = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return sum((st.measure for st in self.steps), Fraction(0))

    def A(self) -> List[Word]:
        """``A_N = union_n ball(n) s_n``, canonical order."""
        fg = FreeGroup(self.B.r)
        out = set()
        for st in self.steps:
            for f in fg.iter_ball(st.n):
                out.add(wmul(f, st.s))
        return sorted(out, key=canonical_key)


def thick_shrinker(B: CylinderUnion, eps, N: int, max_len: int = 64) -> ShrinkResult:
    """s_n with ``nu(ball(n) s_n B) < eps 2^{-n-1}`` for n = 1..N."""
    eps = Fraction(eps)
    if B.is_full():
        raise ValueError("B is conull")
    fg = FreeGroup(B.r)
    res = ShrinkResult(B, eps)
    for n in range(1, N + 1):
        eps_n = eps / 2 ** (n + 1)
        F = fg.ball(n)
        if B.is_empty():
            res.steps.append(ShrinkStep(n, (), eps_n, Fraction(0)))
            continue
        # s = (w t^k)^-1 sends B deep inside a small cylinder
        w = (~B).cylinders()[0]
        t = _steer_letter(B.r, w)
        g = w
        while True:
            if len(g) > max_len:
                raise NotFound(f"no s_{n} up to length {max_len}")
            s = winv(g)
            m = union_translates(F, B.translate(s)).measure()
            if m < eps_n:
                res.steps.append(ShrinkStep(n, s, eps_n, m))
                break
            g = g + (t,)
    return res


# ---------------------------------------------------------------------------
# fat Cantor sets
# ---------------------------------------------------------------------------

# carving at the root as well makes short separators exist (see tests)
DEFAULT_DEPTHS = (0, 1, 2, 3)
DEFAULT_CARVE = (2, 2, 2, 2)


def least_extension(w: Word, m: int) -> Word:
    """Canonically least u of length m with wu reduced."""
    out = []
    last = w[-1] if w else None
    for _ in range(m):
        x = 1 if last != -1 else -1
        out.append(x)
        last = x
    return tuple(out)


@dataclass
class FatCantor:
    r: int
    alpha: Fraction
    depths: Tuple[int, ...]
    carve: Tuple[int, ...]
    C: CylinderUnion
    D: CylinderUnion
    measure: Fraction
    interior_free_depth: int
    degenerate: bool

    def report(self) -> dict:
        f = lambda q: f"{q.numerator}/{q.denominator}"
        return {
            "r": self.r,
            "alpha": f(self.alpha),
            "depths": list(self.depths),
            "carve": list(self.carve),
            "nu_C": f(self.measure),
            "nu_D": f(self.D.measure()),
            "interior_free_to_depth": self.interior_free_depth,
            "degenerate": self.degenerate,
            "C": self.C.spec(),
        }


def fat_cantor(
    alpha,
    depths: Sequence[int] = DEFAULT_DEPTHS,
    carve: Sequence[int] = DEFAULT_CARVE,
    r: int = 2,
) -> FatCantor:
    """Closed set C = complement of the carved holes.

    At every node w of depth d_i the least sub-cylinder [w u], |u| = m_i,
    is removed.
    """
    alpha = Fraction(alpha)
    depths, carve = tuple(depths), tuple(carve)
    if len(depths) != len(carve):
        raise InfeasibleSchedule("depths and carve depths differ in length")
    if list(depths) != sorted(set(depths)) or any(d < 0 for d in depths):
        raise InfeasibleSchedule("depths must be strictly increasing and non-negative")
    if any(m < 1 for m in carve):
        raise InfeasibleSchedule("carve depths must be positive")
    fg = FreeGroup(r)
    D = CylinderUnion.empty(r)
    for d, m in zip(depths, carve):
        for w in fg.iter_sphere(d):
            D = D | CylinderUnion.cylinder(r, w + least_extension(w, m))
    C = ~D
    nu = C.measure()
    if nu < alpha:
        raise InfeasibleSchedule(f"schedule leaves nu(C) = {nu} < alpha = {alpha}")
    K = depths[-1] if depths else -1
    # every cylinder of depth <= K meets D iff every depth-K cylinder does
    ok = K
    if depths:
        for w in fg.iter_sphere(K):
            if CylinderUnion.cylinder(r, w).isdisjoint(D):
                ok = -1
                break
    return FatCantor(r, alpha, depths, carve, C, D, nu, ok, not depths)


# ---------------------------------------------------------------------------
# group sets defined by measures of translates
# ---------------------------------------------------------------------------

from .boundary import BoundaryPoint  # noqa: E402
from .groups import format_word  # noqa: E402
from .largeness import Certificate, check_left_thick, check_pw_syndetic, check_thick  # noqa: E402
from .sets import DensityProfile, GroupSet, SliceSet, WindowSet, density_profile  # noqa: E402
from .measures import sphere_measure  # noqa: E402


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _words(ws) -> List[str]:
    return [format_word(w) for w in ws]


class TranslateGrowthSet(GroupSet):
    """``S = {g : nu(gB) >= nu(B)}``."""

    def __init__(self, B: CylinderUnion):
        self.model = FreeGroup(B.r)
        self.B = B
        self.nuB = B.measure()
        self._cache = {}

    def contains(self, g) -> bool:
        v = self._cache.get(g)
        if v is None:
            v = self._cache[g] = self.B.translate(g).measure() >= self.nuB
        return v

    def spec(self):
        return f"S[{self.B.spec()}]"

    def raw(self):
        return {"type": "nu-ge", "r": self.B.r, "B": _words(self.B.cylinders())}


class MeetSet(GroupSet):
    """``U = {g : nu(C cap gB) > 0}``; for clopen sets, ``C cap gB`` nonempty."""

    def __init__(self, B: CylinderUnion, C: CylinderUnion):
        self.model = FreeGroup(B.r)
        self.B, self.C = B, C
        self._cache = {}

    def contains(self, g) -> bool:
        v = self._cache.get(g)
        if v is None:
            v = self._cache[g] = not self.C.isdisjoint(self.B.translate(g))
        return v

    def spec(self):
        return f"U[{self.B.spec()};{self.C.spec()}]"

    def raw(self):
        return {"type": "meets", "r": self.B.r, "B": _words(self.B.cylinders()), "C": _words(self.C.cylinders())}


def thick_set_S(B: CylinderUnion, R: int, ell: int = 1, R_w: int = 6) -> Tuple[WindowSet, Certificate]:
    S = TranslateGrowthSet(B)
    win = WindowSet(R, tuple(S.members(R)), S.spec(), True)
    return win, check_thick(S, ell, R_w)


def thick_set_U(B: CylinderUnion, C: CylinderUnion, R: int, ell: int = 1, R_w: int = 6) -> Tuple[WindowSet, Certificate]:
    if not B.measure() + C.measure() > 1:
        raise ValueError("needs nu(B) + nu(C) > 1")
    U = MeetSet(B, C)
    win = WindowSet(R, tuple(U.members(R)), U.spec(), True)
    return win, check_thick(U, ell, R_w)


# ---------------------------------------------------------------------------
# the not-Liouville construction
# ---------------------------------------------------------------------------


def shrink_certificate(res: ShrinkResult) -> Certificate:
    return Certificate(
        "shrinker",
        f"free:{res.B.r}",
        {"r": res.B.r, "eps": _q(res.eps), "N": len(res.steps)},
        {"B": _words(res.B.cylinders())},
        [{"n": st.n, "s": format_word(st.s), "eps_n": _q(st.eps_n), "measure": _q(st.measure)} for st in res.steps],
        "CERTIFIED" if res.total < res.eps else "NOT-FOUND-WITHIN-BUDGET",
        {"total": _q(res.total)},
    )


def periodic_points_in(U: CylinderUnion, limit: int = 64) -> List[BoundaryPoint]:
    """Points ``w t t t ...`` for maximal cylinders [w] of U, canonical order."""
    out = []
    lets = FreeGroup(U.r).letters
    for w in U.cylinders():
        for t in lets:
            if w and t == -w[-1]:
                continue
            out.append(BoundaryPoint(w, (t,)))
            if len(out) >= limit:
                return out
    return out


@dataclass
class NotLiouville:
    C: CylinderUnion
    eps: Fraction
    shrink: ShrinkResult
    A: List[Word]
    B: CylinderUnion
    nu_B: Fraction
    inclusion_ok: bool
    y: Optional[BoundaryPoint]
    y_in_C: Optional[bool]
    left_thick: Optional[Certificate]
    pw: Optional[Certificate]
    profile_By: Optional[DensityProfile]
    profile_Cy: Optional[DensityProfile]

    def report(self) -> dict:
        out = {
            "nu_C": _q(self.C.measure()),
            "eps": _q(self.eps),
            "nu_B": _q(self.nu_B),
            "nu_B_float": float(self.nu_B),
            "s_n": [format_word(st.s) for st in self.shrink.steps],
            "nu_FnsnD": [_q(st.measure) for st in self.shrink.steps],
            "size_A": len(self.A),
            "inclusion_ok": self.inclusion_ok,
            "y": None if self.y is None else self.y.spec(),
            "y_in_C": self.y_in_C,
        }
        if self.left_thick is not None:
            out["B_y_left_thick"] = self.left_thick.verdict
        if self.pw is not None:
            out["C_y_pw_syndetic"] = self.pw.verdict
            out["C_y_pw_F"] = self.pw.info.get("F")
        if self.profile_By is not None:
            out["profile_B_y"] = self.profile_By.to_json()
        if self.profile_Cy is not None:
            out["profile_C_y"] = self.profile_Cy.to_json()
        return out

    def certificates(self) -> dict:
        out = {"shrinker": shrink_certificate(self.shrink).to_json()}
        if self.left_thick is not None:
            out["B_y_left_thick"] = self.left_thick.to_json()
        if self.pw is not None:
            out["C_y_pw_syndetic"] = self.pw.to_json()
        return out

    def checks(self) -> List[dict]:
        r = self.C.r
        return [
            {"kind": "nu", "name": "nu(B_N)", "r": r, "cylinders": _words(self.B.cylinders()), "value": _q(self.nu_B)},
            {"kind": "nu", "name": "nu(C)", "r": r, "cylinders": _words(self.C.cylinders()), "value": _q(self.C.measure())},
            {
                "kind": "translate-subset",
                "name": "a^-1 B_N inside C",
                "r": r,
                "P": _words(self.B.cylinders()),
                "Q": _words(self.C.cylinders()),
                "elements": [format_word(winv(a)) for a in self.A],
            },
        ]


def notliouville_construction(
    C: CylinderUnion,
    eps,
    N: int,
    ell_left: int = 2,
    R_w: int = 8,
    f: int = 2,
    ell_pw: int = 1,
    walk_n: int = 8,
    probes: bool = True,
) -> NotLiouville:
    """``A = union ball(n) s_n`` shrinking D = C^c, and ``B_N = (A D)^c``."""
    eps = Fraction(eps)
    D = ~C
    r = C.r
    if C.is_full():
        shrink = ShrinkResult(D, eps, [ShrinkStep(n, (), eps / 2 ** (n + 1), Fraction(0)) for n in range(1, N + 1)])
    else:
        shrink = thick_shrinker(D, eps, N)
    A = shrink.A()
    AD = union_translates(A, D)
    B = ~AD
    inclusion_ok = all(B.translate(winv(a)).issubset(C) for a in A)
    res = NotLiouville(C, eps, shrink, A, B, B.measure(), inclusion_ok, None, None, None, None, None, None)
    if not probes or B.is_empty():
        return res
    # y outside C when possible: for y in C the identity already lies in C_y
    pts = periodic_points_in(B)
    outside = [y for y in pts if y not in C]
    y = outside[0] if outside else pts[0]
    res.y, res.y_in_C = y, (y in C)
    By, Cy = SliceSet(B, y), SliceSet(C, y)
    res.left_thick = check_left_thick(By, ell_left, R_w)
    res.pw = check_pw_syndetic(Cy, f, ell_pw, R_w)
    p = sphere_measure(r, 1)
    res.profile_By = density_profile(By, "walk", walk_n, p=p)
    res.profile_Cy = density_profile(Cy, "walk", walk_n, p=p)
    return res
