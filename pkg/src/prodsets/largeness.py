"""Window-certified largeness checks and witness searches.

Every check returns a :class:`Certificate`.  CERTIFIED means every
recorded witness was found and can be replayed by :mod:`prodsets.verify`;
NOT-FOUND-WITHIN-BUDGET only says the search came back empty inside the
stated radii.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .boundary import union_translates
from .groups import FreeGroup, GroupElement, Lattice, Model, format_element, invert, length, multiply
from .sets import ExplicitSet, GroupSet, ProductSet, SliceSet, density_profile

CERTIFIED = "CERTIFIED"
NOT_FOUND = "NOT-FOUND-WITHIN-BUDGET"


def model_tag(model: Model) -> str:
    if isinstance(model, FreeGroup):
        return f"free:{model.r}"
    if isinstance(model, Lattice):
        return f"lattice:{model.d}"
    raise TypeError(f"certificates not supported for {model}")


def _fmt(g) -> str:
    return format_element(g)


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class Certificate:
    tag: str
    model: str
    params: Dict[str, Any]
    sets: Dict[str, Any]
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    verdict: str = NOT_FOUND
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "Certificate":
        return cls(**d)


# ---------------------------------------------------------------------------
# deterministic test families
# ---------------------------------------------------------------------------


def test_family(model: Model, radius: int, seed: int = 0, n_random: int = 16) -> List[List[GroupElement]]:
    """Full ball, all singletons, then ``n_random`` seeded random subsets."""
    ball = model.ball(radius)
    fam = [list(ball)] + [[g] for g in ball]
    seen = {frozenset(L) for L in fam}
    rng = random.Random(seed)
    tries = 0
    extra = 0
    while extra < n_random and tries < 50 * n_random:
        tries += 1
        L = [g for g in ball if rng.random() < 0.5]
        key = frozenset(L)
        if not L or key in seen:
            continue
        seen.add(key)
        fam.append(L)
        extra += 1
    return fam


# ---------------------------------------------------------------------------
# thickness
# ---------------------------------------------------------------------------


def _find_translate(C: GroupSet, L, R_w: int, left: bool):
    for g in C.model.ball(R_w):
        ok = True
        for l in L:
            h = multiply(g, l) if left else multiply(l, g)
            if not C.contains(h):
                ok = False
                break
        if ok:
            return g
    return None


def _thick(C: GroupSet, ell: int, R_w: int, left: bool, seed: int, n_random: int) -> Certificate:
    tag = "left-thick" if left else "thick"
    cert = Certificate(
        tag,
        model_tag(C.model),
        {"ell": ell, "R_w": R_w, "seed": seed, "n_random": n_random},
        {"C": C.raw()},
    )
    all_found = True
    for L in test_family(C.model, ell, seed, n_random):
        g = _find_translate(C, L, R_w, left)
        entry: Dict[str, Any] = {"L": [_fmt(l) for l in L], "g": None if g is None else _fmt(g)}
        if g is None:
            all_found = False
        else:
            prods = [multiply(g, l) if left else multiply(l, g) for l in L]
            entry["members"] = [C.witness(h) for h in prods]
        cert.witnesses.append(entry)
    cert.verdict = CERTIFIED if all_found else NOT_FOUND
    return cert


def check_thick(C: GroupSet, ell: int, R_w: int, seed: int = 0, n_random: int = 16) -> Certificate:
    """For each tested L in ball(ell), some g in ball(R_w) with ``Lg`` inside C."""
    return _thick(C, ell, R_w, False, seed, n_random)


def check_left_thick(C: GroupSet, ell: int, R_w: int, seed: int = 0, n_random: int = 16) -> Certificate:
    """For each tested L in ball(ell), some g in ball(R_w) with ``gL`` inside C."""
    return _thick(C, ell, R_w, True, seed, n_random)


# ---------------------------------------------------------------------------
# syndeticity
# ---------------------------------------------------------------------------


def _syndetic(C: GroupSet, f: int, R: int, left: bool) -> Certificate:
    model = C.model
    tag = "left-syndetic" if left else "syndetic"
    cert = Certificate(tag, model_tag(model), {"f": f, "R": R}, {"C": C.raw()})
    window = model.ball(R)
    cands = model.ball(f)

    def core(phi, h):
        # FC: h = phi c ; CF: h = c phi
        return multiply(h, invert(phi)) if left else multiply(invert(phi), h)

    cover = {phi: {h for h in window if C.contains(core(phi, h))} for phi in cands}
    uncovered = set(window)
    F: List[GroupElement] = []
    while uncovered:
        best = max(cands, key=lambda p: (len(cover[p] & uncovered), -cands.index(p)))
        gain = cover[best] & uncovered
        if not gain:
            break
        F.append(best)
        uncovered -= gain
    cert.info["F"] = [_fmt(x) for x in F]
    if uncovered:
        cert.verdict = NOT_FOUND
        cert.info["uncovered"] = [_fmt(h) for h in sorted(uncovered, key=model.sort_key)][:20]
        return cert
    for h in window:
        phi = next(p for p in F if h in cover[p])
        c = core(phi, h)
        cert.witnesses.append({"h": _fmt(h), "f": _fmt(phi), "c": _fmt(c), "w": C.witness(c)})
    cert.verdict = CERTIFIED
    return cert


def check_syndetic(C: GroupSet, f: int, R: int) -> Certificate:
    """Greedy F in ball(f) with ``FC`` covering ball(R)."""
    return _syndetic(C, f, R, False)


def check_left_syndetic(C: GroupSet, f: int, R: int) -> Certificate:
    """Greedy F in ball(f) with ``CF`` covering ball(R)."""
    return _syndetic(C, f, R, True)


# ---------------------------------------------------------------------------
# piecewise syndeticity
# ---------------------------------------------------------------------------


def _translate_set(C: GroupSet, F, left: bool, factor_radius: int) -> ProductSet:
    Fs = ExplicitSet(C.model, F)
    return ProductSet(C, Fs, factor_radius) if left else ProductSet(Fs, C, factor_radius)


def _pw(C: GroupSet, f: int, ell: int, R_w: int, left: bool, seed: int, n_random: int) -> Certificate:
    model = C.model
    Rf = R_w + ell + f
    tried = []

    def attempt(F):
        cert = check_thick(_translate_set(C, F, left, Rf), ell, R_w, seed, n_random)
        tried.append([_fmt(x) for x in F])
        return cert

    e = model.identity()
    best = attempt([e])
    F = [e]
    if not best.certified:
        F = model.ball(f)
        best = attempt(F)
        if best.certified:
            # greedy shrink, farthest elements first, identity last
            for x in sorted(F, key=model.sort_key, reverse=True):
                if x == e or len(F) == 1:
                    continue
                trial = [y for y in F if y != x]
                c = attempt(trial)
                if c.certified:
                    F, best = trial, c
    tag = "pw-left-syndetic" if left else "pw-syndetic"
    cert = Certificate(
        tag,
        model_tag(model),
        {"f": f, "ell": ell, "R_w": R_w, "factor_radius": Rf, "seed": seed, "n_random": n_random},
        {"C": C.raw(), "target": best.sets["C"]},
        best.witnesses,
        best.verdict,
        {"F": [_fmt(x) for x in F], "tried": tried},
    )
    return cert


def check_pw_syndetic(C: GroupSet, f: int, ell: int, R_w: int, seed: int = 0, n_random: int = 16) -> Certificate:
    """F in ball(f) with ``FC`` window-thick."""
    return _pw(C, f, ell, R_w, False, seed, n_random)


def check_pw_left_syndetic(C: GroupSet, f: int, ell: int, R_w: int, seed: int = 0, n_random: int = 16) -> Certificate:
    """F in ball(f) with ``CF`` window-thick."""
    return _pw(C, f, ell, R_w, True, seed, n_random)


# ---------------------------------------------------------------------------
# theorem-shaped searches
# ---------------------------------------------------------------------------


def _intersection_density(P: GroupSet, L, W: int, left_mult: bool = True) -> Fraction:
    """Window density of ``cap_{l in L} l P``.

    Spherical Cesaro average over spheres 0..W for free groups; share of the
    half-open box [-W, W)^d for lattices (exact for periods dividing 2W).
    """
    model = P.model

    def member(h):
        return all(P.contains(multiply(invert(l), h)) for l in L)

    if isinstance(model, Lattice):
        box = model.box(W, half_open=True)
        return Fraction(sum(1 for h in box if member(h)), len(box))
    acc = Fraction(0)
    for k in range(W + 1):
        sph = model.sphere(k)
        acc += Fraction(sum(1 for h in sph if member(h)), len(sph))
    return acc / (W + 1)


def _between(A: GroupSet, B: GroupSet, f: int, ell: int, R_w: int, left_F: bool, W: int, seed: int, n_random: int) -> Certificate:
    model = A.model
    Rf = R_w + ell + f + W

    def product(F):
        Fs = ExplicitSet(model, F)
        if left_F:
            return ProductSet(Fs, ProductSet(A, B, Rf), Rf)
        return ProductSet(A, ProductSet(Fs, B, Rf), Rf)

    cands = model.ball(f)
    F = [model.identity()]
    cert = check_thick(product(F), ell, R_w, seed, n_random)
    tried = [[_fmt(x) for x in F]]
    while not cert.certified:
        def score(c):
            return sum(1 for w in c.witnesses if w["g"] is not None)

        best = None
        for x in cands:
            if x in F:
                continue
            c = check_thick(product(F + [x]), ell, R_w, seed, n_random)
            tried.append([_fmt(y) for y in F + [x]])
            if best is None or score(c) > score(best[1]):
                best = (x, c)
            if c.certified:
                # nothing scores higher; keep the canonical first
                break
        if best is None or score(best[1]) <= score(cert):
            break
        F = F + [best[0]]
        cert = best[1]
    P = product(F)
    L = model.ball(ell)
    dens = _intersection_density(P, L, W)
    if isinstance(model, Lattice):
        box = model.box(W, half_open=True)
        dB = Fraction(sum(1 for h in box if B.contains(h)), len(box))
    else:
        dB = density_profile(B, "spherical", W + 1).last
    tag = "left-F" if left_F else "between-F"
    return Certificate(
        tag,
        model_tag(model),
        {"f": f, "ell": ell, "R_w": R_w, "W": W, "factor_radius": Rf, "seed": seed, "n_random": n_random},
        {"target": P.raw(), "A": A.raw(), "B": B.raw()},
        cert.witnesses,
        cert.verdict,
        {
            "F": [_fmt(x) for x in F],
            "tried": tried,
            "intersection_density": _q(dens),
            "density_B": _q(dB),
            "L_for_density": [_fmt(l) for l in L],
        },
    )


def find_between_F(A: GroupSet, B: GroupSet, f: int, ell: int, R_w: int, W: int = 5, seed: int = 0, n_random: int = 16) -> Certificate:
    """Greedy F in ball(f) with ``AFB`` window-thick."""
    return _between(A, B, f, ell, R_w, False, W, seed, n_random)


def find_left_F(A: GroupSet, B: GroupSet, f: int, ell: int, R_w: int, W: int = 12, seed: int = 0, n_random: int = 16) -> Certificate:
    """Greedy F in ball(f) with ``FAB`` window-thick."""
    return _between(A, B, f, ell, R_w, True, W, seed, n_random)


def non_syndetic_separator(A: GroupSet, f: int, R_w: int, window: Optional[int] = None, seed: int = 0, n_random: int = 16) -> Certificate:
    """For each tested F in ball(f), some s in ball(R_w) with ``FA cap sA`` empty.

    Slice sets are separated at boundary level (``FU cap sU`` empty, which
    implies emptiness for every orbit); the window check is recorded too.
    """
    model = A.model
    W = R_w if window is None else window
    cert = Certificate(
        "separator",
        model_tag(model),
        {"f": f, "R_w": R_w, "window": W, "seed": seed, "n_random": n_random},
        {"A": A.raw()},
    )
    ballW = model.ball(W)

    def window_clear(F, s):
        sinv = invert(s)
        for h in ballW:
            if not A.contains(multiply(sinv, h)):
                continue
            if any(A.contains(multiply(invert(phi), h)) for phi in F):
                return False
        return True

    all_found = True
    for F in test_family(model, f, seed, n_random):
        found = None
        level = "window"
        if isinstance(A, SliceSet):
            FU = union_translates(F, A.U)
            for s in model.ball(R_w):
                if FU.isdisjoint(A.U.translate(s)):
                    found, level = s, "boundary"
                    break
        else:
            for s in model.ball(R_w):
                if window_clear(F, s):
                    found = s
                    break
        entry = {"F": [_fmt(x) for x in F], "s": None if found is None else _fmt(found), "level": level}
        if found is None:
            all_found = False
        else:
            entry["window_clear"] = window_clear(F, found)
            if not entry["window_clear"]:
                all_found = False
        cert.witnesses.append(entry)
    cert.verdict = CERTIFIED if all_found else NOT_FOUND
    ss = [w["s"] for w in cert.witnesses if w["s"] is not None]
    cert.info["max_len_s"] = max((length(model.parse(s)) for s in ss), default=None)
    return cert
