"""Finitely supported probability measures with exact rational weights.

A measure is stored as integer numerators over one common denominator, so
convolution runs on Python ints and divides once at the end.
"""

from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterable, List, Mapping, Optional

from .groups import E, FreeGroup, GroupElement, Model, ModelMismatch, Vec, Word, format_element, invert, multiply, wmul

DEFAULT_SUPPORT_CAP = 1_000_000


class SupportCapExceeded(RuntimeError):
    pass


class FiniteMeasure:
    """Probability measure ``{g: counts[g] / denom}``."""

    __slots__ = ("counts", "denom")

    def __init__(self, counts: Mapping[GroupElement, int], denom: int, *, check: bool = True):
        if check:
            counts = {g: c for g, c in counts.items() if c}
            if denom <= 0 or any(c < 0 for c in counts.values()):
                raise ValueError("weights must be positive")
            if sum(counts.values()) != denom:
                raise ValueError("weights do not sum to 1")
            types = {type(g) for g in counts}
            if len(types) > 1:
                raise ValueError("support mixes group models")
        g = denom
        for c in counts.values():
            g = gcd(g, c)
            if g == 1:
                break
        if g > 1:
            counts = {k: c // g for k, c in counts.items()}
            denom //= g
        self.counts: Dict[GroupElement, int] = counts
        self.denom = denom

    @classmethod
    def from_weights(cls, weights: Mapping[GroupElement, Fraction]) -> "FiniteMeasure":
        ws = {g: Fraction(w) for g, w in weights.items() if w}
        den = 1
        for w in ws.values():
            den = den * w.denominator // gcd(den, w.denominator)
        return cls({g: int(w * den) for g, w in ws.items()}, den)

    @classmethod
    def uniform(cls, elements: Iterable[GroupElement]) -> "FiniteMeasure":
        els = set(elements)
        return cls({g: 1 for g in els}, len(els))

    @classmethod
    def delta(cls, g: GroupElement) -> "FiniteMeasure":
        return cls({g: 1}, 1)

    def weight(self, g) -> Fraction:
        return Fraction(self.counts.get(g, 0), self.denom)

    __getitem__ = weight

    def weights(self) -> Dict[GroupElement, Fraction]:
        return {g: Fraction(c, self.denom) for g, c in self.counts.items()}

    def support(self) -> List[GroupElement]:
        return list(self.counts)

    def __len__(self):
        return len(self.counts)

    def mass(self, pred: Callable[[GroupElement], bool]) -> Fraction:
        """Measure of the set ``{g : pred(g)}``."""
        return Fraction(sum(c for g, c in self.counts.items() if pred(g)), self.denom)

    def pushforward(self, f: Callable[[GroupElement], GroupElement]) -> "FiniteMeasure":
        out: Dict[GroupElement, int] = {}
        for g, c in self.counts.items():
            h = f(g)
            out[h] = out.get(h, 0) + c
        return FiniteMeasure(out, self.denom, check=False)

    def reflect(self) -> "FiniteMeasure":
        """The pushforward under inversion."""
        return self.pushforward(invert)

    def is_symmetric(self) -> bool:
        return all(self.counts.get(invert(g), 0) == c for g, c in self.counts.items())

    def __eq__(self, other):
        return (
            isinstance(other, FiniteMeasure)
            and self.denom == other.denom
            and self.counts == other.counts
        )

    def __repr__(self):
        items = sorted(self.counts.items(), key=lambda kv: str(kv[0]))[:6]
        body = ", ".join(f"{format_element(g)}: {c}/{self.denom}" for g, c in items)
        more = "" if len(self.counts) <= 6 else f", ... ({len(self.counts)} atoms)"
        return f"FiniteMeasure({{{body}{more}}})"

    def to_json(self) -> list:
        return [
            {"element": format_element(g), "weight": f"{w.numerator}/{w.denominator}"}
            for g, w in sorted(self.weights().items(), key=lambda kv: str(kv[0]))
        ]

    @classmethod
    def from_json(cls, data: list, model: Model) -> "FiniteMeasure":
        return cls.from_weights({model.parse(d["element"]): Fraction(d["weight"]) for d in data})

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def mixture(parts: Iterable[tuple]) -> FiniteMeasure:
    """Convex combination ``sum(c_i * mu_i)`` of ``(Fraction c_i, mu_i)`` pairs."""
    parts = [(Fraction(c), mu) for c, mu in parts if c]
    if sum(c for c, _ in parts) != 1:
        raise ValueError("mixture coefficients must sum to 1")
    den = 1
    for c, mu in parts:
        d = c.denominator * mu.denom
        den = den * d // gcd(den, d)
    out: Dict[GroupElement, int] = {}
    for c, mu in parts:
        f = den // (c.denominator * mu.denom) * c.numerator
        for g, k in mu.counts.items():
            out[g] = out.get(g, 0) + k * f
    return FiniteMeasure(out, den)


def convolve(p: FiniteMeasure, q: FiniteMeasure, cap: Optional[int] = DEFAULT_SUPPORT_CAP) -> FiniteMeasure:
    """``(p*q)(g) = sum_h p(h) q(h^-1 g)``: push q forward by left translation."""
    tp = {type(g) for g in p.counts}
    tq = {type(g) for g in q.counts}
    if tp != tq:
        raise ModelMismatch("convolving measures on different group models")
    if tp == {tuple} and len(set(q.counts.values())) == 1:
        out = _convolve_words_uniform(p, q, cap)
    else:
        out = {}
        get = out.get
        qitems = list(q.counts.items())
        for h, a in p.counts.items():
            for k, b in qitems:
                g = multiply(h, k)
                out[g] = get(g, 0) + a * b
            if cap is not None and len(out) > cap:
                raise SupportCapExceeded(f"convolution support exceeds cap {cap}")
    return FiniteMeasure(out, p.denom * q.denom, check=False)


def _convolve_words_uniform(p: FiniteMeasure, q: FiniteMeasure, cap) -> Dict[Word, int]:
    # q has equal weights b: count products with multiplicity, weighted by p
    b = next(iter(q.counts.values()))
    qk = list(q.counts)
    by_weight: Dict[int, list] = {}
    for h, a in p.counts.items():
        by_weight.setdefault(a, []).append(h)
    total: Counter = Counter()
    for a, hs in by_weight.items():
        c: Counter = Counter()
        for h in hs:
            if len(h) == 1:
                x = h[0]
                hx = (x,)
                c.update([k[1:] if k and k[0] == -x else hx + k for k in qk])
            else:
                c.update([wmul(h, k) for k in qk])
            if cap is not None and len(c) > cap:
                raise SupportCapExceeded(f"convolution support exceeds cap {cap}")
        if len(by_weight) == 1:
            weight = a * b
            if weight == 1:
                return dict(c)
            return {g: n * weight for g, n in c.items()}
        for g, n in c.items():
            total[g] += n * a * b
    if cap is not None and len(total) > cap:
        raise SupportCapExceeded(f"convolution support exceeds cap {cap}")
    return dict(total)


def convolution_power(p: FiniteMeasure, k: int, cap: Optional[int] = DEFAULT_SUPPORT_CAP) -> FiniteMeasure:
    if k < 0:
        raise ValueError("power must be non-negative")
    some = next(iter(p.counts))
    mu = FiniteMeasure.delta(_identity_like(some))
    for _ in range(k):
        mu = convolve(p, mu, cap)
    return mu


def _identity_like(g: GroupElement) -> GroupElement:
    if isinstance(g, Vec):
        return Vec((0,) * len(g))
    if type(g) is tuple:
        return E
    return g * g.inverse()


def tv_distance(p: FiniteMeasure, q: FiniteMeasure) -> Fraction:
    """Total variation ``sup_B |p(B) - q(B)|``, i.e. half the l1 distance."""
    keys = set(p.counts) | set(q.counts)
    tot = 0
    pc, qc = p.counts, q.counts
    for g in keys:
        tot += abs(pc.get(g, 0) * q.denom - qc.get(g, 0) * p.denom)
    return Fraction(tot, 2 * p.denom * q.denom)


# ---------------------------------------------------------------------------
# spherical measures on F_r
# ---------------------------------------------------------------------------


def sphere_measure(r: int, k: int) -> FiniteMeasure:
    """Uniform measure sigma_k on the sphere of radius k (sigma_0 = delta_e)."""
    fg = FreeGroup(r)
    return FiniteMeasure(dict.fromkeys(fg.iter_sphere(k), 1), fg.sphere_size(k), check=False)


def hecke_residual(r: int, k: int) -> Fraction:
    """TV distance between sigma_1*sigma_k and the Hecke right-hand side.

    The left side is an honest convolution.  The right side is uniform on
    two spheres, so its weight at g is read off from |g| and its mass off
    the support of the left side is accounted for in one term.
    """
    if k < 1:
        raise ValueError("the Hecke relation is stated for k >= 1")
    fg = FreeGroup(r)
    lhs = convolve(sphere_measure(r, 1), sphere_measure(r, k), cap=None)
    q = Fraction(1, 2 * r)
    rhs_at = {k - 1: q / fg.sphere_size(k - 1), k + 1: (1 - q) / fg.sphere_size(k + 1)}
    # common denominator for lhs and rhs weights, then integer arithmetic
    den = lhs.denom
    for w in rhs_at.values():
        den = den * w.denominator // gcd(den, w.denominator)
    scale = den // lhs.denom
    rhs_int = {L: int(w * den) for L, w in rhs_at.items()}
    diff = 0
    hits = {L: 0 for L in rhs_at}
    for g, c in lhs.counts.items():
        L = len(g)
        rw = rhs_int.get(L, 0)
        if rw:
            hits[L] += 1
        diff += abs(c * scale - rw)
    missed = sum(rhs_int[L] * (fg.sphere_size(L) - hits[L]) for L in rhs_at)
    return Fraction(diff + missed, 2 * den)


def cesaro_spherical(r: int, n: int) -> FiniteMeasure:
    """beta_n = (1/n) * sum_{k<n} sigma_k."""
    if n < 1:
        raise ValueError("n must be positive")
    return mixture([(Fraction(1, n), sphere_measure(r, k)) for k in range(n)])


def cesaro_walk(p: FiniteMeasure, n: int, cap: Optional[int] = DEFAULT_SUPPORT_CAP) -> FiniteMeasure:
    """(1/n) * sum_{k=1..n} p^{*k}."""
    if n < 1:
        raise ValueError("n must be positive")
    parts = []
    mu = p
    for k in range(1, n + 1):
        if k > 1:
            mu = convolve(p, mu, cap)
        parts.append((Fraction(1, n), mu))
    return mixture(parts)


def walk_powers(p: FiniteMeasure, n: int, cap: Optional[int] = DEFAULT_SUPPORT_CAP):
    """Yield p^{*1}, ..., p^{*n}."""
    mu = p
    for k in range(1, n + 1):
        if k > 1:
            mu = convolve(p, mu, cap)
        yield mu


def stationarity_defect(p: FiniteMeasure, mu: FiniteMeasure, cap: Optional[int] = DEFAULT_SUPPORT_CAP) -> Fraction:
    """||p*mu - mu||_TV."""
    return tv_distance(convolve(p, mu, cap), mu)


# ---------------------------------------------------------------------------
# radial measures: mass per sphere, uniform within each sphere
# ---------------------------------------------------------------------------


class RadialMeasure:
    """A measure on F_r that is uniform on every sphere.

    ``mass[k]`` is the total mass of the sphere of radius k.  Radial measures
    close under left convolution with sigma_1, which keeps Cesaro averages of
    large radius tractable.
    """

    def __init__(self, r: int, mass: List[Fraction]):
        self.r = r
        self.mass = [Fraction(m) for m in mass]
        while len(self.mass) > 1 and self.mass[-1] == 0:
            self.mass.pop()

    @classmethod
    def sphere(cls, r: int, k: int) -> "RadialMeasure":
        return cls(r, [Fraction(0)] * k + [Fraction(1)])

    def total(self) -> Fraction:
        return sum(self.mass, Fraction(0))

    def sigma1_convolve(self) -> "RadialMeasure":
        """Left convolution by sigma_1, via the letter-by-letter length count.

        A word of length k >= 1 times a uniform letter has length k-1 with
        probability 1/(2r) and k+1 otherwise; the image stays uniform on each
        sphere because the automorphisms permuting letters act transitively
        on every sphere and commute with sigma_1.
        """
        q = Fraction(1, 2 * self.r)
        out = [Fraction(0)] * (len(self.mass) + 1)
        for k, m in enumerate(self.mass):
            if not m:
                continue
            if k == 0:
                out[1] += m
            else:
                out[k - 1] += q * m
                out[k + 1] += (1 - q) * m
        return RadialMeasure(self.r, out)

    def tv(self, other: "RadialMeasure") -> Fraction:
        n = max(len(self.mass), len(other.mass))
        a = self.mass + [Fraction(0)] * (n - len(self.mass))
        b = other.mass + [Fraction(0)] * (n - len(other.mass))
        return sum((abs(x - y) for x, y in zip(a, b)), Fraction(0)) / 2

    def expand(self) -> FiniteMeasure:
        fg = FreeGroup(self.r)
        w = {}
        for k, m in enumerate(self.mass):
            if m:
                size = fg.sphere_size(k)
                for g in fg.iter_sphere(k):
                    w[g] = m / size
        return FiniteMeasure.from_weights(w)


def cesaro_spherical_radial(r: int, n: int) -> RadialMeasure:
    if n < 1:
        raise ValueError("n must be positive")
    return RadialMeasure(r, [Fraction(1, n)] * n)


def spherical_stationarity_defect(r: int, n: int) -> Fraction:
    """||sigma_1*beta_n - beta_n||_TV for the spherical Cesaro average beta_n."""
    b = cesaro_spherical_radial(r, n)
    return b.sigma1_convolve().tv(b)
