from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodsets.groups import FreeGroup, Vec, invert, multiply
from prodsets.measures import (
    FiniteMeasure,
    SupportCapExceeded,
    cesaro_spherical,
    cesaro_walk,
    convolution_power,
    convolve,
    hecke_residual,
    mixture,
    sphere_measure,
    spherical_stationarity_defect,
    stationarity_defect,
    tv_distance,
)

from .conftest import reduced_words


def naive_convolve(p, q):
    out = {}
    for h, a in p.weights().items():
        for k, b in q.weights().items():
            g = multiply(h, k)
            out[g] = out.get(g, 0) + a * b
    return {g: w for g, w in out.items() if w}


def small_measures(r=2):
    return st.dictionaries(reduced_words(r, 4), st.integers(1, 5), min_size=1, max_size=5).map(
        lambda d: FiniteMeasure.from_weights({g: Fraction(c, sum(d.values())) for g, c in d.items()})
    )


E = ()


def test_identity_convolution():
    q = sphere_measure(2, 2)
    assert convolve(FiniteMeasure.delta(E), q) == q
    assert convolve(q, FiniteMeasure.delta(E)) == q


def test_sigma1_squared():
    want = mixture([(Fraction(1, 4), FiniteMeasure.delta(E)), (Fraction(3, 4), sphere_measure(2, 2))])
    assert convolve(sphere_measure(2, 1), sphere_measure(2, 1)) == want


def test_integer_walk_squared():
    p = FiniteMeasure.uniform([Vec((1,)), Vec((-1,))])
    got = convolve(p, p).weights()
    assert got == {Vec((-2,)): Fraction(1, 4), Vec((0,)): Fraction(1, 2), Vec((2,)): Fraction(1, 4)}


def test_sphere_measures():
    assert sphere_measure(2, 0) == FiniteMeasure.delta(E)
    assert set(sphere_measure(2, 1).weights().values()) == {Fraction(1, 4)}
    w = sphere_measure(2, 2).weights()
    assert len(w) == 12 and set(w.values()) == {Fraction(1, 12)}


@pytest.mark.parametrize(("r", "k"), [(2, 1), (2, 5), (3, 3)])
def test_hecke_examples(r, k):
    assert hecke_residual(r, k) == 0


def test_hecke_rejects_k0():
    with pytest.raises(ValueError):
        hecke_residual(2, 0)


def test_hecke_oracle_direct():
    # both sides built naively for r=2, k=3
    r, k = 2, 3
    lhs = naive_convolve(sphere_measure(r, 1), sphere_measure(r, k))
    rhs = mixture([(Fraction(1, 2 * r), sphere_measure(r, k - 1)), (1 - Fraction(1, 2 * r), sphere_measure(r, k + 1))])
    assert lhs == rhs.weights()


def test_cesaro_spherical():
    assert cesaro_spherical(2, 1) == FiniteMeasure.delta(E)
    w = cesaro_spherical(2, 2).weights()
    assert w[E] == Fraction(1, 2)
    assert all(w[(x,)] == Fraction(1, 8) for x in (1, -1, 2, -2))
    for n in (1, 3, 5):
        assert sum(cesaro_spherical(2, n).weights().values()) == 1


def test_cesaro_walk_examples():
    p = sphere_measure(2, 1)
    assert cesaro_walk(p, 1) == p
    two = mixture([(Fraction(1, 2), p), (Fraction(1, 8), FiniteMeasure.delta(E)), (Fraction(3, 8), sphere_measure(2, 2))])
    assert cesaro_walk(p, 2) == two
    z = FiniteMeasure.uniform([Vec((1,)), Vec((-1,))])
    w = cesaro_walk(z, 3).weights()
    # (1/3) of {+-1: 1/2}, {0: 1/2, +-2: 1/4}, {+-1: 3/8, +-3: 1/8}
    assert w[Vec((1,))] == Fraction(1, 3) * (Fraction(1, 2) + Fraction(3, 8))
    assert w[Vec((0,))] == Fraction(1, 6)
    assert w[Vec((3,))] == Fraction(1, 24)


def test_support_cap_is_loud():
    with pytest.raises(SupportCapExceeded):
        convolution_power(sphere_measure(2, 1), 8, cap=100)


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
def test_spherical_defect_bound(n):
    d = spherical_stationarity_defect(2, n)
    assert d <= Fraction(4, n)
    assert d == Fraction(1, n)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_spherical_defect_matches_full_convolution(n):
    assert stationarity_defect(sphere_measure(2, 1), cesaro_spherical(2, n)) == spherical_stationarity_defect(2, n)


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_walk_defect_bound(n):
    p = sphere_measure(2, 1)
    assert stationarity_defect(p, cesaro_walk(p, n)) <= Fraction(2, n)


def test_tv_is_half_l1():
    a = FiniteMeasure.delta(E)
    b = FiniteMeasure.delta((1,))
    assert tv_distance(a, b) == 1
    assert tv_distance(a, a) == 0


@given(small_measures(), small_measures())
def test_convolve_matches_naive(p, q):
    assert convolve(p, q).weights() == naive_convolve(p, q)


@given(small_measures(), small_measures(), small_measures())
def test_convolve_associative(p, q, s):
    assert convolve(convolve(p, q), s) == convolve(p, convolve(q, s))


@given(small_measures(), small_measures())
def test_reflection_reverses_convolution(p, q):
    assert convolve(p, q).pushforward(invert) == convolve(q.reflect(), p.reflect())


@given(small_measures())
def test_json_roundtrip(p):
    assert FiniteMeasure.from_json(p.to_json(), FreeGroup(2)) == p
    assert sum(p.weights().values()) == 1
