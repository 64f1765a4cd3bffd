from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodsets.groups import FreeGroup, Lattice, Vec, invert, multiply, parse_word
from prodsets.sets import (
    AllSet,
    BudgetExceeded,
    ExplicitSet,
    Homomorphism,
    OrSet,
    PrefixSet,
    ProductSet,
    SpecError,
    density_profile,
    inverse_set,
    parse_set,
    product_set,
    tau_split_profile,
)

from .conftest import reduced_words

F2 = FreeGroup(2)
Z = Lattice(1)


def brute_product(A, B, R, Rf):
    G = A.model
    left = [a for a in G.ball(Rf) if A.contains(a)]
    right = [b for b in G.ball(Rf) if B.contains(b)]
    ball = set(G.ball(R))
    return {multiply(a, b) for a in left for b in right} & ball


def test_singleton_left_factor():
    A = ExplicitSet(F2, [(1,)])
    B = ExplicitSet(F2, F2.ball(2))
    w = product_set(A, B, 3, 3)
    assert set(w.members) == {multiply((1,), b) for b in F2.ball(2)}
    assert w.exact


def test_evens_product_window():
    E = parse_set("cong:2Z", Z)
    w = product_set(E, E, 10, 10)
    assert sorted(w.members, key=lambda v: v[0]) == [Vec((k,)) for k in range(-10, 11, 2)]
    # no declared support radius, so the flag stays INNER
    assert not w.exact


def test_prefix_products_against_double_loop():
    P = PrefixSet(F2, (1,))
    A = P & ExplicitSet(F2, F2.ball(3))
    w = product_set(A, A, 3, 3)
    assert w.exact
    assert set(w.members) == brute_product(A, A, 3, 3)


@pytest.mark.parametrize("spec", ["prefix:a1", "prefix:a2'", "or(prefix:a1,prefix:a2)", "sign:tau=(1,0)>0"])
def test_product_search_is_sound(spec):
    A = parse_set(spec, F2)
    ps = ProductSet(A, A, 3)
    for h in F2.ball(3):
        wit = ps.find(h)
        if wit is not None:
            a, b = wit
            assert multiply(a, b) == h and A.contains(a) and A.contains(b)
            assert len(a) <= 3 and len(b) <= 3
    if ps.exhaustive:
        assert {h for h in F2.ball(3) if ps.contains(h)} == brute_product(A, A, 3, 3)


def test_inverse_set_examples():
    A = ExplicitSet(F2, [parse_word("a1 a2")])
    assert inverse_set(A).members(2) == [parse_word("a2' a1'")]
    sym = ExplicitSet(F2, F2.ball(1))
    assert set(inverse_set(sym).members(2)) == set(sym.members(2))


@pytest.mark.parametrize("spec", ["prefix:a1", "sign:tau=(2,1)>=1", "and(prefix:a1,not(prefix:a1 a2))"])
def test_inverse_profile_agrees(spec):
    A = parse_set(spec, F2)
    assert density_profile(A, "spherical", 7).values == density_profile(inverse_set(A), "spherical", 7).values


def test_full_group_profiles():
    G = AllSet(F2)
    for fam in ("spherical", "folner"):
        assert all(v == 1 for _, v in density_profile(G, fam, 5).values)
    from prodsets.measures import sphere_measure

    assert all(v == 1 for _, v in density_profile(G, "walk", 5, p=sphere_measure(2, 1)).values)


def test_prefix_profile_closed_form():
    prof = density_profile(PrefixSet(F2, (1,)), "spherical", 10)
    assert prof.values == [(n, Fraction(n - 1, 4 * n)) for n in range(1, 11)]


def test_evens_folner():
    prof = density_profile(parse_set("cong:2Z", Z), "folner", 20)
    assert prof.values[-1][1] == Fraction(21, 41)
    assert abs(prof.last - Fraction(1, 2)) < Fraction(1, 40)


def test_profile_csv():
    prof = density_profile(PrefixSet(F2, (1,)), "spherical", 2)
    assert prof.to_csv().splitlines() == ["n,value,float", "1,0/1,0.000000", "2,1/8,0.125000"]


def test_budget():
    with pytest.raises(BudgetExceeded):
        density_profile(PrefixSet(F2, (1,)), "spherical", 12, budget=1000)


def test_tau_split():
    T, Ti, K = tau_split_profile(Homomorphism((1, 1)), 2, 12)
    for n, v in T.values:
        assert v + Ti.value(n) + K.value(n) == 1
        assert v == Ti.value(n)


def test_tau_split_matches_enumeration():
    T, _, K = tau_split_profile(Homomorphism((2, -1)), 2, 6)
    assert T.values == density_profile(parse_set("sign:tau=(2,-1)>0", F2), "spherical", 6).values
    assert K.values == density_profile(parse_set("sign:tau=(2,-1)=0", F2), "spherical", 6).values


@pytest.mark.xfail(strict=True, reason="kernel profile at n=12 is 0.181; the bound 0.15 is only reached later")
def test_kernel_profile_small_at_12():
    _, _, K = tau_split_profile(Homomorphism((1, 1)), 2, 12)
    assert K.last <= Fraction(15, 100)


def test_kernel_profile_decays():
    _, _, K = tau_split_profile(Homomorphism((1, 1)), 2, 40)
    assert K.value(40) < K.value(20) < K.value(10)


def test_zero_tau_rejected():
    with pytest.raises(ValueError):
        tau_split_profile(Homomorphism((0, 0)), 2, 3)


def test_translate_symmetric_difference_decays():
    # T = {tau > 0} and a1 T = {tau > 1} differ by {tau = 1}
    prof = density_profile(parse_set("sign:tau=(1,1)=1", F2), "spherical", 12)
    assert prof.value(12) < prof.value(6) < prof.value(4)


@pytest.mark.parametrize(
    "bad", ["prefix:", "explicit:[a3]", "sign:tau=(1)>0", "cong:2Z", "prod(prefix:a1,prefix:a2)", "frob:1"]
)
def test_spec_errors(bad):
    with pytest.raises((SpecError, ValueError)):
        parse_set(bad, F2)


@given(reduced_words(2, 6))
def test_inverse_involution(g):
    A = parse_set("or(prefix:a1,sign:tau=(1,-1)>1)", F2)
    assert inverse_set(inverse_set(A)).contains(g) == A.contains(g)
    assert inverse_set(A).contains(g) == A.contains(invert(g))


@given(reduced_words(2, 6), reduced_words(2, 6))
def test_homomorphism_additive(g, h):
    tau = Homomorphism((3, -2))
    assert tau(multiply(g, h)) == tau(g) + tau(h)


@given(st.lists(reduced_words(2, 3), max_size=6), st.lists(reduced_words(2, 3), max_size=6))
def test_disjoint_profiles_add(xs, ys):
    X = ExplicitSet(F2, xs)
    Y = ExplicitSet(F2, [y for y in ys if y not in set(xs)])
    px, py, pu = (density_profile(S, "spherical", 4) for S in (X, Y, OrSet(X, Y)))
    for (n, a), (_, b), (_, c) in zip(px.values, py.values, pu.values):
        assert a + b == c
        assert 0 <= c <= 1
