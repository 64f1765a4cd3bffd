import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodsets import verify
from prodsets.boundary import (
    BoundaryPoint,
    CylinderUnion,
    MalformedPoint,
    cyl_measure,
    format_cyl,
    harmonic_weights,
    harmonicity_defect,
    parse_cyl,
    parse_point,
    poisson_transform,
    rn_ratio,
    stationarity_check,
    translate,
)
from prodsets.groups import FreeGroup, invert, multiply
from prodsets.measures import convolution_power, sphere_measure
from prodsets.sets import SliceSet

from .conftest import reduced_words

F2 = FreeGroup(2)
cyl = CylinderUnion.cylinder


def stationary_oracle(r):
    """nu of depth-1 and depth-2 cylinders from normalisation and stationarity of [a1].

    a1' [a1] is the complement of [a1'], every other letter t gives [t a1]:
    x1 = (1/2r) * ((1 - x1) + (2r - 1) * x2) and 2r * x1 = 1.
    """
    x1 = Fraction(1, 2 * r)
    x2 = (2 * r * x1 - 1 + x1) / (2 * r - 1)
    return x1, x2


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_harmonic_weights_match_oracle(r):
    x1, x2 = stationary_oracle(r)
    assert cyl_measure(cyl(r, (1,))) == x1
    if r > 1:
        assert cyl_measure(cyl(r, (1, 2))) == x2
    assert harmonic_weights(r)[0] == x1


def test_measure_examples():
    assert CylinderUnion.full(2).measure() == 1
    assert cyl(2, (1,)).measure() == Fraction(1, 4)
    assert cyl(2, (1, 2)).measure() == Fraction(1, 12)
    assert (~cyl(2, (1,))).measure() == Fraction(3, 4)


@pytest.mark.parametrize("d", range(0, 6))
def test_depth_partitions_sum_to_one(d):
    words = F2.sphere(d)
    assert sum(cyl(2, w).measure() for w in words) == 1
    assert CylinderUnion.union_of(2, words).is_full()


def test_collapse_rule():
    kids = [(1, 1), (1, 2), (1, -2)]
    assert CylinderUnion.union_of(2, kids) == cyl(2, (1,))
    assert CylinderUnion.union_of(2, kids[:2]) != cyl(2, (1,))
    assert (cyl(2, (1,)) & cyl(2, (2,))).is_empty()


def test_translate_examples():
    U = cyl(2, (1, 2)) | cyl(2, (-2,))
    assert translate((), U) == U
    assert translate((2,), cyl(2, (2,))) == cyl(2, (2, 2))
    assert translate((1,), cyl(2, (-1,))) == ~cyl(2, (1,))


def test_translate_against_pointwise_action():
    rng = random.Random(11)
    U = parse_cyl("cyl:[a1 a2] + cyl:[a2' a1'] + cyl:[a1' a1' a2]", 2)
    Uw = U.cylinders()
    for _ in range(1000):
        g = F2.sphere(rng.randint(0, 4))
        g = g[rng.randrange(len(g))]
        u = tuple(rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 4)))
        u = _reduce(u)
        v = _random_period(rng)
        if u and u[-1] == -v[0]:
            continue
        ray = verify.ray_prefix((), u, v, 12)
        pre = verify.ray_prefix(invert(g), u, v, 12)
        # x in gU  iff  g^-1 x in U
        assert verify.in_list(translate(g, U).cylinders(), ray) == verify.in_list(Uw, pre)


def _reduce(w):
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _random_period(rng):
    while True:
        v = _reduce(tuple(rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(1, 3))))
        if v and v[-1] != -v[0]:
            return v


cyl_words = reduced_words(2, 3).filter(bool)
unions = st.lists(cyl_words, min_size=1, max_size=4).map(lambda ws: CylinderUnion.union_of(2, ws))


@given(reduced_words(2, 3), reduced_words(2, 3), unions)
def test_translate_composition(g, h, U):
    assert translate(g, translate(h, U)) == translate(multiply(g, h), U)


@given(reduced_words(2, 4), unions)
def test_translate_preserves_algebra(g, U):
    assert translate(g, ~U) == ~translate(g, U)
    assert translate(invert(g), translate(g, U)) == U


@given(unions, unions)
def test_measure_additive(U, V):
    assert (U | V).measure() + (U & V).measure() == U.measure() + V.measure()
    assert U.measure() + (~U).measure() == 1


def test_stationarity_examples():
    assert stationarity_check(cyl(2, (1,))) == 0
    assert stationarity_check(CylinderUnion.full(2)) == 0


@pytest.mark.parametrize("d", range(1, 6))
def test_stationarity_every_cylinder(d):
    assert all(stationarity_check(cyl(2, w)) == 0 for w in F2.sphere(d))


@settings(max_examples=40)
@given(st.lists(reduced_words(2, 5).filter(bool), min_size=1, max_size=6))
def test_stationarity_random_unions(ws):
    assert stationarity_check(CylinderUnion.union_of(2, ws)) == 0


def test_poisson_examples():
    assert poisson_transform(CylinderUnion.full(2), (1, 2)) == 1
    assert poisson_transform(cyl(2, (1,)), ()) == Fraction(1, 4)
    assert harmonicity_defect(CylinderUnion.full(2), 3) == 0
    assert harmonicity_defect(cyl(2, (1, 2)), 5) == 0


def test_poisson_is_measure_of_preimage():
    U = cyl(2, (1, 2))
    for g in F2.ball(3):
        pre = verify.translate_list(2, invert(g), U.cylinders())
        assert poisson_transform(U, g) == verify.nu_list(2, pre)


def test_rn_examples():
    assert {v for _, v in rn_ratio(2, (), 2)} == {1}
    assert {v for _, v in rn_ratio(2, (1,), 3)} == {Fraction(3), Fraction(1, 3)}
    assert max(v for _, v in rn_ratio(2, (1, 2), 4)) <= 16
    with pytest.raises(ValueError):
        rn_ratio(2, (1, 2), 2)


@pytest.mark.parametrize("s", [w for w in F2.ball(3)])
def test_rn_bound(s):
    bound = 1 / convolution_power(sphere_measure(2, 1), len(s)).weight(s) if s else Fraction(1)
    assert max(v for _, v in rn_ratio(2, s, 5)) <= bound


def test_point_normal_form():
    assert BoundaryPoint((1, 2), (1, 2)) == BoundaryPoint((), (1, 2))
    assert BoundaryPoint((), (1, 1)) == BoundaryPoint((), (1,))
    assert BoundaryPoint((2,), (1, 2)) == BoundaryPoint((), (2, 1))
    for bad in [((), ()), ((1,), (-1, 2)), ((), (1, 2, -1)), ((1, -1), (2,))]:
        with pytest.raises(MalformedPoint):
            BoundaryPoint(*bad)


def test_point_spec_errors():
    for bad in ["point:u=(a1 a1'),v=(a2)", "point:u=(),v=()", "point:v=(a1)"]:
        with pytest.raises(MalformedPoint):
            parse_point(bad)


def test_point_prefix_and_action():
    x = parse_point("point:u=(a2),v=(a1 a2)")
    assert x.prefix(5) == (2, 1, 2, 1, 2)
    y = x.act((-2,))
    assert y.prefix(4) == (1, 2, 1, 2)
    assert x.act((1,)).act((-1,)) == x


def test_slice_examples():
    x = parse_point("point:u=(),v=(a1 a2)")
    assert SliceSet(CylinderUnion.full(2), x).members(2) == F2.ball(2)
    A = SliceSet(cyl(2, (1,)), x)
    assert A.contains(())


@pytest.mark.parametrize("pt", ["point:u=(),v=(a1 a2)", "point:u=(a2' a2'),v=(a1')", "point:u=(a1),v=(a2 a1 a1)"])
def test_slice_matches_direct_action(pt):
    x = parse_point(pt)
    U = parse_cyl("cyl:[a1 a2] + cyl:[a2'] + cyl:[a1' a1' a1']", 2)
    A = SliceSet(U, x)
    ws = U.cylinders()
    for g in F2.ball(5):
        assert A.contains(g) == verify.in_list(ws, verify.ray_prefix(g, x.u, x.v, 3))


@pytest.mark.parametrize(
    "text",
    ["cyl:[a1]", "cyl:[a1 a2'] + cyl:[a2]", "~(cyl:[a1]+cyl:[a2])", "full", "empty", "cyl:[a1] & ~cyl:[a1 a1]"],
)
def test_cyl_spec_roundtrip(text):
    U = parse_cyl(text, 2)
    assert parse_cyl(format_cyl(U), 2) == U


def test_cyl_spec_errors():
    for bad in ["cyl:[a1 a1']", "cyl:[a3]", "cyl:[a1", "~", "cyl:[a1] +", "(cyl:[a1]"]:
        with pytest.raises(ValueError):
            parse_cyl(bad, 2)
