import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodsets.boundary import BoundaryPoint, CylinderUnion
from prodsets.groups import FreeGroup, Lattice, Vec, invert, multiply
from prodsets.largeness import (
    CERTIFIED,
    NOT_FOUND,
    Certificate,
    check_left_syndetic,
    check_left_thick,
    check_pw_left_syndetic,
    check_pw_syndetic,
    check_syndetic,
    check_thick,
    find_between_F,
    find_left_F,
    non_syndetic_separator,
    test_family as family,
)
from prodsets.sets import AllSet, ExplicitSet, GroupSet, InverseSet, ProductSet, SliceSet, inverse_set, parse_set
from prodsets.verify import replay_certificate

F2 = FreeGroup(2)
Z = Lattice(1)


class NoLetter(GroupSet):
    """Words avoiding a generator and its inverse (not replayable on purpose)."""

    def __init__(self, model, letter):
        self.model, self.letter = model, letter

    def contains(self, g):
        return all(abs(x) != self.letter for x in g)

    def spec(self):
        return f"no-a{self.letter}"

    def raw(self):
        return {"type": "custom"}


def test_family_shape():
    fam = family(F2, 1, seed=3)
    ball = F2.ball(1)
    assert fam[0] == ball
    assert [L for L in fam[1:6]] == [[g] for g in ball]
    assert len(fam) == 1 + 5 + 16
    assert len({frozenset(L) for L in fam}) == len(fam)
    assert fam == family(F2, 1, seed=3)


def test_thick_full_group():
    c = check_thick(AllSet(F2), 2, 3)
    assert c.verdict == CERTIFIED
    assert all(w["g"] == "e" for w in c.witnesses)
    assert replay_certificate(c.to_json()) == []


def test_avoiding_a2_not_thick():
    C = NoLetter(F2, 2)
    c = check_thick(C, 1, 6)
    full = next(w for w in c.witnesses if len(w["L"]) == 5)
    assert full["g"] is None and c.verdict == NOT_FOUND
    # brute force: a2 g and a2' g cannot both avoid a2
    assert not any(all(C.contains(multiply(l, g)) for l in F2.ball(1)) for g in F2.ball(6))


def test_syndetic_examples():
    assert check_syndetic(AllSet(F2), 1, 3).info["F"] == ["e"]
    evens = parse_set("cong:2Z", Z)
    c = check_syndetic(evens, 1, 20)
    assert c.verdict == CERTIFIED and c.info["F"] == ["0", "1"]
    assert replay_certificate(c.to_json()) == []


def test_prefix_syndetic_against_brute_force():
    A = parse_set("prefix:a1", F2)
    c = check_syndetic(A, 2, 4)
    assert c.verdict == CERTIFIED
    F = [F2.parse(x) for x in c.info["F"]]
    # independent cover check on the window
    for h in F2.ball(4):
        assert any(A.contains(multiply(invert(f), h)) for f in F)
    assert replay_certificate(c.to_json()) == []
    # A F never reaches long words starting with a2
    assert check_left_syndetic(A, 2, 4).verdict == NOT_FOUND


def test_pw_thick_set_takes_identity():
    c = check_pw_syndetic(AllSet(F2), 2, 1, 3)
    assert c.verdict == CERTIFIED and c.info["F"] == ["e"]


def test_pw_difference_set_of_slice():
    U = CylinderUnion.cylinder(2, (1,))
    x = BoundaryPoint((), (1, 2))
    Ax = SliceSet(U, x)
    D = ProductSet(Ax, InverseSet(Ax), 12)
    for check in (check_pw_syndetic, check_pw_left_syndetic):
        c = check(D, 2, 1, 8)
        assert c.verdict == CERTIFIED
        assert replay_certificate(json.loads(c.dumps())) == []


def test_between_trivial():
    c = find_between_F(AllSet(F2), AllSet(F2), 2, 1, 4)
    assert c.verdict == CERTIFIED and c.info["F"] == ["e"]
    thick = AllSet(F2)
    c = find_between_F(thick, AllSet(F2), 2, 1, 4)
    assert c.info["F"] == ["e"]


def test_between_prefix_sets():
    A = parse_set("prefix:a1", F2)
    c = find_between_F(A, A, 3, 1, 8)
    assert c.verdict == CERTIFIED
    from fractions import Fraction

    assert Fraction(c.info["intersection_density"]) >= Fraction(c.info["density_B"])
    assert replay_certificate(c.to_json()) == []


def test_left_F_on_evens():
    E = parse_set("cong:2Z", Z)
    c = find_left_F(E, E, 1, 3, 6)
    assert c.verdict == CERTIFIED
    assert set(c.info["F"]) <= {"0", "1"}
    assert replay_certificate(c.to_json()) == []


def test_separator_full_group_not_found():
    c = non_syndetic_separator(AllSet(F2), 2, 6)
    assert c.verdict == NOT_FOUND


def test_separator_detaching_cylinders():
    # slices of [a1] at a1-rays: s = a2 separates on the boundary
    U = CylinderUnion.cylinder(2, (1,))
    A = SliceSet(U, BoundaryPoint((), (1,)))
    c = non_syndetic_separator(A, 0, 3)
    assert c.verdict == CERTIFIED
    assert replay_certificate(c.to_json()) == []


def test_tampered_certificate_fails():
    evens = parse_set("cong:2Z", Z)
    cert = check_thick(evens | parse_set("cong:3Z", Z), 0, 4).to_json()
    assert replay_certificate(cert) == []
    cert["witnesses"][0]["g"] = "1"
    errs = replay_certificate(cert)
    assert errs and "not inside the set" in errs[0]


def test_certificate_json_roundtrip():
    c = check_syndetic(parse_set("cong:2Z", Z), 1, 6)
    again = Certificate.from_json(json.loads(c.dumps()))
    assert again.to_json() == c.to_json()


@pytest.mark.parametrize("spec", ["prefix:a1", "or(prefix:a1,prefix:a2')", "sign:tau=(1,1)>=0", "not(prefix:a2)"])
def test_monotone_in_window(spec):
    C = parse_set(spec, F2)
    small = check_thick(C, 1, 3)
    if small.certified:
        assert check_thick(C, 1, 4).certified


@pytest.mark.parametrize("spec", ["prefix:a1", "sign:tau=(1,1)>=0", "not(prefix:a2)", "sign:tau=(1,-1)=0"])
def test_mirror_duality(spec):
    C = parse_set(spec, F2)
    Ci = inverse_set(C)
    right = check_thick(C, 1, 4)
    for w in right.witnesses:
        L = [F2.parse(x) for x in w["L"]]
        if w["g"] is None:
            continue
        # Lg in C  iff  g^-1 L^-1 in C^-1
        gi = invert(F2.parse(w["g"]))
        assert all(Ci.contains(multiply(gi, invert(l))) for l in L)
    # the full ball is its own inverse
    left = check_left_thick(Ci, 1, 4)
    assert (right.witnesses[0]["g"] is None) == (left.witnesses[0]["g"] is None)


@settings(max_examples=25)
@given(st.sets(st.integers(-6, 6), min_size=1, max_size=6), st.integers(0, 2))
def test_certified_thickness_replays(elems, ell):
    C = ExplicitSet(Z, [Vec((k,)) for k in elems])
    c = check_thick(C, ell, 8)
    assert replay_certificate(c.to_json()) == []
    # an explicit finite set is window-thick only for singleton families
    if ell >= 1 and len(elems) < 3:
        assert c.verdict == NOT_FOUND
