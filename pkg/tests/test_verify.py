"""The replay layer against the library, and against tampering."""

import ast
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import prodsets.verify as V
from prodsets.boundary import CylinderUnion
from prodsets.groups import FreeGroup, format_word, parse_word, word
from prodsets.measures import hecke_residual
from prodsets.sets import parse_set

from .conftest import raw_letters, reduced_words


def test_verify_imports_nothing_from_package():
    tree = ast.parse(Path(V.__file__).read_text())
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            assert node.level == 0 and not (node.module or "").startswith("prodsets")
        elif isinstance(node, ast.Import):
            assert all(not a.name.startswith("prodsets") for a in node.names)


@given(raw_letters(3, 12))
def test_reduce_agrees(seq):
    assert V.reduce_word(seq) == word(seq)


@given(reduced_words(3, 8))
def test_word_text_roundtrip(w):
    assert V.parse_word(format_word(w)) == w == parse_word(format_word(w))


def _union(r, ws):
    u = CylinderUnion.empty(r)
    for w in ws:
        u = u | CylinderUnion.cylinder(r, w)
    return u


def _disjoint(ws):
    ws = sorted(set(ws), key=len)
    out = []
    for w in ws:
        if not any(w[: len(v)] == v for v in out):
            out.append(w)
    return out


cyl_lists = st.lists(reduced_words(2, 4), max_size=5).map(_disjoint)


@settings(max_examples=80)
@given(cyl_lists)
def test_nu_agrees(ws):
    assert V.nu_list(2, ws) == _union(2, ws).measure()


@settings(max_examples=80)
@given(reduced_words(2, 4), cyl_lists)
def test_translate_agrees(g, ws):
    U = _union(2, ws)
    T = V.translate_list(2, g, ws)
    assert V.nu_list(2, T) == U.translate(g).measure()
    cyls = U.translate(g).cylinders()
    assert V.list_subset(2, T, cyls) and V.list_subset(2, cyls, T)


@settings(max_examples=80)
@given(cyl_lists, cyl_lists)
def test_meet_and_subset_agree(P, Q):
    UP, UQ = _union(2, P), _union(2, Q)
    assert V.meet_measure(2, P, Q) == (UP & UQ).measure()
    assert V.list_subset(2, P, Q) == UP.issubset(UQ)
    assert V.lists_disjoint(P, Q) == UP.isdisjoint(UQ)


def test_subset_needs_all_children():
    kids = [(1, 1), (1, 2), (1, -2)]
    assert V.list_subset(2, [(1,)], kids)
    assert not V.list_subset(2, [(1,)], kids[:2])
    assert V.list_subset(2, [(1,)], kids[:2] + [(1, -2, 1), (1, -2, 2), (1, -2, -2)])


@pytest.mark.parametrize("r,k", [(1, 1), (1, 3), (2, 1), (2, 4), (3, 3)])
def test_hecke_bruteforce(r, k):
    assert V.hecke_residual_bruteforce(r, k) == hecke_residual(r, k) == 0


def test_hecke_check_tamper():
    assert V.replay_check({"kind": "hecke", "r": 2, "k": 2, "value": "0/1"}) == []
    assert V.replay_check({"kind": "hecke", "r": 2, "k": 2, "value": "1/9"})


def test_nu_check():
    chk = {"kind": "nu", "r": 2, "cylinders": ["a1", "a2"], "value": "1/2"}
    assert V.replay_check(chk) == []
    assert V.replay_check(dict(chk, value="1/3"))


def test_translate_subset_check():
    chk = {"kind": "translate-subset", "r": 2, "P": ["a1 a1"], "Q": ["a1"], "elements": ["e", "a1'"]}
    assert V.replay_check(chk) == []
    assert V.replay_check(dict(chk, elements=["a2"]))


def test_ge_check():
    assert V.replay_check({"kind": "ge", "a": "1/2", "b": "1/3"}) == []
    assert V.replay_check({"kind": "ge", "a": "1/4", "b": "1/3"})


def test_density_check():
    G = FreeGroup(2)
    B = parse_set("prefix:a1", G)
    chk = {"kind": "density", "model": "free:2", "set": B.raw(), "n": 4, "value": str(3 * Fraction(1, 4) / 4)}  # e is not in the set
    assert V.replay_check(chk) == []
    assert V.replay_check(dict(chk, value="1/4"))


def test_unknown_kind():
    assert V.replay_check({"kind": "magic"})


@pytest.mark.parametrize("w,n", [("a1", 5), ("a2 a1'", 4)])
def test_ray_prefix_of_periodic_point(w, n):
    v = V.parse_word(w)
    ray = V.ray_prefix((), (), v, n)
    assert len(ray) == n and all(ray[i] == v[i % len(v)] for i in range(n))
