from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from strategies import named_set, random_family, random_polynomial, random_slice_map, tree_counts
from wcoalg.engine import SliceWorld, check_functor_laws, identity_functor
from wcoalg.errors import TypingMismatch
from wcoalg.finset import Atom, FinFn, FinSet
from wcoalg.polynomial import (
    Polynomial,
    check_represented,
    compose_poly,
    eval_poly,
    identity_poly,
    poly_size,
    represent_identity,
    slice_poly,
)

seeds = st.integers(0, 100_000)


def sample_objects(rng, index, count=3):
    objs = [random_family(rng, index, 2, f"x{k}_") for k in range(count)]
    maps = []
    for X in objs:
        for Y in objs:
            m = random_slice_map(rng, X, Y)
            if m is not None:
                maps.append(m)
    return objs, maps


@settings(max_examples=40)
@given(seeds)
def test_poly_size_matches_direct_count(seed):
    rng = random.Random(seed)
    I, J = named_set("i", rng.randint(1, 3)), named_set("j", rng.randint(1, 3))
    p = random_polynomial(rng, I, J)
    X = random_family(rng, I, 3)
    PX = eval_poly(p)(X)
    assert len(PX) == poly_size(p, X)
    # over j: sum over shapes b of the product of the slot fibre sizes
    for j in J:
        want = 0
        for b in p.B:
            if p.f(b) == j:
                n = 1
                for a in p.slots(b):
                    n *= len(X.fiber(p.h(a)))
                want += n
        assert len(PX.fiber(j)) == want


@settings(max_examples=30)
@given(seeds)
def test_compose_poly_is_the_composite(seed):
    rng = random.Random(seed)
    I, K, J = (named_set(n, rng.randint(1, 3)) for n in "ikj")
    p = random_polynomial(rng, I, K, name="P")
    q = random_polynomial(rng, K, J, name="Q")
    rep = compose_poly(q, p)
    objs, maps = sample_objects(rng, I)
    report = check_represented(rep, objs, maps)
    assert report.ok, report.violations
    for X in objs:
        assert len(rep.functor(X)) == len(rep.target(X))


@settings(max_examples=30)
@given(seeds)
def test_slice_poly_is_the_sliced_functor(seed):
    rng = random.Random(seed)
    I, J = named_set("i", rng.randint(1, 3)), named_set("j", rng.randint(1, 3))
    p = random_polynomial(rng, I, J)
    K = random_family(rng, I, 2, "k")
    rep = slice_poly(p, K)
    objs, maps = sample_objects(rng, K.total)
    report = check_represented(rep, objs, maps)
    assert report.ok, report.violations


def test_identity_is_represented():
    I = named_set("i", 2)
    rep = represent_identity(I)
    rng = random.Random(1)
    objs, maps = sample_objects(rng, I)
    assert check_represented(rep, objs, maps).ok
    assert identity_poly(I) == rep.poly


@settings(max_examples=20)
@given(seeds)
def test_evaluated_polynomials_are_functors(seed):
    rng = random.Random(seed)
    I = named_set("i", rng.randint(1, 3))
    P = eval_poly(random_polynomial(rng, I, I))
    objs, maps = sample_objects(rng, I)
    assert check_functor_laws(P, objs, maps).ok


def test_polynomial_typing_is_checked():
    I = named_set("i", 1)
    A, B = named_set("a", 1), named_set("b", 1)
    h = FinFn(A, I, [I.elements[0]])
    with pytest.raises(TypingMismatch):
        Polynomial(h, FinFn(B, B, B.elements), FinFn(B, I, I.elements))
    p = random_polynomial(random.Random(0), I, I)
    q = random_polynomial(random.Random(0), named_set("z", 2), I)
    with pytest.raises(TypingMismatch):
        compose_poly(q, p)


def test_tree_polynomial_counts():
    I = FinSet.of("0 1")
    A, B = FinSet.of("l r"), FinSet.of("x y node")
    z, o = Atom("0"), Atom("1")
    p = Polynomial(FinFn(A, I, {Atom("l"): z, Atom("r"): z}),
                   FinFn(A, B, {Atom("l"): Atom("node"), Atom("r"): Atom("node")}),
                   FinFn(B, I, {Atom("x"): z, Atom("y"): z, Atom("node"): o}))
    # two leaves, and one node over every pair of leaves
    assert tree_counts(p) == {z: 2, o: 4}
