from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from strategies import families, named_set, random_algebra, random_stratified, slice_maps, tree_counts
from wcoalg.coalg import family_of_sizes
from wcoalg.engine import (
    Algebra,
    Coalgebra,
    SliceWorld,
    algebra_morphisms,
    all_subalgebras,
    check_comonad_laws,
    check_functor_laws,
    check_naturality,
    cofree,
    fold,
    identity_comonad,
    identity_functor,
    initial_algebra,
    is_algebra_morphism,
    is_fixed_point,
    is_well_founded,
    least_subalgebra,
)
from wcoalg.errors import BudgetExceeded, LawViolation, TypingMismatch
from wcoalg.finset import Atom, FinSet, element_budget
from wcoalg.polynomial import eval_poly
from wcoalg.slice import SliceMap, hom_slice, identity_map
from wcoalg.wtype import nno_polynomial, sample_algebras

seeds = st.integers(0, 10_000)


@settings(max_examples=40)
@given(seeds)
def test_chain_of_stratified_polynomial_counts_trees(seed):
    p = random_stratified(random.Random(seed))
    res = initial_algebra(eval_poly(p), max_steps=10)
    assert res.stabilized
    counts = tree_counts(p)
    assert res.W.fiber_sizes() == tuple(counts[j] for j in p.I)
    assert list(res.trace) == sorted(res.trace)
    assert is_fixed_point(res.algebra) and is_well_founded(res.algebra)


@settings(max_examples=15)
@given(seeds)
def test_fold_is_the_unique_morphism(seed):
    rng = random.Random(seed)
    p = random_stratified(rng, levels=2)
    P = eval_poly(p)
    res = initial_algebra(P, max_steps=10)
    objs = [family_of_sizes(p.I, [a, b]) for a in range(3) for b in range(3)]
    for target in sample_algebras(P, objs, rng, 4):
        h = fold(res, target)
        assert is_algebra_morphism(h, res.algebra, target)
        assert algebra_morphisms(res.algebra, target) == [h]


def test_successor_chain_never_stabilises():
    res = initial_algebra(eval_poly(nno_polynomial()), max_steps=7)
    assert not res.stabilized
    assert list(res.trace) == list(range(8))
    with pytest.raises(TypingMismatch):
        fold(res, None)


def test_identity_functor_stops_at_once():
    world = SliceWorld(named_set("i", 2))
    res = initial_algebra(identity_functor(world))
    assert res.stabilized and res.steps == 0 and len(res.W) == 0


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3))
def test_identity_fixed_points_are_not_well_founded(sizes):
    X = family_of_sizes(named_set("i", len(sizes)), sizes)
    alg = Algebra(identity_functor(SliceWorld(X.index)), X, identity_map(X))
    assert is_fixed_point(alg)
    assert not is_well_founded(alg)
    assert len(least_subalgebra(alg)[0]) == 0


@settings(max_examples=40)
@given(seeds, st.data())
def test_closure_matches_brute_force_subalgebras(seed, data):
    rng = random.Random(seed)
    p = random_stratified(rng, levels=2, max_shapes=2)
    P = eval_poly(p)
    sizes = data.draw(st.lists(st.integers(0, 4), min_size=2, max_size=2))
    X = family_of_sizes(p.I, sizes)
    for _ in range(3):
        alg = random_algebra(P, X, rng)
        if alg is None:
            continue
        least = frozenset(least_subalgebra(alg)[0].total)
        subs = all_subalgebras(alg)
        assert least in subs
        assert all(least <= s for s in subs)


@given(st.integers(0, 10_000), st.data())
def test_polynomial_functor_laws(seed, data):
    p = random_stratified(random.Random(seed), levels=2)
    P = eval_poly(p)
    X = data.draw(families(p.I, "x", 2))
    Y = data.draw(families(p.I, "y", 2))
    f = data.draw(slice_maps(X, Y))
    g = data.draw(slice_maps(Y, Y))
    assert check_functor_laws(P, [X, Y], [f, g]).ok


def test_identity_comonad_laws_and_cofree():
    I = named_set("i", 2)
    G = identity_comonad(SliceWorld(I))
    X = family_of_sizes(I, [2, 1])
    Y = family_of_sizes(I, [1, 2], "y")
    maps = hom_slice(X, Y)
    assert check_comonad_laws(G, [X, Y], maps).ok
    assert check_naturality(G.counit, maps).ok
    C = cofree(G, X)
    assert C.carrier == X


def test_bad_coalgebra_structure_is_rejected():
    I = named_set("i", 1)
    G = identity_comonad(SliceWorld(I))
    X = family_of_sizes(I, [2])
    a, b = X.total.elements
    with pytest.raises(LawViolation):
        Coalgebra(G, X, SliceMap(X, X, {a: b, b: b}))


def test_budget_stops_large_chains():
    p = nno_polynomial()
    with element_budget(3):
        with pytest.raises(BudgetExceeded):
            initial_algebra(eval_poly(p), max_steps=10)


def test_morphism_counts_between_fixed_points():
    I = FinSet([Atom("i")])
    world = SliceWorld(I)
    Id = identity_functor(world)
    X = family_of_sizes(I, [2])
    alg = Algebra(Id, X, identity_map(X))
    # every endomap of the carrier commutes with the identity structure
    assert len(algebra_morphisms(alg, alg)) == 4
