from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from strategies import random_stratified, tree_counts
from wcoalg.cli import load
from wcoalg.coalg import interval_category
from wcoalg.engine import Comonad, ExeFunctor, ExeNat, SliceWorld, identity_functor
from wcoalg.errors import Exceeded, HypothesisViolated, NotCoalgMorphism, TypingMismatch
from wcoalg.finset import TERMINAL, Atom
from wcoalg.wtype import (
    EndoPoly,
    build_coreflexive,
    chain_objects,
    check_coreflexive,
    check_equalizer_mono_lemma,
    check_nno,
    check_preservation,
    coalg_map,
    cross_check,
    diagonal_endopoly,
    diagram_coalgebra,
    finset_endopoly,
    glue_cross_check,
    nno_polynomial,
    random_equalizer_square,
    search_lemma_counterexample,
    trivial_coalgebra,
    w_type,
)

FIXTURES = Path(__file__).parent / "fixtures"
seeds = st.integers(0, 10_000)


@pytest.fixture(scope="module")
def interval():
    return load(FIXTURES / "interval.json")


@pytest.fixture(scope="module")
def gluing():
    return load(FIXTURES / "gluing.json")


@settings(max_examples=10)
@given(seeds)
def test_set_w_type_counts_trees(seed):
    p = random_stratified(random.Random(seed), levels=3, max_shapes=2, max_arity=2)
    res = w_type(finset_endopoly(p), max_steps=10)
    assert res.report.ok
    counts = tree_counts(p)
    assert res.algebra.carrier.carrier.fiber_sizes() == tuple(counts[j] for j in p.I)


@settings(max_examples=5)
@given(seeds)
def test_constant_diagram_w_type_copies_trees(seed):
    p = random_stratified(random.Random(seed), levels=2, max_shapes=2, max_arity=2)
    C = interval_category()
    res = w_type(diagonal_endopoly(p, C), max_steps=8)
    assert res.report.ok
    W = res.algebra.carrier.carrier
    counts = tree_counts(p)
    for e in W.index:
        assert len(W.fiber(e)) == counts[e[2]]


def test_interval_cross_check(interval):
    rep, res, chain = cross_check(interval.polynomial, max_steps=8)
    assert rep.ok, rep.violations
    # over i0: the two leaves; over i1: a node whose two children agree at 1
    assert rep.data["pipeline_W"] == [2, 2, 2, 2]
    assert rep.data["direct_W"] == [2, 2, 2, 2]
    assert rep.data["morphisms"] == 1
    # the lifted chain of P0 is strictly larger than W before equalizing
    assert res.wfp.report.data["W0"] == [2, 8, 2, 2]


def test_coreflexive_presentation(interval):
    data = build_coreflexive(interval.polynomial)
    objs = chain_objects(data.P, 3)
    rep = check_coreflexive(data, objs)
    assert rep.ok, rep.violations


def test_gluing_cross_check(gluing):
    rep = glue_cross_check(gluing.glue, max_steps=8, targets=5, seed=11)
    assert rep.ok, rep.violations
    assert rep.data["targets"] == 5
    assert rep.data["pair_morphisms"] == [1] * 5


@pytest.mark.parametrize("kind", ["identity", "diagonal"])
def test_preservation_of_set_w_types(kind):
    p = random_stratified(random.Random(5), levels=2)
    rep = check_preservation(kind, p, 8, C=interval_category())
    assert rep.ok, rep.violations


def test_first_projection_preserves_w_types(gluing):
    rep = check_preservation("first", gluing.glue, 8)
    assert rep.ok, rep.violations


def test_unknown_preservation_kind():
    with pytest.raises(TypingMismatch):
        check_preservation("nope", random_stratified(random.Random(0)), 4)


def test_successor_polynomial_reports_exceeded():
    with pytest.raises(Exceeded) as err:
        w_type(finset_endopoly(nno_polynomial()), max_steps=5)
    assert list(err.value.traces["P"]) == list(range(6))
    rep = check_nno(5)
    assert rep.ok, rep.violations
    assert rep.data["traces"]["sets/P"] == list(range(6))


def test_characterization_on_samples():
    p = random_stratified(random.Random(3), levels=2)
    res = w_type(finset_endopoly(p), max_steps=8, sample_targets=5, seed=1)
    assert res.report.ok, res.report.violations


@settings(max_examples=50)
@given(seeds)
def test_equalizer_lemma_with_monic_q(seed):
    sq = random_equalizer_square(random.Random(seed), 4, monic=True)
    assert sq.commutes()
    assert check_equalizer_mono_lemma(sq).ok


def test_equalizer_lemma_needs_monic_q():
    found = search_lemma_counterexample(random.Random(0), tries=300)
    assert found is not None
    sq, rep = found
    assert not rep.ok and not rep.data["q_monic"]


def test_endopoly_typing():
    G = finset_endopoly(nno_polynomial()).G
    ep = finset_endopoly(nno_polynomial(), G)
    with pytest.raises(TypingMismatch):
        EndoPoly(G, ep.I, ep.A, ep.B, ep.g, ep.h, ep.f)


def test_non_natural_map_is_rejected():
    C = interval_category()
    G = diagonal_endopoly(nno_polynomial(), C).G
    X = diagram_coalgebra(G, C, {"0": ["a", "b"], "1": ["c", "d"]}, {"u": {"a": "c", "b": "d"}})
    swap = {"a": "a", "b": "b", "c": "d", "d": "c"}
    with pytest.raises(NotCoalgMorphism):
        coalg_map(X, X, lambda e: type(e)(e[1], Atom(swap[e[2].name])))


def test_non_cartesian_comonad_is_refused():
    world = SliceWorld(TERMINAL)
    Id = identity_functor(world)
    F = ExeFunctor(world, world, lambda X: X, lambda m, y: m(y), name="F", provenance="polynomial")
    G = Comonad(F, ExeNat(F, Id, lambda X, y: y), ExeNat(F, F, lambda X, y: y))
    p = nno_polynomial()
    base = finset_endopoly(p)

    def move(X):
        return trivial_coalgebra(G, X.carrier)

    I, A, B = move(base.I), move(base.A), move(base.B)
    ep = EndoPoly(G, I, A, B, coalg_map(A, I, base.h.map.map), coalg_map(A, B, base.g.map.map),
                  coalg_map(B, I, base.f.map.map))
    with pytest.raises(HypothesisViolated):
        w_type(ep)
