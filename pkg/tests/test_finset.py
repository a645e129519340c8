from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from strategies import arrows, finsets, fns, named_set
from wcoalg.errors import BudgetExceeded, CodMismatch, NotIso, NotParallel, TypingMismatch
from wcoalg.finset import (
    UNIT,
    Atom,
    FinFn,
    FinSet,
    FnTable,
    Pair,
    check_disjoint,
    compose,
    coproduct,
    copair,
    curry,
    element_budget,
    equalizer,
    exponential,
    factor_through,
    hom,
    hom_size,
    identity,
    inl,
    inr,
    inverse,
    is_epi,
    is_iso,
    is_mono,
    pairing,
    product,
    pullback,
    uncurry,
    value_from_json,
    value_to_json,
)


values = st.recursive(
    st.one_of(st.sampled_from("abc").map(Atom), st.just(UNIT)),
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: Pair(*t)),
        inner.map(inl),
        inner.map(inr),
        st.lists(st.tuples(st.sampled_from("pq").map(Atom), inner), max_size=2)
        .map(lambda kv: FnTable(dict(kv).items())),
    ),
    max_leaves=6,
)


@given(values)
def test_value_json_round_trip(v):
    assert value_from_json(value_to_json(v)) == v


@given(st.lists(values, max_size=8))
def test_finset_order_is_canonical(vs):
    A, B = FinSet(vs), FinSet(list(reversed(vs)))
    assert A == B and hash(A) == hash(B)
    assert list(A) == sorted(set(vs))


def test_finset_rejects_raw_python_values():
    with pytest.raises(TypeError):
        FinSet([1, 2])


def test_fn_must_land_in_codomain():
    A = FinSet.of("a b")
    with pytest.raises(TypingMismatch):
        FinFn(A, FinSet.of("a"), {Atom("a"): Atom("a"), Atom("b"): Atom("b")})
    with pytest.raises(TypingMismatch):
        FinFn(A, A, {Atom("a"): Atom("a")})


@given(arrows(), st.data())
def test_composition_is_associative_and_unital(f, data):
    g = data.draw(fns(f.cod, f.cod))
    h = data.draw(fns(f.cod, f.cod))
    assert compose(identity(f.cod), f) == f == compose(f, identity(f.dom))
    assert compose(h, compose(g, f)) == compose(compose(h, g), f)


@given(finsets("a"), finsets("b"))
def test_product_size_and_universal_property(A, B):
    P, p1, p2 = product(A, B)
    assert len(P) == len(A) * len(B)
    # the mediating map of the projections is the identity
    assert pairing(p1, p2, P) == identity(P)


@given(arrows(), st.data())
def test_equalizer_is_the_agreement_set(f, data):
    g = data.draw(fns(f.dom, f.cod))
    E, m = equalizer(f, g)
    assert set(E) == {x for x in f.dom if f(x) == g(x)}
    assert compose(f, m) == compose(g, m) and is_mono(m)


def test_equalizer_needs_parallel_pair():
    A, B = FinSet.of("a"), FinSet.of("b")
    with pytest.raises(NotParallel):
        equalizer(identity(A), identity(B))


@given(arrows(), st.data())
def test_pullback_counts_pairs_over_each_point(f, data):
    X = data.draw(finsets("x"))
    g = data.draw(fns(X, f.cod)) if len(f.cod) or not len(X) else None
    if g is None:
        return
    P, p1, p2 = pullback(f, g)
    expected = sum(
        sum(1 for a in f.dom if f(a) == c) * sum(1 for b in X if g(b) == c) for c in f.cod
    )
    assert len(P) == expected
    assert compose(f, p1) == compose(g, p2)


def test_pullback_needs_common_codomain():
    A = FinSet.of("a")
    with pytest.raises(CodMismatch):
        pullback(identity(A), identity(FinSet.of("b")))


@given(finsets("a"), finsets("b"))
def test_coproducts_are_disjoint(A, B):
    S, i, j = coproduct(A, B)
    assert len(S) == len(A) + len(B)
    assert check_disjoint(S, i, j)
    assert copair(i, j, S) == identity(S)


@given(finsets("a", 2), finsets("b", 2), finsets("c", 2))
def test_exponential_size_and_currying(A, B, C):
    E, ev = exponential(A, B)
    assert len(E) == len(B) ** len(A) == hom_size(A, B)
    CA, _, _ = product(C, A)
    for h in hom(CA, B):
        k = curry(h, C, A, E)
        assert uncurry(k, A, B) == h
        # evaluation after curry x id recovers h
        assert all(ev(Pair(k(p[1]), p[2])) == h(p) for p in CA)


@given(finsets("a"), finsets("b"))
def test_hom_enumerates_distinct_maps(A, B):
    hs = hom(A, B)
    assert len(hs) == len(set(hs)) == len(B) ** len(A)


@given(arrows())
def test_mono_epi_iso_against_brute_force(f):
    injective = all(f(x) != f(y) for x, y in itertools.combinations(f.dom, 2))
    surjective = all(any(f(x) == y for x in f.dom) for y in f.cod)
    assert is_mono(f) == injective
    assert is_epi(f) == surjective
    assert is_iso(f) == (injective and surjective)
    if is_iso(f):
        assert compose(inverse(f), f) == identity(f.dom)
    else:
        with pytest.raises(NotIso):
            inverse(f)


@given(arrows(), st.data())
def test_factor_through_a_mono(m, data):
    if not is_mono(m):
        return
    X = data.draw(finsets("x"))
    if not len(m.dom) and len(X):
        return
    k = data.draw(fns(X, m.dom))
    assert factor_through(compose(m, k), m) == k


def test_budget_is_enforced_and_scoped():
    A = named_set("a", 4)
    with element_budget(10):
        with pytest.raises(BudgetExceeded):
            product(A, A)
        with pytest.raises(BudgetExceeded):
            exponential(A, A)
    assert len(product(A, A)[0]) == 16
