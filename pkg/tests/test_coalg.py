from __future__ import annotations

import itertools
import time

import pytest
from wcoalg.coalg import (
    GLUE_INDEX,
    BaseChange,
    FinCat,
    GlueSpec,
    coalg_coproduct,
    coalg_equalizer,
    coalg_product,
    coalg_pullback,
    coalgebra_structures,
    discrete_category,
    family_of_sizes,
    glue_arrow,
    glue_coalgebra,
    gluing_comonad,
    check_one_plus_one_disjoint,
    internal_diagram_comonad,
    interval_category,
    slice_comonad,
)
from wcoalg.engine import check_coalgebra, check_comonad_laws, coalgebra_law_witness, is_coalg_morphism
from wcoalg.errors import ValidationError
from wcoalg.finset import Atom
from wcoalg.slice import hom_slice
from wcoalg.wtype import coalgebras_over, diagram_coalgebra, diagram_map

IDEMPOTENTS = {0: 1, 1: 1, 2: 3, 3: 10}


def idempotent_monoid() -> FinCat:
    return FinCat.build(["*"], {"e": ("*", "*")}, compose=[("e", "e", "e")], name="idem")


def span_category() -> FinCat:
    return FinCat.build(["0", "1", "2"], {"l": ("0", "1"), "r": ("0", "2")}, name="span")


def test_category_mutants_are_rejected():
    with pytest.raises(ValidationError) as err:
        FinCat.build(["0", "1"], {"u": ("0", "1")}, compose=[("u", "id_0", "id_1")])
    assert err.value.law == "composite typing"
    with pytest.raises(ValidationError) as err:
        FinCat.build(["*"], {"e": ("*", "*")})
    assert err.value.law == "composition is total"
    with pytest.raises(ValidationError) as err:
        FinCat.build(["0"], {"u": ("0", "9")})
    assert err.value.law == "arrow typing"
    with pytest.raises(ValidationError) as err:
        FinCat.build(["*"], {"e": ("*", "*"), "f": ("*", "*")},
                     compose=[("e", "e", "f"), ("f", "f", "e"), ("e", "f", "e"), ("f", "e", "e")])
    assert err.value.law == "associativity"


@pytest.mark.parametrize("C", [interval_category(), idempotent_monoid(), span_category(),
                               discrete_category(["a", "b"])], ids=lambda C: C.name)
def test_diagram_comonad_laws(C):
    G = internal_diagram_comonad(C)
    objs = [family_of_sizes(C.objects, s) for s in itertools.product(range(3), repeat=len(C.objects))][:12]
    maps = [m for X in objs[:4] for Y in objs[:4] for m in hom_slice(X, Y)[:3]]
    assert check_comonad_laws(G, objs, maps).ok
    assert check_one_plus_one_disjoint(G).ok


@pytest.mark.parametrize("n0,n1", [(0, 0), (1, 2), (2, 2), (3, 1), (2, 3)])
def test_interval_coalgebras_are_functions(n0, n1):
    C = interval_category()
    G = internal_diagram_comonad(C)
    X = family_of_sizes(C.objects, [n0, n1])
    assert sum(1 for _ in coalgebra_structures(G, X)) == n1 ** n0


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_idempotent_monoid_coalgebras_are_idempotents(n):
    C = idempotent_monoid()
    G = internal_diagram_comonad(C)
    X = family_of_sizes(C.objects, [n])
    assert sum(1 for _ in coalgebra_structures(G, X)) == IDEMPOTENTS[n]


def test_discrete_category_has_one_structure():
    C = discrete_category(["a", "b"])
    G = internal_diagram_comonad(C)
    X = family_of_sizes(C.objects, [2, 3])
    assert sum(1 for _ in coalgebra_structures(G, X)) == 1


@pytest.mark.parametrize("spec", [GlueSpec("identity"), GlueSpec("power", k=2),
                                  GlueSpec("constant_terminal"), GlueSpec("exp_from", K=(0, 1, 2))],
                         ids=lambda s: s.kind)
def test_gluing_coalgebras_are_arrows(spec):
    G = gluing_comonad(spec)
    assert check_one_plus_one_disjoint(G).ok
    k = len(spec.exponent())
    for n1, n2 in [(0, 0), (1, 2), (2, 1), (2, 2)]:
        X = family_of_sizes(GLUE_INDEX, [n1, n2])
        assert sum(1 for _ in coalgebra_structures(G, X)) == n1 ** (k * n2)


def test_glue_coalgebra_round_trip():
    G = gluing_comonad(GlueSpec("identity"))
    p, q, r = Atom("p"), Atom("q"), Atom("r")
    A = glue_coalgebra(G, [p, q], [r], {r: q})
    assert check_coalgebra(A).ok
    assert glue_arrow(A) == {r: {Atom("*"): q}}


def test_unknown_glue_kind():
    with pytest.raises(ValidationError):
        GlueSpec("nope").exponent()


def interval_diagram(G, C, n0, n1, act, prefix="x"):
    sets = {"0": [f"{prefix}{k}" for k in range(n0)], "1": [f"{prefix}{n0 + k}" for k in range(n1)]}
    actions = {"u": {f"{prefix}{k}": f"{prefix}{n0 + act[k]}" for k in range(n0)}}
    return diagram_coalgebra(G, C, sets, actions)


def test_created_limits_and_colimits():
    C = interval_category()
    G = internal_diagram_comonad(C)
    A = interval_diagram(G, C, 2, 2, [0, 1], "a")
    B = interval_diagram(G, C, 1, 2, [1], "b")
    P, p1, p2 = coalg_product(A, B)
    assert coalgebra_law_witness(P) is None
    assert len(P.carrier) == 2 * 1 + 2 * 2
    for m in (p1, p2):
        assert is_coalg_morphism(m.src, m.dst, m.map)
    S, i1, i2 = coalg_coproduct(A, B)
    assert coalgebra_law_witness(S) is None and len(S.carrier) == 7
    homs = list(G.coalgebras.hom(A, B))
    assert homs
    f = homs[0]
    Q, q1, q2 = coalg_pullback(f, f)
    assert coalgebra_law_witness(Q) is None
    g = homs[-1]
    E, e = coalg_equalizer(f, g)
    assert coalgebra_law_witness(E) is None
    assert {x for x in A.carrier if f(x) == g(x)} == set(E.carrier)


def test_naturality_is_checked():
    C = interval_category()
    G = internal_diagram_comonad(C)
    A = interval_diagram(G, C, 1, 2, [0], "a")
    B = interval_diagram(G, C, 1, 2, [0], "b")
    diagram_map(A, B, {"a0": "b0", "a1": "b1", "a2": "b2"})
    with pytest.raises(Exception):
        diagram_map(A, B, {"a0": "b0", "a1": "b2", "a2": "b1"})


def test_slice_comonad_identifies_coalgebras_over_a_base():
    C = interval_category()
    G = internal_diagram_comonad(C)
    A = interval_diagram(G, C, 1, 2, [1], "a")
    Ga = slice_comonad(G, A)
    found = list(coalgebras_over(Ga, 2))
    assert found
    for X in found:
        Y, m = Ga.to_over(X)
        assert coalgebra_law_witness(Y) is None
        assert is_coalg_morphism(m.src, m.dst, m.map)
        back = Ga.from_over(Y, m)
        assert back == X


def coalg_hom_count(world, X, Y) -> int:
    return sum(1 for _ in world.hom(X, Y))


def test_base_change_adjunctions_in_diagrams():
    C = interval_category()
    G = internal_diagram_comonad(C)
    A = interval_diagram(G, C, 2, 2, [0, 1], "a")
    B = interval_diagram(G, C, 1, 1, [0], "b")
    f = next(iter(G.coalgebras.hom(A, B)))
    bc = BaseChange(f)
    xs = list(coalgebras_over(bc.Ga, 2))
    zs = list(coalgebras_over(bc.Gb, 2))
    assert xs and zs
    started = time.perf_counter()
    for X in xs:
        PiX = bc.pushforward(X)
        assert coalgebra_law_witness(PiX) is None
        SX = bc.sigma(X)
        for Z in zs:
            fZ = bc.pullback(Z)
            assert coalgebra_law_witness(fZ) is None
            assert (coalg_hom_count(bc.Gb.coalgebras, SX, Z)
                    == coalg_hom_count(bc.Ga.coalgebras, X, fZ))
            assert (coalg_hom_count(bc.Ga.coalgebras, fZ, X)
                    == coalg_hom_count(bc.Gb.coalgebras, Z, PiX))
    assert time.perf_counter() - started < 60


def test_invalid_coalgebra_is_rejected():
    C = interval_category()
    G = internal_diagram_comonad(C)
    with pytest.raises(Exception):
        diagram_coalgebra(G, C, {"0": ["x"], "1": []}, {"u": {"x": "y"}})
