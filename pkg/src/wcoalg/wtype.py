"""W-types in coalgebra categories by the coreflexive-equalizer construction.

For an endopolynomial ``I <-h- A -g-> B -f-> I`` of ``G``-coalgebras the
functor ``P = f_! Pi_g h^*`` on ``E_G/I`` sits inside

    P0 = f_! F_b Pi_g U h^*     and     P1 = f_! F_b Pi_g G_a U h^*

as the equalizer of ``phi, psi : P0 => P1`` with common retraction ``eps``.
``P0`` and ``P1`` lie over the downstairs functors ``Q0``/``Q1`` on
``FinSet/I.total``, so their initial algebras are lifted from ordinary
initial chains; the W-type of ``P`` is then cut out of ``W0`` as the
equalizer of two folds ``u, v : W0 -> W1``.
"""
from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .coalg import (
    E1,
    E2,
    BaseChange,
    CoreflexivePair,
    FinCat,
    SliceComonad,
    coalgebra_structures,
    glue_arrow,
    small_families,
)
from .engine import (
    Algebra,
    ChainResult,
    CheckReport,
    Coalgebra,
    CoalgMap,
    CoalgWorld,
    Comonad,
    ExeFunctor,
    ExeNat,
    SliceWorld,
    algebra_morphism_witness,
    algebra_morphisms,
    check_characterization,
    cofree,
    coalgebra_law_witness,
    fold,
    initial_algebra,
    is_coalg_morphism,
    is_fixed_point,
    is_well_founded,
    lift_initial_algebra,
    oplax_from_lift,
)
from .errors import (
    BudgetExceeded,
    Exceeded,
    HypothesisViolated,
    LawViolation,
    NotCoalgMorphism,
    TypingMismatch,
    WcoalgError,
)
from .finset import Atom, FinFn, FinSet, FnTable, Pair, equalizer, factor_through, guard, is_mono, pullback
from .polynomial import Polynomial, TwoArgFunctor, eval_poly, staged_initial_algebra
from .slice import (
    Family,
    SliceMap,
    pi_along,
    pi_elem,
    pullback_along,
    pullback_along_map,
    sigma_along,
    subfamily,
)


# ---------------------------------------------------------------------------
# endopolynomials of coalgebras


@dataclass(frozen=True, eq=False)
class EndoPoly:
    """``I <-h- A -g-> B -f-> I`` in ``E_G``."""

    G: Comonad
    I: Coalgebra
    A: Coalgebra
    B: Coalgebra
    h: CoalgMap
    g: CoalgMap
    f: CoalgMap
    name: str = "P"

    def __post_init__(self):
        typing = ((self.h, self.A, self.I, "h"), (self.g, self.A, self.B, "g"), (self.f, self.B, self.I, "f"))
        for m, src, dst, label in typing:
            if m.src != src or m.dst != dst:
                raise TypingMismatch(f"{label} has the wrong domain or codomain")
            if not is_coalg_morphism(src, dst, m.map):
                raise NotCoalgMorphism(f"{label} is not a coalgebra morphism")
        for X in (self.I, self.A, self.B):
            if X.comonad is not self.G:
                raise TypingMismatch("all coalgebras must be for the same comonad")

    def downstairs(self) -> Polynomial:
        """The underlying polynomial ``(U h, U g, U f)`` on ``FinSet/I.total``."""
        return Polynomial(self.h.map.map, self.g.map.map, self.f.map.map, name=f"U{self.name}")


def coalg_map(src: Coalgebra, dst: Coalgebra, table) -> CoalgMap:
    return CoalgMap(src, dst, SliceMap(src.carrier, dst.carrier, table))


# ---------------------------------------------------------------------------
# the coreflexive presentation


@dataclass(eq=False)
class CoreflexiveData:
    ep: EndoPoly
    Gi: SliceComonad
    Ga: SliceComonad
    Gb: SliceComonad
    bh: BaseChange
    bg: BaseChange
    bf: BaseChange
    P: ExeFunctor
    P0: ExeFunctor
    P1: ExeFunctor
    Q0: ExeFunctor
    Q1: ExeFunctor
    phi: ExeNat
    psi: ExeNat
    eps: ExeNat
    iota: ExeNat
    pair: Callable[[Coalgebra], CoreflexivePair]

    @property
    def world(self) -> CoalgWorld:
        return self.Gi.coalgebras

    @property
    def down(self) -> SliceWorld:
        return self.Gi.world

    def decode(self, X: Coalgebra, y) -> tuple:
        """An element of ``P0 X`` (or ``P X``) as ``(b, {a: x})`` via the counit of ``G_b``."""
        Y0 = pi_along(self.bg.u, self.bh.pullback(X).carrier)
        e = self.Gb.counit.elem(Y0, y)
        return e[1], {a: ax[2] for a, ax in e[2].entries}


def build_coreflexive(ep: EndoPoly) -> CoreflexiveData:
    G = ep.G
    Gi, Ga, Gb = SliceComonad(G, ep.I), SliceComonad(G, ep.A), SliceComonad(G, ep.B)
    bh = BaseChange(ep.h, Ga, Gi)
    bg = BaseChange(ep.g, Ga, Gb)
    bf = BaseChange(ep.f, Gb, Gi)
    uh, ug, uf = bh.u, bg.u, bf.u
    world, down = Gi.coalgebras, Gi.world
    Gbf, Gaf = Gb.functor, Ga.functor

    @functools.lru_cache(maxsize=64)
    def pi_h(m: SliceMap) -> SliceMap:
        hm = pullback_along_map(uh, m)
        return SliceMap(pi_along(ug, hm.src), pi_along(ug, hm.dst), lambda p: pi_elem(hm, p), check=False)

    @functools.lru_cache(maxsize=64)
    def pi_gh(m: SliceMap) -> SliceMap:
        gm = Gaf.map(pullback_along_map(uh, m))
        return SliceMap(pi_along(ug, gm.src), pi_along(ug, gm.dst), lambda p: pi_elem(gm, p), check=False)

    def q0(X: Family) -> Family:
        return sigma_along(uf, Gbf(pi_along(ug, pullback_along(uh, X))))

    def q1(X: Family) -> Family:
        return sigma_along(uf, Gbf(pi_along(ug, Gaf(pullback_along(uh, X)))))

    Q0 = ExeFunctor(down, down, q0, lambda m, y: Gbf.elem(pi_h(m), y), name="Q0",
                    preserves_pullbacks=True, provenance="composite")
    Q1 = ExeFunctor(down, down, q1, lambda m, y: Gbf.elem(pi_gh(m), y), name="Q1",
                    preserves_pullbacks=True, provenance="composite")

    def p0(X: Coalgebra) -> Coalgebra:
        return bf.sigma(cofree(Gb, pi_along(ug, bh.pullback(X).carrier)))

    def p1(X: Coalgebra) -> Coalgebra:
        return bf.sigma(cofree(Gb, pi_along(ug, Gaf(bh.pullback(X).carrier))))

    def p(X: Coalgebra) -> Coalgebra:
        return bf.sigma(bg.pushforward(bh.pullback(X)))

    P0 = ExeFunctor(world, world, p0, lambda m, y: Gbf.elem(pi_h(m.map), y), name="P0",
                    preserves_pullbacks=True, provenance="composite")
    P1 = ExeFunctor(world, world, p1, lambda m, y: Gbf.elem(pi_gh(m.map), y), name="P1",
                    preserves_pullbacks=True, provenance="composite")
    P = ExeFunctor(world, world, p, lambda m, y: Gbf.elem(pi_h(m.map), y), name=ep.name,
                   preserves_pullbacks=True, provenance="polynomial")

    pairs: dict = {}

    def pair(X: Coalgebra) -> CoreflexivePair:
        if X not in pairs:
            if len(pairs) > 64:
                pairs.clear()
            pairs[X] = bg.coreflexive_pair(bh.pullback(X))
        return pairs[X]

    phi = ExeNat(P0, P1, lambda X, y: pair(X).phi1(y), name="phi")
    psi = ExeNat(P0, P1, lambda X, y: pair(X).phi2(y), name="psi")
    eps = ExeNat(P1, P0, lambda X, y: pair(X).retraction(y), name="eps")
    iota = ExeNat(P, P0, lambda X, y: y, name="iota")
    return CoreflexiveData(ep, Gi, Ga, Gb, bh, bg, bf, P, P0, P1, Q0, Q1, phi, psi, eps, iota, pair)


def check_coreflexive(data: CoreflexiveData, objects: Sequence[Coalgebra], maps: Sequence[CoalgMap] = ()) -> CheckReport:
    """``eps phi = eps psi = 1``, ``iota`` is the pointwise equalizer, and
    ``U P_i = Q_i U`` on the given samples."""
    rep = CheckReport("coreflexive presentation")
    for X in objects:
        rep.checked += 1
        P0X, P1X, PX = data.P0(X), data.P1(X), data.P(X)
        if P0X.carrier != data.Q0(X.carrier):
            rep.fail("U P0 = Q0 U", X)
        if P1X.carrier != data.Q1(X.carrier):
            rep.fail("U P1 = Q1 U", X)
        eq = set()
        for y in P0X.carrier.total.elements:
            a, b = data.phi.elem(X, y), data.psi.elem(X, y)
            if data.eps.elem(X, a) != y:
                rep.fail("eps . phi = 1", y)
                break
            if data.eps.elem(X, b) != y:
                rep.fail("eps . psi = 1", y)
                break
            if a == b:
                eq.add(y)
        if set(PX.carrier.total.elements) != eq:
            rep.fail("iota is the equalizer of phi and psi", X)
        for F, name in ((data.P0, "P0"), (data.P1, "P1"), (data.P, "P")):
            w = coalgebra_law_witness(F(X))
            if w is not None:
                rep.fail(f"{name}(X) is a coalgebra", w)
    for m in maps:
        rep.checked += 1
        for F, Q, name in ((data.P0, data.Q0, "P0"), (data.P1, data.Q1, "P1")):
            if F.map(m).map != Q.map(m.map):
                rep.fail(f"U {name}(m) = {Q.name}(U m)", m)
    return rep


# ---------------------------------------------------------------------------
# the equalizer construction of the well-founded fixed point


@dataclass(eq=False)
class WfpResult:
    algebra: Algebra
    W0: Algebra
    W1: Algebra
    u: CoalgMap
    v: CoalgMap
    e: CoalgMap
    i: CoalgMap
    chains: dict
    report: CheckReport


LIFT_STAGE_LIMIT = 200


def lifted_steps(trace: Sequence[int], max_steps: int, limit: int = LIFT_STAGE_LIMIT) -> int:
    """How many stages of a lifted chain to build, given the downstairs trace:
    all of them while the downstairs stages stay below ``limit`` elements."""
    n = 0
    while n + 1 < len(trace) and trace[n + 1] <= limit and n < max_steps:
        n += 1
    return n


def _traces_on_exceeded(data: CoreflexiveData, max_steps: int) -> dict:
    """Stage cardinalities of the downstairs chains (``Q0``, ``Q1``, ``UP``)
    and of their lifts (``P0``, ``P1``, ``P``), the lifts as far as their
    downstairs stages stay small."""
    out = {}
    down = eval_poly(data.ep.downstairs())
    for lo_name, Q, up_name, F in (("Q0", data.Q0, "P0", data.P0), ("Q1", data.Q1, "P1", data.P1),
                                   ("UP", down, "P", data.P)):
        try:
            lo = initial_algebra(Q, max_steps).trace
        except BudgetExceeded as exc:
            lo = tuple(getattr(exc, "trace", ()))
        out[lo_name] = tuple(lo)
        try:
            out[up_name] = tuple(initial_algebra(F, lifted_steps(lo, max_steps)).trace)
        except BudgetExceeded as exc:
            out[up_name] = tuple(getattr(exc, "trace", ()))
    return out


def lifted_initial(data: CoreflexiveData, which: int, max_steps: int) -> tuple[ChainResult, Algebra]:
    Q, Pk = (data.Q0, data.P0) if which == 0 else (data.Q1, data.P1)
    chain = initial_algebra(Q, max_steps)
    if not chain.stabilized:
        raise Exceeded(f"{Q.name} did not stabilise within {max_steps} steps",
                       _traces_on_exceeded(data, max_steps))
    sigma = oplax_from_lift(Pk, Q, data.Gi, data.Gi, name=f"sigma{which}")
    _, alg = lift_initial_algebra(Q, sigma, data.Gi, chain, Q=Pk)
    lifted = ChainResult(Pk, True, chain.trace, chain.fiber_trace, chain.steps, alg)
    return lifted, alg


def _check_equation(rep: CheckReport, law: str, src_elems, lhs, rhs) -> None:
    rep.checked += 1
    for p in src_elems:
        if lhs(p) != rhs(p):
            rep.fail(law, p)
            return


def equalizer_wfp(data: CoreflexiveData, max_steps: int = 32) -> WfpResult:
    """``W = eq(u, v)`` with ``s`` factored from ``s0 . P0 i . iota``."""
    if not data.P0.preserves_pullbacks or not data.P1.preserves_monos:
        raise HypothesisViolated("P0 must preserve pullbacks and P1 monomorphisms")
    world = data.world
    P, P0, P1 = data.P, data.P0, data.P1
    rep = CheckReport("equalizer of the coreflexive pair")
    chain0, alg0 = lifted_initial(data, 0, max_steps)
    chain1, alg1 = lifted_initial(data, 1, max_steps)
    W0, s0 = alg0.carrier, alg0.structure
    W1, s1 = alg1.carrier, alg1.structure
    phi1, psi1 = data.phi.component(W1), data.psi.component(W1)
    u = fold(chain0, Algebra(P0, W1, world.compose(s1, phi1)))
    v = fold(chain0, Algebra(P0, W1, world.compose(s1, psi1)))
    e = fold(chain1, Algebra(P1, W0, world.compose(s0, data.eps.component(W0))))
    P0W0 = P0(W0).carrier.total.elements
    P1W1 = P1(W1).carrier.total.elements
    _check_equation(rep, "u . s0 = s1 . phi(W1) . P0 u", P0W0,
                    lambda p: u(s0(p)), lambda p: s1(phi1(P0.elem(u, p))))
    _check_equation(rep, "v . s0 = s1 . psi(W1) . P0 v", P0W0,
                    lambda p: v(s0(p)), lambda p: s1(psi1(P0.elem(v, p))))
    _check_equation(rep, "e . s1 = s0 . eps(W0) . P1 e", P1W1,
                    lambda p: e(s1(p)), lambda p: s0(data.eps.elem(W0, P1.elem(e, p))))
    W0elems = W0.carrier.total.elements
    if any(e(u(w)) != w for w in W0elems) or any(e(v(w)) != w for w in W0elems):
        raise HypothesisViolated("e . u = e . v = 1 fails")
    rep.checked += 1
    W, i = world.equalizer(u, v)
    PW = P(W)
    table = []
    Welems = set(W.carrier.total.elements)
    for y in PW.carrier.total.elements:
        z = s0(P0.elem(i, y))
        if z not in Welems:
            raise LawViolation(f"s0 . P0 i . iota does not factor through W at {y!r}")
        table.append(z)
    try:
        s = CoalgMap(PW, W, SliceMap(PW.carrier, W.carrier, table), check=True)
    except (NotCoalgMorphism, TypingMismatch) as exc:
        raise LawViolation(f"factored structure is not a coalgebra morphism: {exc}") from None
    rep.absorb(check_four_conditions(data, alg0, alg1, u, v, i, W))
    alg = Algebra(P, W, s)
    fixed, founded = is_fixed_point(alg), is_well_founded(alg)
    rep.data = {"W0": list(W0.carrier.fiber_sizes()), "W1": list(W1.carrier.fiber_sizes()),
                "W": list(W.carrier.fiber_sizes()), "fixed_point": fixed, "well_founded": founded}
    if not fixed:
        raise LawViolation("equalizer algebra is not a fixed point")
    if not founded:
        raise LawViolation("equalizer algebra is not well-founded")
    chains = {"Q0": chain0.as_dict(), "Q1": chain1.as_dict()}
    return WfpResult(alg, alg0, alg1, u, v, e, i, chains, rep)


def check_four_conditions(data: CoreflexiveData, alg0: Algebra, alg1: Algebra, u, v, i, W) -> CheckReport:
    """The four characterisations of maps into ``P0 W0`` that factor through
    ``P W`` agree on every element of ``P0 W0`` (hence for every ``Z``)."""
    rep = CheckReport("factorisation through PW")
    P, P0, P1 = data.P, data.P0, data.P1
    W0, W1 = alg0.carrier, alg1.carrier
    phi0, psi0 = data.phi.component(W0), data.psi.component(W0)
    phi1, psi1 = data.phi.component(W1), data.psi.component(W1)
    through_pw = {P0.elem(i, y) for y in P(W).carrier.total.elements}
    image_p0w = {P0.elem(i, y) for y in P0(W).carrier.total.elements}
    pw0 = set(P(W0).carrier.total.elements)
    rep.checked += 1
    if through_pw != image_p0w & pw0:
        rep.fail("PW is the intersection of PW0 and P0W", sorted(through_pw ^ (image_p0w & pw0))[:1])
    for p in P0(W0).carrier.total.elements:
        rep.checked += 1
        c8 = p in through_pw
        c9 = phi0(p) == psi0(p) and P0.elem(u, p) == P0.elem(v, p)
        c10 = P1.elem(u, phi0(p)) == P1.elem(v, psi0(p))
        c11 = phi1(P0.elem(u, p)) == psi1(P0.elem(v, p))
        if not (c8 == c9 == c10 == c11):
            rep.fail("conditions on f : Z -> P0 W0 agree", p, f"{(c8, c9, c10, c11)}")
    return rep


# ---------------------------------------------------------------------------
# the whole pipeline and its oracles


@dataclass(eq=False)
class WTypeResult:
    algebra: Algebra
    data: CoreflexiveData
    wfp: WfpResult
    report: CheckReport

    def summary(self) -> dict:
        W = self.algebra.carrier.carrier
        return {"W_fibers": list(W.fiber_sizes()), "W_size": len(W), **{
            k: v for k, v in self.wfp.report.data.items() if k in ("W0", "W1")}}


def sample_algebras(F: ExeFunctor, objects: Iterable, rng: random.Random, count: int,
                    per_object: int = 64) -> list[Algebra]:
    """Up to ``count`` algebras ``(X, t)`` with ``t`` drawn from the first
    ``per_object`` structure maps on each candidate ``X``."""
    world = F.src
    pool = []
    for X in objects:
        FX = F(X)
        maps = list(itertools.islice(world.hom(FX, X), per_object))
        if maps:
            pool.append((X, maps))
    rng.shuffle(pool)
    out = []
    for X, maps in itertools.cycle(pool) if pool else ():
        if len(out) >= count:
            break
        out.append(Algebra(F, X, rng.choice(maps)))
    return out


def w_type(ep: EndoPoly, max_steps: int = 32, sample_targets: int = 0, seed: int = 0) -> WTypeResult:
    if not ep.G.cartesian:
        raise HypothesisViolated("the comonad must be cartesian")
    if ep.G.functor.provenance not in ("polynomial", "composite"):
        raise HypothesisViolated("the comonad's functor must be polynomial")
    data = build_coreflexive(ep)
    wfp = equalizer_wfp(data, max_steps)
    rep = CheckReport(f"W-type of {ep.name}")
    rep.absorb(wfp.report)
    if sample_targets:
        rng = random.Random(seed)
        cands = list(itertools.islice(coalgebras_over(data.Gi, 1), 12))
        targets = sample_algebras(data.P, cands, rng, sample_targets)
        rep.absorb(check_characterization(wfp.algebra, targets))
    rep.data = dict(wfp.report.data)
    return WTypeResult(wfp.algebra, data, wfp, rep)


def coalgebras_over(S: SliceComonad, max_fiber: int):
    for X in small_families(S.world.index, max_fiber):
        yield from coalgebra_structures(S, X)


# ---------------------------------------------------------------------------
# building endopolynomials


def trivial_coalgebra(G: Comonad, X: Family) -> Coalgebra:
    """``X`` with the structure of the identity comonad."""
    return Coalgebra(G, X, SliceMap(X, G.functor(X), X.total.elements))


def lift_downstairs(G: Comonad, p: Polynomial, carrier: Callable[[FinSet], Coalgebra],
                    mapping: Callable[[FinFn, Coalgebra, Coalgebra], CoalgMap], name: str = "P") -> EndoPoly:
    """Transport an endopolynomial of finite sets along a coalgebra-valued functor."""
    if p.I != p.J:
        raise TypingMismatch("an endopolynomial needs I = J")
    I, A, B = carrier(p.I), carrier(p.A), carrier(p.B)
    return EndoPoly(G, I, A, B, mapping(p.h, A, I), mapping(p.g, A, B), mapping(p.f, B, I), name=name)


def constant_diagram(G: Comonad, C: FinCat, X: FinSet) -> Coalgebra:
    """``Delta X``: the constant ``C``-diagram, elements ``Pair(c, x)``."""
    fam = Family(FinSet(Pair(c, x) for c in C.objects for x in X), C.objects, lambda e: e[1])
    GX = G.functor(fam)

    def alpha(e):
        c, x = e[1], e[2]
        return Pair(c, FnTable((k, Pair(k, Pair(C.cod(k), x))) for k in C.out_arrows(c)))

    return Coalgebra(G, fam, SliceMap(fam, GX, alpha))


def constant_map(f: FinFn, src: Coalgebra, dst: Coalgebra) -> CoalgMap:
    return coalg_map(src, dst, lambda e: Pair(e[1], f(e[2])))


def diagram_coalgebra(G: Comonad, C: FinCat, sets: Mapping[str, Sequence[str]],
                      actions: Mapping[str, Mapping[str, str]]) -> Coalgebra:
    """A ``C``-diagram from named sets and arrow actions (identities implied).

    Elements are ``Pair(c, Atom(x))``.
    """
    def el(c, x):
        return Pair(c, Atom(x))

    fam = Family(FinSet(el(Atom(c), x) for c, xs in sets.items() for x in xs), C.objects, lambda e: e[1])
    act = {}
    for k in C.arrows:
        if k in (C.ident(c) for c in C.objects):
            continue
        table = actions.get(k.name)
        if table is None:
            raise TypingMismatch(f"no action given for arrow {k.name}")
        act[k] = {Atom(x): Atom(y) for x, y in table.items()}

    def apply(k, e):
        if k == C.ident(e[1]):
            return e
        return Pair(C.cod(k), act[k][e[2]])

    GX = G.functor(fam)
    alpha = SliceMap(fam, GX, lambda e: Pair(e[1], FnTable((k, Pair(k, apply(k, e))) for k in C.out_arrows(e[1]))))
    return Coalgebra(G, fam, alpha)


def diagram_map(src: Coalgebra, dst: Coalgebra, table: Mapping[str, str],
                by_object: Mapping[str, Mapping[str, str]] | None = None) -> CoalgMap:
    """A natural transformation given on element names, optionally with
    per-object tables that take precedence."""
    by_object = by_object or {}

    def component(e):
        local = by_object.get(e[1].name, {})
        name = e[2].name
        return Pair(e[1], Atom(local[name] if name in local else table[name]))

    return coalg_map(src, dst, component)


# ---------------------------------------------------------------------------
# the lemma on equalizers inducing pullbacks


@dataclass(frozen=True, eq=False)
class EqualizerSquare:
    """``u, v : Y -> Z``, ``f, g : B -> C``, ``p : Y -> B``, ``q : Z -> C``
    with ``q u = f p`` and ``q v = g p``."""

    u: FinFn
    v: FinFn
    f: FinFn
    g: FinFn
    p: FinFn
    q: FinFn

    def commutes(self) -> bool:
        return all(self.q(self.u(y)) == self.f(self.p(y)) and self.q(self.v(y)) == self.g(self.p(y))
                   for y in self.u.dom)


def check_equalizer_mono_lemma(sq: EqualizerSquare) -> CheckReport:
    """Reconstruct the pullback of ``p`` along ``A -> B`` and compare it with ``X``."""
    rep = CheckReport("equalizers induce a pullback", checked=1)
    if not sq.commutes():
        rep.fail("diagram commutes", sq)
        return rep
    rep.data["q_monic"] = is_mono(sq.q)
    X, x_in = equalizer(sq.u, sq.v)
    A, a_in = equalizer(sq.f, sq.g)
    induced = factor_through(FinFn(X, sq.p.cod, lambda x: sq.p(x)), a_in)
    if induced is None:
        rep.fail("p restricted to X lands in A", X)
        return rep
    Pb, pr1, pr2 = pullback(a_in, sq.p)
    comparison = FinFn(X, Pb, lambda x: Pair(induced(x), x))
    if not (len(X) == len(Pb) and is_mono(comparison)):
        missing = [pt for pt in Pb if pt[2] not in X]
        rep.fail("X -> A x_B Y is invertible", missing[0] if missing else X)
    rep.data.update({"X": len(X), "A": len(A), "pullback": len(Pb)})
    return rep


def random_equalizer_square(rng: random.Random, max_size: int = 4, monic: bool = True) -> EqualizerSquare:
    """A random commuting diagram; ``q`` is injective when ``monic``."""
    def fs(prefix, n):
        return FinSet(Atom(f"{prefix}{k}") for k in range(n))

    B = fs("b", rng.randint(0, max_size))
    C = fs("c", rng.randint(1, max_size))
    Y = fs("y", rng.randint(0, max_size)) if len(B) else fs("y", 0)
    f = FinFn(B, C, [rng.choice(C.elements) for _ in B])
    g = FinFn(B, C, [rng.choice(C.elements) if rng.random() < 0.5 else f(b) for b in B])
    p = FinFn(Y, B, [rng.choice(B.elements) for _ in Y])
    needed = sorted({f(p(y)) for y in Y} | {g(p(y)) for y in Y})
    if monic:
        extra = [c for c in C if c not in needed]
        keep = needed + rng.sample(extra, rng.randint(0, len(extra)))
        Z = fs("z", len(keep))
        q = FinFn(Z, C, keep)
        back = {c: z for z, c in q.items()}
        u = FinFn(Y, Z, [back[f(p(y))] for y in Y])
        v = FinFn(Y, Z, [back[g(p(y))] for y in Y])
    else:
        # every needed point gets one or two preimages
        zs, qimg = [], []
        for c in needed:
            for _ in range(rng.randint(1, 2)):
                zs.append(Atom(f"z{len(zs)}"))
                qimg.append(c)
        Z = FinSet(zs)
        q = FinFn(Z, C, dict(zip(zs, qimg)))
        pre = {}
        for z, c in q.items():
            pre.setdefault(c, []).append(z)
        u = FinFn(Y, Z, [rng.choice(pre[f(p(y))]) for y in Y])
        v = FinFn(Y, Z, [rng.choice(pre[g(p(y))]) for y in Y])
    return EqualizerSquare(u, v, f, g, p, q)


def search_lemma_counterexample(rng: random.Random, tries: int = 200, max_size: int = 4):
    """Look for a diagram with non-monic ``q`` where the conclusion fails."""
    for _ in range(tries):
        sq = random_equalizer_square(rng, max_size, monic=False)
        rep = check_equalizer_mono_lemma(sq)
        if not rep.ok:
            return sq, rep
    return None


# ---------------------------------------------------------------------------
# algebra comparisons


def structure_inverse(alg: Algebra) -> dict:
    world = alg.world
    return {alg.structure(y): y for y in world.carrier(alg.functor(alg.carrier)).total.elements}


def tree_canon(alg: Algebra, decode: Callable, link: Callable | None = None,
               extra: Callable | None = None) -> dict:
    """Every element of a well-founded fixed point as a nested tuple
    ``(label, ((slot, subtree), ...), tag)``.

    ``tag`` is the tree of ``link(w)`` (an element of the same algebra),
    else ``extra(w)``, else ``None``.
    """
    inv = structure_inverse(alg)
    memo: dict = {}

    def canon(w):
        if w not in memo:
            if w not in inv:
                raise LawViolation(f"{w!r} is not in the image of the structure map")
            label, kids = decode(inv[w])
            sub = tuple((a, canon(x)) for a, x in sorted(kids.items()))
            other = link(w) if link else None
            if other is not None:
                tag = canon(other)
            else:
                tag = extra(w) if extra else None
            memo[w] = (label, sub, tag)
        return memo[w]

    for w in alg.world.carrier(alg.carrier).total.elements:
        canon(w)
    return memo


def poly_decoder(y) -> tuple:
    return y[1], dict(y[2].entries)


def compare_canons(rep: CheckReport, law: str, left: dict, right: dict, expect=lambda t: t) -> None:
    """``left`` and ``right`` are injective and ``expect`` maps the image of
    ``left`` onto the image of ``right``."""
    rep.checked += 1
    for name, table in (("left", left), ("right", right)):
        seen = {}
        for w, t in table.items():
            if t in seen:
                rep.fail(f"{law}: {name} trees are distinct", (seen[t], w))
                return
            seen[t] = w
    want = {expect(t) for t in left.values()}
    have = set(right.values())
    if want != have:
        extra = sorted(have - want, key=repr)[:1] or sorted(want - have, key=repr)[:1]
        rep.fail(law, extra[0] if extra else None, f"sizes {len(want)} vs {len(have)}")


def compare_algebras(src: Algebra, dst: Algebra, chain: ChainResult | None = None,
                     enumerate_homs: bool = True) -> CheckReport:
    """Is there an algebra isomorphism ``src -> dst`` between algebras for one
    functor?  Uses the fold out of ``src`` when its chain is given and hom
    enumeration when within budget."""
    rep = CheckReport("algebra isomorphism")
    world = src.world
    if chain is not None:
        h = fold(chain, dst)
        rep.checked += 1
        w = algebra_morphism_witness(h, src, dst)
        if w is not None:
            rep.fail("fold is an algebra morphism", w)
        if not world.is_iso(h):
            rep.fail("fold is invertible", h)
    if enumerate_homs:
        try:
            found = algebra_morphisms(src, dst, limit=2)
        except BudgetExceeded as exc:
            rep.notes.append(f"hom enumeration skipped: {exc}")
        else:
            rep.checked += 1
            rep.data["morphisms"] = len(found)
            if len(found) != 1:
                rep.fail("exactly one algebra morphism", len(found))
            elif not world.is_iso(found[0]):
                rep.fail("the unique morphism is an isomorphism", found[0])
    return rep


def chain_objects(F: ExeFunctor, n: int) -> list:
    """``0, F 0, ..., F^n 0``."""
    X = F.src.initial()
    out = [X]
    for _ in range(n):
        X = F(X)
        out.append(X)
    return out


# ---------------------------------------------------------------------------
# independent oracle for internal diagrams: P computed by the pointwise formula


def diagram_action(X: Coalgebra, k, x):
    """The action of arrow ``k`` on ``x`` in a diagram or a diagram over a base."""
    y = X.structure(x)
    if isinstance(X.comonad, SliceComonad):
        y = y[2]
    return y[2].at(k)[2]


@dataclass(eq=False)
class DirectDiagramFunctor:
    """``P = f_! Pi_g h^*`` on diagrams over ``I``, with ``Pi_g`` given by
    natural families over representables rather than by an equalizer.

    An element over ``b`` in ``B(c)`` is ``Pair(b, {Pair(k, a): x})`` for
    arrows ``k : c -> d`` and ``a`` in ``A(d)`` with ``g a = B(k) b``.
    """

    data: CoreflexiveData
    functor: ExeFunctor = field(init=False)

    def __post_init__(self):
        ep = self.data.ep
        if getattr(ep.G, "kind", None) != "diagram":
            raise TypingMismatch("the direct oracle needs an internal diagram comonad")
        self.C = C = ep.G.category
        self.Bc = ep.B.carrier
        g = ep.g.map.map
        self.fib_g = {}
        for a in ep.A.carrier.total.elements:
            self.fib_g.setdefault(g(a), []).append(a)
        self._keys = {}
        for b in self.Bc.total.elements:
            c = self.Bc.proj(b)
            keys = [Pair(k, a) for k in C.out_arrows(c) for a in self.fib_g.get(diagram_action(ep.B, k, b), ())]
            self._keys[b] = tuple(keys)
        world = self.data.world
        self.functor = ExeFunctor(world, world, self._obj, lambda m, e: Pair(e[1], e[2].remap(m)),
                                  name="P_direct", preserves_pullbacks=True, provenance="composite")

    def _sections(self, X: Coalgebra, b) -> list:
        ep, C = self.data.ep, self.C
        uh = ep.h.map.map
        keys = self._keys[b]
        pos = {key: n for n, key in enumerate(keys)}
        constraints = {n: [] for n in range(len(keys))}
        for n, key in enumerate(keys):
            k, a = key[1], key[2]
            for j in C.out_arrows(C.cod(k)):
                m = pos[Pair(C.composite(j, k), diagram_action(ep.A, j, a))]
                constraints[max(n, m)].append((n, j, m))
        choices = [X.carrier.fiber(uh(key[2])) for key in keys]
        out, cur = [], [None] * len(keys)

        def go(n):
            if n == len(keys):
                out.append(Pair(b, FnTable(zip(keys, cur))))
                return
            for x in choices[n]:
                cur[n] = x
                if all(diagram_action(X, j, cur[p]) == cur[q] for p, j, q in constraints[n]):
                    go(n + 1)
            cur[n] = None

        go(0)
        return out

    def act(self, j, e):
        ep, C = self.data.ep, self.C
        b2 = diagram_action(ep.B, j, e[1])
        return Pair(b2, FnTable((key, e[2].at(Pair(C.composite(key[1], j), key[2]))) for key in self._keys[b2]))

    def _obj(self, X: Coalgebra) -> Coalgebra:
        ep = self.data.ep
        uf = ep.f.map.map
        elems = []
        for b in self.Bc.total.elements:
            elems.extend(self._sections(X, b))
            guard(len(elems), "direct pushforward")
        fam = Family(FinSet(elems), ep.I.carrier.total, lambda e: uf(e[1]))
        Gi = self.data.Gi
        GiX = Gi.functor(fam)
        C = self.C

        def alpha(e):
            c = self.Bc.proj(e[1])
            return Pair(uf(e[1]), Pair(c, FnTable((k, Pair(k, self.act(k, e))) for k in C.out_arrows(c))))

        return Coalgebra(Gi, fam, SliceMap(fam, GiX, alpha), check=True)

    def translate(self, X: Coalgebra, e):
        """The matching element of the pipeline's ``P X``."""
        ep, C = self.data.ep, self.C
        b, s = e[1], e[2]
        c = self.Bc.proj(b)
        entries = []
        for k in C.out_arrows(c):
            bk = diagram_action(ep.B, k, b)
            sec = FnTable((a, Pair(a, s.at(Pair(k, a)))) for a in self.fib_g.get(bk, ()))
            entries.append((k, Pair(k, Pair(bk, sec))))
        return Pair(b, Pair(c, FnTable(entries)))

    def translation(self, X: Coalgebra) -> CoalgMap:
        D, P = self.functor(X), self.data.P(X)
        return CoalgMap(D, P, SliceMap(D.carrier, P.carrier, lambda e: self.translate(X, e)), check=True)


def check_translation(direct: DirectDiagramFunctor, objects: Sequence[Coalgebra],
                      maps: Sequence[CoalgMap] = ()) -> CheckReport:
    """The pointwise ``P`` and the pipeline's ``P`` agree up to a natural isomorphism."""
    rep = CheckReport("pointwise P vs equalizer P")
    world = direct.data.world
    for X in objects:
        rep.checked += 1
        try:
            t = direct.translation(X)
        except (NotCoalgMorphism, TypingMismatch) as exc:
            rep.fail("translation is a coalgebra morphism", X, str(exc))
            continue
        if not world.is_iso(t):
            rep.fail("translation is invertible", X)
    for m in maps:
        rep.checked += 1
        t0, t1 = direct.translation(m.src), direct.translation(m.dst)
        Dm, Pm = direct.functor.map(m), direct.data.P.map(m)
        for e in t0.src.carrier.total.elements:
            if t1(Dm(e)) != Pm(t0(e)):
                rep.fail("translation is natural", e)
                break
    return rep


def cross_check(ep: EndoPoly, max_steps: int = 32, enumerate_homs: bool = True,
                stages: int = 3) -> tuple[CheckReport, WTypeResult, ChainResult]:
    """Pipeline W against the initial chain of the pointwise ``P`` in ``E_G``."""
    res = w_type(ep, max_steps)
    data = res.data
    rep = CheckReport("pipeline vs direct chain")
    rep.absorb(res.report)
    objs = chain_objects(data.P, stages) + [res.wfp.W0.carrier, res.wfp.W1.carrier]
    rep.absorb(check_coreflexive(data, objs))
    direct = DirectDiagramFunctor(data)
    chain = initial_algebra(direct.functor, max_steps)
    rep.data = {"pipeline_W": list(res.algebra.carrier.carrier.fiber_sizes()),
                "direct_trace": list(chain.trace)}
    if not chain.stabilized:
        rep.fail("direct chain stabilises", chain.trace)
        return rep, res, chain
    W = res.algebra.carrier
    rep.absorb(check_translation(direct, objs[:stages] + [W]))
    t = direct.translation(W)
    transported = Algebra(direct.functor, W, data.world.compose(res.algebra.structure, t))
    cmp = compare_algebras(chain.algebra, transported, chain, enumerate_homs)
    rep.absorb(cmp)
    rep.data.update({"direct_W": list(chain.W.carrier.fiber_sizes()), "direct_steps": chain.steps,
                     "morphisms": cmp.data.get("morphisms")})
    return rep, res, chain


# ---------------------------------------------------------------------------
# sets, constant diagrams and gluing data as endopolynomials


def finset_endopoly(p: Polynomial, G: Comonad | None = None) -> EndoPoly:
    """A polynomial of finite sets as an endopolynomial of coalgebras for the
    identity comonad on ``FinSet``."""
    from .engine import identity_comonad
    from .finset import TERMINAL
    from .slice import over_terminal

    G = G or identity_comonad(SliceWorld(TERMINAL))
    return lift_downstairs(G, p, lambda S: trivial_coalgebra(G, over_terminal(S)),
                           lambda f, src, dst: coalg_map(src, dst, f), name=p.name)


def diagonal_endopoly(p: Polynomial, C: FinCat, G: Comonad | None = None) -> EndoPoly:
    """``Delta p`` in ``C``-diagrams."""
    from .coalg import internal_diagram_comonad

    G = G or internal_diagram_comonad(C)
    return lift_downstairs(G, p, lambda S: constant_diagram(G, C, S), constant_map, name=f"D{p.name}")


@dataclass(frozen=True)
class GlueEndo:
    """An endopolynomial in the gluing category, given componentwise by names.

    ``iota``, ``alpha`` and ``beta`` send second-component elements to
    first-component elements; ``h``, ``g``, ``f`` are defined on both
    components.
    """

    I1: tuple
    I2: tuple
    iota: Mapping
    A1: tuple
    A2: tuple
    alpha: Mapping
    B1: tuple
    B2: tuple
    beta: Mapping
    h: Mapping
    g: Mapping
    f: Mapping
    name: str = "P"

    def first(self) -> Polynomial:
        """The first component, a polynomial on ``I1``."""
        I1, A1, B1 = (FinSet(Atom(x) for x in xs) for xs in (self.I1, self.A1, self.B1))

        def fn(dom, cod, table):
            return FinFn(dom, cod, {Atom(x): Atom(table[x]) for x in (d.name for d in dom)})

        return Polynomial(fn(A1, I1, self.h), fn(A1, B1, self.g), fn(B1, I1, self.f), name=f"{self.name}1")


def glue_endopoly(gd: GlueEndo, G: Comonad | None = None) -> EndoPoly:
    from .coalg import GlueSpec, glue_coalgebra, gluing_comonad

    G = G or gluing_comonad(GlueSpec("identity"))
    def link(v):
        if isinstance(v, Mapping):
            return {Atom(s): Atom(x) for s, x in v.items()}
        return Atom(v)

    def obj(X1, X2, k):
        if len(set(X1) | set(X2)) != len(X1) + len(X2):
            raise TypingMismatch("component names must be distinct")
        return glue_coalgebra(G, [Atom(x) for x in X1], [Atom(x) for x in X2],
                              {Atom(x): link(k[x]) for x in X2})

    I, A, B = obj(gd.I1, gd.I2, gd.iota), obj(gd.A1, gd.A2, gd.alpha), obj(gd.B1, gd.B2, gd.beta)

    def m(src, dst, table):
        return coalg_map(src, dst, lambda e: Atom(table[e.name]))

    return EndoPoly(G, I, A, B, m(A, I, gd.h), m(A, B, gd.g), m(B, I, gd.f), name=gd.name)


def glue_second_stage(gd: GlueEndo) -> TwoArgFunctor:
    """The second component of the staged construction for ``H = identity``.

    Over a first-stage algebra ``K`` the second component lives over
    ``L = I2 x_{I1} K``; a node over ``b2`` picks a first-stage node
    ``sec`` over ``beta b2`` and a child over ``(h a2, sec(alpha a2))``
    for every ``a2`` above ``b2``.
    """
    p1 = gd.first()
    F1 = eval_poly(p1)
    iota = {Atom(x): Atom(y) for x, y in gd.iota.items()}
    alpha = {Atom(x): Atom(y) for x, y in gd.alpha.items()}
    beta = {Atom(x): Atom(y) for x, y in gd.beta.items()}
    h, g, f = ({Atom(x): Atom(y) for x, y in t.items()} for t in (gd.h, gd.g, gd.f))
    I2, A2, B2 = ([Atom(x) for x in xs] for xs in (gd.I2, gd.A2, gd.B2))

    def base(K: Algebra) -> FinSet:
        W = K.carrier
        return FinSet(Pair(i2, k) for i2 in I2 for k in W.fiber(iota[i2]))

    def at(K: Algebra) -> ExeFunctor:
        L = base(K)
        P1K = F1(K.carrier).total.elements
        Bp = [Pair(b2, sec) for b2 in B2 for sec in P1K if sec[1] == beta[b2]]
        Ap = [Pair(a2, bp) for bp in Bp for a2 in A2 if g[a2] == bp[1]]
        Bs, As = FinSet(Bp), FinSet(Ap)
        hp = FinFn(As, L, lambda ap: Pair(h[ap[1]], ap[2][2][2].at(alpha[ap[1]])))
        gp = FinFn(As, Bs, lambda ap: ap[2])
        fp = FinFn(Bs, L, lambda bp: Pair(f[bp[1]], K.structure(bp[2])))
        return eval_poly(Polynomial(hp, gp, fp, name=f"{gd.name}2"))

    def elem(h1, h2, y):
        b2, sec = y[1][1], y[1][2]
        bp = Pair(b2, Pair(sec[1], sec[2].remap(h1)))
        return Pair(bp, FnTable((Pair(ap[1], bp), h2(x)) for ap, x in y[2].entries))

    def over_maps(h1, X: Family, Y: Family):
        cands = []
        for x in X.total.elements:
            i2, k = X.proj(x)[1], X.proj(x)[2]
            cands.append(Y.fiber(Pair(i2, h1(k))))
        guard(functools.reduce(lambda n, c: n * len(c), cands, 1), "second-stage maps")
        for choice in itertools.product(*cands):
            yield FinFn(X.total, Y.total, choice)

    F2 = TwoArgFunctor(at, elem, over_maps, name=f"{gd.name}2")
    F2.first = F1
    return F2


def staged_w_type(gd: GlueEndo, max_steps: int = 32):
    F2 = glue_second_stage(gd)
    return staged_initial_algebra(F2.first, F2, max_steps)


def staged_canons(res) -> tuple[dict, dict]:
    c1 = tree_canon(res.first.algebra, poly_decoder)
    W2 = res.second.algebra.carrier

    def dec2(y):
        return y[1][1], {ap[1]: x for ap, x in y[2].entries}

    c2 = tree_canon(res.second.algebra, dec2, extra=lambda w: c1[W2.proj(w)[2]])
    return c1, c2


def pipeline_glue_canons(res: WTypeResult) -> tuple[dict, dict]:
    """Trees of the pipeline's W split by component; second-component trees
    carry the tree of their linked first-component element."""
    from .coalg import glue_arrow

    data, alg = res.data, res.algebra
    W = alg.carrier
    Y, _ = data.Gi.to_over(W)
    links = {x: next(iter(v.values())) for x, v in glue_arrow(Y).items() if v}
    canon = tree_canon(alg, lambda y: data.decode(W, y), link=links.get)
    comp = data.ep.I.carrier.proj
    c1 = {w: t for w, t in canon.items() if comp(W.carrier.proj(w)) == E1}
    c2 = {w: t for w, t in canon.items() if comp(W.carrier.proj(w)) == E2}
    return c1, c2


def sample_pair_targets(staged, count: int, seed: int = 0, max_fiber: int = 2) -> list:
    """Pairs ``(Y1, Y2)`` of a first-stage algebra and a second-stage algebra over it."""
    rng = random.Random(seed)
    F2 = staged.F2
    F1 = F2.first
    firsts = sample_algebras(F1, small_families(F1.src.index, max_fiber, "y"), rng, 4 * count)
    out = []
    for Y1 in firsts:
        if len(out) >= count:
            break
        F = F2.at(Y1)
        seconds = sample_algebras(F, small_families(F.src.index, 1, "z"), rng, 1)
        if seconds:
            out.append((Y1, seconds[0]))
    return out


def glue_cross_check(gd: GlueEndo, max_steps: int = 32, targets: int = 5, seed: int = 0) -> CheckReport:
    """Pipeline W for a gluing endopolynomial against the staged construction."""
    from .polynomial import check_staged_initiality

    res = w_type(glue_endopoly(gd), max_steps)
    rep = CheckReport("pipeline vs staged construction")
    rep.absorb(res.report)
    staged = staged_w_type(gd, max_steps)
    if not staged.stabilized:
        rep.fail("staged chains stabilise", staged.first.trace)
        return rep
    s1, s2 = staged_canons(staged)
    p1, p2 = pipeline_glue_canons(res)
    compare_canons(rep, "first components agree", s1, p1)
    compare_canons(rep, "second components agree", s2, p2)
    tg = sample_pair_targets(staged, targets, seed)
    if len(tg) < targets:
        rep.notes.append(f"only {len(tg)} sample targets found")
    ini = check_staged_initiality(staged, tg)
    rep.absorb(ini)
    rep.data = {"pipeline_W": list(res.algebra.carrier.carrier.fiber_sizes()),
                "staged_W1": len(staged.first.W), "staged_W2": len(staged.second.W),
                "targets": len(tg), "pair_morphisms": ini.data.get("counts", [])}
    return rep


# ---------------------------------------------------------------------------
# preservation of W-types


def _wrap_tree(c, t):
    return (Pair(c, t[0]), tuple((Pair(c, a), _wrap_tree(c, sub)) for a, sub in t[1]), None)


def check_preservation(kind: str, p: Polynomial | GlueEndo, max_steps: int = 32,
                       C: FinCat | None = None) -> CheckReport:
    """Compare ``H`` applied to a downstairs W with the W computed in the
    target world for the image polynomial.

    ``identity``: ``H = 1`` on finite sets, ``p`` a polynomial.
    ``diagonal``: ``H = Delta`` into ``C``-diagrams, ``p`` a polynomial.
    ``first``: ``H = pi_1`` out of gluing, ``p`` a :class:`GlueEndo`; the
    downstairs side is the W of the first component.
    """
    rep = CheckReport(f"preservation of W-types by {kind}")
    q = p.first() if kind == "first" else p
    down = initial_algebra(eval_poly(q), max_steps)
    if not down.stabilized:
        rep.fail("downstairs chain stabilises", down.trace)
        return rep
    canon = tree_canon(down.algebra, poly_decoder)
    if kind == "identity":
        res = w_type(finset_endopoly(q), max_steps)
        target = tree_canon(res.algebra, lambda y: res.data.decode(res.algebra.carrier, y))
        compare_canons(rep, "H(W) matches W in the target", canon, target)
    elif kind == "diagonal":
        if C is None:
            raise TypingMismatch("diagonal preservation needs a finite category")
        res = w_type(diagonal_endopoly(q, C), max_steps)
        X = res.algebra.carrier
        target = tree_canon(res.algebra, lambda y: res.data.decode(X, y))
        copies = {Pair(c, w): _wrap_tree(c, t) for c in C.objects for w, t in canon.items()}
        compare_canons(rep, "Delta W matches W in diagrams", copies, target)
        rep.checked += 1
        for w, t in target.items():
            c = t[0][1]
            for k in C.out_arrows(c):
                d = C.cod(k)
                moved = target[diagram_action(X, k, w)]
                if moved[0][2] != t[0][2] or moved[0][1] != d:
                    rep.fail("arrows act as on a constant diagram", (k, w))
                    break
    elif kind == "first":
        res = w_type(glue_endopoly(p), max_steps)
        c1, _ = pipeline_glue_canons(res)
        compare_canons(rep, "first component of W matches W of the first component", canon, c1)
    else:
        raise TypingMismatch(f"unknown preservation functor {kind!r}")
    rep.data = {"downstairs_W": list(down.W.fiber_sizes()),
                "target_W": list(res.algebra.carrier.carrier.fiber_sizes())}
    return rep


# ---------------------------------------------------------------------------
# natural numbers: chains that never stabilise


def nno_polynomial() -> Polynomial:
    """``X |-> 1 + X``: one nullary and one unary constructor over a point."""
    one = FinSet([Atom("*")])
    A = FinSet([Atom("s")])
    B = FinSet([Atom("zero"), Atom("succ")])
    return Polynomial(FinFn(A, one, lambda a: Atom("*")), FinFn(A, B, lambda a: Atom("succ")),
                      FinFn(B, one, lambda b: Atom("*")), name="N")


def check_nno(max_steps: int = 6, C: FinCat | None = None) -> CheckReport:
    """The chain of ``1 + X`` grows by one element per step, downstairs and
    lifted, and the W-type computation reports non-stabilisation."""
    rep = CheckReport("natural numbers do not stabilise")
    p = nno_polynomial()
    expected = list(range(max_steps + 1))
    down = initial_algebra(eval_poly(p), max_steps)
    rep.checked += 1
    if down.stabilized or list(down.trace) != expected:
        rep.fail("downstairs trace is 0, 1, 2, ...", down.trace)
    worlds = [("sets", finset_endopoly(p), 1)]
    if C is not None:
        worlds.append(("diagrams", diagonal_endopoly(p, C), len(C.objects)))
    traces = {"downstairs": list(down.trace)}
    for label, ep, copies in worlds:
        data = build_coreflexive(ep)
        lifted = initial_algebra(data.P, max_steps)
        under = initial_algebra(eval_poly(ep.downstairs()), max_steps)
        traces[f"{label}/P"] = list(lifted.trace)
        rep.checked += 1
        if lifted.stabilized or list(lifted.trace) != list(under.trace):
            rep.fail(f"{label}: lifted trace equals downstairs trace", (lifted.trace, under.trace))
        if list(lifted.trace) != [copies * n for n in expected]:
            rep.fail(f"{label}: one new element per step in each copy", lifted.trace)
        for n, fibers in enumerate(lifted.fiber_trace):
            if any(k != n for k in fibers):
                rep.fail(f"{label}: every fibre has size n at stage n", (n, fibers))
                break
        for which, (Q, Pk) in enumerate(((data.Q0, data.P0), (data.Q1, data.P1))):
            rep.checked += 1
            try:
                lo_trace, lo_done = initial_algebra(Q, max_steps).trace, None
            except BudgetExceeded as exc:
                lo_trace, lo_done = tuple(getattr(exc, "trace", ())), exc
                rep.notes.append(f"{label}: Q{which} stopped by the element budget "
                                 f"after {len(lo_trace)} stages")
            n = lifted_steps(lo_trace, max_steps)
            up = initial_algebra(Pk, n)
            traces[f"{label}/Q{which}"] = list(lo_trace)
            traces[f"{label}/P{which}"] = list(up.trace)
            grew = all(a < b for a, b in zip(lo_trace, lo_trace[1:]))
            if not grew or list(lo_trace[:n + 1]) != list(up.trace):
                rep.fail(f"{label}: P{which} and Q{which} traces agree", (lo_trace, up.trace))
            if lo_done is None and len(lo_trace) < max_steps + 1:
                rep.fail(f"{label}: Q{which} does not stabilise", lo_trace)
        rep.checked += 1
        try:
            w_type(ep, max_steps)
        except Exceeded as exc:
            traces[f"{label}/exceeded"] = {k: list(v) for k, v in exc.traces.items()}
        else:
            rep.fail(f"{label}: W-type reports Exceeded", ep.name)
    rep.data = {"traces": traces}
    return rep
