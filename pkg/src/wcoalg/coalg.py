"""Cartesian comonads on slices of finite sets and their coalgebra categories.

Two concrete families are provided:

* internal diagrams: for a finite category ``C`` the comonad
  ``pi_along(dom) . pullback_along(cod)`` on ``FinSet/C0``, whose coalgebras
  are the functors ``C -> FinSet``;
* gluing: ``(X1, X2) |-> (X1, H X1 x X2)`` for ``H = (-)^S``.  Pairs of
  finite sets are encoded as families over the two-point index
  ``{E1, E2}``; the two descriptions are equivalent because finite sets
  form an extensive category.

Objects of a coalgebra slice ``E_G/(A, a)`` are represented as coalgebras
for the slice comonad ``G_a`` on ``FinSet/A.total`` (see
:class:`SliceComonad` for the identification).
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .engine import (
    CheckReport,
    Coalgebra,
    CoalgMap,
    CoalgWorld,
    Comonad,
    ExeFunctor,
    ExeNat,
    SliceWorld,
    check_comonad_laws,
    coalgebra_law_witness,
    cofree,
    compose_functors,
    created_limit,
    is_coalg_morphism,
    limit_lookup,
)
from .errors import NotCoalgMorphism, TypingMismatch, ValidationError
from .finset import Atom, FinFn, FinSet, FnTable, Pair, TERMINAL, UNIT, guard
from .polynomial import Polynomial, eval_poly
from .slice import (
    Family,
    SliceMap,
    compose_maps,
    identity_map,
    iter_hom_slice,
    over_base,
    pi_along,
    pi_elem,
    pullback_along,
    sigma_along,
    slice_coproduct,
    slice_equalizer,
    slice_product,
    slice_pullback,
    terminal_family,
)

# ---------------------------------------------------------------------------
# finite categories


class FinCat:
    """A finite category; ``comp[(g, f)] = g . f`` for every composable pair."""

    def __init__(self, objects: FinSet, arrows: FinSet, dom: FinFn, cod: FinFn,
                 ident: FinFn, comp: Mapping, name: str = "C"):
        self.objects = objects
        self.arrows = arrows
        self.dom = dom
        self.cod = cod
        self.ident = ident
        self.comp = dict(comp)
        self.name = name
        self.validate()
        out = {c: [] for c in objects}
        for k in arrows:
            out[dom(k)].append(k)
        self._out = {c: tuple(ks) for c, ks in out.items()}

    def out_arrows(self, c) -> tuple:
        return self._out[c]

    def composite(self, g, f):
        return self.comp[(g, f)]

    def validate(self) -> None:
        dom, cod, ident, comp = self.dom, self.cod, self.ident, self.comp
        for c in self.objects:
            i = ident(c)
            if dom(i) != c or cod(i) != c:
                raise ValidationError(f"identity of {c!r} has the wrong type", "identity typing", c)
        for (g, f), gf in comp.items():
            if cod(f) != dom(g) or dom(gf) != dom(f) or cod(gf) != cod(g):
                raise ValidationError(f"composite {g!r} . {f!r} = {gf!r} is ill-typed",
                                      "composite typing", (g, f, gf))
        for f in self.arrows:
            for g in self.arrows:
                if cod(f) == dom(g) and (g, f) not in comp:
                    raise ValidationError(f"missing composite {g!r} . {f!r}",
                                          "composition is total", (g, f))
        for f in self.arrows:
            if comp[(ident(cod(f)), f)] != f or comp[(f, ident(dom(f)))] != f:
                raise ValidationError(f"identity law fails at {f!r}", "identity law",
                                      (ident(cod(f)), f, comp[(ident(cod(f)), f)]))
        for f in self.arrows:
            for g in self.arrows:
                if cod(f) != dom(g):
                    continue
                for h in self.arrows:
                    if cod(g) != dom(h):
                        continue
                    if comp[(h, comp[(g, f)])] != comp[(comp[(h, g)], f)]:
                        raise ValidationError(f"associativity fails at {h!r}, {g!r}, {f!r}",
                                              "associativity", (h, g, f))

    @classmethod
    def build(cls, objects: Sequence[str], arrows: Mapping[str, tuple[str, str]],
              identities: Mapping[str, str] | None = None,
              compose: Iterable[tuple[str, str, str]] = (), name: str = "C") -> "FinCat":
        """From names.  Composites involving identities are filled in."""
        objs = FinSet(Atom(o) for o in objects)
        arr_types = {Atom(k): (Atom(d), Atom(c)) for k, (d, c) in arrows.items()}
        identities = dict(identities or {})
        for o in objects:
            if o not in identities:
                ident_name = f"id_{o}"
                identities[o] = ident_name
                arr_types.setdefault(Atom(ident_name), (Atom(o), Atom(o)))
        for k, (d, c) in arr_types.items():
            if d not in objs or c not in objs:
                raise ValidationError(f"arrow {k.name} has an unknown endpoint", "arrow typing", k)
        arrs = FinSet(arr_types)
        dom = FinFn(arrs, objs, {k: t[0] for k, t in arr_types.items()})
        cod = FinFn(arrs, objs, {k: t[1] for k, t in arr_types.items()})
        ident = FinFn(objs, arrs, {Atom(o): Atom(i) for o, i in identities.items()})
        comp = {}
        for g, f, gf in compose:
            key = (Atom(g), Atom(f))
            if key in comp and comp[key] != Atom(gf):
                raise ValidationError(f"two composites given for {g} . {f}", "composite uniqueness",
                                      (g, f, gf))
            comp[key] = Atom(gf)
        for f in arrs:
            comp.setdefault((ident(cod(f)), f), f)
            comp.setdefault((f, ident(dom(f))), f)
        return cls(objs, arrs, dom, cod, ident, comp, name=name)


def discrete_category(names: Sequence[str]) -> FinCat:
    return FinCat.build(names, {}, name="discrete")


def interval_category() -> FinCat:
    """``0 -> 1``."""
    return FinCat.build(["0", "1"], {"u": ("0", "1")}, name="interval")


def internal_diagram_comonad(C: FinCat, check: bool = True) -> Comonad:
    """``G = pi_along(dom) . pullback_along(cod)`` on ``FinSet/C0``.

    An element of ``G X`` over ``c`` is ``Pair(c, {k: Pair(k, x)})`` choosing
    ``x`` over ``cod k`` for every arrow ``k`` out of ``c``.
    """
    world = SliceWorld(C.objects)
    dom, cod = C.dom, C.cod

    def obj(X: Family) -> Family:
        return pi_along(dom, pullback_along(cod, X))

    def elem(m, y):
        return Pair(y[1], FnTable((k, Pair(k, m(kx[2]))) for k, kx in y[2].entries))

    def decode(y):
        return y[1], {k: kx[2] for k, kx in y[2].entries}

    G = ExeFunctor(world, world, obj, elem, name="G_" + C.name, preserves_pullbacks=True,
                   provenance="polynomial", decode=decode)
    GG = compose_functors(G, G)

    def eps(X, y):
        return y[2].at(C.ident(y[1]))[2]

    def delta(X, y):
        c, sec = y[1], y[2]
        entries = []
        for k in C.out_arrows(c):
            d = cod(k)
            inner = FnTable((l, Pair(l, sec.at(C.composite(l, k))[2])) for l in C.out_arrows(d))
            entries.append((k, Pair(k, Pair(d, inner))))
        return Pair(c, FnTable(entries))

    from .engine import identity_functor

    comonad = Comonad(G, ExeNat(G, identity_functor(world), eps, name="eps"),
                      ExeNat(G, GG, delta, name="delta"), name="G_" + C.name)
    comonad.kind = "diagram"
    comonad.category = C
    if check:
        samples = [terminal_family(C.objects),
                   Family.from_fibers(C.objects, {c: [Pair(c, Atom(t)) for t in "ab"] for c in C.objects})]
        rep = check_comonad_laws(comonad, samples)
        if not rep.ok:
            raise ValidationError("internal diagram comonad fails its laws",
                                  rep.violations[0].law, rep.violations[0].witness)
    return comonad


# ---------------------------------------------------------------------------
# gluing


E1, E2 = Atom("E1"), Atom("E2")
GLUE_INDEX = FinSet([E1, E2])
_B1, _B2, _X = Atom("b1"), Atom("b2"), Atom("x")


@dataclass(frozen=True)
class GlueSpec:
    """A cartesian functor ``H = (-)^S`` from a fixed catalog.

    ``kind`` is ``identity`` (``S = {*}``), ``power`` (``S = {0..k-1}``),
    ``exp_from`` (``S = K``) or ``constant_terminal`` (``S`` empty).
    """

    kind: str = "identity"
    k: int = 0
    K: tuple = ()

    def exponent(self) -> tuple:
        if self.kind == "identity":
            return (Atom("*"),)
        if self.kind == "power":
            if self.k < 0:
                raise ValidationError("power needs k >= 0", "catalog", self.k)
            return tuple(Atom(str(n)) for n in range(self.k))
        if self.kind == "exp_from":
            return tuple(Atom(str(n)) for n in self.K)
        if self.kind == "constant_terminal":
            return ()
        raise ValidationError(f"unknown cartesian functor {self.kind!r}", "catalog", self.kind)


def glue_pair(X1: Iterable, X2: Iterable) -> Family:
    """The pair ``(X1, X2)`` as a family over ``{E1, E2}``."""
    return Family.from_fibers(GLUE_INDEX, {E1: list(X1), E2: list(X2)})


def glue_split(X: Family) -> tuple[tuple, tuple]:
    return X.fiber(E1), X.fiber(E2)


def glue_polynomial(spec: GlueSpec) -> Polynomial:
    S = spec.exponent()
    slots = {Pair(_B1, _X): E1, Pair(_B2, _X): E2}
    for s in S:
        slots[Pair(_B2, Pair(Atom("h"), s))] = E1
    A = FinSet(slots)
    B = FinSet([_B1, _B2])
    return Polynomial(FinFn(A, GLUE_INDEX, slots), FinFn(A, B, lambda a: a[1]),
                      FinFn(B, GLUE_INDEX, {_B1: E1, _B2: E2}), name="Glue")


def gluing_comonad(spec: GlueSpec, check: bool = True) -> Comonad:
    """``(X1, X2) |-> (X1, H X1 x X2)`` as a polynomial comonad on ``FinSet/{E1, E2}``."""
    from .engine import identity_functor

    p = glue_polynomial(spec)
    G = eval_poly(p, name=f"Glue[{spec.kind}]")
    world = G.src
    GG = compose_functors(G, G)
    S = spec.exponent()
    x1, x2 = Pair(_B1, _X), Pair(_B2, _X)

    def eps(X, y):
        return y[2].at(x1 if y[1] == _B1 else x2)

    def delta(X, y):
        if y[1] == _B1:
            return Pair(_B1, FnTable([(x1, y)]))
        entries = [(x2, y)]
        for s in S:
            slot = Pair(_B2, Pair(Atom("h"), s))
            entries.append((slot, Pair(_B1, FnTable([(x1, y[2].at(slot))]))))
        return Pair(_B2, FnTable(entries))

    comonad = Comonad(G, ExeNat(G, identity_functor(world), eps, name="eps"),
                      ExeNat(G, GG, delta, name="delta"), name=f"Glue[{spec.kind}]")
    comonad.glue_spec = spec
    comonad.kind = "gluing"
    if check:
        rep = check_comonad_laws(comonad, [terminal_family(GLUE_INDEX), glue_pair(
            [Atom("p"), Atom("q")], [Atom("r")])])
        if not rep.ok:
            raise ValidationError("gluing comonad fails its laws", rep.violations[0].law,
                                  rep.violations[0].witness)
    return comonad


def glue_coalgebra(G: Comonad, X1: Sequence, X2: Sequence, k: Mapping) -> Coalgebra:
    """The coalgebra for a map ``k : X2 -> X1^S`` given as ``k[x2] = {s: x1}``
    (for ``identity`` a plain ``k[x2] = x1`` is accepted)."""
    S = G.glue_spec.exponent()
    X = glue_pair(X1, X2)
    GX = G.functor(X)

    def alpha(x):
        if X.proj(x) == E1:
            return Pair(_B1, FnTable([(Pair(_B1, _X), x)]))
        img = k[x]
        if not isinstance(img, Mapping):
            img = {S[0]: img}
        entries = [(Pair(_B2, _X), x)] + [(Pair(_B2, Pair(Atom("h"), s)), img[s]) for s in S]
        return Pair(_B2, FnTable(entries))

    return Coalgebra(G, X, SliceMap(X, GX, alpha))


def glue_arrow(A: Coalgebra) -> dict:
    """``x2 |-> {s: x1}`` read off a gluing coalgebra."""
    out = {}
    for x in A.carrier.fiber(E2):
        y = A.structure(x)
        out[x] = {slot[2][2]: v for slot, v in y[2].entries if slot != Pair(_B2, _X)}
    return out


# ---------------------------------------------------------------------------
# created limits and colimits


def coalg_product(A: Coalgebra, B: Coalgebra):
    P, p1, p2 = slice_product(A.carrier, B.carrier)
    C = created_limit(A.comonad, P, [p1, p2], [A, B])
    return C, CoalgMap(C, A, p1, check=False), CoalgMap(C, B, p2, check=False)


def coalg_pullback(f: CoalgMap, g: CoalgMap):
    P, p1, p2 = slice_pullback(f.map, g.map)
    C = created_limit(f.src.comonad, P, [p1, p2], [f.src, g.src])
    return C, CoalgMap(C, f.src, p1, check=False), CoalgMap(C, g.src, p2, check=False)


def coalg_equalizer(f: CoalgMap, g: CoalgMap):
    return f.src.comonad.coalgebras.equalizer(f, g)


def coalg_terminal(G: Comonad) -> Coalgebra:
    return G.coalgebras.terminal()


def coalg_coproduct(A: Coalgebra, B: Coalgebra):
    """Created coproduct: ``inl(x) |-> G(inl)(a(x))``."""
    G = A.comonad
    S, il, ir = slice_coproduct(A.carrier, B.carrier)
    Gf = G.functor
    GS = Gf(S)

    def structure(t):
        return Gf.elem(il, A.structure(t[2])) if t[1] == 0 else Gf.elem(ir, B.structure(t[2]))

    C = Coalgebra(G, S, SliceMap(S, GS, structure, check=False), check=False)
    return C, CoalgMap(A, C, il, check=False), CoalgMap(B, C, ir, check=False)


def check_one_plus_one_disjoint(G: Comonad) -> CheckReport:
    """``1 + 1`` in coalgebras: injections monic, their created pullback empty."""
    rep = CheckReport(f"1+1 disjoint in coalgebras for {G.name}")
    T = coalg_terminal(G)
    bad = coalgebra_law_witness(T)
    if bad is not None:
        rep.fail("terminal coalgebra laws", bad)
    S, il, ir = coalg_coproduct(T, T)
    bad = coalgebra_law_witness(S)
    if bad is not None:
        rep.fail("coproduct coalgebra laws", bad)
    for inj, name in ((il, "inl"), (ir, "inr")):
        rep.checked += 1
        if not is_coalg_morphism(inj.src, inj.dst, inj.map):
            rep.fail(f"{name} is a coalgebra morphism", inj)
        if not G.coalgebras.is_mono(inj):
            rep.fail(f"{name} is monic", inj)
    P, _, _ = coalg_pullback(il, ir)
    rep.checked += 1
    if len(P.carrier):
        rep.fail("pullback of the injections is empty", P.carrier.total.elements[0])
    rep.data = {"coproduct_size": len(S.carrier), "terminal_size": len(T.carrier)}
    return rep


# ---------------------------------------------------------------------------
# enumeration of coalgebras


def coalgebra_structures(G: Comonad, X: Family) -> Iterator[Coalgebra]:
    """Every coalgebra structure on ``X``, found by fibrewise search.

    Candidates for ``a(x)`` are restricted by the counit law first; the
    coassociativity law is checked on complete assignments.
    """
    GX = G.functor(X)
    eps = G.counit.component(X)
    cands = []
    for x in X.total.elements:
        cs = [y for y in GX.fiber(X.proj(x)) if eps(y) == x]
        cands.append(cs)
    guard(max(1, _prod(len(c) for c in cands)), "coalgebra structure search")
    for choice in itertools.product(*cands):
        alpha = SliceMap(X, GX, choice, check=False)
        A = Coalgebra(G, X, alpha, check=False)
        if coalgebra_law_witness(A) is None:
            yield A


def _prod(xs) -> int:
    out = 1
    for x in xs:
        out *= x
    return out


def small_families(index: FinSet, max_fiber: int, prefix: str = "x") -> Iterator[Family]:
    """Every family with fibres of size ``0..max_fiber`` (atoms named by position)."""
    for sizes in itertools.product(range(max_fiber + 1), repeat=len(index)):
        yield family_of_sizes(index, sizes, prefix)


def family_of_sizes(index: FinSet, sizes: Sequence[int], prefix: str = "x") -> Family:
    fibers = {}
    for n, (i, k) in enumerate(zip(index.elements, sizes)):
        fibers[i] = [Atom(f"{prefix}{n}_{j}") for j in range(k)]
    return Family.from_fibers(index, fibers)


# ---------------------------------------------------------------------------
# slice comonads


class SliceComonad(Comonad):
    """``G_a = a^* . G/A`` on ``FinSet/A.total`` for a coalgebra ``(A, a)``.

    An element of ``G_a X`` is ``Pair(a, y)`` with ``y`` in ``G(X over A)``
    and ``G(proj)(y) = a(a)``.  Coalgebras for ``G_a`` are identified with
    coalgebras over ``(A, a)`` by :meth:`to_over` / :meth:`from_over`.
    """

    def __init__(self, base: Comonad, A: Coalgebra):
        if A.comonad is not base:
            raise TypingMismatch("A must be a coalgebra for the base comonad")
        self.base = base
        self.over = A
        Gf = base.functor
        K = A.carrier
        alpha = A.structure
        world = SliceWorld(K.total)
        self._lookups: dict = {}

        def obj(X: Family) -> Family:
            Xb = over_base(X, K)
            p = SliceMap(Xb, K, X.proj, check=False)
            GXb = Gf(Xb)
            by_image = defaultdict(list)
            for y in GXb.total.elements:
                by_image[Gf.elem(p, y)].append(y)
            elems = [Pair(a, y) for a in K.total.elements for y in by_image.get(alpha(a), ())]
            guard(len(elems), "slice comonad")
            return Family(FinSet(elems), K.total, lambda e: e[1])

        based: dict = {}

        def elem(m, e):
            hit = based.get(id(m))
            if hit is None or hit[0] is not m:
                if len(based) > 256:
                    based.clear()
                hit = based[id(m)] = (m, SliceMap(over_base(m.src, K), over_base(m.dst, K), m.map, check=False))
            return Pair(e[1], Gf.elem(hit[1], e[2]))

        functor = ExeFunctor(world, world, obj, elem, name=f"{base.name}_a",
                             preserves_pullbacks=Gf.preserves_pullbacks,
                             preserves_monos=Gf.preserves_monos, provenance="comonad")
        from .engine import identity_functor

        counit = ExeNat(functor, identity_functor(world),
                        lambda X, e: base.counit.elem(over_base(X, K), e[2]), name="eps_a")
        comult = ExeNat(functor, compose_functors(functor, functor), self._delta, name="delta_a")
        super().__init__(functor, counit, comult, name=f"{base.name}/{len(K)}")

    def _lookup(self, X: Family):
        """Inverse of ``G(G_a X over A) -> G A x_{G G A} G G(X over A)``."""
        if X not in self._lookups:
            K = self.over.carrier
            GaX = self.functor(X)
            L = over_base(GaX, K)
            Xb = over_base(X, K)
            legs = [SliceMap(L, K, GaX.proj, check=False),
                    SliceMap(L, self.base.functor(Xb), lambda e: e[2], check=False)]
            if len(self._lookups) > 256:
                self._lookups.clear()
            self._lookups[X] = limit_lookup(self.base.functor, L, legs)
        return self._lookups[X]

    def _delta(self, X: Family, e):
        a, y = e[1], e[2]
        K = self.over.carrier
        d = self.base.comult.elem(over_base(X, K), y)
        z = self._lookup(X)(K.proj(a), [self.over.structure(a), d])
        return Pair(a, z)

    # identification with coalgebras over (A, a)

    def to_over(self, X: Coalgebra) -> tuple[Coalgebra, CoalgMap]:
        K = self.over.carrier
        Xb = over_base(X.carrier, K)
        Gf = self.base.functor
        structure = SliceMap(Xb, Gf(Xb), tuple(X.structure(x)[2] for x in Xb.total.elements),
                             check=False)
        Y = Coalgebra(self.base, Xb, structure, check=False)
        return Y, CoalgMap(Y, self.over, SliceMap(Xb, K, X.carrier.proj, check=False), check=False)

    def from_over(self, Y: Coalgebra, m: CoalgMap) -> Coalgebra:
        if m.dst != self.over or m.src != Y:
            raise TypingMismatch("expected a coalgebra morphism into the base coalgebra")
        X = Family(Y.carrier.total, self.over.carrier.total, m.map.map)
        GX = self.functor(X)
        structure = SliceMap(X, GX, tuple(Pair(m(y), Y.structure(y)) for y in X.total.elements),
                             check=False)
        return Coalgebra(self, X, structure, check=False)


def slice_comonad(G: Comonad, A: Coalgebra) -> SliceComonad:
    return SliceComonad(G, A)


# ---------------------------------------------------------------------------
# change of base between coalgebra slices


def _base_map(f: CoalgMap) -> FinFn:
    return f.map.map


class BaseChange:
    """``f_! -| f^* -| Pi^{E_G}_f`` for a coalgebra morphism ``f : (A, a) -> (B, b)``.

    ``Ga``/``Gb`` are the slice comonads; objects on either side are their
    coalgebras.
    """

    def __init__(self, f: CoalgMap, Ga: SliceComonad | None = None, Gb: SliceComonad | None = None):
        if not is_coalg_morphism(f.src, f.dst, f.map):
            raise NotCoalgMorphism("base change needs a coalgebra morphism")
        self.f = f
        self.G = f.src.comonad
        self.Ga = Ga or SliceComonad(self.G, f.src)
        self.Gb = Gb or SliceComonad(self.G, f.dst)
        if self.Ga.over != f.src or self.Gb.over != f.dst:
            raise TypingMismatch("slice comonads do not match the morphism")
        self.u = _base_map(f)
        self._kappa: dict = {}

    # kappa : u^* G_b W  ~  G_a u^* W

    def kappa(self, W: Family, e):
        """``Pair(a, Pair(b, y))`` in ``u^* G_b W`` to the matching element of ``G_a u^* W``."""
        if W not in self._kappa:
            A, B = self.f.src.carrier, self.f.dst.carrier
            uW = pullback_along(self.u, W)
            L = over_base(uW, A)
            legs = [SliceMap(L, A, uW.proj, check=False),
                    SliceMap(L, over_base(W, B), lambda p: p[2], check=False)]
            if len(self._kappa) > 256:
                self._kappa.clear()
            self._kappa[W] = limit_lookup(self.G.functor, L, legs)
        a, y = e[1], e[2][2]
        z = self._kappa[W](self.f.src.carrier.proj(a), [self.f.src.structure(a), y])
        return Pair(a, z)

    def pullback(self, Z: Coalgebra) -> Coalgebra:
        """``f^* Z`` for a ``G_b``-coalgebra ``Z``."""
        uZ = pullback_along(self.u, Z.carrier)
        GuZ = self.Ga.functor(uZ)
        structure = tuple(self.kappa(Z.carrier, Pair(p[1], Z.structure(p[2]))) for p in uZ.total.elements)
        return Coalgebra(self.Ga, uZ, SliceMap(uZ, GuZ, structure, check=False), check=False)

    def pullback_map(self, m: CoalgMap) -> CoalgMap:
        src, dst = self.pullback(m.src), self.pullback(m.dst)
        return CoalgMap(src, dst, SliceMap(src.carrier, dst.carrier,
                                           lambda p: Pair(p[1], m(p[2])), check=False), check=False)

    def sigma(self, X: Coalgebra) -> Coalgebra:
        """``f_! X``: same elements, reindexed along ``f``."""
        Y, m = self.Ga.to_over(X)
        return self.Gb.from_over(Y, CoalgMap(Y, self.f.dst, compose_maps(self.f.map, m.map), check=False))

    def sigma_map(self, m: CoalgMap) -> CoalgMap:
        src, dst = self.sigma(m.src), self.sigma(m.dst)
        return CoalgMap(src, dst, SliceMap(src.carrier, dst.carrier, m.map.map, check=False), check=False)

    # the mate sigma~ : G_b Pi_u  =>  Pi_u G_a

    def mate(self, Z: Family, y):
        """``y`` in ``G_b(Pi_u Z)`` over ``b`` to ``Pair(b, {a: G_a(ev)(kappa(a, y))})``."""
        PiZ = pi_along(self.u, Z)
        uPiZ = pullback_along(self.u, PiZ)
        ev = SliceMap(uPiZ, Z, lambda p: p[2][2].at(p[1]), check=False)
        b = y[1]
        entries = []
        for a in self._fibre(b):
            k = self.kappa(PiZ, Pair(a, y))
            entries.append((a, self.Ga.functor.elem(ev, k)))
        return Pair(b, FnTable(entries))

    def _fibre(self, b) -> tuple:
        if not hasattr(self, "_fibres"):
            over = defaultdict(list)
            for a, bb in self.u.items():
                over[bb].append(a)
            self._fibres = {k: tuple(v) for k, v in over.items()}
        return self._fibres.get(b, ())

    def coreflexive_pair(self, X: Coalgebra) -> "CoreflexivePair":
        """``phi1, phi2 : F_b Pi_u U X -> F_b Pi_u G_a U X`` and their common retraction."""
        if X.comonad is not self.Ga:
            raise TypingMismatch("X must be a coalgebra for the source slice comonad")
        UX = X.carrier
        Gb = self.Gb
        Y0 = pi_along(self.u, UX)
        Y1 = pi_along(self.u, self.Ga.functor(UX))
        C0, C1 = cofree(Gb, Y0), cofree(Gb, Y1)
        sig = SliceMap(Gb.functor(Y0), Y1, lambda y: self.mate(UX, y), check=False)
        delta = Gb.comult.component(Y0)
        g_sig = Gb.functor.map(sig)
        phi1 = compose_maps(g_sig, delta)
        phi2 = Gb.functor.map(SliceMap(Y0, Y1, lambda p: pi_elem(X.structure, p), check=False))
        eps_a = self.Ga.counit.component(UX)
        r = Gb.functor.map(SliceMap(Y1, Y0, lambda p: pi_elem(eps_a, p), check=False))
        return CoreflexivePair(CoalgMap(C0, C1, phi1, check=False), CoalgMap(C0, C1, phi2, check=False),
                               CoalgMap(C1, C0, r, check=False))

    def pushforward(self, X: Coalgebra, check: bool = True) -> Coalgebra:
        """``Pi^{E_G}_f X``: the equalizer of the coreflexive pair, with created structure."""
        pair = self.coreflexive_pair(X)
        if check:
            rep = pair.check()
            if not rep.ok:
                raise NotCoalgMorphism(f"coreflexive pair is broken: {rep.violations[0]}")
        E, _ = self.Gb.coalgebras.equalizer(pair.phi1, pair.phi2)
        return E

    def pushforward_map(self, m: CoalgMap) -> CoalgMap:
        src, dst = self.pushforward(m.src, check=False), self.pushforward(m.dst, check=False)
        Gb = self.Gb.functor
        pm = SliceMap(pi_along(self.u, m.src.carrier), pi_along(self.u, m.dst.carrier),
                      lambda p: pi_elem(m.map, p), check=False)
        return CoalgMap(src, dst, SliceMap(src.carrier, dst.carrier, lambda y: Gb.elem(pm, y),
                                           check=False), check=False)


@dataclass(frozen=True, eq=False)
class CoreflexivePair:
    phi1: CoalgMap
    phi2: CoalgMap
    retraction: CoalgMap

    def check(self) -> CheckReport:
        rep = CheckReport("coreflexive pair")
        r = self.retraction
        for x in self.phi1.src.carrier.total.elements:
            rep.checked += 1
            if r(self.phi1(x)) != x:
                rep.fail("r . phi1 = id", x)
                break
            if r(self.phi2(x)) != x:
                rep.fail("r . phi2 = id", x)
                break
        for m in (self.phi1, self.phi2, self.retraction):
            if not is_coalg_morphism(m.src, m.dst, m.map):
                rep.fail("coalgebra morphism", m)
        return rep


def pushforward_coalg(f: CoalgMap, X: Coalgebra, base: BaseChange | None = None) -> Coalgebra:
    """``Pi^{E_G}_f X`` for ``X`` a coalgebra over ``f.src`` (as a ``G_a``-coalgebra)."""
    bc = base or BaseChange(f, Ga=X.comonad if isinstance(X.comonad, SliceComonad) else None)
    return bc.pushforward(X)


def slice_coalgebras(S: SliceComonad, max_fiber: int) -> Iterator[Coalgebra]:
    """Every ``S``-coalgebra whose carrier has fibres of size at most ``max_fiber``."""
    for X in small_families(S.world.index, max_fiber):
        yield from coalgebra_structures(S, X)


def hom_count(world, X, Y) -> int:
    return sum(1 for _ in world.hom(X, Y))
