"""Polynomials ``I <-h- A -g-> B -f-> J`` and the functors they represent.

``eval_poly`` realises ``f_! g_* h^*``: an element over ``j`` is
``Pair(b, FnTable{a: x})`` with ``f(b) = j`` and ``x`` in the fibre of ``X``
over ``h(a)`` for each ``a`` in ``g^-1(b)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .engine import (
    Algebra,
    ChainResult,
    CheckReport,
    ExeFunctor,
    ExeNat,
    SliceWorld,
    algebra_morphisms,
    compose_functors,
    fold,
    initial_algebra,
    is_algebra_morphism,
)
from .errors import TypingMismatch
from .finset import FinFn, FinSet, FnTable, Pair, guard, identity
from .slice import (
    Family,
    SliceMap,
    over_base,
    pi_along,
    pullback_along,
)


@dataclass(frozen=True, eq=False)
class Polynomial:
    h: FinFn
    g: FinFn
    f: FinFn
    name: str = "P"
    _slots: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.h.dom != self.g.dom:
            raise TypingMismatch("h and g must share their domain A")
        if self.g.cod != self.f.dom:
            raise TypingMismatch("the codomain of g must be the domain of f")
        slots = {b: [] for b in self.g.cod}
        for a, b in self.g.items():
            slots[b].append(a)
        object.__setattr__(self, "_slots", {b: tuple(v) for b, v in slots.items()})

    @property
    def I(self) -> FinSet:
        return self.h.cod

    @property
    def A(self) -> FinSet:
        return self.h.dom

    @property
    def B(self) -> FinSet:
        return self.g.cod

    @property
    def J(self) -> FinSet:
        return self.f.cod

    def slots(self, b) -> tuple:
        return self._slots[b]

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.h == other.h
                and self.g == other.g and self.f == other.f)

    def __hash__(self):
        return hash((self.h, self.g, self.f))

    def __repr__(self):
        return f"Polynomial({self.name}: |A|={len(self.A)}, |B|={len(self.B)}, I={self.I!r}, J={self.J!r})"


def identity_poly(I: FinSet) -> Polynomial:
    one = identity(I)
    return Polynomial(one, one, one, name="Id")


def poly_size(p: Polynomial, X: Family) -> int:
    fib = X.fibers
    return sum(math.prod(len(fib[p.h(a)]) for a in p.slots(b)) for b in p.B)


def poly_object(p: Polynomial, X: Family) -> Family:
    if X.index != p.I:
        raise TypingMismatch("family does not live over the input index of the polynomial")
    guard(poly_size(p, X), f"{p.name}(X)")
    fib = X.fibers
    elems = []
    for b in p.B.elements:
        slots = p.slots(b)
        for choice in itertools.product(*(fib[p.h(a)] for a in slots)):
            elems.append(Pair(b, FnTable(zip(slots, choice))))
    total = FinSet(elems)
    f = p.f
    return Family(total, p.J, lambda e: f(e[1]))


def poly_elem(m, y):
    return Pair(y[1], y[2].remap(m))


def poly_decode(y) -> tuple:
    """``Pair(b, section)`` as ``(b, {a: child})``."""
    return y[1], dict(y[2].entries)


def eval_poly(p: Polynomial, name: str | None = None) -> ExeFunctor:
    return ExeFunctor(SliceWorld(p.I), SliceWorld(p.J), lambda X: poly_object(p, X), poly_elem,
                      name=name or p.name, preserves_pullbacks=True, preserves_monos=True,
                      provenance="polynomial", poly=p, decode=poly_decode)


# ---------------------------------------------------------------------------
# representing data with a materialised natural isomorphism


@dataclass(frozen=True, eq=False)
class Represented:
    """``poly`` together with an isomorphism ``eval(poly) ~ target``."""

    poly: Polynomial
    functor: ExeFunctor
    target: ExeFunctor
    to_target: ExeNat
    from_target: ExeNat


def check_represented(rep: Represented, objects: Sequence, maps: Sequence = ()) -> CheckReport:
    """Components are mutually inverse slice maps and natural on ``maps``."""
    out = CheckReport(f"natural iso {rep.functor.name} ~ {rep.target.name}")
    for X in objects:
        out.checked += 1
        PX, TX = rep.functor(X), rep.target(X)
        try:
            fwd = SliceMap(PX, TX, lambda y: rep.to_target.elem(X, y))
            back = SliceMap(TX, PX, lambda y: rep.from_target.elem(X, y))
        except (TypingMismatch, KeyError) as exc:
            out.fail("component is a slice map", X, str(exc))
            continue
        for y in PX.total.elements:
            if back(fwd(y)) != y:
                out.fail("from . to = id", y)
                break
        for y in TX.total.elements:
            if fwd(back(y)) != y:
                out.fail("to . from = id", y)
                break
    for m in maps:
        out.checked += 1
        Tm = rep.target.map(m)
        for y in rep.functor(m.src).total.elements:
            lhs = rep.to_target.elem(m.dst, rep.functor.elem(m, y))
            rhs = Tm(rep.to_target.elem(m.src, y))
            if lhs != rhs:
                out.fail("naturality of the comparison", y, f"for {m!r}")
                break
    return out


def represent_identity(I: FinSet) -> Represented:
    """``(1, 1, 1)`` represents the identity: ``Pair(i, {i: x})`` <-> ``x``."""
    from .engine import identity_functor

    p = identity_poly(I)
    P = eval_poly(p)
    Id = identity_functor(SliceWorld(I))
    to = ExeNat(P, Id, lambda X, y: y[2].values()[0], name="unwrap")
    back = ExeNat(Id, P, lambda X, x: Pair(X.proj(x), FnTable([(X.proj(x), x)])), name="wrap")
    return Represented(p, P, Id, to, back)


def compose_poly(q: Polynomial, p: Polynomial) -> Represented:
    """A polynomial for ``eval(q) . eval(p)``.

    Shapes are ``Pair(d, FnTable{c: b_c})`` with ``f_p(b_c) = h_q(c)``; the
    slots of a shape are ``Pair(shape, Pair(c, a))`` with ``g_p(a) = b_c``.
    """
    if q.I != p.J:
        raise TypingMismatch("compose_poly: q must start where p ends")
    Bp = Family(p.B, p.J, p.f)
    shapes = pi_along(q.g, pullback_along(q.h, Bp))   # elements Pair(d, {c: Pair(c, b)})
    B2 = []
    for e in shapes.total.elements:
        B2.append(Pair(e[1], FnTable((c, cb[2]) for c, cb in e[2].entries)))
    B2set = FinSet(B2)
    A2 = []
    for shape in B2set.elements:
        for c, b in shape[2].entries:
            for a in p.slots(b):
                A2.append(Pair(shape, Pair(c, a)))
    A2set = FinSet(A2)
    comp = Polynomial(
        FinFn(A2set, p.I, lambda x: p.h(x[2][2])),
        FinFn(A2set, B2set, lambda x: x[1]),
        FinFn(B2set, q.J, lambda s: q.f(s[1])),
        name=f"{q.name}{p.name}",
    )
    Pc = eval_poly(comp)
    QP = compose_functors(eval_poly(q), eval_poly(p))

    def to(X, y):
        shape, sec = y[1], y[2]
        d = shape[1]
        inner = []
        for c, b in shape[2].entries:
            inner.append((c, Pair(b, FnTable((a, sec.at(Pair(shape, Pair(c, a)))) for a in p.slots(b)))))
        return Pair(d, FnTable(inner))

    def back(X, z):
        d, outer = z[1], z[2]
        shape = Pair(d, FnTable((c, pb[1]) for c, pb in outer.entries))
        entries = []
        for c, pb in outer.entries:
            for a, x in pb[2].entries:
                entries.append((Pair(shape, Pair(c, a)), x))
        return Pair(shape, FnTable(entries))

    return Represented(comp, Pc, QP, ExeNat(Pc, QP, to, name="flatten"),
                       ExeNat(QP, Pc, back, name="nest"))


def sliced_functor(F: ExeFunctor, K: Family, name: str | None = None) -> ExeFunctor:
    """``F/K : FinSet/K.total -> FinSet/F(K).total`` computed directly from ``F``."""
    FK = F(K)

    def obj(X: Family) -> Family:
        Xb = over_base(X, K)
        proj = SliceMap(Xb, K, X.proj, check=False)
        FX = F(Xb)
        return Family(FX.total, FK.total, lambda y: F.elem(proj, y))

    def elem(m, y):
        return F.elem(SliceMap(over_base(m.src, K), over_base(m.dst, K), m.map, check=False), y)

    return ExeFunctor(SliceWorld(K.total), SliceWorld(FK.total), obj, elem,
                      name=name or f"{F.name}/K", preserves_pullbacks=F.preserves_pullbacks,
                      preserves_monos=F.preserves_monos, provenance=F.provenance)


def slice_poly(p: Polynomial, K: Family) -> Represented:
    """The polynomial ``(eta, g', h' eps)`` representing ``P/K``.

    ``Pi = g_* h^* K`` has elements ``Pair(b, {a: Pair(a, k)})``; the slots
    are ``g^* Pi`` with the counit ``eps`` picking the value at ``a``, and
    ``eta : Pi -> P(K)`` drops the redundant ``a`` tags.
    """
    if K.index != p.I:
        raise TypingMismatch("K must live over the input index of the polynomial")
    P = eval_poly(p)
    PK = P(K)
    Pi = pi_along(p.g, pullback_along(p.h, K))
    gPi = pullback_along(p.g, Pi)                      # elements Pair(a, Pair(b, sec))

    def eta(s):
        return Pair(s[1], FnTable((a, ak[2]) for a, ak in s[2].entries))

    def counit(x):                                     # g* Pi -> h* K
        return x[2][2].at(x[1])

    sp = Polynomial(
        FinFn(gPi.total, K.total, lambda x: counit(x)[2]),
        FinFn(gPi.total, Pi.total, lambda x: x[2]),
        FinFn(Pi.total, PK.total, eta),
        name=f"{p.name}/K",
    )
    Psp = eval_poly(sp)
    direct = sliced_functor(P, K)

    def to(X, y):
        s, sec = y[1], y[2]
        return Pair(s[1], FnTable((k[1], x) for k, x in sec.entries))

    def back(X, z):
        b, sec = z[1], z[2]
        s = Pair(b, FnTable((a, Pair(a, X.proj(x))) for a, x in sec.entries))
        return Pair(s, FnTable((Pair(a, s), x) for a, x in sec.entries))

    return Represented(sp, Psp, direct, ExeNat(Psp, direct, to, name="unslice"),
                       ExeNat(direct, Psp, back, name="reslice"))


# ---------------------------------------------------------------------------
# staged initial algebras for two-argument functors


class TwoArgFunctor:
    """``F2(K, X)`` where ``K`` is an algebra for the first-stage functor.

    ``at(K)`` is the endofunctor ``F2(K, -)``; ``elem(h1, h2, y)`` is the
    action of ``F2(h1, h2)`` on ``y``; ``over_maps(h1, X, Y)`` enumerates
    the candidate second components of a pair morphism over ``h1``.
    """

    def __init__(self, at: Callable[[Algebra], ExeFunctor], elem: Callable,
                 over_maps: Callable, name: str = "F2"):
        self._at = at
        self.elem = elem
        self.over_maps = over_maps
        self.name = name
        self._cache: dict = {}

    def at(self, K: Algebra) -> ExeFunctor:
        key = id(K)
        if key not in self._cache:
            self._cache[key] = (K, self._at(K))
        return self._cache[key][1]


def constant_two_arg(F: ExeFunctor) -> TwoArgFunctor:
    """``F2(K, X) = F(X)``, ignoring the first argument."""
    return TwoArgFunctor(lambda K: F, lambda h1, h2, y: F.elem(h2, y),
                         lambda h1, X, Y: F.src.hom(X, Y), name=F.name)


def leaves_from_first(first_world: SliceWorld) -> TwoArgFunctor:
    """``F2(K, X)``: one leaf per element of ``K``, constant in ``X``.

    The second-stage world is ``FinSet/1``; a leaf is ``Pair(k, {})``.
    """
    from .finset import TERMINAL, UNIT
    from .slice import over_terminal

    world = SliceWorld(TERMINAL)

    def at(K: Algebra) -> ExeFunctor:
        leaves = FinSet(Pair(k, FnTable()) for k in K.carrier.total.elements)
        obj = Family(leaves, TERMINAL, lambda e: UNIT)
        return ExeFunctor(world, world, lambda X: obj, lambda m, y: y, name="leaves(K)",
                          preserves_pullbacks=True, provenance="polynomial")

    return TwoArgFunctor(at, lambda h1, h2, y: Pair(h1(y[1]), y[2]),
                         lambda h1, X, Y: world.hom(X, Y), name="leaves")


@dataclass(frozen=True, eq=False)
class StagedResult:
    first: ChainResult
    second: ChainResult | None
    F2: TwoArgFunctor

    @property
    def stabilized(self) -> bool:
        return self.first.stabilized and self.second is not None and self.second.stabilized


def staged_initial_algebra(F1: ExeFunctor, F2: TwoArgFunctor, max_steps: int = 32) -> StagedResult:
    """``W1`` = initial ``F1``-algebra, then ``W2`` = initial ``F2(W1, -)``-algebra."""
    first = initial_algebra(F1, max_steps)
    if not first.stabilized:
        return StagedResult(first, None, F2)
    second = initial_algebra(F2.at(first.algebra), max_steps)
    return StagedResult(first, second, F2)


def is_pair_morphism(F2: TwoArgFunctor, src: tuple[Algebra, Algebra], dst: tuple[Algebra, Algebra],
                     h1, h2) -> bool:
    A1, A2 = src
    B1, B2 = dst
    if not is_algebra_morphism(h1, A1, B1):
        return False
    s2, t2 = A2.structure, B2.structure
    F = A2.functor
    return all(h2(s2(y)) == t2(F2.elem(h1, h2, y)) for y in F.src.carrier(F(A2.carrier)).total.elements)


def pair_morphisms(F2: TwoArgFunctor, src: tuple[Algebra, Algebra], dst: tuple[Algebra, Algebra]) -> list:
    """All pair morphisms by enumeration of both components."""
    A1, A2 = src
    B1, B2 = dst
    found = []
    for h1 in algebra_morphisms(A1, B1):
        for h2 in F2.over_maps(h1, A2.carrier, B2.carrier):
            if is_pair_morphism(F2, src, dst, h1, h2):
                found.append((h1, h2))
    return found


def check_staged_initiality(res: StagedResult, targets: Sequence[tuple[Algebra, Algebra]]) -> CheckReport:
    """Exactly one pair morphism to every target, found by exhaustive
    enumeration; its first component must be the fold of ``W1``."""
    rep = CheckReport("staged initiality")
    if not res.stabilized:
        rep.fail("both stages stabilise", res.first.trace)
        return rep
    src = (res.first.algebra, res.second.algebra)
    counts = []
    for tgt in targets:
        rep.checked += 1
        found = pair_morphisms(res.F2, src, tgt)
        counts.append(len(found))
        if len(found) != 1:
            rep.fail("exactly one pair morphism", tgt, f"found {len(found)}")
            continue
        h1, _ = found[0]
        if h1.map != fold(res.first, tgt[0]).map:
            rep.fail("first component is the fold", tgt)
    rep.data = {"counts": counts}
    return rep
