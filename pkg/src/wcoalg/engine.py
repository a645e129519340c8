"""Executable functors, (co)algebras, initial chains and the lifting results.

Generic algorithms here run over a *world*: either :class:`SliceWorld`
(``FinSet/I``) or :class:`CoalgWorld` (coalgebras for a comonad on a slice
world).  Both expose the same small interface -- ``carrier``, ``morphism``,
``compose``, ``initial``, ``hom``, ``sub`` ... -- so chains, folds and
subalgebra closures work unchanged on ``FinSet/I`` and on ``E_G``.

Functor and comonad laws cannot be checked on a whole (infinite) category;
the ``check_*`` functions examine exactly the samples they are given and
say so in their reports.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

from .errors import (
    FlagMissing,
    LawViolation,
    NotCoalgMorphism,
    NotIso,
    NotStrong,
    OplaxLawViolation,
    TypingMismatch,
)
from .finset import FinFn, FinSet, guard, identity
from .slice import (
    Family,
    SliceMap,
    compose_maps,
    from_initial_map,
    hom_slice_size,
    identity_map,
    initial_family,
    inverse_map,
    is_iso_map,
    is_mono_map,
    iter_hom_slice,
    slice_equalizer,
    subfamily,
    terminal_family,
)

PROVENANCES = ("polynomial", "composite", "comonad", "other")


# ---------------------------------------------------------------------------
# reports


@dataclass
class Violation:
    law: str
    witness: Any
    detail: str = ""

    def as_dict(self) -> dict:
        return {"law": self.law, "witness": describe(self.witness), "detail": self.detail}


_ADDRESS = re.compile(r" at 0x[0-9a-fA-F]+")


def describe(obj) -> str:
    """``repr`` (strings as is) with memory addresses removed, so reports
    are reproducible."""
    return _ADDRESS.sub("", obj if isinstance(obj, str) else repr(obj))


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, law: str, witness, detail: str = "") -> None:
        self.violations.append(Violation(law, witness, detail))

    def absorb(self, other: "CheckReport") -> "CheckReport":
        self.checked += other.checked
        self.violations.extend(other.violations)
        self.notes.extend(other.notes)
        return self

    def as_dict(self) -> dict:
        out = {"name": self.name, "ok": self.ok, "checked": self.checked,
               "violations": [v.as_dict() for v in self.violations], "notes": list(self.notes)}
        if self.data:
            out["data"] = self.data
        return out


# ---------------------------------------------------------------------------
# worlds


class SliceWorld:
    """The category ``FinSet/index``."""

    def __init__(self, index: FinSet):
        self.index = index

    def __eq__(self, other):
        return isinstance(other, SliceWorld) and other.index == self.index

    def __hash__(self):
        return hash(("slice", self.index))

    def __repr__(self):
        return f"SliceWorld({self.index!r})"

    def carrier(self, X: Family) -> Family:
        return X

    def check_object(self, X) -> None:
        if not isinstance(X, Family) or X.index != self.index:
            raise TypingMismatch(f"expected a family over {self.index!r}")

    def morphism(self, src: Family, dst: Family, table, check: bool = False) -> SliceMap:
        return SliceMap(src, dst, table, check=check)

    def identity(self, X):
        return identity_map(X)

    def compose(self, g, f):
        return compose_maps(g, f)

    def initial(self) -> Family:
        return initial_family(self.index)

    def initial_map(self, X) -> SliceMap:
        return from_initial_map(X)

    def terminal(self) -> Family:
        return terminal_family(self.index)

    def is_iso(self, m) -> bool:
        return is_iso_map(m)

    def is_mono(self, m) -> bool:
        return is_mono_map(m)

    def inverse(self, m):
        return inverse_map(m)

    def hom_bound(self, X, Y) -> int:
        return hom_slice_size(X, Y)

    def hom(self, X, Y) -> Iterator[SliceMap]:
        return iter_hom_slice(X, Y)

    def sub(self, X: Family, keep):
        return subfamily(X, keep)

    def equalizer(self, f, g):
        return slice_equalizer(f, g)


class CoalgWorld:
    """Coalgebras for ``comonad``, whose functor acts on a :class:`SliceWorld`."""

    def __init__(self, comonad: "Comonad"):
        self.comonad = comonad
        self.base = comonad.world

    def __eq__(self, other):
        return isinstance(other, CoalgWorld) and other.comonad is self.comonad

    def __hash__(self):
        return hash(("coalg", id(self.comonad)))

    def __repr__(self):
        return f"CoalgWorld({self.comonad.name})"

    def carrier(self, X: "Coalgebra") -> Family:
        return X.carrier

    def check_object(self, X) -> None:
        if not isinstance(X, Coalgebra) or X.comonad is not self.comonad:
            raise TypingMismatch(f"expected a {self.comonad.name}-coalgebra")

    def morphism(self, src, dst, table, check: bool = False) -> "CoalgMap":
        return CoalgMap(src, dst, SliceMap(src.carrier, dst.carrier, table, check=check), check=check)

    def identity(self, X):
        return CoalgMap(X, X, identity_map(X.carrier), check=False)

    def compose(self, g, f):
        return CoalgMap(f.src, g.dst, compose_maps(g.map, f.map), check=False)

    def initial(self) -> "Coalgebra":
        E = initial_family(self.base.index)
        return Coalgebra(self.comonad, E, SliceMap(E, self.comonad.functor(E), ()), check=False)

    def initial_map(self, X) -> "CoalgMap":
        return CoalgMap(self.initial(), X, from_initial_map(X.carrier), check=False)

    def terminal(self) -> "Coalgebra":
        T = terminal_family(self.base.index)
        return created_limit(self.comonad, T, [], [])

    def is_iso(self, m) -> bool:
        return is_iso_map(m.map)

    def is_mono(self, m) -> bool:
        return is_mono_map(m.map)

    def inverse(self, m):
        return CoalgMap(m.dst, m.src, inverse_map(m.map), check=False)

    def hom_bound(self, X, Y) -> int:
        return hom_slice_size(X.carrier, Y.carrier)

    def hom(self, X, Y) -> Iterator["CoalgMap"]:
        G = self.comonad.functor
        xs = X.carrier.total.elements
        sx, sy = X.structure, Y.structure
        for m in iter_hom_slice(X.carrier, Y.carrier):
            if all(sy(m(x)) == G.elem(m, sx(x)) for x in xs):
                yield CoalgMap(X, Y, m, check=False)

    def sub(self, X: "Coalgebra", keep):
        """The subcoalgebra on ``keep``, or None if ``keep`` is not closed."""
        S, incl = subfamily(X.carrier, keep)
        try:
            coalg = created_limit(self.comonad, S, [incl], [X])
        except KeyError:
            return None
        return coalg, CoalgMap(coalg, X, incl, check=False)

    def equalizer(self, f, g):
        E, incl = slice_equalizer(f.map, g.map)
        coalg = created_limit(self.comonad, E, [incl], [f.src])
        return coalg, CoalgMap(coalg, f.src, incl, check=False)


def card(world, X) -> int:
    return len(world.carrier(X))


def fiber_sizes(world, X) -> tuple:
    return world.carrier(X).fiber_sizes()


# ---------------------------------------------------------------------------
# functors and natural transformations


class ExeFunctor:
    """An executable functor between worlds.

    ``obj`` computes the image of an object; ``elem(m, y)`` is the action of
    ``F(m)`` on a single element ``y`` of ``F(m.src)``.  Flags are set only
    by constructors that guarantee them; they are never inferred by testing.
    ``decode`` (optional) splits an element into ``(label, children)``.
    """

    def __init__(self, src, dst, obj: Callable, elem: Callable, *, name: str = "F",
                 preserves_pullbacks: bool = False, preserves_monos: bool = False,
                 provenance: str = "other", poly=None, decode: Callable | None = None):
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        self.src = src
        self.dst = dst
        self._obj = obj
        self._elem = elem
        self.name = name
        self.preserves_pullbacks = preserves_pullbacks
        self.preserves_monos = preserves_monos or preserves_pullbacks
        self.provenance = provenance
        self.poly = poly
        self.decode = decode
        self._cache: dict = {}
        self._map_cache: dict = {}

    def __call__(self, X):
        try:
            return self._cache[X]
        except KeyError:
            pass
        if len(self._cache) > 512:
            self._cache.clear()
        out = self._obj(X)
        self._cache[X] = out
        return out

    def elem(self, m, y):
        return self._elem(m, y)

    def map(self, m):
        src, dst = self(m.src), self(m.dst)
        el = self._elem
        return self.dst.morphism(src, dst, tuple(el(m, y) for y in self.dst.carrier(src).total.elements))

    def __repr__(self):
        return f"ExeFunctor({self.name})"


def map_cached(F: ExeFunctor, m):
    """``F.map(m)``, remembered per functor for repeated elementwise use."""
    cache = F._map_cache
    try:
        return cache[m]
    except KeyError:
        pass
    if len(cache) > 64:
        cache.clear()
    out = cache[m] = F.map(m)
    return out


def identity_functor(world, name: str = "Id") -> ExeFunctor:
    return ExeFunctor(world, world, lambda X: X, lambda m, y: m(y), name=name,
                      preserves_pullbacks=True, provenance="polynomial")


def compose_functors(G: ExeFunctor, F: ExeFunctor, name: str | None = None) -> ExeFunctor:
    """``G . F``."""
    if F.dst != G.src:
        raise TypingMismatch(f"cannot compose {G.name} after {F.name}")
    both_poly = F.provenance in ("polynomial", "composite") and G.provenance in ("polynomial", "composite")
    return ExeFunctor(F.src, G.dst, lambda X: G(F(X)), lambda m, y: G.elem(map_cached(F, m), y),
                      name=name or f"{G.name}{F.name}",
                      preserves_pullbacks=F.preserves_pullbacks and G.preserves_pullbacks,
                      preserves_monos=F.preserves_monos and G.preserves_monos,
                      provenance="composite" if both_poly else "other")


class ExeNat:
    """A natural transformation given elementwise: ``elem(X, y)`` is the
    component at ``X`` applied to ``y`` in ``src(X)``."""

    def __init__(self, src: ExeFunctor, dst: ExeFunctor, elem: Callable, name: str = "tau"):
        self.src = src
        self.dst = dst
        self._elem = elem
        self.name = name
        self._cache: dict = {}

    def elem(self, X, y):
        return self._elem(X, y)

    def component(self, X):
        try:
            return self._cache[X]
        except KeyError:
            pass
        if len(self._cache) > 512:
            self._cache.clear()
        FX, GX = self.src(X), self.dst(X)
        world = self.dst.dst
        el = self._elem
        out = world.morphism(FX, GX, tuple(el(X, y) for y in world.carrier(FX).total.elements))
        self._cache[X] = out
        return out

    def __repr__(self):
        return f"ExeNat({self.name}: {self.src.name} => {self.dst.name})"


def identity_nat(F: ExeFunctor) -> ExeNat:
    return ExeNat(F, F, lambda X, y: y, name=f"1_{F.name}")


def vertical(tau: ExeNat, sigma: ExeNat, name: str | None = None) -> ExeNat:
    """``tau . sigma``."""
    return ExeNat(sigma.src, tau.dst, lambda X, y: tau.elem(X, sigma.elem(X, y)),
                  name=name or f"{tau.name}.{sigma.name}")


def whisker_left(F: ExeFunctor, tau: ExeNat) -> ExeNat:
    """``F tau : F S => F T`` for ``tau : S => T``."""
    return ExeNat(compose_functors(F, tau.src), compose_functors(F, tau.dst),
                  lambda X, y: F.elem(tau.component(X), y), name=f"{F.name}{tau.name}")


def whisker_right(tau: ExeNat, F: ExeFunctor) -> ExeNat:
    """``tau F : S F => T F``."""
    return ExeNat(compose_functors(tau.src, F), compose_functors(tau.dst, F),
                  lambda X, y: tau.elem(F(X), y), name=f"{tau.name}{F.name}")


def _first_difference(world, f, g):
    for x in world.carrier(f.src).total.elements:
        if f(x) != g(x):
            return x
    return None


def check_functor_laws(F: ExeFunctor, objects: Sequence = (), maps: Sequence = ()) -> CheckReport:
    rep = CheckReport(f"functor laws of {F.name}")
    world = F.dst
    for X in objects:
        rep.checked += 1
        FX = F(X)
        w = _first_difference(world, F.map(F.src.identity(X)), world.identity(FX))
        if w is not None:
            rep.fail("F(id) = id", w, f"at {X!r}")
    for f, g in itertools.product(maps, repeat=2):
        if f.dst != g.src:
            continue
        rep.checked += 1
        lhs = F.map(F.src.compose(g, f))
        rhs = world.compose(F.map(g), F.map(f))
        w = _first_difference(world, lhs, rhs)
        if w is not None:
            rep.fail("F(g.f) = F(g).F(f)", w)
    rep.notes.append(f"sampled {len(objects)} objects and {len(maps)} maps")
    return rep


def check_naturality(tau: ExeNat, maps: Sequence) -> CheckReport:
    rep = CheckReport(f"naturality of {tau.name}")
    world = tau.dst.dst
    for m in maps:
        rep.checked += 1
        lhs = world.compose(tau.component(m.dst), tau.src.map(m))
        rhs = world.compose(tau.dst.map(m), tau.component(m.src))
        w = _first_difference(world, lhs, rhs)
        if w is not None:
            rep.fail("tau_Y . F(m) = G(m) . tau_X", w, f"for {m!r}")
    rep.notes.append(f"sampled {len(maps)} maps")
    return rep


# ---------------------------------------------------------------------------
# comonads and coalgebras


class Comonad:
    """``(G, counit, comult)`` on a :class:`SliceWorld`."""

    def __init__(self, functor: ExeFunctor, counit: ExeNat, comult: ExeNat, name: str = "G"):
        if functor.src != functor.dst or not isinstance(functor.src, SliceWorld):
            raise TypingMismatch("a comonad needs an endofunctor on a slice world")
        self.functor = functor
        self.counit = counit
        self.comult = comult
        self.name = name
        self.world = functor.src
        self.cartesian = functor.preserves_pullbacks
        self.coalgebras = CoalgWorld(self)
        self.kind = "generic"

    def __repr__(self):
        return f"Comonad({self.name})"


def identity_comonad(world: SliceWorld) -> Comonad:
    Id = identity_functor(world)
    one = identity_nat(Id)
    G = Comonad(Id, one, ExeNat(Id, compose_functors(Id, Id), lambda X, y: y, name="1"), name="Id")
    G.kind = "identity"
    return G


def check_comonad_laws(G: Comonad, objects: Sequence = (), maps: Sequence = ()) -> CheckReport:
    rep = CheckReport(f"comonad laws of {G.name}")
    F = G.functor
    for X in objects:
        rep.checked += 1
        GX = F(X)
        for y in GX.total.elements:
            d = G.comult.elem(X, y)
            if G.counit.elem(GX, d) != y:
                rep.fail("eps_G . delta = id", y, f"at {X!r}")
                break
            if F.elem(G.counit.component(X), d) != y:
                rep.fail("G(eps) . delta = id", y, f"at {X!r}")
                break
            if G.comult.elem(GX, d) != F.elem(G.comult.component(X), d):
                rep.fail("delta_G . delta = G(delta) . delta", y, f"at {X!r}")
                break
    if maps:
        rep.absorb(check_naturality(G.counit, maps))
        rep.absorb(check_naturality(G.comult, maps))
    rep.notes.append(f"sampled {len(objects)} objects and {len(maps)} maps")
    return rep


class Coalgebra:
    """``(carrier, structure : carrier -> G carrier)``."""

    __slots__ = ("comonad", "carrier", "structure", "_hash")

    def __init__(self, comonad: Comonad, carrier: Family, structure, check: bool = True):
        GA = comonad.functor(carrier)
        if not isinstance(structure, SliceMap):
            structure = SliceMap(carrier, GA, structure, check=check)
        self.comonad = comonad
        self.carrier = carrier
        self.structure = structure
        self._hash = None
        if check:
            bad = coalgebra_law_witness(self)
            if bad is not None:
                raise LawViolation(f"{bad[0]} fails at {bad[1]!r}")

    def __call__(self, x):
        return self.structure(x)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Coalgebra) and other.comonad is self.comonad
                and self.carrier == other.carrier
                and self.structure.map.images == other.structure.map.images)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.comonad), self.carrier, self.structure.map.images))
        return self._hash

    def __repr__(self):
        return f"Coalgebra({self.comonad.name}, {self.carrier!r})"


def coalgebra_law_witness(A: Coalgebra):
    G = A.comonad
    F = G.functor
    X = A.carrier
    alpha = A.structure
    for x in X.total.elements:
        a = alpha(x)
        if G.counit.elem(X, a) != x:
            return ("eps . alpha = id", x)
        if G.comult.elem(X, a) != F.elem(alpha, a):
            return ("delta . alpha = G(alpha) . alpha", x)
    return None


def check_coalgebra(A: Coalgebra) -> CheckReport:
    rep = CheckReport(f"coalgebra laws ({A.comonad.name})", checked=len(A.carrier))
    bad = coalgebra_law_witness(A)
    if bad is not None:
        rep.fail(bad[0], bad[1])
    return rep


class CoalgMap:
    __slots__ = ("src", "dst", "map")

    def __init__(self, src: Coalgebra, dst: Coalgebra, m: SliceMap, check: bool = True):
        if check:
            if m.src != src.carrier or m.dst != dst.carrier:
                raise TypingMismatch("underlying map does not match the coalgebras")
            G = src.comonad.functor
            for x in src.carrier.total.elements:
                if dst.structure(m(x)) != G.elem(m, src.structure(x)):
                    raise NotCoalgMorphism(f"structure not preserved at {x!r}")
        self.src = src
        self.dst = dst
        self.map = m

    def __call__(self, x):
        return self.map(x)

    def __eq__(self, other):
        return (isinstance(other, CoalgMap) and self.map == other.map
                and self.src == other.src and self.dst == other.dst)

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"CoalgMap({dict(self.map.map.items())!r})"


def is_coalg_morphism(src: Coalgebra, dst: Coalgebra, m: SliceMap) -> bool:
    G = src.comonad.functor
    return all(dst.structure(m(x)) == G.elem(m, src.structure(x)) for x in src.carrier.total.elements)


def cofree(G: Comonad, X: Family) -> Coalgebra:
    """``F_G X = (G X, delta_X)``."""
    return Coalgebra(G, G.functor(X), G.comult.component(X), check=False)


def limit_lookup(F: ExeFunctor, L: Family, legs: Sequence[SliceMap]) -> Callable:
    """Inverse of the comparison map ``F(L) -> lim F(X_k)`` for a limit cone ``legs``.

    Returns ``lookup(index, images) -> element of F(L)``; raises KeyError if
    the requested compatible family has no preimage, LawViolation if the
    comparison is not injective (``F`` fails to preserve this limit).
    """
    FL = F(L)
    table = {}
    for y in FL.total.elements:
        key = (FL.proj(y),) + tuple(F.elem(leg, y) for leg in legs)
        if key in table:
            raise LawViolation(f"{F.name} does not preserve the limit: {y!r} and {table[key]!r} collide")
        table[key] = y

    def lookup(idx, images):
        return table[(idx,) + tuple(images)]

    return lookup


def created_limit(G: Comonad, L: Family, legs: Sequence[SliceMap], coalgs: Sequence[Coalgebra]) -> Coalgebra:
    """Equip a limit ``L`` of coalgebra carriers with its unique coalgebra structure."""
    lookup = limit_lookup(G.functor, L, legs)
    proj = L.proj
    structure = tuple(lookup(proj(l), [c.structure(leg(l)) for leg, c in zip(legs, coalgs)])
                      for l in L.total.elements)
    return Coalgebra(G, L, SliceMap(L, G.functor(L), structure, check=False), check=False)


# ---------------------------------------------------------------------------
# algebras, chains and folds


@dataclass(frozen=True, eq=False)
class Algebra:
    functor: ExeFunctor
    carrier: Any
    structure: Any

    @property
    def world(self):
        return self.functor.src

    def __repr__(self):
        return f"Algebra({self.functor.name}, {self.world.carrier(self.carrier)!r})"


@dataclass(frozen=True, eq=False)
class ChainResult:
    functor: ExeFunctor
    stabilized: bool
    trace: tuple
    fiber_trace: tuple
    steps: int | None = None
    algebra: Algebra | None = None

    @property
    def W(self):
        return self.algebra.carrier if self.algebra else None

    @property
    def s(self):
        return self.algebra.structure if self.algebra else None

    def as_dict(self) -> dict:
        out = {"outcome": "stabilized" if self.stabilized else "exceeded",
               "trace": list(self.trace),
               "fiber_trace": [list(t) for t in self.fiber_trace]}
        if self.stabilized:
            out["steps"] = self.steps
        return out


def initial_algebra(P: ExeFunctor, max_steps: int = 32) -> ChainResult:
    """Iterate ``0 -> P0 -> P^2 0 -> ...`` until the connecting map is invertible."""
    world = P.src
    if P.dst != world:
        raise TypingMismatch("initial_algebra needs an endofunctor")
    X = world.initial()
    trace, fibers = [card(world, X)], [fiber_sizes(world, X)]
    try:
        m = world.initial_map(P(X))
        for k in range(max_steps + 1):
            if world.is_iso(m):
                alg = Algebra(P, X, world.inverse(m))
                return ChainResult(P, True, tuple(trace), tuple(fibers), k, alg)
            if k == max_steps:
                break
            X = m.dst
            trace.append(card(world, X))
            fibers.append(fiber_sizes(world, X))
            m = P.map(m)
    except Exception as exc:
        if hasattr(exc, "__dict__"):
            exc.trace = tuple(trace)
        raise
    return ChainResult(P, False, tuple(trace), tuple(fibers))


def is_algebra_morphism(h, src: Algebra, dst: Algebra) -> bool:
    P = src.functor
    s, t = src.structure, dst.structure
    carrier = src.world.carrier(P(src.carrier))
    return all(h(s(p)) == t(P.elem(h, p)) for p in carrier.total.elements)


def algebra_morphism_witness(h, src: Algebra, dst: Algebra):
    P = src.functor
    s, t = src.structure, dst.structure
    for p in src.world.carrier(P(src.carrier)).total.elements:
        if h(s(p)) != t(P.elem(h, p)):
            return p
    return None


def fold(initial, target: Algebra):
    """The unique algebra morphism out of a stabilised initial algebra.

    Built stage by stage: ``h_0`` is the map out of ``0`` and
    ``h_{k+1} = t . P(h_k)``, so ``h_n`` leaves ``W = P^n 0``.
    """
    if not initial.stabilized:
        raise TypingMismatch("fold needs a stabilised chain")
    P = initial.functor
    if target.functor is not P:
        raise TypingMismatch("target is an algebra for a different functor")
    world = P.src
    h = world.initial_map(target.carrier)
    for _ in range(initial.steps):
        h = world.compose(target.structure, P.map(h))
    if h.src != initial.W:
        raise LawViolation("fold left the chain: stage objects disagree")
    return h


def algebra_morphisms(src: Algebra, dst: Algebra, limit: int | None = None) -> list:
    """Every algebra morphism ``src -> dst`` by exhaustive hom enumeration."""
    world = src.world
    guard(world.hom_bound(src.carrier, dst.carrier), "algebra hom enumeration")
    found = []
    for h in world.hom(src.carrier, dst.carrier):
        if is_algebra_morphism(h, src, dst):
            found.append(h)
            if limit is not None and len(found) >= limit:
                break
    return found


def is_fixed_point(alg: Algebra) -> bool:
    return alg.world.is_iso(alg.structure)


def _closure_step(alg: Algebra, keep: frozenset):
    world = alg.world
    got = world.sub(alg.carrier, keep)
    if got is None:
        return None
    S, incl = got
    P, s = alg.functor, alg.structure
    return {s(P.elem(incl, p)) for p in world.carrier(P(S)).total.elements}


def least_subalgebra(alg: Algebra):
    """Least subalgebra by closure: ``S_0 = 0``, ``S_{k+1} = S_k u s(P(S_k))``.

    Returns ``(subobject, inclusion)`` in the algebra's world.
    """
    if not alg.functor.preserves_monos:
        raise FlagMissing(f"{alg.functor.name} is not known to preserve monomorphisms")
    world = alg.world
    keep = frozenset()
    while True:
        img = _closure_step(alg, keep)
        if img is None:
            raise LawViolation("closure stage is not a subobject")
        nxt = keep | img
        if nxt == keep:
            return world.sub(alg.carrier, keep)
        keep = nxt


def is_well_founded(alg: Algebra) -> bool:
    S, _ = least_subalgebra(alg)
    return len(alg.world.carrier(S)) == len(alg.world.carrier(alg.carrier))


def all_subalgebras(alg: Algebra, max_carrier: int = 12) -> list[frozenset]:
    """Brute force: every subset of the carrier that is a subalgebra."""
    elems = alg.world.carrier(alg.carrier).total.elements
    if len(elems) > max_carrier:
        raise TypingMismatch(f"carrier of size {len(elems)} is too large for subset enumeration")
    found = []
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            keep = frozenset(combo)
            img = _closure_step(alg, keep)
            if img is not None and img <= keep:
                found.append(keep)
    return found


def check_characterization(alg: Algebra, sample_targets: Sequence[Algebra]) -> CheckReport:
    """Compare "fixed point and well-founded" against sampled initiality evidence."""
    rep = CheckReport("characterization")
    if alg.functor.provenance not in ("polynomial", "composite"):
        rep.notes.append(f"{alg.functor.name} has provenance {alg.functor.provenance!r}; "
                         "the equivalence is only claimed for polynomial functors")
    fixed = is_fixed_point(alg)
    founded = is_well_founded(alg)
    counts = [len(algebra_morphisms(alg, t, limit=2)) for t in sample_targets]
    initial_evidence = all(c == 1 for c in counts)
    rep.checked = len(sample_targets)
    rep.notes.append(f"fixed_point={fixed} well_founded={founded} "
                     f"morphism_counts={counts} (initiality checked against "
                     f"{len(sample_targets)} sampled targets only)")
    if (fixed and founded) != initial_evidence:
        rep.fail("fixed and well-founded <=> initial", counts,
                 f"fixed={fixed} well_founded={founded}")
    rep.data = {"fixed_point": fixed, "well_founded": founded,
                "initial_on_samples": initial_evidence, "counts": counts}
    return rep


# ---------------------------------------------------------------------------
# lifting along lax / strong / oplax morphisms


@dataclass(frozen=True, eq=False)
class LaxMorphism:
    """``(H, sigma) : P -> Q`` with ``sigma : Q H => H P``."""

    H: ExeFunctor
    sigma: ExeNat
    P: ExeFunctor
    Q: ExeFunctor


def lift_algebra_functor(lax: LaxMorphism, alg: Algebra) -> Algebra:
    """``(X, s)  |->  (H X, H s . sigma(X))``."""
    if alg.functor is not lax.P:
        raise TypingMismatch("algebra is not for the source endofunctor")
    X = alg.carrier
    comp = lax.sigma.component(X)
    HX = lax.H(X)
    if comp.src != lax.Q(HX) or comp.dst != lax.H(lax.P(X)):
        raise TypingMismatch("sigma is not typed Q H => H P")
    world = lax.Q.src
    return Algebra(lax.Q, HX, world.compose(lax.H.map(alg.structure), comp))


def lift_algebra_morphism(lax: LaxMorphism, h):
    return lax.H.map(h)


def check_triangles(H: ExeFunctor, R: ExeFunctor, unit: ExeNat, counit: ExeNat,
                    src_objects: Sequence = (), dst_objects: Sequence = ()) -> CheckReport:
    rep = CheckReport(f"triangle identities {H.name} -| {R.name}")
    for X in src_objects:
        rep.checked += 1
        HX = H(X)
        eta = unit.component(X)
        for y in H.dst.carrier(HX).total.elements:
            if counit.elem(HX, H.elem(eta, y)) != y:
                rep.fail("eps_H . H(eta) = id", y)
                break
    for Y in dst_objects:
        rep.checked += 1
        RY = R(Y)
        eps = counit.component(Y)
        for x in R.dst.carrier(RY).total.elements:
            if R.elem(eps, unit.elem(RY, x)) != x:
                rep.fail("R(eps) . eta_R = id", x)
                break
    return rep


def adjoint_lift_right(strong: LaxMorphism, R: ExeFunctor, unit: ExeNat, counit: ExeNat,
                       alg: Algebra, sigma_inverse: ExeNat | None = None) -> Algebra:
    """Right adjoint to the lifted functor: ``(Y, t) |-> (R Y, R t . rho(Y))``
    where ``rho = R Q eps . R sigma^-1 R . eta P R`` is the mate of ``sigma^-1``."""
    H, P, Q = strong.H, strong.P, strong.Q
    if alg.functor is not Q:
        raise TypingMismatch("algebra is not for the target endofunctor")
    Y = alg.carrier
    RY = R(Y)
    PRY = P(RY)
    tri = check_triangles(H, R, unit, counit, [RY], [Y])
    if not tri.ok:
        raise LawViolation(f"unit/counit fail the triangle identities: {tri.violations[0]}")
    sig = strong.sigma.component(PRY)
    if not H.dst.is_iso(sig):
        raise NotStrong(f"sigma is not invertible at {PRY!r}")
    if sigma_inverse is not None:
        sig_inv = sigma_inverse.component(PRY)
    else:
        sig_inv = H.dst.inverse(sig)
    eta = unit.component(PRY)                        # P R Y -> R H P R Y
    r_sig = R.map(sig_inv)                           # R H P R Y -> R Q H R Y
    r_q_eps = R.map(Q.map(counit.component(Y)))      # R Q H R Y -> R Q Y
    r_t = R.map(alg.structure)                       # R Q Y -> R Y
    world = P.src
    structure = world.compose(r_t, world.compose(r_q_eps, world.compose(r_sig, eta)))
    return Algebra(P, RY, structure)


def check_oplax(S: ExeFunctor, sigma: ExeNat, G: Comonad, H: Comonad, objects: Sequence) -> CheckReport:
    """``eps_H S . sigma = S eps_G`` and ``delta_H S . sigma = H sigma . sigma G . S delta_G``."""
    rep = CheckReport(f"oplax laws of {S.name}")
    for X in objects:
        rep.checked += 1
        SX = S(X)
        GX = G.functor(X)
        s_eps = S.map(G.counit.component(X))
        s_delta = S.map(G.comult.component(X))
        h_sigma = H.functor.map(sigma.component(X))
        for y in S.dst.carrier(S(GX)).total.elements:
            z = sigma.elem(X, y)
            if H.counit.elem(SX, z) != s_eps(y):
                rep.fail("eps_H S . sigma = S eps_G", y)
                break
            lhs = H.comult.elem(SX, z)
            rhs = h_sigma(sigma.elem(GX, s_delta(y)))
            if lhs != rhs:
                rep.fail("delta_H S . sigma = H sigma . sigma G . S delta_G", y)
                break
    return rep


def lift_functor_along_oplax(S: ExeFunctor, sigma: ExeNat, G: Comonad, H: Comonad,
                             check_objects: Sequence = (), name: str | None = None) -> ExeFunctor:
    """The functor ``T : E_G -> F_H`` with ``T(A, a) = (S A, sigma(A) . S a)``."""
    if check_objects:
        rep = check_oplax(S, sigma, G, H, check_objects)
        if not rep.ok:
            raise OplaxLawViolation(str(rep.violations[0]))
    Hf = H.functor

    def obj(A: Coalgebra) -> Coalgebra:
        SA = S(A.carrier)
        sa = S.map(A.structure)
        structure = tuple(sigma.elem(A.carrier, sa(y)) for y in SA.total.elements)
        return Coalgebra(H, SA, SliceMap(SA, Hf(SA), structure, check=False), check=False)

    return ExeFunctor(G.coalgebras, H.coalgebras, obj, lambda m, y: S.elem(m.map, y),
                      name=name or f"{S.name}~", preserves_pullbacks=S.preserves_pullbacks,
                      preserves_monos=S.preserves_monos, provenance=S.provenance, poly=S.poly)


def oplax_from_lift(T: ExeFunctor, S: ExeFunctor, G: Comonad, H: Comonad, name: str = "sigma") -> ExeNat:
    """Recover ``sigma : S G => H S`` from a lifting ``T`` with ``U_H T = S U_G``:
    ``sigma(X) = H S eps_G(X) . structure of T(F_G X)``."""
    SG = compose_functors(S, G.functor)
    HS = compose_functors(H.functor, S)
    parts: dict = {}

    def elem(X, y):
        if X not in parts:
            if len(parts) > 64:
                parts.clear()
            parts[X] = (T(cofree(G, X)).structure, S.map(G.counit.component(X)))
        structure, s_eps = parts[X]
        return H.functor.elem(s_eps, structure(y))

    return ExeNat(SG, HS, elem, name=name)


def algebra_of_coalgebra(P: ExeFunctor, sigma: ExeNat, G: Comonad, A: Family, alpha: SliceMap,
                         s: SliceMap) -> CheckReport:
    """Classify ``(A, alpha, s)``: valid iff ``alpha`` is a coalgebra and
    ``alpha . s = G s . sigma(A) . P alpha``."""
    rep = CheckReport("algebra of coalgebra")
    coalg = Coalgebra(G, A, alpha, check=False)
    rep.absorb(check_coalgebra(coalg))
    Gf = G.functor
    p_alpha = P.map(alpha)
    for p in P(A).total.elements:
        rep.checked += 1
        lhs = alpha(s(p))
        rhs = Gf.elem(s, sigma.elem(A, p_alpha(p)))
        if lhs != rhs:
            rep.fail("alpha . s = G s . sigma(A) . P alpha", p)
            break
    return rep


def lift_initial_algebra(P: ExeFunctor, sigma: ExeNat, G: Comonad, chain: ChainResult,
                         Q: ExeFunctor | None = None) -> tuple[Coalgebra, Algebra]:
    """Lift a downstairs initial ``P``-algebra to the initial algebra of the
    lifted functor on ``G``-coalgebras.

    The coalgebra structure is the fold into ``(G W, G s . sigma(W))``.  If
    ``Q`` is given it must agree with the lifting on the result; otherwise
    the lifting is built from ``sigma``.
    """
    if not chain.stabilized:
        raise TypingMismatch("lift_initial_algebra needs a stabilised chain")
    Gf = G.functor
    W, s = chain.W, chain.s
    GW = Gf(W)
    target = Algebra(P, GW, compose_maps(Gf.map(s), sigma.component(W)))
    alpha = fold(chain, target)
    coalg = Coalgebra(G, W, SliceMap(W, GW, alpha.map, check=False), check=False)
    bad = coalgebra_law_witness(coalg)
    if bad is not None:
        raise LawViolation(f"lifted structure is not a coalgebra: {bad[0]} at {bad[1]!r}")
    if Q is None:
        Q = lift_functor_along_oplax(P, sigma, G, G)
    QW = Q(coalg)
    if QW.carrier != P(W):
        raise LawViolation("lifted functor does not sit over the downstairs functor")
    try:
        s_up = CoalgMap(QW, coalg, s, check=True)
    except NotCoalgMorphism as exc:
        raise LawViolation(f"structure map is not a coalgebra morphism: {exc}") from None
    return coalg, Algebra(Q, coalg, s_up)
