"""Slice categories ``FinSet/I``: families, fibrewise maps and the adjoint
triple ``sigma_along -| pullback_along -| pi_along``.

A :class:`Family` keeps its total set and projection, so dependent sums
are free and every map stays an ordinary :class:`~wcoalg.finset.FinFn`.
Elements built here are structured:

* ``pullback_along(u, X)``  -- ``Pair(i', x)``
* ``pi_along(u, X)``        -- ``Pair(b, FnTable{a: x})``, one table per section
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import NotIso, TypingMismatch
from .finset import (
    FinFn,
    FinSet,
    FnTable,
    Pair,
    TERMINAL,
    Value,
    compose,
    guard,
    identity,
    inl,
    inr,
)


class Family:
    """An object of ``FinSet/index``: a set fibred over ``index`` by ``proj``."""

    __slots__ = ("total", "index", "proj", "_fibers", "_hash")

    def __init__(self, total: FinSet, index: FinSet, proj):
        if not isinstance(proj, FinFn):
            proj = FinFn(total, index, proj)
        elif proj.dom != total or proj.cod != index:
            raise TypingMismatch("projection must go from the total set to the index")
        self.total = total
        self.index = index
        self.proj = proj
        self._fibers = None
        self._hash = None

    @classmethod
    def from_fibers(cls, index: FinSet, fibers: Mapping) -> "Family":
        owner = {}
        for i, xs in fibers.items():
            if i not in index:
                raise TypingMismatch(f"{i!r} is not in the index")
            for x in xs:
                if owner.setdefault(x, i) != i:
                    raise TypingMismatch(f"{x!r} lies in two fibres")
        total = FinSet(owner)
        return cls(total, index, owner)

    @property
    def fibers(self) -> dict:
        if self._fibers is None:
            fib = {i: [] for i in self.index.elements}
            for x, i in zip(self.total.elements, self.proj.images):
                fib[i].append(x)
            self._fibers = {i: tuple(xs) for i, xs in fib.items()}
        return self._fibers

    def fiber(self, i) -> tuple:
        return self.fibers[i]

    def fiber_sizes(self) -> tuple:
        return tuple(len(self.fibers[i]) for i in self.index.elements)

    def __len__(self):
        return len(self.total)

    def __iter__(self):
        return iter(self.total.elements)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Family) and self.index == other.index
                and self.total == other.total and self.proj.images == other.proj.images)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.total, self.index, self.proj.images))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{i!r}: {list(xs)!r}" for i, xs in self.fibers.items())
        return f"Family({body})"


class SliceMap:
    """A map of families commuting with the projections."""

    __slots__ = ("src", "dst", "map", "_hash")

    def __init__(self, src: Family, dst: Family, table, check: bool = True):
        fn = table if isinstance(table, FinFn) else FinFn(src.total, dst.total, table)
        if check:
            if fn.dom != src.total or fn.cod != dst.total:
                raise TypingMismatch("underlying map has the wrong domain or codomain")
            if src.index != dst.index:
                raise TypingMismatch("families live over different indices")
            dproj = dst.proj
            for x, i, y in zip(src.total.elements, src.proj.images, fn.images):
                if dproj(y) != i:
                    raise TypingMismatch(f"{x!r} over {i!r} is sent to {y!r} over {dproj(y)!r}")
        self.src = src
        self.dst = dst
        self.map = fn
        self._hash = None

    def __call__(self, x):
        return self.map(x)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, SliceMap) and self.map.images == other.map.images
                and self.src == other.src and self.dst == other.dst)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.src, self.dst, self.map.images))
        return self._hash

    def __repr__(self):
        return f"SliceMap({dict(self.map.items())!r})"


# ---------------------------------------------------------------------------
# basic structure of a single slice


def terminal_family(I: FinSet) -> Family:
    return Family(I, I, identity(I))


def initial_family(I: FinSet) -> Family:
    return Family(FinSet(), I, ())


def over_terminal(S: FinSet) -> Family:
    """View a plain set as an object of ``FinSet/1``."""
    return Family(S, TERMINAL, (next(iter(TERMINAL)),) * len(S))


def identity_map(X: Family) -> SliceMap:
    return SliceMap(X, X, identity(X.total), check=False)


def compose_maps(g: SliceMap, f: SliceMap) -> SliceMap:
    if f.dst != g.src:
        raise TypingMismatch("compose_maps: f.dst differs from g.src")
    return SliceMap(f.src, g.dst, compose(g.map, f.map), check=False)


def to_terminal_map(X: Family) -> SliceMap:
    return SliceMap(X, terminal_family(X.index), X.proj, check=False)


def from_initial_map(X: Family) -> SliceMap:
    return SliceMap(initial_family(X.index), X, (), check=False)


def hom_slice_size(X: Family, Y: Family) -> int:
    return math.prod(len(Y.fiber(i)) for i in X.proj.images)


def iter_hom_slice(X: Family, Y: Family) -> Iterator[SliceMap]:
    """All maps ``X -> Y`` over the index, in canonical order."""
    if X.index != Y.index:
        raise TypingMismatch("families live over different indices")
    guard(hom_slice_size(X, Y), "slice hom-set")
    choices = [Y.fiber(i) for i in X.proj.images]
    for imgs in itertools.product(*choices):
        yield SliceMap(X, Y, FinFn(X.total, Y.total, imgs), check=False)


def hom_slice(X: Family, Y: Family) -> list[SliceMap]:
    return list(iter_hom_slice(X, Y))


def is_mono_map(m: SliceMap) -> bool:
    return len(set(m.map.images)) == len(m.map.images)


def is_iso_map(m: SliceMap) -> bool:
    return len(m.src) == len(m.dst) and is_mono_map(m)


def inverse_map(m: SliceMap) -> SliceMap:
    if not is_iso_map(m):
        raise NotIso("slice map is not invertible")
    back = {y: x for x, y in m.map.items()}
    return SliceMap(m.dst, m.src, back, check=False)


def subfamily(X: Family, keep) -> tuple[Family, SliceMap]:
    """The subobject of ``X`` on the elements in ``keep`` (any container)."""
    total = FinSet(x for x in X.total.elements if x in keep)
    S = Family(total, X.index, tuple(X.proj(x) for x in total.elements))
    return S, SliceMap(S, X, total.elements, check=False)


def image_family(m: SliceMap) -> tuple[Family, SliceMap]:
    return subfamily(m.dst, set(m.map.images))


def slice_pullback(m1: SliceMap, m2: SliceMap):
    """Pullback of a cospan in the slice; elements are ``Pair(x, y)``."""
    if m1.dst != m2.dst:
        raise TypingMismatch("slice_pullback needs a common codomain")
    over = {}
    for y, z in m2.map.items():
        over.setdefault(z, []).append(y)
    pairs = [Pair(x, y) for x, z in m1.map.items() for y in over.get(z, ())]
    guard(len(pairs), "slice pullback")
    total = FinSet(pairs)
    P = Family(total, m1.src.index, lambda p: m1.src.proj(p[1]))
    return (P, SliceMap(P, m1.src, lambda p: p[1], check=False),
            SliceMap(P, m2.src, lambda p: p[2], check=False))


def slice_product(X: Family, Y: Family):
    return slice_pullback(to_terminal_map(X), to_terminal_map(Y))


def slice_equalizer(m1: SliceMap, m2: SliceMap):
    if m1.src != m2.src or m1.dst != m2.dst:
        raise TypingMismatch("slice_equalizer needs a parallel pair")
    keep = {x for x, a, b in zip(m1.src.total.elements, m1.map.images, m2.map.images) if a == b}
    return subfamily(m1.src, keep)


def slice_coproduct(X: Family, Y: Family):
    if X.index != Y.index:
        raise TypingMismatch("families live over different indices")
    guard(len(X) + len(Y), "slice coproduct")
    total = FinSet([inl(x) for x in X] + [inr(y) for y in Y])
    S = Family(total, X.index, lambda t: X.proj(t[2]) if t[1] == 0 else Y.proj(t[2]))
    return S, SliceMap(X, S, inl, check=False), SliceMap(Y, S, inr, check=False)


def slice_copair(f: SliceMap, g: SliceMap, S: Family) -> SliceMap:
    return SliceMap(S, f.dst, lambda t: f(t[2]) if t[1] == 0 else g(t[2]))


# ---------------------------------------------------------------------------
# change of base


def _check_base(u: FinFn, X: Family, side: str) -> None:
    base = u.cod if side == "cod" else u.dom
    if X.index != base:
        where = "codomain" if side == "cod" else "domain"
        raise TypingMismatch(f"family must live over the {where} of the base map")


def pullback_along(u: FinFn, X: Family) -> Family:
    """``u* X`` for ``u : I' -> I`` and ``X`` over ``I``."""
    _check_base(u, X, "cod")
    fib = X.fibers
    pairs = [Pair(i2, x) for i2, i in u.items() for x in fib[i]]
    guard(len(pairs), "pullback")
    total = FinSet(pairs)
    return Family(total, u.dom, lambda p: p[1])


def pullback_along_map(u: FinFn, m: SliceMap) -> SliceMap:
    return SliceMap(pullback_along(u, m.src), pullback_along(u, m.dst),
                    lambda p: Pair(p[1], m(p[2])), check=False)


def sigma_along(u: FinFn, X: Family) -> Family:
    """``u_! X`` for ``u : I' -> I`` and ``X`` over ``I'``."""
    _check_base(u, X, "dom")
    return Family(X.total, u.cod, compose(u, X.proj))


def sigma_along_map(u: FinFn, m: SliceMap) -> SliceMap:
    return SliceMap(sigma_along(u, m.src), sigma_along(u, m.dst), m.map, check=False)


def pi_fiber_count(u: FinFn, X: Family) -> int:
    fib = X.fibers
    over = {b: [] for b in u.cod}
    for a, b in u.items():
        over[b].append(a)
    return sum(math.prod(len(fib[a]) for a in slots) for slots in over.values())


def pi_along(u: FinFn, X: Family) -> Family:
    """``u_* X``: over ``b`` the sections of ``X`` on the fibre ``u^-1(b)``."""
    _check_base(u, X, "dom")
    guard(pi_fiber_count(u, X), "dependent product")
    fib = X.fibers
    over = {b: [] for b in u.cod}
    for a, b in u.items():
        over[b].append(a)
    elems = []
    for b, slots in over.items():
        for choice in itertools.product(*(fib[a] for a in slots)):
            elems.append(Pair(b, FnTable(zip(slots, choice))))
    total = FinSet(elems)
    return Family(total, u.cod, lambda p: p[1])


def pi_elem(m, p):
    """Action of ``pi_along(u, m)`` on one section."""
    return Pair(p[1], p[2].remap(m))


def pi_along_map(u: FinFn, m: SliceMap) -> SliceMap:
    return SliceMap(pi_along(u, m.src), pi_along(u, m.dst),
                    lambda p: pi_elem(m, p), check=False)


# ---------------------------------------------------------------------------
# adjunction witnesses


def sigma_unit(u: FinFn, X: Family) -> SliceMap:
    """``X -> u* u_! X``."""
    target = pullback_along(u, sigma_along(u, X))
    return SliceMap(X, target, lambda x: Pair(X.proj(x), x), check=False)


def sigma_counit(u: FinFn, Y: Family) -> SliceMap:
    """``u_! u* Y -> Y``."""
    src = sigma_along(u, pullback_along(u, Y))
    return SliceMap(src, Y, lambda p: p[2], check=False)


def transpose_sigma(u: FinFn, X: Family, Y: Family, phi: SliceMap) -> SliceMap:
    """``(u_! X -> Y)  |->  (X -> u* Y)``."""
    if phi.src != sigma_along(u, X) or phi.dst != Y:
        raise TypingMismatch("phi must be a map u_! X -> Y")
    return SliceMap(X, pullback_along(u, Y), lambda x: Pair(X.proj(x), phi(x)), check=False)


def untranspose_sigma(u: FinFn, X: Family, Y: Family, psi: SliceMap) -> SliceMap:
    if psi.src != X or psi.dst != pullback_along(u, Y):
        raise TypingMismatch("psi must be a map X -> u* Y")
    return SliceMap(sigma_along(u, X), Y, lambda x: psi(x)[2], check=False)


def pi_unit(u: FinFn, Z: Family) -> SliceMap:
    """``Z -> u_* u* Z``."""
    target = pi_along(u, pullback_along(u, Z))
    over = _fibres_of(u)
    return SliceMap(Z, target, lambda z: Pair(Z.proj(z), FnTable(
        (a, Pair(a, z)) for a in over[Z.proj(z)])), check=False)


def pi_counit(u: FinFn, X: Family) -> SliceMap:
    """Evaluation ``u* u_* X -> X``."""
    src = pullback_along(u, pi_along(u, X))
    return SliceMap(src, X, lambda p: p[2][2].at(p[1]), check=False)


def transpose_pi(u: FinFn, Z: Family, X: Family, phi: SliceMap) -> SliceMap:
    """``(u* Z -> X)  |->  (Z -> u_* X)``."""
    if phi.src != pullback_along(u, Z) or phi.dst != X:
        raise TypingMismatch("phi must be a map u* Z -> X")
    over = _fibres_of(u)
    return SliceMap(Z, pi_along(u, X), lambda z: Pair(Z.proj(z), FnTable(
        (a, phi(Pair(a, z))) for a in over[Z.proj(z)])), check=False)


def untranspose_pi(u: FinFn, Z: Family, X: Family, psi: SliceMap) -> SliceMap:
    if psi.src != Z or psi.dst != pi_along(u, X):
        raise TypingMismatch("psi must be a map Z -> u_* X")
    return SliceMap(pullback_along(u, Z), X, lambda p: psi(p[2])[2].at(p[1]), check=False)


def _fibres_of(u: FinFn) -> dict:
    over = {b: [] for b in u.cod}
    for a, b in u.items():
        over[b].append(a)
    return over


# ---------------------------------------------------------------------------
# slices of slices


def over_base(X: Family, K: Family) -> Family:
    """Regard ``X`` over ``K.total`` as an object of ``FinSet/K.index``."""
    if X.index != K.total:
        raise TypingMismatch("X must live over the total set of K")
    return Family(X.total, K.index, compose(K.proj, X.proj))


@dataclass(frozen=True)
class SliceOfSlice:
    """The isomorphism ``(FinSet/I)/K  ~  FinSet/K.total`` for ``K`` over ``I``.

    An object on the left is a slice map ``Y -> K``; on the right a family
    over ``K.total``.  Morphisms on both sides are the same underlying maps.
    """

    K: Family

    def to_flat(self, obj: SliceMap) -> Family:
        if obj.dst != self.K:
            raise TypingMismatch("object must be a slice map into K")
        return Family(obj.src.total, self.K.total, obj.map)

    def from_flat(self, X: Family) -> SliceMap:
        return SliceMap(over_base(X, self.K), self.K, X.proj, check=False)

    def map_to_flat(self, m: SliceMap, src: SliceMap, dst: SliceMap) -> SliceMap:
        return SliceMap(self.to_flat(src), self.to_flat(dst), m.map)

    def map_from_flat(self, m: SliceMap) -> SliceMap:
        return SliceMap(self.from_flat(m.src).src, self.from_flat(m.dst).src, m.map)


def slice_of_slice(K: Family) -> SliceOfSlice:
    return SliceOfSlice(K)

