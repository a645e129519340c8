"""Finite sets and total functions between them.

Elements are :class:`Value` instances: tuples whose leading integer code
fixes a global total order (atoms < unit < pairs < tags < tables).  Every
constructed set stores its elements in that order, so enumeration,
equality and hashing are deterministic across runs.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from collections.abc import Mapping
from typing import Callable, Iterable, Iterator, Sequence

from .errors import BudgetExceeded, CodMismatch, NotIso, NotParallel, TypingMismatch

DEFAULT_BUDGET = 100_000
_BUDGET = contextvars.ContextVar("wcoalg_element_budget", default=DEFAULT_BUDGET)


def current_budget() -> int:
    return _BUDGET.get()


@contextlib.contextmanager
def element_budget(limit: int):
    """Temporarily change the maximum size of any constructed object."""
    token = _BUDGET.set(int(limit))
    try:
        yield
    finally:
        _BUDGET.reset(token)


def guard(count: int, what: str = "object") -> None:
    limit = _BUDGET.get()
    if count > limit:
        raise BudgetExceeded(f"{what} would have {count} elements (budget {limit})")


# ---------------------------------------------------------------------------
# Values


class Value(tuple):
    __slots__ = ()


class Atom(Value):
    __slots__ = ()

    def __new__(cls, name):
        return tuple.__new__(cls, (0, str(name)))

    def __getnewargs__(self):
        return (self[1],)

    @property
    def name(self) -> str:
        return self[1]

    def __repr__(self):
        return self[1]


class Unit(Value):
    __slots__ = ()

    def __new__(cls):
        return tuple.__new__(cls, (1,))

    def __getnewargs__(self):
        return ()

    def __repr__(self):
        return "*"


UNIT = Unit()


class Pair(Value):
    __slots__ = ()

    def __new__(cls, fst, snd):
        return tuple.__new__(cls, (2, fst, snd))

    def __getnewargs__(self):
        return (self[1], self[2])

    @property
    def fst(self):
        return self[1]

    @property
    def snd(self):
        return self[2]

    def __repr__(self):
        return f"({self[1]!r}, {self[2]!r})"


LEFT, RIGHT = "left", "right"


class Tag(Value):
    __slots__ = ()

    def __new__(cls, side, payload):
        if side not in (LEFT, RIGHT):
            raise ValueError(f"tag side must be {LEFT!r} or {RIGHT!r}, got {side!r}")
        return tuple.__new__(cls, (3, 0 if side == LEFT else 1, payload))

    def __getnewargs__(self):
        return (self.side, self[2])

    @property
    def side(self) -> str:
        return LEFT if self[1] == 0 else RIGHT

    @property
    def payload(self):
        return self[2]

    def __repr__(self):
        return f"{'inl' if self[1] == 0 else 'inr'}({self[2]!r})"


def inl(v) -> Tag:
    return Tag(LEFT, v)


def inr(v) -> Tag:
    return Tag(RIGHT, v)


class FnTable(Value):
    """A finite function as a value: entries sorted by key, keys unique."""

    __slots__ = ()

    def __new__(cls, entries=()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        srt = tuple(sorted((k, v) for k, v in items))
        for (k1, _), (k2, _) in zip(srt, srt[1:]):
            if k1 == k2:
                raise ValueError(f"duplicate key {k1!r} in FnTable")
        return tuple.__new__(cls, (4, srt))

    def __getnewargs__(self):
        return (self[1],)

    @property
    def entries(self) -> tuple:
        return self[1]

    def keys(self) -> tuple:
        return tuple(k for k, _ in self[1])

    def values(self) -> tuple:
        return tuple(v for _, v in self[1])

    def at(self, key):
        for k, v in self[1]:
            if k == key:
                return v
        raise KeyError(key)

    def remap(self, fn: Callable) -> "FnTable":
        """Postcompose every entry with ``fn`` (keys are untouched)."""
        return tuple.__new__(FnTable, (4, tuple((k, fn(v)) for k, v in self[1])))

    def __repr__(self):
        return "{" + ", ".join(f"{k!r}: {v!r}" for k, v in self[1]) + "}"


def atoms(*names) -> list[Atom]:
    """``atoms("a b c")`` or ``atoms("a", "b")``."""
    if len(names) == 1 and isinstance(names[0], str):
        names = names[0].split()
    return [Atom(n) for n in names]


def value_to_json(v):
    if isinstance(v, Atom):
        return v.name
    if isinstance(v, Unit):
        return []
    if isinstance(v, Pair):
        return [value_to_json(v.fst), value_to_json(v.snd)]
    if isinstance(v, Tag):
        return {"inl" if v.side == LEFT else "inr": value_to_json(v.payload)}
    if isinstance(v, FnTable):
        return {"fn": [[value_to_json(k), value_to_json(x)] for k, x in v.entries]}
    raise TypeError(f"not a Value: {v!r}")


def value_from_json(obj) -> Value:
    if isinstance(obj, str):
        return Atom(obj)
    if isinstance(obj, list):
        if not obj:
            return UNIT
        if len(obj) == 2:
            return Pair(value_from_json(obj[0]), value_from_json(obj[1]))
    if isinstance(obj, dict) and len(obj) == 1:
        (key, body), = obj.items()
        if key == "inl":
            return inl(value_from_json(body))
        if key == "inr":
            return inr(value_from_json(body))
        if key == "fn":
            return FnTable((value_from_json(k), value_from_json(x)) for k, x in body)
    raise ValueError(f"cannot decode value from {obj!r}")


# ---------------------------------------------------------------------------
# Sets and functions


class FinSet:
    __slots__ = ("elements", "_pos", "_hash")

    def __init__(self, elements: Iterable[Value] = ()):
        seq = elements if isinstance(elements, (tuple, list)) else list(elements)
        guard(len(seq), "finite set")
        for v in seq:
            if not isinstance(v, Value):
                raise TypeError(f"set elements must be Values, got {v!r}")
        # constructions mostly produce strictly increasing sequences already
        if all(a < b for a, b in zip(seq, seq[1:])):
            self.elements = tuple(seq)
        else:
            self.elements = tuple(sorted(set(seq)))
        self._pos = {v: k for k, v in enumerate(self.elements)}
        self._hash = None

    @classmethod
    def of(cls, *names) -> "FinSet":
        return cls(atoms(*names))

    def __len__(self):
        return len(self.elements)

    def __iter__(self) -> Iterator[Value]:
        return iter(self.elements)

    def __contains__(self, v):
        return v in self._pos

    def index(self, v) -> int:
        return self._pos[v]

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, FinSet) and self.elements == other.elements

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.elements)
        return self._hash

    def __le__(self, other: "FinSet") -> bool:
        return all(v in other._pos for v in self.elements)

    def subset(self, pred: Callable[[Value], bool]) -> "FinSet":
        return FinSet(v for v in self.elements if pred(v))

    def __repr__(self):
        return "{" + ", ".join(map(repr, self.elements)) + "}"


class FinFn:
    """A total function ``dom -> cod``; ``table`` is a mapping, callable or
    sequence aligned with ``dom.elements``."""

    __slots__ = ("dom", "cod", "images", "_hash")

    def __init__(self, dom: FinSet, cod: FinSet, table):
        if isinstance(table, Mapping):
            try:
                images = tuple(table[x] for x in dom.elements)
            except KeyError as exc:
                raise TypingMismatch(f"table is not total: missing {exc.args[0]!r}") from None
        elif callable(table):
            images = tuple(table(x) for x in dom.elements)
        else:
            images = tuple(table)
            if len(images) != len(dom.elements):
                raise TypingMismatch("image sequence does not match the domain")
        pos = cod._pos
        for x, y in zip(dom.elements, images):
            if y not in pos:
                raise TypingMismatch(f"{x!r} maps to {y!r}, which is outside the codomain")
        self.dom = dom
        self.cod = cod
        self.images = images
        self._hash = None

    def __call__(self, x):
        return self.images[self.dom._pos[x]]

    def items(self):
        return zip(self.dom.elements, self.images)

    def as_dict(self) -> dict:
        return dict(zip(self.dom.elements, self.images))

    def then(self, g: "FinFn") -> "FinFn":
        return compose(g, self)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, FinFn) and self.images == other.images
                and self.dom == other.dom and self.cod == other.cod)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dom, self.cod, self.images))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{x!r} -> {y!r}" for x, y in self.items())
        return f"FinFn({body})"


def identity(A: FinSet) -> FinFn:
    return FinFn(A, A, A.elements)


def const(A: FinSet, B: FinSet, b) -> FinFn:
    return FinFn(A, B, (b,) * len(A))


def compose(g: FinFn, f: FinFn) -> FinFn:
    """``g . f``."""
    if f.cod != g.dom:
        raise TypingMismatch("compose: codomain of f differs from domain of g")
    gpos, gim = g.dom._pos, g.images
    return FinFn(f.dom, g.cod, tuple(gim[gpos[y]] for y in f.images))


def inclusion(sub: FinSet, sup: FinSet) -> FinFn:
    return FinFn(sub, sup, sub.elements)


def image(f: FinFn) -> FinSet:
    return FinSet(f.images)


def corestrict(f: FinFn, sub: FinSet) -> FinFn:
    return FinFn(f.dom, sub, f.images)


TERMINAL = FinSet([UNIT])
INITIAL = FinSet()


def terminal() -> FinSet:
    return TERMINAL


def initial() -> FinSet:
    return INITIAL


def to_terminal(A: FinSet) -> FinFn:
    return const(A, TERMINAL, UNIT)


def from_initial(B: FinSet) -> FinFn:
    return FinFn(INITIAL, B, ())


# limits


def product(A: FinSet, B: FinSet):
    guard(len(A) * len(B), "product")
    P = FinSet(Pair(a, b) for a in A for b in B)
    return P, FinFn(P, A, lambda p: p[1]), FinFn(P, B, lambda p: p[2])


def pairing(f: FinFn, g: FinFn, P: FinSet | None = None) -> FinFn:
    """The map ``<f, g> : C -> A x B`` into a product built by :func:`product`."""
    if f.dom != g.dom:
        raise TypingMismatch("pairing needs a common domain")
    if P is None:
        P = product(f.cod, g.cod)[0]
    return FinFn(f.dom, P, tuple(Pair(a, b) for a, b in zip(f.images, g.images)))


def equalizer(f: FinFn, g: FinFn):
    if f.dom != g.dom or f.cod != g.cod:
        raise NotParallel("equalizer needs a parallel pair")
    E = FinSet(x for x, a, b in zip(f.dom.elements, f.images, g.images) if a == b)
    return E, inclusion(E, f.dom)


def factor_through(f: FinFn, m: FinFn) -> FinFn | None:
    """The unique ``k`` with ``m . k = f`` when ``m`` is monic; None if none exists."""
    if f.cod != m.cod:
        raise TypingMismatch("factor_through: codomains differ")
    back = {}
    for x, y in m.items():
        back.setdefault(y, x)
    out = []
    for y in f.images:
        if y not in back:
            return None
        out.append(back[y])
    return FinFn(f.dom, m.dom, out)


def pullback(f: FinFn, g: FinFn):
    if f.cod != g.cod:
        raise CodMismatch("pullback needs a common codomain")
    over = {}
    for b, c in g.items():
        over.setdefault(c, []).append(b)
    pairs = [Pair(a, b) for a, c in f.items() for b in over.get(c, ())]
    guard(len(pairs), "pullback")
    P = FinSet(pairs)
    return P, FinFn(P, f.dom, lambda p: p[1]), FinFn(P, g.dom, lambda p: p[2])


# colimits


def coproduct(A: FinSet, B: FinSet):
    guard(len(A) + len(B), "coproduct")
    S = FinSet([inl(a) for a in A] + [inr(b) for b in B])
    return S, FinFn(A, S, inl), FinFn(B, S, inr)


def copair(f: FinFn, g: FinFn, S: FinSet | None = None) -> FinFn:
    """The map ``[f, g] : A + B -> C`` out of a coproduct built by :func:`coproduct`."""
    if f.cod != g.cod:
        raise TypingMismatch("copairing needs a common codomain")
    if S is None:
        S = coproduct(f.dom, g.dom)[0]
    return FinFn(S, f.cod, lambda t: f(t[2]) if t[1] == 0 else g(t[2]))


def check_disjoint(S: FinSet, inl_map: FinFn, inr_map: FinFn) -> bool:
    if inl_map.cod != S or inr_map.cod != S:
        raise TypingMismatch("injections must land in the coproduct")
    if not (is_mono(inl_map) and is_mono(inr_map)):
        return False
    P, _, _ = pullback(inl_map, inr_map)
    return len(P) == 0


# exponentials and hom-sets


def exponential(A: FinSet, B: FinSet):
    guard(len(B) ** len(A), "exponential")
    E = FinSet(FnTable(zip(A.elements, imgs))
               for imgs in itertools.product(B.elements, repeat=len(A)))
    EA, _, _ = product(E, A)
    return E, FinFn(EA, B, lambda p: p[1].at(p[2]))


def curry(h: FinFn, C: FinSet, A: FinSet, E: FinSet | None = None) -> FinFn:
    """Transpose ``h : C x A -> B`` to ``C -> B^A``."""
    if E is None:
        E = exponential(A, h.cod)[0]
    return FinFn(C, E, lambda c: FnTable((a, h(Pair(c, a))) for a in A))


def uncurry(k: FinFn, A: FinSet, B: FinSet) -> FinFn:
    CA, _, _ = product(k.dom, A)
    return FinFn(CA, B, lambda p: k(p[1]).at(p[2]))


def hom_size(A: FinSet, B: FinSet) -> int:
    return len(B) ** len(A)


def hom(A: FinSet, B: FinSet) -> list[FinFn]:
    guard(hom_size(A, B), "hom-set")
    return [FinFn(A, B, imgs) for imgs in itertools.product(B.elements, repeat=len(A))]


def is_mono(f: FinFn) -> bool:
    return len(set(f.images)) == len(f.images)


def is_epi(f: FinFn) -> bool:
    return len(set(f.images)) == len(f.cod)


def is_iso(f: FinFn) -> bool:
    return len(f.dom) == len(f.cod) and is_mono(f)


def inverse(f: FinFn) -> FinFn:
    if not is_iso(f):
        raise NotIso(f"not a bijection: {f!r}")
    back = {y: x for x, y in f.items()}
    return FinFn(f.cod, f.dom, back)


def product_size(sizes: Sequence[int]) -> int:
    return math.prod(sizes)
