from __future__ import annotations

from hypothesis import assume, strategies as st

from wcoalg.coalg import family_of_sizes
from wcoalg.finset import Atom, FinFn, FinSet
from wcoalg.slice import Family, SliceMap


def named_set(prefix: str, n: int) -> FinSet:
    return FinSet(Atom(f"{prefix}{k}") for k in range(n))


@st.composite
def finsets(draw, prefix: str = "a", max_size: int = 3):
    return named_set(prefix, draw(st.integers(0, max_size)))


@st.composite
def fns(draw, A: FinSet, B: FinSet):
    if not len(B):
        if len(A):
            raise ValueError("no map into the empty set")
        return FinFn(A, B, ())
    imgs = draw(st.lists(st.sampled_from(B.elements), min_size=len(A), max_size=len(A)))
    return FinFn(A, B, imgs)


@st.composite
def arrows(draw, max_size: int = 3):
    """A random map ``A -> B`` with ``B`` nonempty whenever ``A`` is."""
    A = draw(finsets("a", max_size))
    B = draw(finsets("b", max_size).filter(lambda B: len(B) or not len(A)))
    return draw(fns(A, B))


@st.composite
def families(draw, index: FinSet, prefix: str = "x", max_fiber: int = 3):
    sizes = draw(st.lists(st.integers(0, max_fiber), min_size=len(index), max_size=len(index)))
    return family_of_sizes(index, sizes, prefix)


@st.composite
def slice_maps(draw, X: Family, Y: Family):
    table = {}
    for i in X.index:
        targets = Y.fiber(i)
        for x in X.fiber(i):
            if not targets:
                assume(False)
            table[x] = draw(st.sampled_from(targets))
    return SliceMap(X, Y, table)


def random_stratified(rng, levels: int = 3, max_shapes: int = 2, max_arity: int = 2, name: str = "S"):
    """A random endopolynomial on ``levels`` graded indices whose slots sit
    strictly below their shape, so the chain stops."""
    from wcoalg.polynomial import Polynomial

    I = named_set("L", levels)
    idx = I.elements
    f_tab, g_tab, h_tab = {}, {}, {}
    for n, j in enumerate(idx):
        for k in range(rng.randint(1 if n == 0 else 0, max_shapes)):
            b = Atom(f"b{n}_{k}")
            f_tab[b] = j
            arity = rng.randint(0, max_arity) if n else 0
            for s in range(arity):
                a = Atom(f"a{n}_{k}_{s}")
                g_tab[a] = b
                h_tab[a] = idx[rng.randrange(n)]
    A, B = FinSet(g_tab), FinSet(f_tab)
    return Polynomial(FinFn(A, I, h_tab), FinFn(A, B, g_tab), FinFn(B, I, f_tab), name=name)


def tree_counts(p) -> dict:
    """Number of well-founded trees over each index, by recursion on the grading."""
    memo: dict = {}

    def count(j):
        if j not in memo:
            memo[j] = sum(
                _prod(count(p.h(a)) for a in p.slots(b)) for b in p.B if p.f(b) == j
            )
        return memo[j]

    return {j: count(j) for j in p.J}


def _prod(xs) -> int:
    out = 1
    for x in xs:
        out *= x
    return out


def random_algebra(P, X, rng):
    """A uniformly random structure map ``P(X) -> X``, or None if there is none."""
    from wcoalg.engine import Algebra

    PX = P(X)
    table = {}
    for y in PX.total:
        fib = X.fiber(PX.proj(y))
        if not fib:
            return None
        table[y] = rng.choice(fib)
    return Algebra(P, X, SliceMap(PX, X, table))


def random_polynomial(rng, I: FinSet, J: FinSet, max_size: int = 3, name: str = "P"):
    """Any polynomial ``I <- A -> B -> J`` with ``|A|, |B| <= max_size``."""
    from wcoalg.polynomial import Polynomial

    B = named_set(f"{name}b", rng.randint(0, max_size) if len(J) else 0)
    A = named_set(f"{name}a", rng.randint(0, max_size) if len(B) and len(I) else 0)
    pick = lambda S: rng.choice(S.elements)  # noqa: E731
    return Polynomial(FinFn(A, I, lambda a: pick(I)), FinFn(A, B, lambda a: pick(B)),
                      FinFn(B, J, lambda b: pick(J)), name=name)


def random_family(rng, index: FinSet, max_fiber: int = 2, prefix: str = "x"):
    return family_of_sizes(index, [rng.randint(0, max_fiber) for _ in index], prefix)


def random_slice_map(rng, X, Y):
    table = {}
    for x in X:
        fib = Y.fiber(X.proj(x))
        if not fib:
            return None
        table[x] = rng.choice(fib)
    return SliceMap(X, Y, table)
