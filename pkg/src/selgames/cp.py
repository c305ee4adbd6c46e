"""The function space C_p(X, G) at the constant identity function.

Functions are exactly evaluable on enumerated points; Player I's moves in the
tightness games are lazily enumerated families of them.  Sublevel sets
{x : d(f(x), e) < 1/n} of test functions come out as exact ball unions
because the Urysohn part is a minimum of scaled distances and the arc is
linear in the metric.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .errors import ApproximateOnly, BudgetExhausted
from .groups import FULL, Group
from .spaces import (
    AffineMap,
    CoverFamily,
    Empty,
    OpenSet,
    Point,
    Space,
    Urysohn,
    Whole,
    ball_union,
    contains,
    dist,
    dovetail_subset,
    fmt_point,
    index_subsets,
    pull_back,
    urysohn,
)


class CpFunction:
    space: Space
    group: Group
    exact = True

    def eval(self, x: Point):
        raise NotImplementedError

    def dist_to_e(self, x: Point) -> Fraction:
        return self.group.norm(self.eval(x))

    @property
    def descriptor(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.descriptor


@dataclass(frozen=True)
class ConstantE(CpFunction):
    space: Space
    group: Group

    def eval(self, x):
        return self.group.identity

    def dist_to_e(self, x):
        return Fraction(0)

    @property
    def descriptor(self):
        return "e"


@dataclass(frozen=True)
class ConstantG(CpFunction):
    space: Space
    group: Group
    value: object

    def eval(self, x):
        return self.value

    @property
    def descriptor(self):
        return f"const({fmt_point(self.value)})"


@dataclass(frozen=True)
class TestFn(CpFunction):
    """f_{F,U} = gamma o phi: equal to e on F and to the marked g off U.

    ``cover_index`` tags which member of Player I's cover U came from; it is
    bookkeeping only and does not take part in equality.
    """

    __test__ = False

    space: Space
    group: Group
    F: tuple
    U: OpenSet
    phi: Urysohn = field(compare=False, repr=False)
    cover_index: Optional[int] = field(default=None, compare=False)

    @property
    def exact(self):
        return self.phi.exact

    def eval(self, x):
        return self.group.arc(self.phi(x))

    def dist_to_e(self, x):
        return self.group.arc_norm(self.phi(x))

    @property
    def descriptor(self):
        return "test(F=[" + ", ".join(fmt_point(p) for p in self.F) + f"], U={self.U})"


@dataclass(frozen=True)
class Reindexed(CpFunction):
    """y -> inner(map(y)), with map an affine bijection from ``space`` onto
    ``inner.space``."""

    space: Space
    map: AffineMap
    inner: CpFunction

    @property
    def group(self):
        return self.inner.group

    @property
    def exact(self):
        return self.inner.exact

    def eval(self, x):
        return self.inner.eval(self.map(x))

    def dist_to_e(self, x):
        return self.inner.dist_to_e(self.map(x))

    @property
    def descriptor(self):
        return f"reindex({self.map}, {self.inner.descriptor})"


@dataclass(frozen=True)
class Translated(CpFunction):
    """Pointwise left translation x -> shift * inner(x)."""

    shift: object
    inner: CpFunction

    @property
    def space(self):
        return self.inner.space

    @property
    def group(self):
        return self.inner.group

    def eval(self, x):
        return self.group.op(self.shift, self.inner.eval(x))

    @property
    def descriptor(self):
        return f"translate({fmt_point(self.shift)}, {self.inner.descriptor})"


@dataclass(frozen=True)
class GenericEval(CpFunction):
    """Arbitrary evaluator; continuity is declared, never verified."""

    space: Space
    group: Group
    evaluator: Callable = field(compare=False)
    name: str = "generic"
    exact = False

    def eval(self, x):
        return self.evaluator(x)

    @property
    def descriptor(self):
        return f"generic({self.name})"


def test_function(F: Sequence[Point], U: OpenSet, X: Space, G: Group,
                  cover_index: Optional[int] = None) -> TestFn:
    phi = urysohn(F, U, X)
    return TestFn(X, G, phi.points, U, phi, cover_index)


test_function.__test__ = False


def identity_function(X: Space, G: Group) -> ConstantE:
    return ConstantE(X, G)


# ---------------------------------------------------------------------------
# neighbourhoods and closure


@dataclass(frozen=True)
class Nbhd:
    """Basic neighbourhood W_e(F, eps) of the constant identity function."""

    F: tuple
    eps: Fraction

    def __str__(self):
        return "W([" + ", ".join(fmt_point(p) for p in self.F) + f"], {self.eps})"


def _warn_if_generic(f: CpFunction):
    if not f.exact:
        warnings.warn(f"{f.descriptor} is not exactly evaluable here", ApproximateOnly)


def in_nbhd(f: CpFunction, W: Nbhd) -> bool:
    _warn_if_generic(f)
    return all(f.dist_to_e(x) < W.eps for x in W.F)


class FnFamily:
    """A Player I move in a tightness game: a finite or lazy family of functions.

    Kinds: ``TestFamily`` (all f_{F,U} over a cover, carried in ``cover``),
    ``Shrinking``, ``WithFullSublevel`` and ``FiniteIllegal``.  ``certified``
    marks families whose closure property follows from a checked cover.
    """

    def __init__(self, kind: str, descriptor: str, space: Space, group: Group,
                 members: Optional[Sequence[CpFunction]] = None,
                 generator: Optional[Callable[[int], CpFunction]] = None,
                 cover: Optional[CoverFamily] = None, certified: bool = False):
        if (members is None) == (generator is None):
            raise ValueError("give exactly one of members / generator")
        self.kind = kind
        self.descriptor = descriptor
        self.space = space
        self.group = group
        self.cover = cover
        self.certified = certified
        self._members = None if members is None else tuple(members)
        self._generator = generator
        self._cache: dict[int, CpFunction] = {}

    @property
    def finite(self) -> bool:
        return self._members is not None

    def member(self, i: int) -> Optional[CpFunction]:
        if self._members is not None:
            return self._members[i] if i < len(self._members) else None
        if i not in self._cache:
            self._cache[i] = self._generator(i)
        return self._cache[i]

    def members(self, budget: int) -> Iterator[tuple[int, CpFunction]]:
        for i in itertools.count():
            if not self.finite and i >= budget:
                return
            f = self.member(i)
            if f is None:
                return
            yield i, f

    def __repr__(self):
        return f"FnFamily({self.descriptor})"

    def __str__(self):
        return self.descriptor


def _unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    j = z - w * (w + 1) // 2
    return w - j, j


def test_family(cover: CoverFamily, X: Space, G: Group) -> FnFamily:
    """A_n = {f_{F,U} : U in cover, F finite subset of U}.

    Even slots 2q give f_{F,U_q} with F the first q enumerated points that lie
    in U_q; odd slots run a diagonal pairing of (cover index, dovetailed subset
    index), intersecting the subset with U.  Every (F, U) pair occurs.
    """
    def cover_member(q):
        if cover.finite:
            size = sum(1 for _ in cover.members(0))
            q %= size
        return q, cover.member(q)

    def member(t):
        if t % 2 == 0:
            q, U = cover_member(t // 2)
            idx = range(t // 2)
        else:
            i, j = _unpair((t - 1) // 2)
            q, U = cover_member(i)
            idx = dovetail_subset(j)
        F = [p for p in (X.point(i) for i in idx) if contains(U, p)]
        return test_function(F, U, X, G, cover_index=q)

    return FnFamily("TestFamily", f"tests({cover.descriptor})", X, G, generator=member,
                    cover=cover, certified=True)


test_family.__test__ = False


def shrinking_family(X: Space, G: Group) -> FnFamily:
    """Constants gamma(1/k), k = 1, 2, ...; converges to e uniformly."""
    return FnFamily("Shrinking", f"shrinking({X.name})", X, G,
                    generator=lambda i: ConstantG(X, G, G.arc(Fraction(1, i + 1))))


def with_full_sublevel(cover: CoverFamily, X: Space, G: Group) -> FnFamily:
    """Test functions over ``cover`` interleaved with shrinking constants."""
    tests = test_family(cover, X, G)
    consts = shrinking_family(X, G)
    return FnFamily(
        "WithFullSublevel", f"mixed({cover.descriptor})", X, G,
        generator=lambda t: (tests if t % 2 == 0 else consts).member(t // 2),
    )


def finite_illegal(functions: Sequence[CpFunction], descriptor: Optional[str] = None) -> FnFamily:
    functions = tuple(functions)
    f0 = functions[0]
    descriptor = descriptor or "finite[" + "; ".join(f.descriptor for f in functions) + "]"
    return FnFamily("FiniteIllegal", descriptor, f0.space, f0.group, members=functions)


@dataclass(frozen=True)
class ClosureResult:
    ok: bool
    failed: Optional[Nbhd] = None

    def __bool__(self):
        return self.ok


def _norm_masks(f: CpFunction, points, grid) -> tuple[int, ...]:
    norms = [f.dist_to_e(p) for p in points]
    return tuple(sum(1 << i for i, v in enumerate(norms) if v < eps) for eps in grid)


def closure_contains_e(A: FnFamily, m: int, k: int, eps_grid: Sequence[Fraction],
                       budget: int = 256) -> ClosureResult:
    """Check e in closure(A) against every W_e(F, eps) with F a small subset of
    the first m points and eps in the grid.

    Finite families are refuted outright; lazy ones raise BudgetExhausted when
    a neighbourhood has no witness among the first ``budget`` members.
    """
    grid = tuple(Fraction(e) for e in eps_grid)
    pts = A.space.prefix(m)
    members = A.members(budget)
    masks: list[tuple[int, ...]] = []
    for F in index_subsets(m, k):
        fmask = sum(1 << i for i in F)
        for g, eps in enumerate(grid):
            i = 0
            found = False
            while True:
                if i == len(masks):
                    nxt = next(members, None)
                    if nxt is None:
                        break
                    _warn_if_generic(nxt[1])
                    masks.append(_norm_masks(nxt[1], pts, grid))
                if fmask & ~masks[i][g] == 0:
                    found = True
                    break
                i += 1
            if not found:
                W = Nbhd(tuple(pts[j] for j in F), eps)
                if A.finite:
                    return ClosureResult(False, W)
                raise BudgetExhausted(f"{A.descriptor}: no member in {W} among the first {budget}", W)
    return ClosureResult(True)


# ---------------------------------------------------------------------------
# sublevel sets


def sublevel(f: CpFunction, n: int, sample: int = 64) -> OpenSet:
    """U_{f,n} = {x : d(f(x), e) < 1/n}, exact for every variant except
    translated and generic functions (sampled, flagged ApproximateOnly)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = Fraction(1, n)
    if isinstance(f, ConstantE):
        return Whole()
    if isinstance(f, ConstantG):
        return Whole() if f.group.norm(f.value) < eps else Empty()
    if isinstance(f, TestFn):
        t = f.group.ball_preimage(eps)
        if t is FULL:
            return Whole()
        witness = f.U.witness
        return ball_union([(x, t * D) for x, D in zip(f.phi.points, f.phi.scales)], witness)
    if isinstance(f, Reindexed):
        return pull_back(sublevel(f.inner, n, sample), f.map)
    return _sampled_sublevel(f, eps, sample)


def _sampled_sublevel(f: CpFunction, eps: Fraction, sample: int) -> OpenSet:
    warnings.warn(f"sublevel of {f.descriptor} is sampled on {sample} points", ApproximateOnly)
    pts = f.space.prefix(sample)
    inside = [p for p in pts if f.dist_to_e(p) < eps]
    outside = [p for p in pts if p not in inside]
    if not outside:
        return Whole()
    balls = []
    for p in inside:
        balls.append((p, min(dist(p, q) for q in outside) / 2))
    return ball_union(balls)

