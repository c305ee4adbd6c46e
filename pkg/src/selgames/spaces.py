"""Countable metric spaces with exact rational geometry.

Points of the one-dimensional spaces are bare :class:`~fractions.Fraction`
values; the rational square uses pairs and the Chebyshev metric, which keeps
every distance rational.  Open sets are finite unions of open balls or point
complements, and all membership tests use strict, exact comparisons.
"""

from __future__ import annotations

import bisect
import itertools
import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Optional, Sequence, Union

from .errors import (
    ApproximateOnly,
    BudgetExhausted,
    DegenerateDistance,
    NotContained,
    NotProper,
)

Point = Union[Fraction, tuple]

ONE = Fraction(1)
ZERO = Fraction(0)


def rational(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` literal into an exact rational."""
    if isinstance(value, float):
        raise TypeError(f"floating-point value {value!r} is not an exact rational")
    return Fraction(str(value)) if not isinstance(value, (int, Fraction)) else Fraction(value)


def fmt_point(p: Point) -> str:
    if isinstance(p, tuple):
        return "(" + ";".join(str(c) for c in p) + ")"
    return str(p)


def parse_point(text: str) -> Point:
    text = text.strip()
    if text.startswith("("):
        return tuple(rational(c) for c in text.strip("()").split(";"))
    return rational(text)


def dist(a: Point, b: Point) -> Fraction:
    if isinstance(a, tuple):
        return max(abs(x - y) for x, y in zip(a, b))
    return abs(a - b)


# ---------------------------------------------------------------------------
# enumerations


class _LazySequence:
    """Grow-only memo of an infinite generator; safe to index from several threads."""

    def __init__(self, gen: Iterator):
        self._gen = gen
        self._items: list = []
        self._lock = threading.Lock()

    def __getitem__(self, i: int):
        if i < 0:
            raise IndexError(i)
        if i >= len(self._items):
            with self._lock:
                while len(self._items) <= i:
                    self._items.append(next(self._gen))
        return self._items[i]

    def prefix(self, m: int) -> tuple:
        if m > 0:
            self[m - 1]
        return tuple(self._items[:m])


def _interval_points():
    yield ZERO
    yield ONE
    for q in itertools.count(2):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                yield Fraction(p, q)


def _sequence_points():
    yield ZERO
    for n in itertools.count(1):
        yield Fraction(1, n)


def _square_points():
    for s in itertools.count(0):
        for i in range(s + 1):
            yield (_INTERVAL[i], _INTERVAL[s - i])


_INTERVAL = _LazySequence(_interval_points())
_SEQUENCE = _LazySequence(_sequence_points())
_SQUARE = _LazySequence(_square_points())
_ENUMERATIONS = {
    "rational_interval": _INTERVAL,
    "convergent_sequence": _SEQUENCE,
    "rational_square": _SQUARE,
}


@dataclass(frozen=True)
class AffineMap:
    """x -> scale * x + shift on the rational line (scale != 0)."""

    scale: Fraction
    shift: Fraction = ZERO

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError("affine map must be invertible")

    def __call__(self, x: Fraction) -> Fraction:
        return self.scale * x + self.shift

    def inverse(self) -> AffineMap:
        return AffineMap(1 / self.scale, -self.shift / self.scale)

    def then(self, other: AffineMap) -> AffineMap:
        """The map x -> other(self(x))."""
        return AffineMap(other.scale * self.scale, other.scale * self.shift + other.shift)

    @property
    def is_identity(self) -> bool:
        return self.scale == 1 and self.shift == 0

    def __str__(self):
        return f"affine({self.scale},{self.shift})"


@dataclass(frozen=True)
class Space:
    """A countable metric space with a total injective enumeration.

    ``kind`` is one of ``rational_interval``, ``convergent_sequence``,
    ``rational_square`` or ``reindexed``.  A reindexed space is the image of
    ``base`` under an affine bijection, enumerated in the transported order.
    """

    kind: str
    base: Optional[Space] = None
    map: Optional[AffineMap] = None

    def __post_init__(self):
        if self.kind == "reindexed":
            if self.base is None or self.map is None or self.base.dim != 1:
                raise ValueError("reindexed space needs a 1-D base and an affine map")
        elif self.kind not in _ENUMERATIONS:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @classmethod
    def reindexed(cls, base: Space, map: AffineMap) -> Space:
        return cls("reindexed", base, map)

    @property
    def dim(self) -> int:
        if self.kind == "reindexed":
            return 1
        return 2 if self.kind == "rational_square" else 1

    @property
    def exact(self) -> bool:
        """True when distances to complements are computed exactly (1-D spaces)."""
        if self.kind == "reindexed":
            return self.base.exact
        return self.kind != "rational_square"

    @property
    def name(self) -> str:
        if self.kind == "reindexed":
            return f"reindexed({self.base.name},{self.map.scale},{self.map.shift})"
        return self.kind

    def __str__(self):
        return self.name

    def point(self, i: int) -> Point:
        if self.kind == "reindexed":
            return self.map(self.base.point(i))
        return _ENUMERATIONS[self.kind][i]

    def prefix(self, m: int) -> tuple:
        if self.kind == "reindexed":
            return tuple(self.map(p) for p in self.base.prefix(m))
        return _ENUMERATIONS[self.kind].prefix(m)

    def is_member(self, x) -> bool:
        if self.kind == "reindexed":
            return not isinstance(x, tuple) and self.base.is_member(self.map.inverse()(x))
        if self.kind == "rational_square":
            return isinstance(x, tuple) and len(x) == 2 and all(0 <= c <= 1 for c in x)
        if isinstance(x, tuple) or not 0 <= x <= 1:
            return False
        if self.kind == "convergent_sequence":
            return x == 0 or x.numerator == 1
        return True


RATIONAL_INTERVAL = Space("rational_interval")
CONVERGENT_SEQUENCE = Space("convergent_sequence")
RATIONAL_SQUARE = Space("rational_square")


def dovetail_subset(j: int) -> tuple[int, ...]:
    """The j-th nonempty finite set of enumeration indices.

    Even slots list the prefixes {0}, {0,1}, {0,1,2}, ... so that searches for
    large initial segments stay short; odd slots run through every nonempty
    finite set in binary order, which makes the enumeration exhaustive.
    """
    if j % 2 == 0:
        return tuple(range(j // 2 + 1))
    code = (j - 1) // 2 + 1
    return tuple(i for i in range(code.bit_length()) if code >> i & 1)


# ---------------------------------------------------------------------------
# open sets


class OpenSet:
    witness: Optional[Point] = None

    @property
    def descriptor(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.descriptor


@dataclass(frozen=True)
class BallUnion(OpenSet):
    balls: tuple
    witness: Optional[Point] = field(default=None, compare=False)

    @property
    def descriptor(self) -> str:
        return "balls(" + ", ".join(f"{fmt_point(c)}:{r}" for c, r in self.balls) + ")"

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        return [(c - r, c + r) for c, r in self.balls]

    @cached_property
    def _sorted_bounds(self):
        # normalized 1-D unions are disjoint and sorted, so one bisection decides membership
        ivs = self.intervals()
        return [lo for lo, _ in ivs], [hi for _, hi in ivs]

    def __contains__(self, x) -> bool:
        if isinstance(x, tuple):
            return any(dist(x, c) < r for c, r in self.balls)
        los, his = self._sorted_bounds
        i = bisect.bisect_left(los, x) - 1
        return i >= 0 and x < his[i]


@dataclass(frozen=True)
class PointComplement(OpenSet):
    excluded: Point

    @property
    def witness(self):
        return self.excluded

    @property
    def descriptor(self) -> str:
        return f"complement({fmt_point(self.excluded)})"


@dataclass(frozen=True)
class Whole(OpenSet):
    @property
    def descriptor(self) -> str:
        return "whole"


@dataclass(frozen=True)
class Empty(OpenSet):
    @property
    def descriptor(self) -> str:
        return "empty"


def ball_union(balls, witness: Optional[Point] = None) -> OpenSet:
    """Normalize a list of (center, radius) pairs into a canonical open set.

    In one dimension overlapping intervals are merged, so two ball lists with
    the same union compare equal.  Non-positive radii are dropped.
    """
    balls = [(c, rational(r)) for c, r in balls if r > 0]
    if not balls:
        return Empty()
    if isinstance(balls[0][0], tuple):
        return BallUnion(tuple(sorted(set(balls))), witness)
    merged: list[list[Fraction]] = []
    for lo, hi in sorted((c - r, c + r) for c, r in balls):
        if merged and lo < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return BallUnion(tuple(((lo + hi) / 2, (hi - lo) / 2) for lo, hi in merged), witness)


def parse_open_set(text: str) -> OpenSet:
    """Inverse of ``OpenSet.descriptor``: ``whole``, ``empty``, ``complement(q)``,
    ``balls(c:r, c:r, ...)``."""
    text = text.strip()
    if text == "whole":
        return Whole()
    if text == "empty":
        return Empty()
    if text.startswith("complement(") and text.endswith(")"):
        return PointComplement(parse_point(text[len("complement("):-1]))
    if text.startswith("balls(") and text.endswith(")"):
        body = text[len("balls("):-1].strip()
        balls = []
        for item in filter(None, (s.strip() for s in body.split(","))):
            center, _, radius = item.rpartition(":")
            balls.append((parse_point(center), rational(radius)))
        return ball_union(balls)
    raise ValueError(f"cannot parse open set literal {text!r}")


def contains(U: OpenSet, x: Point) -> bool:
    if isinstance(U, BallUnion):
        return x in U
    if isinstance(U, PointComplement):
        return x != U.excluded
    return isinstance(U, Whole)


def pull_back(U: OpenSet, A: AffineMap) -> OpenSet:
    """The preimage {b : A(b) in U} of a 1-D open set under an affine map."""
    if isinstance(U, BallUnion):
        inv = A.inverse()
        witness = None if U.witness is None else inv(U.witness)
        return ball_union([(inv(c), r / abs(A.scale)) for c, r in U.balls], witness)
    if isinstance(U, PointComplement):
        return PointComplement(A.inverse()(U.excluded))
    return U


def _complement_components(intervals, lo=ZERO, hi=ONE) -> list[tuple[Fraction, Fraction]]:
    """Closed components of [lo, hi] minus a finite union of open intervals."""
    comps = []
    start = lo
    for a, b in sorted(intervals):
        if a < start:
            if b > start:
                start = b
            continue
        if start <= hi:
            comps.append((start, min(a, hi)))
        start = max(start, b)
    if start <= hi:
        comps.append((start, hi))
    return comps


@lru_cache(maxsize=4096)
def _components(U: OpenSet) -> list[tuple[Fraction, Fraction]]:
    if isinstance(U, Empty):
        return [(ZERO, ONE)]
    return _complement_components(U.intervals())


@lru_cache(maxsize=4096)
def _sequence_components(U: OpenSet) -> list[tuple[Fraction, Fraction]]:
    """Complement components that contain a point of the convergent sequence."""
    return [(a, b) for a, b in _components(U) if _nearest_sequence_point(a, a, b) is not None]


@lru_cache(maxsize=4096)
def _component_starts(U: OpenSet) -> list[Fraction]:
    return [a for a, _ in _components(U)]


def _nearest_sequence_point(x: Fraction, a: Fraction, b: Fraction) -> Optional[Fraction]:
    """Nearest point of {0} u {1/k} inside [a, b] to x, or None."""
    cands = []
    if a == 0:
        cands.append(ZERO)
    below = min(x, b)
    if below > 0:
        p = Fraction(1, max(1, math.ceil(1 / below)))
        if a <= p <= b:
            cands.append(p)
    above = max(x, a)
    if 0 < above <= 1:
        p = Fraction(1, math.floor(1 / above))
        if a <= p <= b:
            cands.append(p)
    return min(cands, key=lambda p: abs(p - x)) if cands else None


def _base_view(U: OpenSet, X: Space, x=None):
    """Transport (U, x) down to a non-reindexed space; returns (U, base, x, scale)."""
    scale = ONE
    while X.kind == "reindexed":
        U = pull_back(U, X.map)
        if x is not None:
            x = X.map.inverse()(x)
        scale *= abs(X.map.scale)
        X = X.base
    return U, X, x, scale


def distance_to_complement(x: Point, U: OpenSet, X: Space) -> Optional[Fraction]:
    """Exact dist(x, X \\ U) on a 1-D space; None when U covers X."""
    if not X.exact:
        raise ApproximateOnly(f"no exact complement geometry on {X.name}")
    if isinstance(U, Whole):
        return None
    if isinstance(U, PointComplement):
        return dist(x, U.excluded)
    U, base, x, scale = _base_view(U, X, x)
    seq = base.kind == "convergent_sequence"
    comps = _sequence_components(U) if seq else _components(U)
    starts = [lo for lo, _ in comps] if seq else _component_starts(U)
    best = None
    # components are sorted and disjoint: walk outward from x, stopping once
    # the gap to the next component already exceeds the best distance
    right = bisect.bisect_right(starts, x)
    for order in (range(right - 1, -1, -1), range(right, len(comps))):
        for idx in order:
            lo, hi = comps[idx]
            gap = max(lo - x, x - hi, ZERO)
            if best is not None and gap >= best:
                break
            if seq:
                q = _nearest_sequence_point(x, lo, hi)
                if q is None:
                    continue
                gap = abs(q - x)
            if best is None or gap < best:
                best = gap
    return None if best is None else best * scale


def covers_whole(U: OpenSet, X: Space, sample: int = 256) -> bool:
    """Decide whether U is all of X (exactly on 1-D spaces)."""
    if isinstance(U, Whole):
        return True
    if isinstance(U, (Empty, PointComplement)):
        return False
    if not X.exact:
        warnings.warn(f"covers_whole on {X.name} checks only {sample} sampled points", ApproximateOnly)
        return all(contains(U, p) for p in X.prefix(sample))
    U, base, _, _ = _base_view(U, X)
    comps = _components(U)
    if base.kind == "convergent_sequence":
        return all(_nearest_sequence_point(a, a, b) is None for a, b in comps)
    return not comps


def is_proper(U: OpenSet, X: Space, budget: int = 256) -> bool:
    if isinstance(U, Whole):
        return False
    if X.exact:
        return not covers_whole(U, X)
    if U.witness is not None or not isinstance(U, BallUnion):
        return True
    pick_witness_outside(U, X, budget)
    return True


def pick_witness_outside(U: OpenSet, X: Space, budget: int = 256) -> Point:
    """A point of X outside U: the stored witness, else the first enumerated one."""
    if isinstance(U, Whole):
        raise NotProper("the whole space has no point outside it")
    if U.witness is not None:
        return U.witness
    for p in X.prefix(budget):
        if not contains(U, p):
            return p
    raise BudgetExhausted(f"no point outside {U} among the first {budget} points")


# ---------------------------------------------------------------------------
# cover families


class CoverFamily:
    """A finite or lazily enumerated family of open sets.

    Lazy generators map an index to a member and must be pure.  A generator may
    return None to signal that nothing more is visible within its own budget;
    the family is still treated as lazy, so a failed search is undecided rather
    than refuted.
    """

    def __init__(self, kind: str, descriptor: str, members: Optional[Sequence[OpenSet]] = None,
                 generator: Optional[Callable[[int], Optional[OpenSet]]] = None):
        if (members is None) == (generator is None):
            raise ValueError("give exactly one of members / generator")
        self.kind = kind
        self.descriptor = descriptor
        self._members = None if members is None else tuple(members)
        self._generator = generator
        self._cache: dict[int, Optional[OpenSet]] = {}

    @property
    def finite(self) -> bool:
        return self._members is not None

    def member(self, i: int) -> Optional[OpenSet]:
        if self._members is not None:
            return self._members[i] if i < len(self._members) else None
        if i not in self._cache:
            self._cache[i] = self._generator(i)
        return self._cache[i]

    def members(self, budget: int) -> Iterator[tuple[int, OpenSet]]:
        for i in itertools.count():
            if not self.finite and i >= budget:
                return
            U = self.member(i)
            if U is None:
                return
            yield i, U

    def __repr__(self):
        return f"CoverFamily({self.descriptor})"

    def __str__(self):
        return self.descriptor


def canonical_u0(X: Space) -> CoverFamily:
    """The point-complement cover {X \\ {x} : x in X}, indexed by the enumeration."""
    return CoverFamily("U0", f"U0({X.name})", generator=lambda i: PointComplement(X.point(i)))


def ball_cover(X: Space, n: int) -> CoverFamily:
    """Shrinking ball cover for inning n.

    Member j is the union of balls around the points of ``dovetail_subset(j)``
    with radius 1/2^(n + M + 2), M the largest index used.  The radius is small
    enough that every member misses a point of X, so the family is an
    omega-cover on both 1-D spaces.
    """
    def member(j):
        idx = dovetail_subset(j)
        radius = Fraction(1, 2 ** (n + idx[-1] + 2))
        return ball_union([(X.point(i), radius) for i in idx])

    return CoverFamily("BallCover", f"balls_n{n}({X.name})", generator=member)


def finite_cover(sets: Sequence[OpenSet], descriptor: Optional[str] = None) -> CoverFamily:
    descriptor = descriptor or "cover[" + "; ".join(s.descriptor for s in sets) + "]"
    return CoverFamily("UserScripted", descriptor, members=sets)


@lru_cache(maxsize=64)
def index_subsets(m: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All index sets F of {0..m-1} with 1 <= |F| <= k, in lexicographic order."""
    subsets = [c for size in range(1, k + 1) for c in itertools.combinations(range(m), size)]
    return tuple(sorted(subsets))


def point_mask(U: OpenSet, points: Sequence[Point]) -> int:
    mask = 0
    for i, p in enumerate(points):
        if contains(U, p):
            mask |= 1 << i
    return mask


@dataclass(frozen=True)
class OmegaResult:
    ok: bool
    counterexample: Optional[tuple] = None
    improper: Optional[OpenSet] = None

    def __bool__(self):
        return self.ok


def omega_check(C: CoverFamily, X: Space, m: int, k: int, budget: int = 256) -> OmegaResult:
    """Check the omega-cover property of C against every small subset of a prefix.

    Every F of at most k of the first m points must lie in one of the first
    ``budget`` members, and every member inspected on the way must be proper.
    A finite family that misses some F yields the first such F in
    lexicographic order of index sets; a lazy family raises BudgetExhausted.
    """
    if m < 1 or k < 1:
        raise ValueError("depth parameters must be positive")
    pts = X.prefix(m)
    members = C.members(budget)
    masks: list[int] = []
    for F in index_subsets(m, k):
        fmask = sum(1 << i for i in F)
        i = 0
        covered = False
        while True:
            if i == len(masks):
                nxt = next(members, None)
                if nxt is None:
                    break
                U = nxt[1]
                if not is_proper(U, X, budget):
                    return OmegaResult(False, improper=U)
                masks.append(point_mask(U, pts))
            if fmask & ~masks[i] == 0:
                covered = True
                break
            i += 1
        if not covered:
            witness = tuple(pts[j] for j in F)
            if C.finite:
                return OmegaResult(False, counterexample=witness)
            raise BudgetExhausted(
                f"{C.descriptor}: {tuple(map(fmt_point, witness))} not covered by the first {budget} members",
                witness,
            )
    return OmegaResult(True)


# ---------------------------------------------------------------------------
# Urysohn functions


@dataclass(frozen=True)
class Urysohn:
    """phi(y) = min_i min(1, dist(y, x_i) / D_i); phi = 1 when F is empty."""

    points: tuple
    scales: tuple
    exact: bool = True

    def __call__(self, y: Point) -> Fraction:
        value = ONE
        for x, D in zip(self.points, self.scales):
            d = dist(y, x)
            if d < D * value:
                value = d / D
        return value


def urysohn(F: Sequence[Point], U: OpenSet, X: Space, sample: int = 256) -> Urysohn:
    """Continuous phi: X -> [0, 1] with phi = 0 on F and phi = 1 off U.

    On 1-D spaces the scales D_i = dist(x_i, X \\ U) are exact.  On the
    rational square they come from the first ``sample`` enumerated points, so
    phi = 1 off U is only guaranteed on that sample.
    """
    F = tuple(sorted(set(F)))
    if isinstance(U, Whole) or covers_whole(U, X, sample):
        raise NotProper(f"{U} is the whole space")
    for x in F:
        if not contains(U, x):
            raise NotContained(f"{fmt_point(x)} is not in {U}")
    scales = []
    for x in F:
        if X.exact:
            D = distance_to_complement(x, U, X)
        else:
            outside = [dist(x, p) for p in X.prefix(sample) if not contains(U, p)]
            if not outside:
                raise BudgetExhausted(f"no sampled point outside {U}")
            D = min(outside)
        if D == 0:
            raise DegenerateDistance(f"{fmt_point(x)} touches the complement of {U}")
        scales.append(D)
    if F and not X.exact:
        warnings.warn(f"Urysohn scales on {X.name} are sampled", ApproximateOnly)
    return Urysohn(F, tuple(scales), X.exact)
