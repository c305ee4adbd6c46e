"""Ground truth: brute-force selection checkers, canonical Player II strategies
for countable spaces, and the library of scripted Player I opponents."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence

from .cp import (
    ConstantG,
    FnFamily,
    finite_illegal,
    shrinking_family,
    test_family,
    with_full_sublevel,
)
from .errors import BudgetExhausted, SearchSpaceOverflow
from .games import Adversary, Arity, Game, GameSpec, Strategy, play
from .groups import Group
from .spaces import CoverFamily, PointComplement, Space, ball_cover, canonical_u0, contains

SEARCH_BOUND = 10**6


# ---------------------------------------------------------------------------
# brute force over finite instances


@dataclass(frozen=True)
class FiniteInstance:
    """Finite families A_1..A_N of hashable labels and a decidable target
    predicate on the set of selected labels."""

    families: tuple
    predicate: Callable[[frozenset], bool]

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(tuple(f) for f in self.families))
        if not self.families or not all(self.families):
            raise ValueError("families must be nonempty")


def _subsets_upto(family: tuple, cap: int) -> list[tuple]:
    return [c for size in range(cap + 1) for c in itertools.combinations(family, size)]


def _search(options: list[list[tuple]], predicate, bound: int) -> Optional[tuple]:
    if math.prod(len(o) for o in options) > bound:
        raise SearchSpaceOverflow(f"more than {bound} capped selections")
    for choice in itertools.product(*options):
        if predicate(frozenset(x for part in choice for x in part)):
            return choice
    return None


def sfin_bruteforce(inst: FiniteInstance, cap: int, bound: int = SEARCH_BOUND) -> Optional[tuple]:
    """First selection (B_1..B_N), |B_n| <= cap, whose union satisfies the
    predicate, or None.  Order: per family by size then position."""
    return _search([_subsets_upto(f, cap) for f in inst.families], inst.predicate, bound)


def s1_bruteforce(inst: FiniteInstance, bound: int = SEARCH_BOUND) -> Optional[tuple]:
    found = _search([[(x,) for x in f] for f in inst.families], inst.predicate, bound)
    return None if found is None else tuple(b[0] for b in found)


class FixedFamilies(Adversary):
    name = "fixed"

    def __init__(self, families):
        self.families = tuple(tuple(f) for f in families)

    def move(self, history, n):
        return self.families[n - 1]


class ChoiceStrategy(Strategy):
    """Answers inning n with a fixed tuple of indices into A_n."""

    def __init__(self, game: Game, choices: Sequence[tuple]):
        self.game = game
        self.choices = tuple(choices)
        self.name = f"choices{self.choices}"

    def respond(self, moves, n):
        return [(i, moves[-1][i]) for i in self.choices[n - 1]]


def strategy_pool(inst: FiniteInstance, game: Game, cap: int = 1) -> Iterator[ChoiceStrategy]:
    """Every Player II strategy against the fixed script, one per choice sequence."""
    if game.arity is Arity.SINGLE:
        options = [[(i,) for i in range(len(f))] for f in inst.families]
    else:
        options = [[c for size in range(cap + 1) for c in itertools.combinations(range(len(f)), size)]
                   for f in inst.families]
    for choice in itertools.product(*options):
        yield ChoiceStrategy(game, choice)


def pool_outcome(inst: FiniteInstance, game: Game, cap: int = 1) -> bool:
    """True iff some strategy in the pool wins the truncated game on the engine."""
    spec = GameSpec(game, rounds=len(inst.families), predicate=inst.predicate)
    adversary = FixedFamilies(inst.families)
    return any(play(spec, adversary, s).verdict.kind == "IIWins" for s in strategy_pool(inst, game, cap))


# ---------------------------------------------------------------------------
# canonical strategies


class EnumerationStrategy(Strategy):
    """At inning n pick the first cover member containing the first growth*n
    enumerated points.

    On a countable space this wins the Omega-Menger and Omega-Rothberger
    games: every finite set is eventually inside a prefix, and each selected
    member contains its prefix.  It only reads the current cover and n.
    """

    markov = True

    def __init__(self, space: Space, arity: Arity = Arity.FINITE, growth: int = 2, budget: int = 256):
        self.space = space
        self.arity = arity
        self.growth = growth
        self.budget = budget
        self.game = Game.GFIN_OMEGA if arity is Arity.FINITE else Game.G1_OMEGA
        self.name = "enumeration" if arity is Arity.FINITE else "enumeration_single"

    def candidates(self, cover: CoverFamily, n: int):
        pts = self.space.prefix(self.growth * n)
        for i, U in cover.members(self.budget):
            if all(contains(U, p) for p in pts):
                yield i, U

    def respond(self, moves, n):
        for sel in self.candidates(moves[-1], n):
            return [sel]
        raise BudgetExhausted(f"no member of {moves[-1]} contains the first {self.growth * n} points")


class GreedyNbhdStrategy(Strategy):
    """At inning n pick the first family member inside W_e(prefix, r/n).

    The prefix is the first growth*n enumerated points and r = d(g, e).
    Scaling by r makes the radius correspond to the arc parameter 1/n for
    every group here, so the choice does not depend on G.
    """

    markov = True

    def __init__(self, space: Space, group: Group, arity: Arity = Arity.FINITE, growth: int = 2,
                 budget: int = 256):
        self.space = space
        self.group = group
        self.arity = arity
        self.growth = growth
        self.budget = budget
        self.game = Game.CFT if arity is Arity.FINITE else Game.SCFT
        self.name = "greedy_nbhd" if arity is Arity.FINITE else "greedy_nbhd_single"

    def candidates(self, family: FnFamily, n: int):
        pts = self.space.prefix(self.growth * n)
        eps = self.group.separation / n
        for i, f in family.members(self.budget):
            if all(f.dist_to_e(p) < eps for p in pts):
                yield i, f

    def respond(self, moves, n):
        for sel in self.candidates(moves[-1], n):
            return [sel]
        raise BudgetExhausted(f"no member of {moves[-1]} near e on the first {self.growth * n} points")


def enumeration_strategy(X: Space, arity: Arity = Arity.FINITE, **kw) -> EnumerationStrategy:
    return EnumerationStrategy(X, arity, **kw)


def greedy_nbhd_strategy(X: Space, G: Group, arity: Arity = Arity.FINITE, **kw) -> GreedyNbhdStrategy:
    return GreedyNbhdStrategy(X, G, arity, **kw)


class EmptyStrategy(Strategy):
    """Never selects anything."""

    name = "empty"

    def __init__(self, game: Game):
        self.game = game

    def respond(self, moves, n):
        return []


class HistorySensitive(Strategy):
    """Wraps a canonical strategy but takes its second candidate whenever the
    first move of the game differs from the current one; not Markov."""

    def __init__(self, base):
        self.base = base
        self.game = base.game
        self.name = f"history_sensitive({base.name})"

    def respond(self, moves, n):
        skip = 0 if moves[0] is moves[-1] else 1
        for j, sel in enumerate(self.base.candidates(moves[-1], n)):
            if j == skip:
                return [sel]
        raise BudgetExhausted("not enough candidates")


# ---------------------------------------------------------------------------
# Player I scripts


@lru_cache(maxsize=None)
def u0_cover(X: Space) -> CoverFamily:
    return canonical_u0(X)


@lru_cache(maxsize=None)
def shrinking_ball_cover(X: Space, n: int) -> CoverFamily:
    return ball_cover(X, n)


@lru_cache(maxsize=None)
def u0_tail_cover(X: Space, n: int) -> CoverFamily:
    """{X \\ {x_j} : j >= n}."""
    return CoverFamily("U0", f"U0_tail{n}({X.name})", generator=lambda j: PointComplement(X.point(j + n)))


@lru_cache(maxsize=None)
def cover_tests(cover: CoverFamily, X: Space, G: Group) -> FnFamily:
    return test_family(cover, X, G)


@lru_cache(maxsize=None)
def shrinking_constants(X: Space, G: Group) -> FnFamily:
    return shrinking_family(X, G)


@lru_cache(maxsize=None)
def mixed_family(X: Space, G: Group, n: int) -> FnFamily:
    return with_full_sublevel(shrinking_ball_cover(X, n), X, G)


class ScriptedAdversary(Adversary):
    """Oblivious Player I: the move depends only on the inning (and a seed)."""

    def __init__(self, name: str, script: Callable[[int], object], certified: bool = True):
        self.name = name
        self.script = script
        self.certified = certified

    def move(self, history, n):
        return self.script(n)


def _seeded_choice(seed: int, n: int, options: Sequence):
    return options[random.Random(f"{seed}:{n}").randrange(len(options))]


def cover_adversaries(X: Space, seed: int = 0) -> dict[str, ScriptedAdversary]:
    scripts = {
        "u0": lambda n: u0_cover(X),
        "shrinking_balls": lambda n: shrinking_ball_cover(X, n),
        "u0_tail": lambda n: u0_tail_cover(X, n),
        "alternating_covers": lambda n: u0_cover(X) if n % 2 else shrinking_ball_cover(X, n),
        "random_covers": lambda n: _seeded_choice(
            seed, n, [u0_cover(X), shrinking_ball_cover(X, n), u0_tail_cover(X, n)]),
    }
    return {name: ScriptedAdversary(name, fn) for name, fn in scripts.items()}


def function_adversaries(X: Space, G: Group, seed: int = 0) -> dict[str, ScriptedAdversary]:
    def tests_u0(n):
        return cover_tests(u0_cover(X), X, G)

    def tests_balls(n):
        return cover_tests(shrinking_ball_cover(X, n), X, G)

    scripts = {
        "test_family_u0": tests_u0,
        "test_family_balls": tests_balls,
        "degenerate": lambda n: shrinking_constants(X, G),
        "alternating": lambda n: tests_u0(n) if n % 2 else shrinking_constants(X, G),
        "with_full_sublevel": lambda n: mixed_family(X, G, n),
        "random_functions": lambda n: _seeded_choice(
            seed, n, [tests_u0(n), tests_balls(n), shrinking_constants(X, G)]),
    }
    library = {name: ScriptedAdversary(name, fn) for name, fn in scripts.items()}
    illegal = finite_illegal([ConstantG(X, G, G.marked)])
    library["finite_illegal"] = ScriptedAdversary("finite_illegal", lambda n: illegal, certified=False)
    return library


def adversary_library(X: Space, G: Optional[Group] = None, seed: int = 0) -> dict[str, ScriptedAdversary]:
    """All scripted opponents for X (and for C_p(X, G) when G is given)."""
    library = dict(cover_adversaries(X, seed))
    if G is not None:
        library.update(function_adversaries(X, G, seed))
    return library


CERTIFIED_COVER_ADVERSARIES = ("u0", "shrinking_balls", "u0_tail", "alternating_covers", "random_covers")
CERTIFIED_FUNCTION_ADVERSARIES = ("test_family_u0", "test_family_balls", "degenerate", "alternating",
                                  "with_full_sublevel", "random_functions")


def probe_pairs(moves: Sequence, count: int = 16, length: int = 3) -> list[tuple[list, list]]:
    """Pairs of histories that differ before the last inning but end in the same
    move object, cycling through ``moves``; input for replay_markov_check."""
    k = len(moves)
    if k < 2:
        raise ValueError("need at least two distinct moves")
    pairs = []
    for i in range(count):
        last = moves[i % k]
        a = [moves[(i + 1 + j) % k] for j in range(length - 1)] + [last]
        b = [moves[(i + 2 + 2 * j) % k] for j in range(length - 1)] + [last]
        if a[:-1] == b[:-1]:
            b[0] = moves[(i + k - 1) % k]
        pairs.append((a, b))
    return pairs


def markov_probes(X: Space, side: str, G: Optional[Group] = None, count: int = 16) -> list:
    """Probe pairs built from the certified scripts' moves on the given side."""
    library = adversary_library(X, G)
    names = CERTIFIED_COVER_ADVERSARIES[:3] if side == "cover" else ("test_family_u0", "test_family_balls", "degenerate")
    moves = [library[name].move([], n) for name in names for n in (1, 2)]
    return probe_pairs(moves, count)
