"""Truncated two-player selection games: engine, judges and transcripts.

Player I plays a family each inning; Player II answers with indexed members
of it.  After N innings the selections are judged at a finite depth: every
set of at most k of the first m enumerated points (and, for the tightness
games, every eps in a fixed grid) must be handled by some selected member.
A IIWins verdict is therefore evidence about the first N innings at that
depth, never a proof about the infinite game.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

import yaml

from .cp import ConstantE, FnFamily, closure_contains_e, finite_illegal
from .errors import BudgetExhausted, IllegalMove
from .groups import Group
from .spaces import CoverFamily, Space, finite_cover, fmt_point, is_proper, omega_check

Selection = tuple  # (index into Player I's move, member)


class Arity(enum.Enum):
    FINITE = "finite"
    SINGLE = "single"


class Game(enum.Enum):
    GFIN_OMEGA = "GfinOmega"
    G1_OMEGA = "G1Omega"
    CFT = "CFT"
    SCFT = "SCFT"
    GFIN_ABSTRACT = "GfinAbstract"
    G1_ABSTRACT = "G1Abstract"

    @property
    def arity(self) -> Arity:
        if self in (Game.G1_OMEGA, Game.SCFT, Game.G1_ABSTRACT):
            return Arity.SINGLE
        return Arity.FINITE

    @property
    def side(self) -> str:
        if self in (Game.GFIN_OMEGA, Game.G1_OMEGA):
            return "cover"
        if self in (Game.CFT, Game.SCFT):
            return "tightness"
        return "abstract"


DEFAULT_GRID = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))


@dataclass(frozen=True)
class Depth:
    m: int = 16
    k: int = 3
    eps_grid: tuple = DEFAULT_GRID

    def __post_init__(self):
        if self.m < 1 or self.k < 1 or not self.eps_grid:
            raise ValueError("depth parameters must be positive")
        grid = tuple(sorted((Fraction(e) for e in self.eps_grid), reverse=True))
        if grid[-1] <= 0:
            raise ValueError("eps grid must be positive")
        object.__setattr__(self, "eps_grid", grid)


@dataclass(frozen=True)
class GameSpec:
    game: Game
    space: Optional[Space] = None
    group: Optional[Group] = None
    rounds: int = 12
    depth: Depth = Depth()
    budget: int = 256
    seed: int = 0
    predicate: Optional[Callable[[frozenset], bool]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.rounds < 1 or self.budget < 1:
            raise ValueError("rounds and budget must be positive")
        if self.game.side == "tightness" and self.group is None:
            raise ValueError(f"{self.game.value} needs a group")
        if self.game.side == "abstract" and self.predicate is None:
            raise ValueError("abstract games need a winning predicate")


class Strategy:
    """A Player II strategy.

    ``respond`` sees Player I's moves A_1..A_n and returns a list of
    (index, member) selections from A_n.  Instances may keep per-game state;
    the engine always plays a ``fresh()`` copy.
    """

    name = "strategy"
    game: Game
    markov = False

    def respond(self, moves: Sequence[Any], n: int) -> list[Selection]:
        raise NotImplementedError

    def fresh(self) -> Strategy:
        return self

    def annotation(self) -> Optional[dict]:
        return None

    def __str__(self):
        return self.name


class Adversary:
    """A Player I script.  ``certified`` scripts skip the budgeted closure search
    when their move carries a cover that can be checked directly."""

    name = "adversary"
    certified = False

    def move(self, history: Sequence[tuple], n: int) -> Any:
        raise NotImplementedError

    def fresh(self) -> Adversary:
        return self

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Verdict:
    kind: str  # IIWins | IWins | Undecided
    reason: str = ""

    @property
    def winner(self) -> Optional[str]:
        return {"IIWins": "II", "IWins": "I"}.get(self.kind)

    def __str__(self):
        return self.kind + (f" ({self.reason})" if self.reason else "")


II_WINS = Verdict("IIWins")


def describe(x) -> str:
    if hasattr(x, "descriptor"):
        return x.descriptor
    if isinstance(x, (Fraction, tuple)):
        return fmt_point(x)
    return str(x)


@dataclass
class InningRecord:
    n: int
    move: str
    response: list
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"n": self.n, "move": self.move, "response": list(self.response)}
        if self.notes:
            d["notes"] = self.notes
        return d

    @classmethod
    def from_dict(cls, d: dict) -> InningRecord:
        return cls(int(d["n"]), d["move"], list(d.get("response") or []), dict(d.get("notes") or {}))


@dataclass
class Transcript:
    """Replayable record of one truncated game.

    ``moves`` and ``selected`` keep the live objects for inspection; they are
    not serialized and take no part in equality.
    """

    header: dict
    innings: list
    verdict: Verdict
    moves: list = field(default_factory=list, compare=False, repr=False)
    selected: list = field(default_factory=list, compare=False, repr=False)
    responses: list = field(default_factory=list, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "innings": [r.to_dict() for r in self.innings],
            "verdict": {"kind": self.verdict.kind, "reason": self.verdict.reason},
        }

    @classmethod
    def from_dict(cls, d: dict) -> Transcript:
        v = d["verdict"]
        return cls(dict(d["header"]), [InningRecord.from_dict(r) for r in d.get("innings") or []],
                   Verdict(v["kind"], v.get("reason") or ""))

    def emit(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False,
                              allow_unicode=True, width=10_000)

    @classmethod
    def parse(cls, text: str) -> Transcript:
        return cls.from_dict(yaml.safe_load(text))

    def game_side(self) -> str:
        """Serialization without strategy notes: just the played moves and answers."""
        d = self.to_dict()
        for r in d["innings"]:
            r.pop("notes", None)
        return yaml.safe_dump(d, sort_keys=False, width=10_000)


def spec_header(spec: GameSpec, adversary: Adversary, strategy: Strategy) -> dict:
    header = {"game": spec.game.value}
    if spec.space is not None:
        header["space"] = spec.space.name
    if spec.game.side == "tightness":
        header["group"] = spec.group.name
    header.update({
        "rounds": spec.rounds,
        "depth": {"m": spec.depth.m, "k": spec.depth.k, "eps_grid": [str(e) for e in spec.depth.eps_grid]},
        "budget": spec.budget,
        "seed": spec.seed,
        "adversary": str(adversary),
        "strategy": str(strategy),
    })
    return header


# ---------------------------------------------------------------------------
# judges


def judge_omega(selected: Sequence, X: Space, depth: Depth, budget: int = 256) -> Verdict:
    """Player II wins iff the union of the selections is an omega-cover at depth."""
    for U in selected:
        # omega_check stops at the first covering member, so properness is checked for all here
        if not is_proper(U, X, budget):
            return Verdict("IWins", f"selected member {U} is not proper")
    result = omega_check(finite_cover(list(selected)), X, depth.m, depth.k, budget)
    if result.ok:
        return II_WINS
    if result.improper is not None:
        return Verdict("IWins", f"selected member {result.improper} is not proper")
    return Verdict("IWins", "uncovered " + "{" + ", ".join(map(fmt_point, result.counterexample)) + "}")


def judge_closure(selected: Sequence, X: Space, depth: Depth) -> Verdict:
    """Player II wins iff every W_e(F, eps) at depth meets the selections."""
    if not selected:
        return Verdict("IWins", "nothing selected")
    result = closure_contains_e(finite_illegal(list(selected), "selected"), depth.m, depth.k, depth.eps_grid)
    if result.ok:
        return II_WINS
    return Verdict("IWins", f"no selected function in {result.failed}")


# ---------------------------------------------------------------------------
# engine


def _check_player_one(spec: GameSpec, adversary: Adversary, move, n: int):
    side = spec.game.side
    X, depth = spec.space, spec.depth
    if side == "abstract":
        if not move:
            raise IllegalMove("I", n, "empty family")
        return
    if side == "cover":
        if not isinstance(move, CoverFamily):
            raise IllegalMove("I", n, "cover games expect a cover family")
        result = omega_check(move, X, depth.m, depth.k, spec.budget)
        if not result.ok:
            raise IllegalMove("I", n, f"{move} is not an omega-cover at depth ({result})")
        return
    if not isinstance(move, FnFamily):
        raise IllegalMove("I", n, "tightness games expect a function family")
    if move.finite:
        raise IllegalMove("I", n, f"finite family {move} cannot accumulate at e")
    if adversary.certified and move.kind == "TestFamily":
        # test functions over proper sets are never e, so the cover check suffices
        result = omega_check(move.cover, X, depth.m, depth.k, spec.budget)
        if not result.ok:
            raise IllegalMove("I", n, f"underlying cover of {move} is not an omega-cover")
        return
    if any(isinstance(f, ConstantE) for _, f in move.members(spec.budget)):
        raise IllegalMove("I", n, f"{move} contains e itself")
    result = closure_contains_e(move, depth.m, depth.k, depth.eps_grid, spec.budget)
    if not result.ok:  # pragma: no cover - lazy families raise instead
        raise IllegalMove("I", n, f"e is not in the closure of {move}")


def _member(move, i):
    if isinstance(move, (CoverFamily, FnFamily)):
        return move.member(i)
    return move[i] if 0 <= i < len(move) else None


def _check_player_two(spec: GameSpec, move, response, n: int) -> list[Selection]:
    if not isinstance(response, (list, tuple)):
        raise IllegalMove("II", n, "response must be a list of (index, member) pairs")
    if spec.game.arity is Arity.SINGLE and len(response) != 1:
        raise IllegalMove("II", n, f"single-selection game needs exactly one element, got {len(response)}")
    seen = {}
    for sel in response:
        i, member = sel
        if not isinstance(i, int) or i < 0 or _member(move, i) != member:
            raise IllegalMove("II", n, f"selection #{i} is not a member of Player I's move")
        seen.setdefault(i, member)
    return sorted(seen.items())


def play(spec: GameSpec, adversary: Adversary, strategy: Strategy) -> Transcript:
    """Play ``spec.rounds`` innings and judge the selections.

    Raises IllegalMove when either player breaks the rules; budget exhaustion
    anywhere ends the game with an Undecided verdict.
    """
    if strategy.game is not spec.game:
        raise ValueError(f"strategy {strategy} plays {strategy.game.value}, not {spec.game.value}")
    adversary = adversary.fresh()
    strategy = strategy.fresh()
    header = spec_header(spec, adversary, strategy)
    moves, responses, innings, selected = [], [], [], []
    verdict = None
    for n in range(1, spec.rounds + 1):
        move = adversary.move(list(zip(moves, responses)), n)
        try:
            _check_player_one(spec, adversary, move, n)
        except BudgetExhausted as exc:
            verdict = Verdict("Undecided", f"inning {n}: Player I legality: {exc}")
            break
        moves.append(move)
        try:
            raw = strategy.respond(tuple(moves), n)
        except BudgetExhausted as exc:
            verdict = Verdict("Undecided", f"inning {n}: Player II: {exc}")
            moves.pop()
            break
        response = _check_player_two(spec, move, raw, n)
        responses.append(response)
        selected.extend(m for _, m in response)
        innings.append(InningRecord(n, describe(move), [f"{i}: {describe(m)}" for i, m in response],
                                    strategy.annotation() or {}))
    if verdict is None:
        try:
            verdict = _judge(spec, selected)
        except BudgetExhausted as exc:
            verdict = Verdict("Undecided", f"judge: {exc}")
    return Transcript(header, innings, verdict, moves, selected, responses)


def _judge(spec: GameSpec, selected) -> Verdict:
    if spec.game.side == "cover":
        return judge_omega(selected, spec.space, spec.depth, spec.budget)
    if spec.game.side == "tightness":
        return judge_closure(selected, spec.space, spec.depth)
    return II_WINS if spec.predicate(frozenset(selected)) else Verdict("IWins", "predicate fails")


# ---------------------------------------------------------------------------
# Markov replay


def _final_response(strategy: Strategy, history: Sequence) -> list:
    s = strategy.fresh()
    response = None
    for n in range(1, len(history) + 1):
        response = s.respond(tuple(history[:n]), n)
    return sorted(response, key=lambda sel: sel[0]) if response is not None else []


def replay_markov_check(strategy: Strategy, probes: Sequence[tuple[Sequence, Sequence]]) -> bool:
    """True iff the strategy answers identically on every probe pair.

    Each probe is two histories of the same length ending in the same move;
    a Markov strategy may only look at that last move and the inning number.
    """
    for a, b in probes:
        if len(a) != len(b) or a[-1] is not b[-1]:
            raise ValueError("probe histories must share length and final move")
        if _final_response(strategy, a) != _final_response(strategy, b):
            return False
    return True
