"""Command line: play scenario files and expose the finite-depth checkers.

    selgames run SCENARIO [--rounds N] [--depth-m M] [--depth-k K] [--eps-grid 1,1/2]
                          [--budget B] [--seed S] [--format text|structured] [--out PATH]
    selgames run --suite DIR
    selgames verify omega-cover|closure|markov ...

Exit status: 0 IIWins/Ok, 1 IWins/Failed, 2 Undecided/budget, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .cp import ConstantG, FnFamily, closure_contains_e, finite_illegal, shrinking_family
from .errors import BudgetExhausted, IllegalMove, ScenarioError, SelectionGameError
from .games import Arity, Depth, Game, GameSpec, Strategy, Transcript, play, replay_markov_check
from .groups import Group, group_literal, parse_group
from .oracle import (
    EmptyStrategy,
    EnumerationStrategy,
    GreedyNbhdStrategy,
    HistorySensitive,
    adversary_library,
    markov_probes,
    shrinking_ball_cover,
    cover_tests,
    u0_cover,
)
from .spaces import (
    AffineMap,
    CoverFamily,
    Space,
    finite_cover,
    fmt_point,
    omega_check,
    parse_open_set,
    rational,
)
from .translate import (
    FnSpaceHomeomorphism,
    cft_to_menger,
    menger_to_cft,
    rothberger_to_scft,
    scft_to_rothberger,
    transport_strategy,
)

EXIT_OK, EXIT_FAILED, EXIT_UNDECIDED, EXIT_USAGE = 0, 1, 2, 3
VERDICT_EXIT = {"IIWins": EXIT_OK, "IWins": EXIT_FAILED, "Undecided": EXIT_UNDECIDED}

BASES = ("enumeration", "greedy_nbhd", "empty", "history_sensitive")
TRANSLATIONS = {
    "menger_to_cft": (Game.GFIN_OMEGA, Game.CFT),
    "cft_to_menger": (Game.CFT, Game.GFIN_OMEGA),
    "rothberger_to_scft": (Game.G1_OMEGA, Game.SCFT),
    "scft_to_rothberger": (Game.SCFT, Game.G1_OMEGA),
}


# ---------------------------------------------------------------------------
# literals


def parse_space(spec) -> Space:
    """``rational_interval`` etc., or ``{reindexed: {base: ..., scale: p/q, shift: p/q}}``."""
    if isinstance(spec, str):
        return Space(spec)
    if isinstance(spec, dict) and "reindexed" in spec:
        body = spec["reindexed"]
        return Space.reindexed(parse_space(body["base"]), _affine(body))
    raise ValueError(f"cannot parse space literal {spec!r}")


def _affine(body: dict) -> AffineMap:
    return AffineMap(rational(body.get("scale", 1)), rational(body.get("shift", 0)))


def space_literal(X: Space):
    if X.kind == "reindexed":
        return {"reindexed": {"base": space_literal(X.base), "scale": str(X.map.scale),
                              "shift": str(X.map.shift)}}
    return X.kind


def parse_grid(text: str) -> tuple:
    return tuple(rational(t) for t in text.split(",") if t.strip())


# ---------------------------------------------------------------------------
# scenarios


def _line_index(node, path=()) -> dict:
    """Map key paths of a composed YAML document to 1-based line numbers."""
    lines = {path: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            lines.update(_line_index(value, path + (key.value,)))
            lines[path + (key.value,)] = key.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            lines.update(_line_index(item, path + (i,)))
    return lines


@dataclass
class Scenario:
    name: str
    space: Space
    group: Optional[Group]
    game: Game
    adversary: str
    adversary_seed: int
    base: str
    arity: Arity
    translations: list = field(default_factory=list)
    rounds: int = 12
    depth: Depth = Depth()
    budget: int = 256
    seed: int = 0

    def echo(self) -> dict:
        d = {"name": self.name, "space": space_literal(self.space)}
        if self.group is not None:
            d["group"] = group_literal(self.group)
        d.update({
            "game": self.game.value,
            "adversary": {"name": self.adversary, "seed": self.adversary_seed},
            "pipeline": {"base": self.base, "arity": self.arity.value, "translations": list(self.translations)},
        })
        return d


def load_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Parse and validate a scenario document; errors carry the offending line."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"malformed scenario: {getattr(exc, 'problem', exc)}",
                            None if mark is None else mark.line + 1) from None
    if not isinstance(data, dict):
        raise ScenarioError("a scenario must be a mapping", 1)
    lines = _line_index(root)

    def fail(path, message):
        while path and path not in lines:
            path = path[:-1]
        raise ScenarioError(message, lines.get(path))

    def need(key):
        if key not in data:
            fail((), f"missing required key '{key}'")
        return data[key]

    def parse(path, parser, value):
        try:
            return parser(value)
        except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
            fail(path, f"bad {'.'.join(map(str, path))}: {exc}")

    known = {"name", "space", "group", "game", "adversary", "pipeline", "rounds", "depth", "budget", "seed"}
    for key in data:
        if key not in known:
            fail((key,), f"unknown key '{key}'")
    space = parse(("space",), parse_space, need("space"))
    game = parse(("game",), Game, need("game"))
    if game.side == "abstract":
        fail(("game",), "abstract games have no scenario form")
    group = None
    if "group" in data:
        group = parse(("group",), parse_group, data["group"])
    pipeline = need("pipeline")
    if not isinstance(pipeline, dict):
        fail(("pipeline",), "pipeline must be a mapping")
    base = pipeline.get("base")
    if base not in BASES:
        fail(("pipeline", "base"), f"unknown base strategy {base!r}; expected one of {', '.join(BASES)}")
    arity = parse(("pipeline", "arity"), Arity, pipeline.get("arity", "finite"))
    translations = pipeline.get("translations") or []
    if not isinstance(translations, list):
        fail(("pipeline", "translations"), "translations must be a list")

    current = _base_game(base, arity)
    for i, step in enumerate(translations):
        path = ("pipeline", "translations", i)
        if isinstance(step, dict) and set(step) == {"transport"}:
            if current.side != "tightness":
                fail(path, f"transport needs a tightness strategy, the pipeline plays {current.value} here")
            parse(path, _affine, step["transport"])
            continue
        if step not in TRANSLATIONS:
            fail(path, f"unknown translation {step!r}")
        source, target = TRANSLATIONS[step]
        if source is not current:
            fail(path, f"{step} expects a {source.value} strategy but the pipeline plays {current.value} here")
        current = target
    if current is not game:
        fail(("pipeline",), f"pipeline plays {current.value} but the scenario game is {game.value}")
    if group is None and (game.side == "tightness" or translations):
        fail((), "this pipeline passes through C_p(X, G) and needs a group")

    adversary = need("adversary")
    if isinstance(adversary, str):
        adversary = {"name": adversary}
    if not isinstance(adversary, dict) or "name" not in adversary:
        fail(("adversary",), "adversary needs a name")
    target_space = _final_space(space, translations)
    library = adversary_library(target_space, group if game.side == "tightness" else None)
    if adversary["name"] not in library:
        fail(("adversary", "name"), f"unknown adversary {adversary['name']!r} for {game.value}; "
                                    f"expected one of {', '.join(sorted(library))}")
    plays_covers = adversary["name"] in adversary_library(target_space)
    if plays_covers != (game.side == "cover"):
        fail(("adversary", "name"), f"adversary {adversary['name']!r} does not play {game.value}")

    depth_in = data.get("depth") or {}
    depth = parse(("depth",), lambda d: Depth(int(d.get("m", 16)), int(d.get("k", 3)),
                                              tuple(rational(e) for e in d.get("eps_grid", Depth().eps_grid))),
                  depth_in)
    seed = parse(("seed",), int, data.get("seed", 0))
    return Scenario(
        name=str(data.get("name", default_name)),
        space=space, group=group, game=game,
        adversary=adversary["name"],
        adversary_seed=parse(("adversary", "seed"), int, adversary.get("seed", seed)),
        base=base, arity=arity, translations=translations,
        rounds=parse(("rounds",), int, data.get("rounds", 12)),
        depth=depth,
        budget=parse(("budget",), int, data.get("budget", 256)),
        seed=seed,
    )


def _base_game(base: str, arity: Arity) -> Game:
    if base == "greedy_nbhd":
        return Game.CFT if arity is Arity.FINITE else Game.SCFT
    return Game.GFIN_OMEGA if arity is Arity.FINITE else Game.G1_OMEGA


def _final_space(space: Space, translations) -> Space:
    for step in translations:
        if isinstance(step, dict):
            space = Space.reindexed(space, _affine(step["transport"]))
    return space


def build_strategy(sc: Scenario) -> tuple[Strategy, Space]:
    """The pipeline's strategy and the space its game is played on."""
    X, G = sc.space, sc.group
    if sc.base == "greedy_nbhd":
        s = GreedyNbhdStrategy(X, G, sc.arity, budget=sc.budget)
    elif sc.base == "empty":
        s = EmptyStrategy(_base_game("empty", sc.arity))
    else:
        s = EnumerationStrategy(X, sc.arity, budget=sc.budget)
        if sc.base == "history_sensitive":
            s = HistorySensitive(s)
    for step in sc.translations:
        if isinstance(step, dict):
            phi = FnSpaceHomeomorphism.induced(X, _affine(step["transport"]), G)
            s, X = transport_strategy(s, phi), phi.target
        elif step in ("menger_to_cft", "rothberger_to_scft"):
            s = (menger_to_cft if step == "menger_to_cft" else rothberger_to_scft)(
                s, X, G, depth=sc.depth, budget=sc.budget)
        else:
            s = (cft_to_menger if step == "cft_to_menger" else scft_to_rothberger)(s, X, G)
    return s, X


def run_scenario(sc: Scenario) -> Transcript:
    strategy, X = build_strategy(sc)
    G = sc.group if sc.game.side == "tightness" else None
    adversary = adversary_library(X, G, sc.adversary_seed)[sc.adversary]
    spec = GameSpec(sc.game, X, G, sc.rounds, sc.depth, sc.budget, sc.seed)
    transcript = play(spec, adversary, strategy)
    transcript.header = {"scenario": sc.echo(), **transcript.header}
    return transcript


def summary(sc: Scenario, t: Transcript) -> str:
    lines = [
        f"scenario  {sc.name}",
        f"game      {sc.game.value} on {t.header.get('space')}" + (f" with G = {sc.group}" if sc.group else ""),
        f"players   I = {t.header['adversary']}, II = {t.header['strategy']}",
        f"depth     N={sc.rounds} m={sc.depth.m} k={sc.depth.k} "
        f"eps={{{', '.join(map(str, sc.depth.eps_grid))}}} budget={sc.budget}",
    ]
    for r in t.innings:
        branch = r.notes.get("branch")
        tag = f" [{branch}]" if branch else ""
        chosen = "; ".join(s.split(": ", 1)[0] for s in r.response) or "-"
        lines.append(f"  inning {r.n:>2}{tag}: selected #{chosen}")
    lines.append(f"verdict   {t.verdict}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def _apply_overrides(sc: Scenario, args) -> Scenario:
    depth = sc.depth
    if args.depth_m is not None or args.depth_k is not None or args.eps_grid is not None:
        depth = Depth(args.depth_m or depth.m, args.depth_k or depth.k,
                      parse_grid(args.eps_grid) if args.eps_grid else depth.eps_grid)
    changes = {"depth": depth}
    for name in ("rounds", "budget", "seed"):
        if getattr(args, name) is not None:
            changes[name] = getattr(args, name)
    if args.seed is not None:
        changes["adversary_seed"] = args.seed
    return replace(sc, **changes)


def _run_one(path: str, args) -> tuple[int, str, str]:
    """Run one scenario file; returns (exit code, summary text, transcript text)."""
    text = Path(path).read_text()
    sc = _apply_overrides(load_scenario(text, Path(path).stem), args)
    try:
        t = run_scenario(sc)
    except IllegalMove as exc:
        return EXIT_FAILED, f"scenario  {sc.name}\nrejected  {exc}", ""
    return VERDICT_EXIT[t.verdict.kind], summary(sc, t), t.emit()


def _suite_worker(job):
    path, args = job
    try:
        code, text, _ = _run_one(path, args)
    except ScenarioError as exc:
        return path, EXIT_USAGE, f"{path}: {exc}"
    last = text.splitlines()[-1]
    return path, code, last


def cmd_run(args) -> int:
    if args.suite:
        paths = sorted(str(p) for p in Path(args.suite).glob("*.yaml"))
        if not paths:
            print(f"no scenarios in {args.suite}", file=sys.stderr)
            return EXIT_USAGE
        # each scenario runs in its own process, so no cache or strategy state is shared
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_suite_worker, [(p, args) for p in paths]))
        for path, code, last in results:
            print(f"{Path(path).stem}: {last.strip()}")
        return max(code for _, code, _ in results)
    if not args.scenario:
        print("run needs a SCENARIO file or --suite DIR", file=sys.stderr)
        return EXIT_USAGE
    path = _resolve_scenario(args.scenario)
    try:
        code, text, transcript = _run_one(path, args)
    except ScenarioError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if transcript:
        out = Path(args.out) if args.out else Path(Path(path).stem + ".transcript.yaml")
        out.write_text(transcript)
    if args.format == "structured":
        sys.stdout.write(transcript)
    else:
        print(text)
    return code


def _resolve_scenario(name: str) -> str:
    """A path, or the name of a bundled scenario."""
    if Path(name).exists():
        return name
    bundled = resources.files("selgames") / "scenarios" / f"{Path(name).stem}.yaml"
    if bundled.is_file():
        return str(bundled)
    return name


def bundled_scenarios() -> list[str]:
    root = resources.files("selgames") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def parse_cover(text: str, X: Space) -> CoverFamily:
    """``U0``, ``balls:N`` or a ``|``-separated list of open-set literals."""
    if text == "U0":
        return u0_cover(X)
    if text.startswith("balls:"):
        return shrinking_ball_cover(X, int(text.split(":", 1)[1]))
    return finite_cover([parse_open_set(s) for s in text.split("|")])


def parse_family(text: str, X: Space, G: Group) -> FnFamily:
    """``tests:<cover>``, ``shrinking`` or ``finite:<g>|<g>...`` (constant functions)."""
    if text.startswith("tests:"):
        return cover_tests(parse_cover(text[len("tests:"):], X), X, G)
    if text == "shrinking":
        return shrinking_family(X, G)
    if text.startswith("finite:"):
        values = [_group_element(s, G) for s in text[len("finite:"):].split("|")]
        return finite_illegal([ConstantG(X, G, v) for v in values])
    raise ValueError(f"cannot parse family literal {text!r}")


def _group_element(text: str, G: Group):
    text = text.strip()
    if G.kind == "product":
        return G.normalize(tuple(rational(c) for c in text.strip("()").split(";")))
    return G.normalize(rational(text))


def _markov_strategy(name: str, X: Space, G: Group) -> Strategy:
    enum_fin, enum_one = EnumerationStrategy(X), EnumerationStrategy(X, Arity.SINGLE)
    greedy_fin, greedy_one = GreedyNbhdStrategy(X, G), GreedyNbhdStrategy(X, G, Arity.SINGLE)
    table = {
        "enumeration": lambda: enum_fin,
        "enumeration_single": lambda: enum_one,
        "greedy_nbhd": lambda: greedy_fin,
        "greedy_nbhd_single": lambda: greedy_one,
        "history_sensitive": lambda: HistorySensitive(enum_fin),
        "menger_to_cft": lambda: menger_to_cft(enum_fin, X, G),
        "rothberger_to_scft": lambda: rothberger_to_scft(enum_one, X, G),
        "cft_to_menger": lambda: cft_to_menger(greedy_fin, X, G),
        "scft_to_rothberger": lambda: scft_to_rothberger(greedy_one, X, G),
    }
    if name not in table:
        raise ValueError(f"unknown strategy {name!r}; expected one of {', '.join(table)}")
    return table[name]()


def cmd_verify(args) -> int:
    try:
        X = parse_space(args.space)
        G = parse_group(args.group)
        if args.what == "omega-cover":
            result = omega_check(parse_cover(args.input, X), X, args.m, args.k, args.budget)
            if result.ok:
                print("Ok")
            elif result.improper is not None:
                print(f"Failed: member {result.improper} is not proper")
            else:
                print("Failed: counterexample {" + ", ".join(map(fmt_point, result.counterexample)) + "}")
            return EXIT_OK if result.ok else EXIT_FAILED
        if args.what == "closure":
            grid = parse_grid(args.eps_grid) if args.eps_grid else Depth().eps_grid
            result = closure_contains_e(parse_family(args.input, X, G), args.m, args.k, grid, args.budget)
            print("Ok" if result.ok else f"Failed: no member in {result.failed}")
            return EXIT_OK if result.ok else EXIT_FAILED
        strategy = _markov_strategy(args.input, X, G)
        side = "cover" if strategy.game.side == "cover" else "tightness"
        ok = replay_markov_check(strategy, markov_probes(X, side, G, args.probes))
        print("true" if ok else "false")
        return EXIT_OK if ok else EXIT_FAILED
    except BudgetExhausted as exc:
        print(f"Undecided: {exc}")
        return EXIT_UNDECIDED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selgames", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play a scenario file (or a bundled scenario by name)")
    run.add_argument("scenario", nargs="?")
    run.add_argument("--suite", metavar="DIR", help="run every *.yaml scenario in DIR concurrently")
    run.add_argument("--rounds", type=int)
    run.add_argument("--depth-m", type=int)
    run.add_argument("--depth-k", type=int)
    run.add_argument("--eps-grid", help="comma-separated rationals, e.g. 1,1/2,1/4")
    run.add_argument("--budget", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--format", choices=("text", "structured"), default="text")
    run.add_argument("--out", help="transcript path (default: <scenario>.transcript.yaml)")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run one finite-depth check directly")
    verify.add_argument("what", choices=("omega-cover", "closure", "markov"))
    verify.add_argument("input", help="cover literal, family literal or strategy name")
    verify.add_argument("--space", default="rational_interval")
    verify.add_argument("--group", default="real_line")
    verify.add_argument("-m", type=int, default=16)
    verify.add_argument("-k", type=int, default=3)
    verify.add_argument("--eps-grid")
    verify.add_argument("--budget", type=int, default=256)
    verify.add_argument("--probes", type=int, default=16)
    verify.set_defaults(func=cmd_verify)

    sub.add_parser("list", help="list bundled scenarios").set_defaults(
        func=lambda args: print("\n".join(bundled_scenarios())) or EXIT_OK)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except SelectionGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
