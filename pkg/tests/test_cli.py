import textwrap

import pytest

from selgames.cli import bundled_scenarios, load_scenario, main
from selgames.errors import ScenarioError
from selgames.games import Transcript

GOOD = textwrap.dedent("""\
    name: small
    space: convergent_sequence
    group: circle
    game: CFT
    adversary: {name: alternating}
    pipeline:
      base: enumeration
      arity: finite
      translations: [menger_to_cft]
    rounds: 4
    depth: {m: 8, k: 2, eps_grid: ["1", "1/2"]}
""")


def write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_bundled_scenarios_present():
    assert "menger_to_cft_rationals" in bundled_scenarios()


def test_run_bundled_scenario(tmp_path, capsys):
    out = tmp_path / "t.yaml"
    assert main(["run", "menger_to_cft_rationals", "--out", str(out)]) == 0
    assert "verdict   IIWins" in capsys.readouterr().out
    t = Transcript.parse(out.read_text())
    assert t.verdict.kind == "IIWins" and t.header["scenario"]["name"] == "menger_to_cft_rationals"


def test_run_is_byte_identical(tmp_path):
    path = write(tmp_path, GOOD)
    a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
    assert main(["run", path, "--out", str(a)]) == 0
    assert main(["run", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    branches = [r.notes["branch"] for r in Transcript.parse(a.read_text()).innings]
    assert branches == ["Degenerate", "Degenerate", "NonDegenerate", "Degenerate"]


def test_structured_output(tmp_path, capsys):
    path = write(tmp_path, GOOD)
    main(["run", path, "--format", "structured", "--out", str(tmp_path / "x.yaml")])
    assert Transcript.parse(capsys.readouterr().out).verdict.kind == "IIWins"


def test_mismatched_arity_is_reported_with_line(tmp_path, capsys):
    bad = GOOD.replace("arity: finite", "arity: single")
    path = write(tmp_path, bad)
    assert main(["run", path]) == 3
    assert "line 9" in capsys.readouterr().err


@pytest.mark.parametrize("edit, line", [
    (("group: circle", "group: torus"), 3),
    (("adversary: {name: alternating}", "adversary: {name: u0}"), 5),
    (("base: enumeration", "base: magic"), 7),
    (("rounds: 4", "rounds: four"), 10),
])
def test_validation_errors(edit, line):
    with pytest.raises(ScenarioError) as info:
        load_scenario(GOOD.replace(*edit))
    assert info.value.line == line


def test_malformed_yaml():
    with pytest.raises(ScenarioError) as info:
        load_scenario("name: [unclosed\nspace: x\n")
    assert info.value.line is not None


def test_negative_control_exit_code(tmp_path):
    text = textwrap.dedent("""\
        space: rational_interval
        game: GfinOmega
        adversary: u0
        pipeline: {base: empty}
        rounds: 3
        depth: {m: 4, k: 1}
    """)
    assert main(["run", write(tmp_path, text), "--out", str(tmp_path / "o.yaml")]) == 1


def test_illegal_adversary_exit_code(tmp_path, capsys):
    text = GOOD.replace("name: alternating", "name: finite_illegal")
    assert main(["run", write(tmp_path, text), "--out", str(tmp_path / "o.yaml")]) == 1
    assert "inning 1" in capsys.readouterr().out


def test_budget_flag_gives_undecided(tmp_path):
    path = write(tmp_path, GOOD)
    assert main(["run", path, "--budget", "2", "--out", str(tmp_path / "o.yaml")]) == 2


def test_verify_commands(capsys):
    assert main(["verify", "omega-cover", "U0", "-m", "6", "-k", "2"]) == 0
    assert main(["verify", "omega-cover", "balls(0:1/2)", "-m", "6", "-k", "1"]) == 1
    assert main(["verify", "closure", "finite:1"]) == 1
    assert main(["verify", "closure", "shrinking", "-m", "6", "-k", "2"]) == 0
    assert main(["verify", "markov", "enumeration"]) == 0
    assert main(["verify", "markov", "history_sensitive"]) == 1
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "Ok"


def test_usage_errors():
    assert main([]) == 3
    assert main(["run"]) == 3
    assert main(["verify", "omega-cover", "nonsense"]) == 3


def test_suite_mode(tmp_path, capsys):
    suite = tmp_path / "suite"
    suite.mkdir()
    write(suite, GOOD, "a.yaml")
    write(suite, GOOD.replace("game: CFT", "game: SCFT").replace("arity: finite", "arity: single")
          .replace("menger_to_cft", "rothberger_to_scft"), "b.yaml")
    assert main(["run", "--suite", str(suite)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all("IIWins" in line for line in lines)
