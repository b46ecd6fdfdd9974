"""Exit codes, artifact round-trips, config merging, and rerun
byte-determinism of the command-line pipeline.

Commands run in-process through lawmix.cli.main(argv) so the tests stay
fast; the console entry point wraps the same function.
"""

import json
from pathlib import Path

import pytest

from lawmix.cli import main
from lawmix.env import ACTIONS
from lawmix.law_lang import load_library
from lawmix.pipeline import read_transitions, read_weights, write_transitions
from lawmix.scenarios import build_suite
from lawmix.state_core import state_from_json, state_to_json

CORPUS = str(Path(__file__).resolve().parents[1] / "laws")


def run(capsys, *argv: str):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def traj_path(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("cli") / "traj.jsonl"
    code = main(["collect", "--seed", "3", "--budget", "160",
                 "--width", "16", "--height", "16", "--out", str(path)])
    assert code == 0
    return path


@pytest.fixture(scope="module")
def state_path(tmp_path_factory) -> Path:
    scenario = build_suite(0, names=["craft_wood_pickaxe"])[0]
    path = tmp_path_factory.mktemp("cli") / "state.json"
    path.write_text(json.dumps(state_to_json(scenario.initial)),
                    encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# collect


def test_collect_reports_coverage_and_writes_jsonl(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    code, stdout, _ = run(capsys, "collect", "--seed", "3", "--budget", "80",
                          "--width", "16", "--height", "16",
                          "--out", str(out))
    assert code == 0
    doc = json.loads(stdout)
    assert doc["transitions"] == 80
    assert doc["events"]["collected wood"] >= 1
    rows = read_transitions(out)
    assert len(rows) == 80
    assert all(action in ACTIONS for _, action, _ in rows)


def test_collect_rerun_is_byte_identical(tmp_path, capsys):
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    argv = ["collect", "--seed", "5", "--budget", "60", "--width", "16",
            "--height", "16"]
    code_a, out_a, _ = run(capsys, *argv, "--out", str(first))
    code_b, out_b, _ = run(capsys, *argv, "--out", str(second))
    assert code_a == code_b == 0
    assert first.read_bytes() == second.read_bytes()
    assert out_a == out_b


def test_collect_budget_zero_writes_empty_file(tmp_path, capsys):
    out = tmp_path / "empty.jsonl"
    code, stdout, _ = run(capsys, "collect", "--budget", "0",
                          "--width", "16", "--height", "16",
                          "--out", str(out))
    assert code == 0
    assert out.read_bytes() == b""
    assert json.loads(stdout)["transitions"] == 0


def test_collect_rejects_bad_sizes_and_budget(tmp_path, capsys):
    out = str(tmp_path / "t.jsonl")
    code, _, err = run(capsys, "collect", "--budget", "-1", "--out", out)
    assert code == 5 and "budget" in err
    code, _, err = run(capsys, "collect", "--width", "8", "--out", out)
    assert code == 5 and "16x16" in err


def test_transitions_roundtrip_is_lossless(traj_path, tmp_path):
    rows = read_transitions(traj_path)
    copy = tmp_path / "copy.jsonl"
    write_transitions(copy, rows)
    assert copy.read_bytes() == traj_path.read_bytes()


# ---------------------------------------------------------------------------
# fit


def test_fit_writes_weights_for_every_law_and_reruns_identically(
        traj_path, tmp_path, capsys):
    w1, w2 = tmp_path / "w1.json", tmp_path / "w2.json"
    report = tmp_path / "report.json"
    argv = ["fit", "--laws", CORPUS, "--transitions", str(traj_path),
            "--max-iter", "40"]
    code, stdout, _ = run(capsys, *argv, "--weights-out", str(w1),
                          "--report-out", str(report))
    assert code == 0
    summary = json.loads(stdout)
    assert summary["transitions"] == 160
    assert summary["nll_final"] <= summary["nll_initial"]
    weights = read_weights(w1)
    assert set(weights) == {law.name for law in load_library(CORPUS)}
    assert all(isinstance(v, float) for v in weights.values())
    assert json.loads(report.read_text())["reason"] == summary["reason"]
    code, _, _ = run(capsys, *argv, "--weights-out", str(w2))
    assert code == 0
    assert w1.read_bytes() == w2.read_bytes()


def test_fit_empty_trajectory_is_a_numeric_failure(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    code, _, err = run(capsys, "fit", "--laws", CORPUS,
                       "--transitions", str(empty),
                       "--weights-out", str(tmp_path / "w.json"))
    assert code == 3
    assert "empty trajectory" in err


def test_fit_missing_transitions_file_is_io_failure(tmp_path, capsys):
    code, _, _ = run(capsys, "fit", "--laws", CORPUS,
                     "--transitions", str(tmp_path / "nope.jsonl"),
                     "--weights-out", str(tmp_path / "w.json"))
    assert code == 4


def test_corrupt_transitions_line_is_parse_failure(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("this is not json\n")
    code, _, _ = run(capsys, "fit", "--laws", CORPUS,
                     "--transitions", str(bad),
                     "--weights-out", str(tmp_path / "w.json"))
    assert code == 2


def test_malformed_law_file_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.law"
    bad.write_text("law broken {\n  when: true and\n  effect: {}\n}\n")
    code, _, err = run(capsys, "fit", "--laws", str(bad),
                       "--transitions", str(tmp_path / "t.jsonl"),
                       "--weights-out", str(tmp_path / "w.json"))
    assert code == 2
    assert "line" in err and "col" in err


# ---------------------------------------------------------------------------
# eval


def test_eval_oracle_ranks_perfectly(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, stdout, _ = run(capsys, "eval", "--model", "oracle",
                          "--scenarios", "craft_wood_pickaxe,eat_cow",
                          "--seed", "0", "--out", str(out))
    assert code == 0
    aggregate = json.loads(stdout)
    assert aggregate["all"]["mrr"] == 1.0
    assert aggregate["all"]["rank_at_1"] == 1.0
    assert aggregate["all"]["scenarios"] == 2
    report = json.loads(out.read_text())
    assert report["aggregate"] == aggregate


def test_eval_unknown_scenario_is_usage_error(capsys):
    code, _, err = run(capsys, "eval", "--model", "oracle",
                       "--scenarios", "craft_wood_pickaxe,warp_drive")
    assert code == 5
    assert "warp_drive" in err


def test_eval_mixture_requires_laws(capsys):
    code, _, err = run(capsys, "eval", "--scenarios", "eat_cow")
    assert code == 5
    assert "--laws" in err


def test_eval_bad_weights_artifact_is_parse_failure(tmp_path, capsys):
    bad = tmp_path / "w.json"
    bad.write_text("[1, 2, 3]")
    code, _, _ = run(capsys, "eval", "--model", "mixture", "--laws", CORPUS,
                     "--weights", str(bad), "--scenarios", "eat_cow")
    assert code == 2


# ---------------------------------------------------------------------------
# simulate


def test_simulate_oracle_is_deterministic(state_path, tmp_path, capsys):
    out1, out2 = tmp_path / "s1.jsonl", tmp_path / "s2.jsonl"
    argv = ["simulate", "--state", str(state_path), "--action", "noop",
            "--model", "oracle", "--samples", "3"]
    code, stdout, _ = run(capsys, *argv, "--out", str(out1))
    assert code == 0
    assert json.loads(stdout) == {"action": "noop", "distinct": 1,
                                  "samples": 3}
    lines = out1.read_text().splitlines()
    assert len(lines) == 3
    for line in lines:
        state_from_json(json.loads(line))
    code, _, _ = run(capsys, *argv, "--out", str(out2))
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_mixture_samples_parse_as_states(state_path, tmp_path,
                                                  capsys):
    out = tmp_path / "s.jsonl"
    code, stdout, _ = run(capsys, "simulate", "--state", str(state_path),
                          "--action", "make_wood_pickaxe",
                          "--model", "mixture", "--laws", CORPUS,
                          "--samples", "2", "--out", str(out))
    assert code == 0
    assert json.loads(stdout)["samples"] == 2
    for line in out.read_text().splitlines():
        nxt = state_from_json(json.loads(line))
        assert nxt.player.inventory["wood_pickaxe"] == 1


def test_simulate_unknown_action_is_usage_error(state_path, capsys):
    code, _, err = run(capsys, "simulate", "--state", str(state_path),
                       "--action", "fly", "--model", "oracle")
    assert code == 5
    assert "fly" in err


def test_simulate_bad_state_document_is_parse_failure(tmp_path, capsys):
    bad = tmp_path / "state.json"
    bad.write_text('{"nope": 1}')
    code, _, _ = run(capsys, "simulate", "--state", str(bad),
                     "--action", "noop", "--model", "oracle")
    assert code == 2


# ---------------------------------------------------------------------------
# plan


def test_plan_env_route_reproduces_reference_rewards(tmp_path, capsys):
    out = tmp_path / "cmp.json"
    code, stdout, _ = run(capsys, "plan", "--scenario", "stone_miner",
                          "--model", "env", "--trials", "2",
                          "--out", str(out))
    assert code == 0
    doc = json.loads(stdout)
    assert doc["agreement"] is True
    assert doc["env_ordering"] == ["craft_then_mine", "mine_immediately"]
    assert doc["plans"]["craft_then_mine"]["env_mean_reward"] == 3.0
    assert doc["plans"]["mine_immediately"]["env_mean_reward"] == 0.0
    assert json.loads(out.read_text()) == doc


def test_plan_unknown_scenario_lists_choices(capsys):
    code, _, err = run(capsys, "plan", "--scenario", "moon_base")
    assert code == 5
    assert "stone_miner" in err


# ---------------------------------------------------------------------------
# reference dumps


def test_dump_mechanics_matches_stdout_and_file(tmp_path, capsys):
    out = tmp_path / "mech.json"
    code, stdout, _ = run(capsys, "dump-mechanics")
    assert code == 0
    doc = json.loads(stdout)
    assert "noop" in doc["actions"]
    code, _, _ = run(capsys, "dump-mechanics", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text()) == doc


def test_dump_grammar_emits_ebnf(tmp_path, capsys):
    code, stdout, _ = run(capsys, "dump-grammar")
    assert code == 0
    assert "law" in stdout and "effect" in stdout
    out = tmp_path / "grammar.txt"
    code, _, _ = run(capsys, "dump-grammar", "--out", str(out))
    assert code == 0
    assert out.read_text() == stdout


# ---------------------------------------------------------------------------
# config file and usage errors


def test_config_fills_gaps_but_flags_win(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "budget": 12, "width": 16,
                               "height": 16}))
    merged = tmp_path / "merged.jsonl"
    flags = tmp_path / "flags.jsonl"
    config_only = tmp_path / "config.jsonl"
    code, _, _ = run(capsys, "collect", "--config", str(cfg), "--seed", "3",
                     "--out", str(merged))
    assert code == 0
    code, _, _ = run(capsys, "collect", "--seed", "3", "--budget", "12",
                     "--width", "16", "--height", "16", "--out", str(flags))
    assert code == 0
    assert merged.read_bytes() == flags.read_bytes()
    code, _, _ = run(capsys, "collect", "--config", str(cfg),
                     "--out", str(config_only))
    assert code == 0
    assert config_only.read_bytes() != merged.read_bytes()


def test_config_unknown_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"bogus": 1}')
    code, _, err = run(capsys, "collect", "--config", str(cfg),
                       "--out", str(tmp_path / "t.jsonl"))
    assert code == 5
    assert "bogus" in err


def test_config_invalid_json_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code, _, _ = run(capsys, "collect", "--config", str(cfg),
                     "--out", str(tmp_path / "t.jsonl"))
    assert code == 5


def test_config_non_object_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    code, _, _ = run(capsys, "collect", "--config", str(cfg),
                     "--out", str(tmp_path / "t.jsonl"))
    assert code == 5


def test_config_missing_file_is_io_error(tmp_path, capsys):
    code, _, _ = run(capsys, "collect", "--config",
                     str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "t.jsonl"))
    assert code == 4


def test_missing_required_option_is_usage_error(capsys):
    code, _, err = run(capsys, "collect")
    assert code == 5
    assert "--out" in err


def test_unknown_flag_exits_with_usage_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["collect", "--bogus"])
    assert exc.value.code == 5
    capsys.readouterr()


def test_unknown_command_exits_with_usage_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 5
    capsys.readouterr()
