"""Command-line pipeline: collect trajectories, fit weights, evaluate,
simulate, and compare plans, plus reference dumps of the mechanics table
and the law grammar.

Every command is deterministic given its seed: randomness flows from the
single --seed flag through named sub-streams, writers emit canonical
JSON, and reruns produce byte-identical artifacts.

Exit codes: 0 success, 2 parse failure in an input artifact (laws,
transitions, weights, states), 3 numeric failure during fitting,
4 I/O failure, 5 bad arguments (including an unusable --config file).
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from pathlib import Path

from .env import ACTIONS, MapConfig, mechanics_table
from .evaluation import (
    MixtureWorldModel, OracleWorldModel, RandomWorldModel, evaluate_model,
)
from .inference import fit_weights
from .law_lang import GRAMMAR, LawParseError, load_library
from .mixture import make_model
from .pipeline import (
    DEFAULT_BUDGET, collect_trajectory, coverage_summary, dump_json,
    read_json, read_transitions, read_weights, write_json,
    write_transitions, write_weights,
)
from .planning import (
    PLANNING_SCENARIOS, build_planning_scenario, compare_plans,
    model_capability,
)
from .rng import stable_stream_seed
from .scenarios import SCENARIO_NAMES, build_suite
from .state_core import state_from_json, state_to_json

EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4
EXIT_USAGE = 5


class CommandError(Exception):
    """Failure with a definite exit code; the message goes to stderr."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, but this pipeline
    # reserves 2 for artifact parse failures, so usage errors remap to 5
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# Option plumbing. Flags are declared with SUPPRESS defaults so a config
# file can fill any gap; explicitly passed flags always win.

DEFAULTS: dict[str, dict] = {
    "collect": {"seed": 0, "budget": DEFAULT_BUDGET, "width": 24,
                "height": 24},
    "fit": {"report_out": None, "epsilon": None, "delta": None, "l2": 0.0,
            "max_iter": 200, "grad_tol": 1e-6, "initial": 1.0},
    "eval": {"seed": 0, "model": "mixture", "laws": None, "weights": None,
             "scenarios": "all", "distractors": 8, "out": None},
    "simulate": {"seed": 0, "model": "mixture", "laws": None,
                 "weights": None, "samples": 1, "out": None},
    "plan": {"seed": 0, "model": "env", "laws": None, "weights": None,
             "trials": 10, "out": None},
    "dump-mechanics": {"out": None},
    "dump-grammar": {"out": None},
}

REQUIRED: dict[str, tuple[str, ...]] = {
    "collect": ("out",),
    "fit": ("laws", "transitions", "weights_out"),
    "eval": (),
    "simulate": ("state", "action"),
    "plan": ("scenario",),
    "dump-mechanics": (),
    "dump-grammar": (),
}


def _read_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise CommandError(EXIT_IO, f"cannot read config: {err}")
    except ValueError as err:
        raise CommandError(EXIT_USAGE, f"config {path}: invalid JSON: {err}")
    if not isinstance(doc, dict):
        raise CommandError(EXIT_USAGE, f"config {path}: expected an object")
    return doc


def _merged_options(args: argparse.Namespace) -> dict:
    command = args.command
    allowed = set(DEFAULTS[command]) | set(REQUIRED[command])
    merged = dict(DEFAULTS[command])
    config_path = getattr(args, "config", None)
    if config_path is not None:
        for key, value in _read_config(config_path).items():
            dest = key.replace("-", "_")
            if dest not in allowed:
                raise CommandError(
                    EXIT_USAGE,
                    f"config {config_path}: unknown key {key!r} for "
                    f"command {command!r}")
            merged[dest] = value
    for key, value in vars(args).items():
        if key in allowed:
            merged[key] = value
    for key in REQUIRED[command]:
        if merged.get(key) is None:
            flag = "--" + key.replace("_", "-")
            raise CommandError(EXIT_USAGE, f"missing required option {flag}")
    return merged


def _load_laws(path: str):
    # LawParseError propagates to main, which maps it to exit 2
    return load_library(path)


def _load_weights(path: str) -> dict[str, float]:
    try:
        return read_weights(path)
    except OSError:
        raise
    except ValueError as err:
        raise CommandError(EXIT_PARSE, str(err))


def _load_state(path: str):
    try:
        return state_from_json(read_json(path))
    except OSError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise CommandError(EXIT_PARSE, f"{path}: bad state document: {err}")


def _build_model(opt: dict, choices: tuple[str, ...]):
    kind = opt["model"]
    if kind not in choices:
        raise CommandError(
            EXIT_USAGE, f"unknown model {kind!r}; choose from {choices}")
    if kind in ("oracle", "env"):
        return OracleWorldModel()
    if kind == "random":
        return RandomWorldModel(stable_stream_seed(opt["seed"], "random-model"))
    if opt.get("laws") is None:
        raise CommandError(EXIT_USAGE, "--model mixture requires --laws")
    library = _load_laws(opt["laws"])
    weights = None
    if opt.get("weights") is not None:
        weights = _load_weights(opt["weights"])
    try:
        return MixtureWorldModel(make_model(library, weights))
    except ValueError as err:
        raise CommandError(EXIT_PARSE, f"bad model bundle: {err}")


# ---------------------------------------------------------------------------
# Commands.


def cmd_collect(opt: dict) -> int:
    if opt["budget"] < 0:
        raise CommandError(EXIT_USAGE, "budget must be nonnegative")
    if opt["width"] < 16 or opt["height"] < 16:
        raise CommandError(EXIT_USAGE, "map must be at least 16x16")
    config = MapConfig(width=opt["width"], height=opt["height"],
                       seed=opt["seed"])
    transitions = collect_trajectory(opt["seed"], opt["budget"], config)
    write_transitions(opt["out"], transitions)
    sys.stdout.write(dump_json(coverage_summary(transitions)))
    return 0


def cmd_fit(opt: dict) -> int:
    library = _load_laws(opt["laws"])
    try:
        transitions = read_transitions(opt["transitions"])
    except OSError:
        raise
    except ValueError as err:
        raise CommandError(EXIT_PARSE, str(err))
    if not transitions:
        raise CommandError(EXIT_NUMERIC,
                           "empty trajectory: nothing to fit weights on")
    try:
        result = fit_weights(
            library, transitions, epsilon=opt["epsilon"], delta=opt["delta"],
            l2=opt["l2"], max_iter=opt["max_iter"], grad_tol=opt["grad_tol"],
            initial=opt["initial"])
    except (ValueError, ArithmeticError) as err:
        raise CommandError(EXIT_NUMERIC, f"optimization failed: {err}")
    if not math.isfinite(result.nll_final):
        raise CommandError(
            EXIT_NUMERIC, f"optimization diverged: final NLL {result.nll_final}")
    write_weights(opt["weights_out"], result.weights)
    if opt["report_out"] is not None:
        write_json(opt["report_out"], result.to_json())
    sys.stdout.write(dump_json({
        "iterations": result.iterations,
        "nll_final": result.nll_final,
        "nll_initial": result.nll_initial,
        "reason": result.reason,
        "transitions": result.transition_count,
    }))
    return 0


def cmd_eval(opt: dict) -> int:
    model = _build_model(opt, ("oracle", "random", "mixture"))
    names = None
    if opt["scenarios"] != "all":
        names = [n for n in opt["scenarios"].split(",") if n]
        unknown = sorted(set(names) - set(SCENARIO_NAMES))
        if unknown:
            raise CommandError(EXIT_USAGE, f"unknown scenarios: {unknown}")
    scenarios = build_suite(opt["seed"], names)
    report = evaluate_model(model, scenarios, distractors=opt["distractors"],
                            seed=opt["seed"])
    if opt["out"] is not None:
        write_json(opt["out"], report)
    sys.stdout.write(dump_json(report["aggregate"]))
    return 0


def cmd_simulate(opt: dict) -> int:
    if opt["action"] not in ACTIONS:
        raise CommandError(EXIT_USAGE, f"unknown action {opt['action']!r}")
    if opt["samples"] < 0:
        raise CommandError(EXIT_USAGE, "samples must be nonnegative")
    state = _load_state(opt["state"])
    model = _build_model(opt, ("oracle", "mixture"))
    sample = model_capability(model)
    lines = []
    for index in range(opt["samples"]):
        rng = random.Random(stable_stream_seed(opt["seed"], "simulate", index))
        nxt = sample(state, opt["action"], rng)
        lines.append(json.dumps(state_to_json(nxt), sort_keys=True,
                                separators=(",", ":"), ensure_ascii=False))
    if opt["out"] is not None:
        Path(opt["out"]).write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8")
    sys.stdout.write(dump_json({
        "action": opt["action"],
        "distinct": len(set(lines)),
        "samples": opt["samples"],
    }))
    return 0


def cmd_plan(opt: dict) -> int:
    try:
        scenario = build_planning_scenario(opt["scenario"])
    except KeyError:
        raise CommandError(
            EXIT_USAGE,
            f"unknown scenario {opt['scenario']!r}; choose from "
            f"{sorted(PLANNING_SCENARIOS)}")
    if opt["trials"] < 1:
        raise CommandError(EXIT_USAGE, "trials must be at least 1")
    model = _build_model(opt, ("env", "oracle", "mixture"))
    comparison = compare_plans(scenario, model, trials=opt["trials"],
                               seed=opt["seed"])
    doc = comparison.to_json()
    if opt["out"] is not None:
        write_json(opt["out"], doc)
    sys.stdout.write(dump_json(doc))
    return 0


def cmd_dump_mechanics(opt: dict) -> int:
    table = mechanics_table()
    if opt["out"] is not None:
        write_json(opt["out"], table)
    else:
        sys.stdout.write(dump_json(table))
    return 0


def cmd_dump_grammar(opt: dict) -> int:
    if opt["out"] is not None:
        Path(opt["out"]).write_text(GRAMMAR, encoding="utf-8")
    else:
        sys.stdout.write(GRAMMAR)
    return 0


COMMANDS = {
    "collect": cmd_collect,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "plan": cmd_plan,
    "dump-mechanics": cmd_dump_mechanics,
    "dump-grammar": cmd_dump_grammar,
}


# ---------------------------------------------------------------------------
# Argument declaration.


def build_parser() -> _Parser:
    parser = _Parser(prog="lawmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    S = argparse.SUPPRESS

    p = sub.add_parser("collect",
                       help="roll the scripted policy, write transitions")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--budget", type=int, default=S,
                   help=f"steps to run (default {DEFAULT_BUDGET})")
    p.add_argument("--width", type=int, default=S)
    p.add_argument("--height", type=int, default=S)
    p.add_argument("--out", default=S, help="transitions JSONL path")
    p.add_argument("--config", default=None, help="JSON option file")

    p = sub.add_parser("fit", help="fit law weights on a trajectory")
    p.add_argument("--laws", default=S, help="law library file")
    p.add_argument("--transitions", default=S, help="transitions JSONL")
    p.add_argument("--weights-out", dest="weights_out", default=S)
    p.add_argument("--report-out", dest="report_out", default=S)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--l2", type=float, default=S)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=S)
    p.add_argument("--initial", type=float, default=S)
    p.add_argument("--config", default=None)

    p = sub.add_parser("eval", help="rank/fidelity evaluation on scenarios")
    p.add_argument("--model", choices=("oracle", "random", "mixture"),
                   default=S)
    p.add_argument("--laws", default=S)
    p.add_argument("--weights", default=S)
    p.add_argument("--scenarios", default=S,
                   help="comma-separated names or 'all'")
    p.add_argument("--distractors", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="report JSON path")
    p.add_argument("--config", default=None)

    p = sub.add_parser("simulate", help="sample successor states")
    p.add_argument("--state", default=S, help="state JSON path")
    p.add_argument("--action", default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--model", choices=("oracle", "mixture"), default=S)
    p.add_argument("--laws", default=S)
    p.add_argument("--weights", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="sampled states JSONL path")
    p.add_argument("--config", default=None)

    p = sub.add_parser("plan", help="compare plans in env and under a model")
    p.add_argument("--scenario", default=S,
                   help=f"one of {sorted(PLANNING_SCENARIOS)}")
    p.add_argument("--model", choices=("env", "oracle", "mixture"), default=S)
    p.add_argument("--laws", default=S)
    p.add_argument("--weights", default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="comparison JSON path")
    p.add_argument("--config", default=None)

    p = sub.add_parser("dump-mechanics", help="emit the mechanics table")
    p.add_argument("--out", default=S)
    p.add_argument("--config", default=None)

    p = sub.add_parser("dump-grammar", help="emit the law grammar")
    p.add_argument("--out", default=S)
    p.add_argument("--config", default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](_merged_options(args))
    except CommandError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except LawParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
