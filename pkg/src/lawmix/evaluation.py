"""Next-state ranking harness: corruption operators, ranking, fidelity.

A model under evaluation exposes two capabilities: score(state, action,
candidate) returning a comparable log-score, and sample(state, action,
rng) returning a next state.  The harness builds corrupted variants of the
true next state, asks the model to pick the truth out of the lineup, and
separately measures how far the model's own samples land from the truth.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Protocol

from . import env
from .env import transition
from .mixture import (
    ReconstructionError, WorldModel, sample_next_state, states_equal,
    transition_log_prob,
)
from .rng import stable_stream_seed
from .scenarios import Scenario
from .state_core import (
    INVENTORY_KEYS, WorldState, canonicalize, count_elements, diff_ops,
)

Transition = tuple[WorldState, str, WorldState]

METERS = ("health", "food", "drink", "energy")
RESOURCES = ("wood", "stone", "coal", "iron", "diamond", "sapling",
             "drink", "food")
PLACEABLE = ("stone", "table", "furnace", "plant-sapling")
CRAFTABLE = tuple(produced for _, _, produced in env.RECIPES.values())

MUTATION_RETRIES = 8
NONFINITE_SCORE = float("-inf")


class EvaluatableModel(Protocol):
    def score(self, state: WorldState, action: str,
              candidate: WorldState) -> float: ...

    def sample(self, state: WorldState, action: str,
               rng: random.Random) -> WorldState: ...


@dataclass
class MixtureWorldModel:
    """Law-mixture scoring and sampling behind the evaluation interface."""

    model: WorldModel

    def score(self, state, action, candidate):
        return transition_log_prob(self.model, state, action, candidate)

    def sample(self, state, action, rng):
        return sample_next_state(self.model, state, action, rng)


@dataclass
class OracleWorldModel:
    """Replays the true transition function; the evaluation ceiling."""

    def score(self, state, action, candidate):
        return 0.0 if states_equal(candidate, transition(state, action)) \
            else -1e9

    def sample(self, state, action, rng):
        return transition(state, action)


class RandomWorldModel:
    """Scores every candidate with an independent uniform draw."""

    def __init__(self, seed: int = 0):
        self.rnd = random.Random(seed)

    def score(self, state, action, candidate):
        return self.rnd.random()

    def sample(self, state, action, rng):
        return state.copy()


# ---------------------------------------------------------------------------
# Corruption operators.

@dataclass(frozen=True)
class Mutator:
    name: str
    applicable: Callable[[WorldState, str], bool]
    mutate: Callable[[WorldState, str, WorldState, random.Random],
                     WorldState | None]


def _live_npcs(state: WorldState):
    return [o for o in state.live_entities() if o.kind != "player"]


def _occupied(state: WorldState, x: int, y: int) -> bool:
    return state.entity_at(x, y) is not None


def _set_player_health(state: WorldState, value: int) -> None:
    state.player.inventory["health"] = value
    state.player.health = value


def _illegal_movement(state, action, truth, rnd):
    moved = truth.copy()
    player = moved.player
    deltas = list(env.MOVE_DELTAS.values())
    rnd.shuffle(deltas)
    for dx, dy in deltas:
        nx, ny = player.position.x + dx, player.position.y + dy
        if moved.in_bounds(nx, ny) and not _occupied(moved, nx, ny):
            player.position = type(player.position)(nx, ny)
            return moved
    return None


def _entity_position(state, action, truth, rnd):
    moved = truth.copy()
    npcs = _live_npcs(moved)
    if not npcs:
        return None
    target = npcs[rnd.randrange(len(npcs))]
    width, height = moved.size
    cx, cy = target.position.x, target.position.y
    for _ in range(60):
        nx, ny = rnd.randrange(width), rnd.randrange(height)
        if abs(nx - cx) + abs(ny - cy) >= 4 and not _occupied(moved, nx, ny):
            target.position = type(target.position)(nx, ny)
            return moved
    for _ in range(60):
        nx, ny = rnd.randrange(width), rnd.randrange(height)
        if (nx, ny) != (cx, cy) and not _occupied(moved, nx, ny):
            target.position = type(target.position)(nx, ny)
            return moved
    return None


def _player_health(state, action, truth, rnd):
    moved = truth.copy()
    current = moved.player.inventory["health"]
    options = [current + d for d in (-2, -1, 1, 2)
               if 0 <= current + d <= 9]
    if not options:
        return None
    _set_player_health(moved, rnd.choice(options))
    return moved


def _entity_health(state, action, truth, rnd):
    moved = truth.copy()
    npcs = _live_npcs(moved)
    if not npcs:
        return None
    target = npcs[rnd.randrange(len(npcs))]
    excluded = {target.health - 1, target.health, target.health + 1}
    options = [v for v in range(10) if v not in excluded]
    target.health = rnd.choice(options)
    return moved


def _craft_illegal_item(state, action, truth, rnd):
    moved = truth.copy()
    produced = env.RECIPES[action][2]
    wrong = rnd.choice(sorted(set(CRAFTABLE) - {produced}))
    inventory = moved.player.inventory
    inventory[wrong] += 1
    if truth.player.inventory[produced] == \
            state.player.inventory[produced] + 1:
        inventory[produced] -= 1
    return moved


def _collect_illegal_material(state, action, truth, rnd):
    moved = truth.copy()
    inventory = moved.player.inventory
    collected = next(
        (item for item in RESOURCES
         if truth.player.inventory[item] > state.player.inventory[item]),
        None)
    pool = [item for item in RESOURCES
            if item != collected
            and (item not in METERS or inventory[item] < 9)]
    if not pool:
        return None
    inventory[rnd.choice(pool)] += 1
    if collected is not None:
        inventory[collected] -= 1
    return moved


def _place_illegal_item(state, action, truth, rnd):
    moved = truth.copy()
    tx, ty = env.get_target_tile(state)
    if not moved.in_bounds(tx, ty):
        return None
    current = moved.material_at(tx, ty)
    pool = sorted(set(PLACEABLE) - {current})
    moved.materials[ty][tx] = rnd.choice(pool)
    return moved


def _inventory_scramble(state, action, truth, rnd):
    moved = truth.copy()
    inventory = moved.player.inventory
    for key in INVENTORY_KEYS:
        inventory[key] = rnd.randint(0, 9)
    _set_player_health(moved, inventory["health"])
    return moved


MUTATORS: tuple[Mutator, ...] = (
    Mutator("IllegalMovement",
            lambda s, a: a not in env.MOVE_DELTAS,
            _illegal_movement),
    Mutator("EntityPosition",
            lambda s, a: bool(_live_npcs(s)),
            _entity_position),
    Mutator("PlayerHealth", lambda s, a: True, _player_health),
    Mutator("EntityHealth",
            lambda s, a: bool(_live_npcs(s)),
            _entity_health),
    Mutator("CraftIllegalItem",
            lambda s, a: a in env.RECIPES,
            _craft_illegal_item),
    Mutator("CollectIllegalMaterial",
            lambda s, a: a == "do",
            _collect_illegal_material),
    Mutator("PlaceIllegalItem",
            lambda s, a: a in env.PLACE_RULES,
            _place_illegal_item),
    Mutator("Inventory", lambda s, a: True, _inventory_scramble),
)


def generate_distractors(state: WorldState, action: str, truth: WorldState,
                         k: int, rnd: random.Random,
                         mutators: tuple[Mutator, ...] = MUTATORS,
                         ) -> list[tuple[str, WorldState]]:
    """Up to k corrupted next states, each from a distinct applicable
    operator, all guaranteed to differ from the truth."""
    pool = [m for m in mutators if m.applicable(state, action)]
    rnd.shuffle(pool)
    out: list[tuple[str, WorldState]] = []
    for mutator in pool:
        if len(out) >= k:
            break
        for _ in range(MUTATION_RETRIES):
            candidate = mutator.mutate(state, action, truth, rnd)
            if candidate is not None and not states_equal(candidate, truth):
                out.append((mutator.name, candidate))
                break
    return out


# ---------------------------------------------------------------------------
# Ranking and fidelity.

@dataclass(frozen=True)
class RankOutcome:
    rank: int
    reciprocal_rank: float
    candidates: int
    nonfinite: bool


def rank_candidates(model: EvaluatableModel, state: WorldState, action: str,
                    candidates: list[WorldState],
                    truth_index: int) -> RankOutcome:
    """Rank of the truth among the candidates, ties counted against it.

    A non-finite score sends that candidate to the bottom of the ordering
    and flags the outcome.
    """
    scores = []
    for candidate in candidates:
        try:
            value = model.score(state, action, candidate)
        except ValueError:
            value = NONFINITE_SCORE
        scores.append(value if math.isfinite(value) else NONFINITE_SCORE)
    nonfinite = any(v == NONFINITE_SCORE for v in scores)
    truth_score = scores[truth_index]
    if truth_score == NONFINITE_SCORE:
        rank = len(candidates)
    else:
        ahead = sum(1 for i, v in enumerate(scores)
                    if i != truth_index and v >= truth_score)
        rank = 1 + ahead
    return RankOutcome(rank=rank, reciprocal_rank=1.0 / rank,
                       candidates=len(candidates), nonfinite=nonfinite)


@dataclass(frozen=True)
class FidelityOutcome:
    raw_distance: int
    normalized_distance: float
    violation: bool


def fidelity(model: EvaluatableModel, state: WorldState, action: str,
             truth: WorldState, rng: random.Random) -> FidelityOutcome:
    """Leaf edit distance between one model sample and the truth.

    Samples that violate state invariants are measured as-is and flagged,
    not repaired.
    """
    violation = False
    try:
        sample = model.sample(state, action, rng)
    except ReconstructionError as err:
        sample = err.state
        violation = True
    truth_doc = canonicalize(truth)
    raw = len(diff_ops(canonicalize(sample), truth_doc))
    return FidelityOutcome(
        raw_distance=raw,
        normalized_distance=raw / count_elements(truth_doc),
        violation=violation)


# ---------------------------------------------------------------------------
# Scenario execution.

class ScenarioPolicyError(RuntimeError):
    def __init__(self, scenario: str, step: int, cause: Exception | str):
        self.scenario = scenario
        self.step = step
        super().__init__(f"scenario {scenario!r} policy failed at step "
                         f"{step}: {cause}")


@dataclass
class ScenarioRun:
    scenario: Scenario
    transitions: list[Transition]
    goal_met: bool


def run_scenario(scenario: Scenario,
                 transition_fn=transition) -> ScenarioRun:
    state = scenario.initial
    transitions: list[Transition] = []
    for step in range(scenario.max_steps):
        try:
            action = scenario.policy(state)
        except Exception as err:
            raise ScenarioPolicyError(scenario.name, step, err) from err
        if action not in env.ACTIONS:
            raise ScenarioPolicyError(scenario.name, step,
                                      f"unknown action {action!r}")
        nxt = transition_fn(state, action)
        transitions.append((state, action, nxt))
        state = nxt
    return ScenarioRun(scenario, transitions, scenario.goal(transitions))


# ---------------------------------------------------------------------------
# Whole-suite evaluation.

def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def aggregate_rows(rows: list[dict]) -> dict:
    """Two-level rollup: per-scenario means first, then a plain mean over
    scenarios, so a one-transition scenario counts as much as a long one.
    Scenarios with nothing ranked stay out of the ranking averages."""
    ranked_rows = [r for r in rows if r["ranked"] > 0]
    return {
        "scenarios": len(rows),
        "mrr": _mean(r["mrr"] for r in ranked_rows),
        "rank_at_1": _mean(r["rank_at_1"] for r in ranked_rows),
        "mean_raw_distance": _mean(r["mean_raw_distance"] for r in rows),
        "mean_normalized_distance": _mean(
            r["mean_normalized_distance"] for r in rows),
        "goals_met": sum(r["goal_met"] for r in rows),
    }


def evaluate_model(model: EvaluatableModel, scenarios: list[Scenario], *,
                   distractors: int = 8, seed: int = 0,
                   mutators: tuple[Mutator, ...] = MUTATORS) -> dict:
    """Rank-and-fidelity report over the scenario suite.

    Transitions with no applicable corruption operator are excluded from
    ranking denominators and reported in the skip counts.  The aggregate is
    a mean of per-scenario means, so long scenarios do not swamp short
    ones.
    """
    per_scenario = {}
    for scenario in scenarios:
        run = run_scenario(scenario)
        rank_rnd = random.Random(
            stable_stream_seed(seed, scenario.name, "distractors"))
        sample_rnd = random.Random(
            stable_stream_seed(seed, scenario.name, "fidelity"))
        ranks: list[RankOutcome] = []
        fidelities: list[FidelityOutcome] = []
        mutator_usage: dict[str, int] = {}
        skipped = 0
        for state, action, truth in run.transitions:
            drawn = generate_distractors(state, action, truth, distractors,
                                         rank_rnd, mutators)
            if not drawn:
                skipped += 1
            else:
                candidates = [c for _, c in drawn]
                truth_index = rank_rnd.randrange(len(candidates) + 1)
                candidates.insert(truth_index, truth)
                ranks.append(rank_candidates(model, state, action,
                                             candidates, truth_index))
                for name, _ in drawn:
                    mutator_usage[name] = mutator_usage.get(name, 0) + 1
            fidelities.append(fidelity(model, state, action, truth,
                                       sample_rnd))
        per_scenario[scenario.name] = {
            "group": scenario.group,
            "deterministic": scenario.deterministic,
            "goal_met": run.goal_met,
            "transitions": len(run.transitions),
            "ranked": len(ranks),
            "skipped": skipped,
            "mrr": _mean(r.reciprocal_rank for r in ranks),
            "rank_at_1": _mean(float(r.rank == 1) for r in ranks),
            "nonfinite_flags": sum(r.nonfinite for r in ranks),
            "mean_raw_distance": _mean(f.raw_distance for f in fidelities),
            "mean_normalized_distance": _mean(
                f.normalized_distance for f in fidelities),
            "violations": sum(f.violation for f in fidelities),
            "mutator_usage": dict(sorted(mutator_usage.items())),
        }

    rows = list(per_scenario.values())
    groups = {}
    for group in sorted({r["group"] for r in rows}):
        groups[group] = aggregate_rows(
            [r for r in rows if r["group"] == group])
    return {
        "seed": seed,
        "distractors": distractors,
        "scenarios": per_scenario,
        "groups": groups,
        "aggregate": {
            "all": aggregate_rows(rows),
            "deterministic": aggregate_rows(
                [r for r in rows if r["deterministic"]]),
        },
        "skipped_transitions": sum(r["skipped"] for r in rows),
    }


__all__ = [
    "CRAFTABLE", "EvaluatableModel", "FidelityOutcome", "MUTATORS",
    "MixtureWorldModel", "Mutator", "OracleWorldModel", "RandomWorldModel",
    "RankOutcome", "ScenarioPolicyError", "ScenarioRun",
    "aggregate_rows", "evaluate_model", "fidelity", "generate_distractors",
    "rank_candidates", "run_scenario",
]
