"""Planning by rollout: movement options, compiled plans, and plan
comparison between the true environment and a learned world model.

Plans are small programs composed from three option kinds (pathfind,
interact-adjacent, fixed-entity combat). A plan never sees which
transition capability drives it; the same program runs against the real
transition function or against samples drawn from a world model, and
``compare_plans`` checks whether both substrates prefer the same plan.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .env import (
    CARDINALS, MOVE_DELTAS, add_object, blank_state, is_walkable,
    set_player_inventory_item, set_tile_material, transition,
)
from .mixture import ReconstructionError
from .rng import stable_stream_seed
from .state_core import WorldState

Transition = tuple[WorldState, str, WorldState]
TilePredicate = Callable[[WorldState, int, int], bool]
StepFn = Callable[[WorldState, str], WorldState]
Capability = Callable[[WorldState, str, random.Random | None], WorldState]

MOVE_FOR_STEP = {delta: action for action, delta in MOVE_DELTAS.items()}

DPS_SCALE = 10.0


class OptionComplete(Exception):
    """Raised by an option instead of an action when it has nothing left
    to do; ``unreachable`` distinguishes success from a dead end."""

    def __init__(self, unreachable: bool = False):
        self.unreachable = unreachable
        super().__init__("unreachable goal" if unreachable else "goal reached")


def material_goal(name: str) -> TilePredicate:
    return lambda state, x, y: state.material_at(x, y) == name


def entity_goal(entity_id: int) -> TilePredicate:
    def predicate(state: WorldState, x: int, y: int) -> bool:
        entity = state.entity_by_id(entity_id)
        return (entity is not None and not entity.removed
                and entity.position.x == x and entity.position.y == y)
    return predicate


def _adjacent_goal_step(state: WorldState,
                        goal: TilePredicate) -> tuple[int, int] | None:
    """Cardinal step from the player to a goal tile, the faced one first."""
    p = state.player.position
    facing = (state.player.facing.x, state.player.facing.y)
    order = [facing] + [c for c in CARDINALS if c != facing]
    for dx, dy in order:
        if state.in_bounds(p.x + dx, p.y + dy) and goal(state, p.x + dx, p.y + dy):
            return dx, dy
    return None


def pathfind_action(state: WorldState, goal: TilePredicate) -> str:
    """One movement action along a shortest walkable path to a tile next
    to the nearest goal tile.

    Goal tiles are interaction targets (trees, ore, an entity's tile), so
    they are not walkable themselves; the search runs over walkable tiles
    and stops one step short. When the player already stands next to a
    goal tile the returned move points at it, which turns the player in
    place, and once the player also faces it the option raises
    ``OptionComplete``. An exhausted search raises ``OptionComplete``
    with the unreachable flag set.
    """
    step = _adjacent_goal_step(state, goal)
    if step is not None:
        if (state.player.facing.x, state.player.facing.y) == step:
            raise OptionComplete()
        return MOVE_FOR_STEP[step]

    p = state.player.position
    seen = {(p.x, p.y)}
    queue: deque[tuple[int, int, str]] = deque()

    def discover(x: int, y: int, first_move: str) -> str | None:
        seen.add((x, y))
        for dx, dy in CARDINALS:
            if state.in_bounds(x + dx, y + dy) and goal(state, x + dx, y + dy):
                return first_move
        queue.append((x, y, first_move))
        return None

    for dx, dy in CARDINALS:
        nx, ny = p.x + dx, p.y + dy
        if (nx, ny) not in seen and is_walkable(state, nx, ny):
            found = discover(nx, ny, MOVE_FOR_STEP[(dx, dy)])
            if found is not None:
                return found
    while queue:
        x, y, first_move = queue.popleft()
        for dx, dy in CARDINALS:
            nx, ny = x + dx, y + dy
            if (nx, ny) not in seen and is_walkable(state, nx, ny):
                found = discover(nx, ny, first_move)
                if found is not None:
                    return found
    raise OptionComplete(unreachable=True)


@dataclass(frozen=True)
class PathfindOption:
    goal: TilePredicate

    def action(self, state: WorldState) -> str:
        return pathfind_action(state, self.goal)


@dataclass(frozen=True)
class InteractAdjacentOption:
    """Faces and then works an adjacent goal tile; completes when no goal
    tile borders the player."""

    goal: TilePredicate

    def action(self, state: WorldState) -> str:
        step = _adjacent_goal_step(state, self.goal)
        if step is None:
            raise OptionComplete()
        if (state.player.facing.x, state.player.facing.y) == step:
            return "do"
        return MOVE_FOR_STEP[step]


@dataclass(frozen=True)
class CombatOption:
    """Chases one entity and strikes until it is gone."""

    entity_id: int

    def action(self, state: WorldState) -> str:
        target = state.entity_by_id(self.entity_id)
        if target is None or target.removed or target.health <= 0:
            raise OptionComplete()
        try:
            return pathfind_action(state, entity_goal(self.entity_id))
        except OptionComplete as done:
            if done.unreachable:
                raise
            return "do"


# ---------------------------------------------------------------------------
# Plans.

@dataclass(frozen=True)
class Plan:
    """A compiled option program with a hard step budget."""

    name: str
    program: Callable[[WorldState, StepFn], WorldState]
    budget: int


def _gather(state: WorldState, step: StepFn, material: str, item: str,
            target: int) -> WorldState:
    """Pathfind-and-work loop until the inventory holds ``target`` of
    ``item``; gives up quietly when no goal tile is reachable."""
    pathfind = PathfindOption(material_goal(material))
    interact = InteractAdjacentOption(material_goal(material))
    while state.player.inventory[item] < target:
        try:
            action = pathfind.action(state)
        except OptionComplete as done:
            if done.unreachable:
                return state
            try:
                action = interact.action(state)
            except OptionComplete:
                return state
        state = step(state, action)
    return state


def _fight(state: WorldState, step: StepFn, entity_id: int,
           attempts: int) -> WorldState:
    option = CombatOption(entity_id)
    for _ in range(attempts):
        try:
            action = option.action(state)
        except OptionComplete:
            return state
        state = step(state, action)
    return state


def craft_then_fight_plan(zombie_ids: tuple[int, ...]) -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        state = _gather(state, step, "tree", "wood", 3)
        state = step(state, "place_table")
        state = step(state, "make_wood_sword")
        for zid in zombie_ids:
            state = _fight(state, step, zid, attempts=15)
        return state
    return Plan("craft_then_fight", program, budget=40)


def fight_immediately_plan(zombie_ids: tuple[int, ...]) -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        for zid in zombie_ids:
            state = _fight(state, step, zid, attempts=10)
        return state
    return Plan("fight_immediately", program, budget=40)


def craft_then_mine_plan() -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        state = _gather(state, step, "tree", "wood", 3)
        state = step(state, "place_table")
        state = step(state, "make_wood_pickaxe")
        return _gather(state, step, "stone", "stone", 3)
    return Plan("craft_then_mine", program, budget=60)


def mine_immediately_plan() -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        pathfind = PathfindOption(material_goal("stone"))
        interact = InteractAdjacentOption(material_goal("stone"))
        for _ in range(14):
            try:
                action = pathfind.action(state)
            except OptionComplete as done:
                if done.unreachable:
                    return state
                try:
                    action = interact.action(state)
                except OptionComplete:
                    return state
            state = step(state, action)
        return state
    return Plan("mine_immediately", program, budget=20)


def reuse_table_plan() -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        state = step(state, "place_table")
        for _ in range(4):
            state = step(state, "make_wood_sword")
        return state
    return Plan("reuse_table", program, budget=12)


def table_per_sword_plan() -> Plan:
    def program(state: WorldState, step: StepFn) -> WorldState:
        while state.player.inventory["wood"] >= 3:
            state = step(state, "place_table")
            state = step(state, "make_wood_sword")
            state = step(state, "move_left")
        return state
    return Plan("table_per_sword", program, budget=12)


# ---------------------------------------------------------------------------
# Reward functions.

@dataclass(frozen=True)
class RewardFunction:
    """Pure map from a rollout to a real reward."""

    name: str
    compute: Callable[[list[Transition]], float]

    def __call__(self, rollout: list[Transition]) -> float:
        return self.compute(rollout)


def _inventory_gains(rollout: list[Transition], item: str) -> int:
    return sum(
        max(nxt.player.inventory[item] - cur.player.inventory[item], 0)
        for cur, _, nxt in rollout)


STONE_COLLECTED = RewardFunction(
    "stone_collected",
    lambda rollout: float(_inventory_gains(rollout, "stone")))

SWORDS_CRAFTED = RewardFunction(
    "swords_crafted",
    lambda rollout: float(sum(
        _inventory_gains(rollout, kind)
        for kind in ("wood_sword", "stone_sword", "iron_sword"))))


def damage_per_second(target_ids: tuple[int, ...]) -> RewardFunction:
    """Total damage dealt to the targets per step, scaled by 10 so the
    calibrated combat fixture scores a round number."""

    def health(state: WorldState, entity_id: int) -> int:
        entity = state.entity_by_id(entity_id)
        if entity is None or entity.removed:
            return 0
        return entity.health

    def compute(rollout: list[Transition]) -> float:
        if not rollout:
            return 0.0
        dealt = sum(
            max(health(cur, tid) - health(nxt, tid), 0)
            for cur, _, nxt in rollout
            for tid in target_ids)
        return dealt / len(rollout) * DPS_SCALE

    return RewardFunction("damage_per_second", compute)


# ---------------------------------------------------------------------------
# Execution.

class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class PlanOutcome:
    reward: float
    steps: int
    rollout: list[Transition]
    truncated: bool


def env_capability(state: WorldState, action: str,
                   rng: random.Random | None = None) -> WorldState:
    return transition(state, action)


def model_capability(model) -> Capability:
    """Sampling capability that retries a rollout step once when the
    sampled state violates an invariant, then accepts it as-is."""

    def capability(state: WorldState, action: str,
                   rng: random.Random | None) -> WorldState:
        try:
            return model.sample(state, action, rng)
        except ReconstructionError:
            try:
                return model.sample(state, action, rng)
            except ReconstructionError as err:
                return err.state
    return capability


def execute_plan(plan: Plan, initial: WorldState, capability: Capability,
                 reward_fn: RewardFunction,
                 rng: random.Random | None = None) -> PlanOutcome:
    """Run the plan against a transition capability, recording every
    step; a plan that overruns its budget is cut and flagged."""
    rollout: list[Transition] = []

    def step(state: WorldState, action: str) -> WorldState:
        if len(rollout) >= plan.budget:
            raise _BudgetExhausted()
        nxt = capability(state, action, rng)
        rollout.append((state, action, nxt))
        return nxt

    truncated = False
    try:
        plan.program(initial, step)
    except _BudgetExhausted:
        truncated = True
    return PlanOutcome(reward=reward_fn(rollout), steps=len(rollout),
                       rollout=rollout, truncated=truncated)


# ---------------------------------------------------------------------------
# Scenarios and comparison.

@dataclass(frozen=True)
class PlanningScenario:
    name: str
    initial: WorldState
    plans: tuple[Plan, ...]
    reward: RewardFunction


def _plant_trees(state: WorldState) -> WorldState:
    for x, y in ((1, 2), (1, 3), (1, 4)):
        state = set_tile_material(state, x, y, "tree")
    return state


def zombie_fighter_scenario(seed: int = 0) -> PlanningScenario:
    """Two fragile zombies parked single file down the row, out of chase
    range until the player closes in; positions put the craft-first plan
    at exactly 20 true-environment steps for 4 damage."""
    state = blank_state(13, 7, "grass", (2, 3),
                        seed=stable_stream_seed(seed, "zombie_fighter"))
    state = _plant_trees(state)
    state, first = add_object(state, "zombie", 9, 3)
    state, second = add_object(state, "zombie", 11, 3)
    ids = (first, second)
    return PlanningScenario(
        name="zombie_fighter",
        initial=state,
        plans=(craft_then_fight_plan(ids), fight_immediately_plan(ids)),
        reward=damage_per_second(ids))


def stone_miner_scenario(seed: int = 0) -> PlanningScenario:
    state = blank_state(13, 7, "grass", (2, 3),
                        seed=stable_stream_seed(seed, "stone_miner"))
    state = _plant_trees(state)
    for x in (9, 10, 11):
        state = set_tile_material(state, x, 3, "stone")
    return PlanningScenario(
        name="stone_miner",
        initial=state,
        plans=(craft_then_mine_plan(), mine_immediately_plan()),
        reward=STONE_COLLECTED)


def sword_maker_scenario(seed: int = 0) -> PlanningScenario:
    """Fixed wood budget of 6: one table and four swords, or two tables
    and two swords."""
    state = blank_state(9, 7, "grass", (4, 3),
                        seed=stable_stream_seed(seed, "sword_maker"))
    state = set_player_inventory_item(state, "wood", 6)
    return PlanningScenario(
        name="sword_maker",
        initial=state,
        plans=(reuse_table_plan(), table_per_sword_plan()),
        reward=SWORDS_CRAFTED)


PLANNING_SCENARIOS: dict[str, Callable[[int], PlanningScenario]] = {
    "zombie_fighter": zombie_fighter_scenario,
    "stone_miner": stone_miner_scenario,
    "sword_maker": sword_maker_scenario,
}


def build_planning_scenario(name: str, seed: int = 0) -> PlanningScenario:
    if name not in PLANNING_SCENARIOS:
        raise KeyError(f"unknown planning scenario {name!r}")
    return PLANNING_SCENARIOS[name](seed)


@dataclass(frozen=True)
class PlanComparison:
    scenario: str
    reward_name: str
    trials: int
    plans: dict[str, dict[str, float]]
    env_ordering: tuple[str, ...]
    model_ordering: tuple[str, ...]
    agreement: bool

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "reward": self.reward_name,
            "trials": self.trials,
            "plans": self.plans,
            "env_ordering": list(self.env_ordering),
            "model_ordering": list(self.model_ordering),
            "agreement": self.agreement,
        }


def _ordering(means: dict[str, float]) -> tuple[str, ...]:
    return tuple(sorted(means, key=lambda name: (-means[name], name)))


def compare_plans(scenario: PlanningScenario, model, trials: int = 10,
                  seed: int = 0) -> PlanComparison:
    """Mean rewards per plan in the true environment and under model
    rollouts; agreement means both substrates order the plans alike."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    model_cap = model_capability(model)
    stats: dict[str, dict[str, float]] = {}
    env_means: dict[str, float] = {}
    model_means: dict[str, float] = {}
    for plan in scenario.plans:
        env_rewards, env_steps = [], []
        model_rewards, model_steps = [], []
        for trial in range(trials):
            env_run = execute_plan(plan, scenario.initial, env_capability,
                                   scenario.reward)
            env_rewards.append(env_run.reward)
            env_steps.append(env_run.steps)
            rng = random.Random(stable_stream_seed(
                seed, scenario.name, plan.name, "model", trial))
            model_run = execute_plan(plan, scenario.initial, model_cap,
                                     scenario.reward, rng)
            model_rewards.append(model_run.reward)
            model_steps.append(model_run.steps)
        env_means[plan.name] = sum(env_rewards) / trials
        model_means[plan.name] = sum(model_rewards) / trials
        stats[plan.name] = {
            "env_mean_reward": env_means[plan.name],
            "env_mean_steps": sum(env_steps) / trials,
            "model_mean_reward": model_means[plan.name],
            "model_mean_steps": sum(model_steps) / trials,
        }
    env_ordering = _ordering(env_means)
    model_ordering = _ordering(model_means)
    return PlanComparison(
        scenario=scenario.name,
        reward_name=scenario.reward.name,
        trials=trials,
        plans=stats,
        env_ordering=env_ordering,
        model_ordering=model_ordering,
        agreement=env_ordering == model_ordering)


__all__ = [
    "CombatOption", "DPS_SCALE", "InteractAdjacentOption", "OptionComplete",
    "PLANNING_SCENARIOS", "PathfindOption", "Plan", "PlanComparison",
    "PlanOutcome", "PlanningScenario", "RewardFunction", "STONE_COLLECTED",
    "SWORDS_CRAFTED", "Transition", "build_planning_scenario",
    "compare_plans", "craft_then_fight_plan", "craft_then_mine_plan",
    "damage_per_second", "entity_goal", "env_capability", "execute_plan",
    "fight_immediately_plan", "material_goal", "mine_immediately_plan",
    "model_capability", "pathfind_action", "reuse_table_plan",
    "sword_maker_scenario", "stone_miner_scenario", "table_per_sword_plan",
    "zombie_fighter_scenario",
]
