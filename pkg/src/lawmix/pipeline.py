"""Trajectory collection and artifact persistence.

The scripted exploration policy stands in for an autonomous agent: it
walks the default map through the whole tech tree (chop, craft, mine,
smelt-tier tools, combat) with deliberate invalid attempts mixed in, so
a collected trajectory exercises most laws. All file formats are
canonical JSON with sorted keys, making every artifact byte-stable for
a given seed.
"""

from __future__ import annotations

import json
import random
from collections import Counter, deque
from pathlib import Path
from typing import Callable

from .env import (
    CARDINALS, MOVE_DELTAS, PLACE_RULES, MapConfig, initial_state, is_walkable,
    transition,
)
from .planning import (
    MOVE_FOR_STEP, CombatOption, InteractAdjacentOption, OptionComplete,
    material_goal, pathfind_action,
)
from .rng import stable_stream_seed
from .state_core import WorldState, state_from_json, state_to_json

Transition = tuple[WorldState, str, WorldState]

DEFAULT_BUDGET = 400
_TURN_CYCLE = ("move_down", "move_left", "move_up", "move_right")


# ---------------------------------------------------------------------------
# Phase controllers: each emits one action per step and None when done.


class _Script:
    def __init__(self, actions: list[str]):
        self.queue = deque(actions)

    def step(self, state: WorldState) -> str | None:
        return self.queue.popleft() if self.queue else None


class _DanceBreaker:
    """Detect the two-tile shuffle a chasing zombie can pin a walker into
    (the zombie mirrors each sidestep, so pathfinding alternates forever)
    and break it by striking the adjacent chaser.

    Once engaged it stays on the attack until no zombie is adjacent;
    turning in place stalls the position history, so the shuffle pattern
    alone cannot carry the fight past the first turn.
    """

    def __init__(self):
        self.history: deque[tuple[int, int]] = deque(maxlen=4)
        self.engaged = False

    def strike(self, state: WorldState) -> str | None:
        p = state.player.position
        self.history.append((p.x, p.y))
        target = None
        for dx, dy in CARDINALS:
            blocker = state.entity_at(p.x + dx, p.y + dy)
            if blocker is not None and blocker.kind == "zombie":
                target = (dx, dy)
                break
        if target is None:
            self.engaged = False
            return None
        if not self.engaged:
            h = list(self.history)
            if len(h) < 4 or h[0] != h[2] or h[1] != h[3] or h[0] == h[1]:
                return None
            self.engaged = True
        facing = (state.player.facing.x, state.player.facing.y)
        return "do" if facing == target else MOVE_FOR_STEP[target]


class _Gather:
    """Pathfind to the nearest goal material and work it until the
    inventory target is met, the cap runs out, or nothing is reachable."""

    def __init__(self, material: str, item: str, target: int, cap: int):
        self.pathfind_goal = material_goal(material)
        self.interact = InteractAdjacentOption(material_goal(material))
        self.item = item
        self.target = target
        self.left = cap
        self.dance = _DanceBreaker()

    def step(self, state: WorldState) -> str | None:
        if self.left <= 0 or state.player.inventory[self.item] >= self.target:
            return None
        self.left -= 1
        strike = self.dance.strike(state)
        if strike is not None:
            return strike
        try:
            return pathfind_action(state, self.pathfind_goal)
        except OptionComplete as done:
            if done.unreachable:
                return None
            try:
                return self.interact.action(state)
            except OptionComplete:
                return None


class _GoAdjacent:
    """Walk until standing next to and facing the goal material."""

    def __init__(self, material: str, cap: int):
        self.goal = material_goal(material)
        self.left = cap
        self.dance = _DanceBreaker()

    def step(self, state: WorldState) -> str | None:
        if self.left <= 0:
            return None
        self.left -= 1
        strike = self.dance.strike(state)
        if strike is not None:
            return strike
        try:
            return pathfind_action(state, self.goal)
        except OptionComplete:
            return None


def _stations_in_reach(state: WorldState, x: int, y: int,
                       stations: tuple[str, ...]) -> bool:
    box = {state.material_at(x + dx, y + dy)
           for dy in (-1, 0, 1) for dx in (-1, 0, 1)}
    return all(s in box for s in stations)


class _GoToCraftRange:
    """Walk onto a tile that has every required station in its 3x3 box.

    Crafting checks the box around the player, so recipes needing two
    stations only work from the handful of tiles covering both; plain
    goal adjacency can land one tile too far from the second station.
    """

    def __init__(self, stations: tuple[str, ...], cap: int):
        self.stations = stations
        self.left = cap
        self.dance = _DanceBreaker()

    def step(self, state: WorldState) -> str | None:
        p = state.player.position
        if self.left <= 0 or _stations_in_reach(state, p.x, p.y, self.stations):
            return None
        self.left -= 1
        strike = self.dance.strike(state)
        if strike is not None:
            return strike
        seen = {(p.x, p.y)}
        queue: deque[tuple[int, int, str]] = deque()
        for dx, dy in CARDINALS:
            nx, ny = p.x + dx, p.y + dy
            if is_walkable(state, nx, ny):
                seen.add((nx, ny))
                if _stations_in_reach(state, nx, ny, self.stations):
                    return MOVE_FOR_STEP[(dx, dy)]
                queue.append((nx, ny, MOVE_FOR_STEP[(dx, dy)]))
        while queue:
            x, y, first = queue.popleft()
            for dx, dy in CARDINALS:
                nx, ny = x + dx, y + dy
                if (nx, ny) in seen or not is_walkable(state, nx, ny):
                    continue
                seen.add((nx, ny))
                if _stations_in_reach(state, nx, ny, self.stations):
                    return first
                queue.append((nx, ny, first))
        return None


class _Place:
    """Turn (or sidestep) until the faced tile accepts the placement,
    then place once."""

    def __init__(self, action: str, cap: int = 8):
        self.action = action
        self.targets = PLACE_RULES[action][1]
        self.left = cap
        self.placed = False
        self.turn = 0

    def step(self, state: WorldState) -> str | None:
        if self.placed or self.left <= 0:
            return None
        self.left -= 1
        p = state.player.position
        fx, fy = p.x + state.player.facing.x, p.y + state.player.facing.y
        if (state.in_bounds(fx, fy)
                and state.material_at(fx, fy) in self.targets
                and state.entity_at(fx, fy) is None):
            self.placed = True
            return self.action
        action = _TURN_CYCLE[self.turn % 4]
        self.turn += 1
        return action


class _CraftUntil:
    """Retry one craft action, shuffling position between attempts, until
    the item appears or the cap runs out."""

    def __init__(self, action: str, item: str, cap: int = 10):
        self.action = action
        self.item = item
        self.left = cap
        self.tick = 0

    def step(self, state: WorldState) -> str | None:
        if self.left <= 0 or state.player.inventory[self.item] >= 1:
            return None
        self.left -= 1
        self.tick += 1
        if self.tick % 2 == 1:
            return self.action
        return _TURN_CYCLE[(self.tick // 2) % 4]


class _Hunt:
    """Chase the nearest live entity of one kind; optionally loiter for a
    few steps on first contact before striking."""

    def __init__(self, kind: str, wait: int, cap: int):
        self.kind = kind
        self.wait = wait
        self.waited = 0
        self.left = cap

    def step(self, state: WorldState) -> str | None:
        if self.left <= 0:
            return None
        p = state.player.position
        alive = [o for o in state.objects
                 if o.kind == self.kind and not o.removed and o.health > 0]
        if not alive:
            return None
        target = min(alive, key=lambda o: (
            abs(o.position.x - p.x) + abs(o.position.y - p.y), o.entity_id))
        self.left -= 1
        try:
            action = CombatOption(target.entity_id).action(state)
        except OptionComplete:
            return None
        if action == "do" and self.waited < self.wait:
            self.waited += 1
            return "noop"
        return action


class _Wander:
    def __init__(self, rnd: random.Random):
        self.rnd = rnd

    def step(self, state: WorldState) -> str:
        if self.rnd.random() < 0.15:
            return "noop"
        dx, dy = self.rnd.choice(CARDINALS)
        for name, delta in MOVE_DELTAS.items():
            if delta == (dx, dy):
                return name
        return "noop"


class ScriptedExplorationPolicy:
    """Deterministic tech-tree traversal for trajectory collection.

    Phases run in order: a movement sweep with deliberately invalid
    craft and place attempts, wood and sapling harvesting, crafting at
    the prebuilt stations, mining through the stone/coal/iron/diamond
    tiers, placements, combat against each NPC kind, then seeded
    wandering. A thirst interrupt cuts in whenever drink drops to 2.
    """

    def __init__(self, seed: int = 0):
        self.rnd = random.Random(seed)
        self.interrupt: _Gather | None = None
        self.wander = _Wander(self.rnd)
        self.phases: deque = deque([
            _Script(["move_up", "move_up", "move_left", "move_left",
                     "move_down", "move_down", "move_right", "move_right",
                     "make_wood_pickaxe", "place_stone", "make_iron_sword",
                     "place_table", "noop", "move_up"]),
            _Gather("tree", "wood", 8, cap=90),
            _Gather("plant-sapling", "sapling", 1, cap=50),
            _Place("place_plant"),
            _GoAdjacent("table", cap=60),
            _Script(["make_wood_pickaxe", "make_wood_sword"]),
            _Gather("stone", "stone", 6, cap=70),
            _Place("place_stone"),
            _GoAdjacent("table", cap=60),
            _Script(["make_stone_pickaxe", "make_stone_sword"]),
            _Gather("coal", "coal", 2, cap=60),
            _Gather("iron", "iron", 2, cap=40),
            # killing the zombie now keeps it from shadowing the walk back
            # to the crafting stations
            _Hunt("zombie", wait=3, cap=60),
            # the prebuilt furnace sits beside the table, so iron crafting
            # must happen before the policy plants its own furnace elsewhere
            _GoToCraftRange(("table", "furnace"), cap=60),
            _CraftUntil("make_iron_pickaxe", "iron_pickaxe"),
            _CraftUntil("make_iron_sword", "iron_sword"),
            _Place("place_furnace"),
            _Gather("diamond", "diamond", 1, cap=40),
            _Hunt("cow", wait=0, cap=50),
            _Hunt("skeleton", wait=2, cap=50),
        ])

    def __call__(self, state: WorldState) -> str:
        if self.interrupt is None and state.player.inventory["drink"] <= 2:
            self.interrupt = _Gather("water", "drink", 8, cap=40)
        if self.interrupt is not None:
            action = self.interrupt.step(state)
            if action is not None:
                return action
            self.interrupt = None
        while self.phases:
            action = self.phases[0].step(state)
            if action is not None:
                return action
            self.phases.popleft()
        return self.wander.step(state)


def collect_trajectory(seed: int, budget: int = DEFAULT_BUDGET,
                       config: MapConfig | None = None,
                       ) -> list[Transition]:
    """Roll the scripted policy in the true environment."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    state = initial_state(config or MapConfig(seed=seed))
    policy = ScriptedExplorationPolicy(stable_stream_seed(seed, "policy"))
    transitions: list[Transition] = []
    for _ in range(budget):
        action = policy(state)
        nxt = transition(state, action)
        transitions.append((state, action, nxt))
        state = nxt
    return transitions


def coverage_summary(transitions: list[Transition]) -> dict:
    """Which actions did anything, and what the environment logged."""
    action_counts: Counter[str] = Counter()
    eventful: Counter[str] = Counter()
    events: Counter[str] = Counter()
    for _, action, nxt in transitions:
        action_counts[action] += 1
        events.update(nxt.event_log)
        if nxt.event_log:
            eventful[action] += 1
    return {
        "transitions": len(transitions),
        "actions": dict(sorted(action_counts.items())),
        "eventful_actions": dict(sorted(eventful.items())),
        "events": dict(sorted(events.items())),
    }


# ---------------------------------------------------------------------------
# Artifact IO. Every writer emits canonical bytes: sorted keys, UTF-8,
# trailing newline.


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dump_json(obj), encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_transitions(path: str | Path,
                      transitions: list[Transition]) -> None:
    lines = []
    for state, action, nxt in transitions:
        record = {"state": state_to_json(state), "action": action,
                  "next_state": state_to_json(nxt)}
        lines.append(json.dumps(record, sort_keys=True,
                                separators=(",", ":"), ensure_ascii=False))
    Path(path).write_text("".join(line + "\n" for line in lines),
                          encoding="utf-8")


def read_transitions(path: str | Path) -> list[Transition]:
    transitions: list[Transition] = []
    text = Path(path).read_text(encoding="utf-8")
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            transitions.append((state_from_json(record["state"]),
                                record["action"],
                                state_from_json(record["next_state"])))
        except (KeyError, ValueError) as err:
            raise ValueError(f"{path}:{number}: bad transition record: {err}")
    return transitions


def write_weights(path: str | Path, weights: dict[str, float]) -> None:
    write_json(path, {name: float(value) for name, value in weights.items()})


def read_weights(path: str | Path) -> dict[str, float]:
    doc = read_json(path)
    if not isinstance(doc, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in doc.values()):
        raise ValueError(f"{path}: weights must be a flat name-to-number map")
    return {name: float(value) for name, value in doc.items()}


__all__ = [
    "DEFAULT_BUDGET", "ScriptedExplorationPolicy", "Transition",
    "collect_trajectory", "coverage_summary", "dump_json", "read_json",
    "read_transitions", "read_weights", "write_json", "write_transitions",
    "write_weights",
]
