"""Survival gridworld with a pure transition function.

``transition(state, action)`` never mutates its input and draws randomness
only through the serialized generator state carried inside the state record,
so replaying a trajectory from the same initial state reproduces it exactly.

Update order within one step is fixed: player action, then NPCs in ascending
entity id, then meters, then daylight, then the step counter.  Invalid
actions (unmet preconditions) are silent no-ops; unknown action names raise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .rng import StateRng
from .state_core import (
    Cow, Entity, Plant, Player, Position, Skeleton, WorldState, Zombie,
    METER_CAP, WALKABLE, entity_key,
)

# ---------------------------------------------------------------------------
# Mechanics constants.

ACTIONS = (
    "noop",
    "move_up", "move_down", "move_left", "move_right",
    "do", "sleep",
    "place_stone", "place_table", "place_furnace", "place_plant",
    "make_wood_pickaxe", "make_stone_pickaxe", "make_iron_pickaxe",
    "make_wood_sword", "make_stone_sword", "make_iron_sword",
)

MOVE_DELTAS = {
    "move_up": (0, -1),
    "move_down": (0, 1),
    "move_left": (-1, 0),
    "move_right": (1, 0),
}

VIEW = (9, 9)  # update range: a view-sized box centered on the player
UPDATE_RADIUS = (VIEW[0] // 2, VIEW[1] // 2)

# material -> (required pickaxe tiers (any of), yielded item, replacement material)
COLLECT_RULES = {
    "tree": ((), "wood", "grass"),
    "water": ((), "drink", "water"),
    "plant-sapling": ((), "sapling", "grass"),
    "stone": (("wood_pickaxe", "stone_pickaxe", "iron_pickaxe"), "stone", "grass"),
    "coal": (("wood_pickaxe", "stone_pickaxe", "iron_pickaxe"), "coal", "grass"),
    "iron": (("stone_pickaxe", "iron_pickaxe"), "iron", "grass"),
    "diamond": (("iron_pickaxe",), "diamond", "grass"),
}

# action -> (required nearby stations, consumed items, produced item)
RECIPES = {
    "make_wood_pickaxe": (("table",), {"wood": 1}, "wood_pickaxe"),
    "make_stone_pickaxe": (("table",), {"wood": 1, "stone": 1}, "stone_pickaxe"),
    "make_iron_pickaxe": (("table", "furnace"), {"wood": 1, "coal": 1, "iron": 1}, "iron_pickaxe"),
    "make_wood_sword": (("table",), {"wood": 1}, "wood_sword"),
    "make_stone_sword": (("table",), {"wood": 1, "stone": 1}, "stone_sword"),
    "make_iron_sword": (("table", "furnace"), {"wood": 1, "coal": 1, "iron": 1}, "iron_sword"),
}

# action -> (consumed items, allowed target materials, placed material or entity kind)
PLACE_RULES = {
    "place_table": ({"wood": 2}, ("grass", "sand", "path"), "table"),
    "place_furnace": ({"stone": 2}, ("grass", "sand", "path"), "furnace"),
    "place_stone": ({"stone": 1}, ("grass", "sand", "path", "water"), "stone"),
    "place_plant": ({"sapling": 1}, ("grass",), "plant"),
}

SWORD_DAMAGE = {"none": 1, "wood_sword": 3, "stone_sword": 5, "iron_sword": 7}
SWORD_TIERS = ("iron_sword", "stone_sword", "wood_sword")  # best first
TOUGHNESS = {"zombie": 1, "skeleton": 1, "cow": 0}
NPC_HEALTH = {"zombie": 2, "skeleton": 2, "cow": 3}

ZOMBIE_ATTACK_DAMAGE = 2
ZOMBIE_COOLDOWN = 5
SKELETON_MOVE_PROB = 1.0   # always wanders (blocked moves become stays)
COW_MOVE_PROB = 0.5
PLANT_RIPE_AT = 50

FOOD_FROM_COW = 6
FOOD_FROM_PLANT = 4

# Exact binary fractions: 6-decimal canonical rounding is lossless on every
# reachable meter value, so laws can mirror the arithmetic bit for bit.
THIRST_RATE = 1.0 / 32.0
HUNGER_RATE = 1.0 / 64.0
FATIGUE_RATE = 1.0 / 64.0
RECOVER_RATE = 1.0 / 16.0
DAYLIGHT_STEP = 0.002

CARDINALS = ((0, -1), (0, 1), (-1, 0), (1, 0))


def mechanics_table() -> dict[str, Any]:
    """Machine-readable dump of every gameplay constant (CLI: dump-mechanics)."""
    return {
        "actions": list(ACTIONS),
        "view": list(VIEW),
        "update_radius": list(UPDATE_RADIUS),
        "walkable_materials": list(WALKABLE),
        "collect_rules": {
            m: {"required_tools_any_of": list(req), "yields": item, "tile_becomes": repl}
            for m, (req, item, repl) in COLLECT_RULES.items()
        },
        "recipes": {
            a: {"nearby_stations": list(st), "consumes": dict(cons), "produces": prod}
            for a, (st, cons, prod) in RECIPES.items()
        },
        "place_rules": {
            a: {"consumes": dict(cons), "target_materials": list(tm), "places": placed}
            for a, (cons, tm, placed) in PLACE_RULES.items()
        },
        "combat": {
            "sword_damage": dict(SWORD_DAMAGE),
            "toughness": dict(TOUGHNESS),
            "npc_health": dict(NPC_HEALTH),
            "zombie_attack_damage": ZOMBIE_ATTACK_DAMAGE,
            "zombie_cooldown": ZOMBIE_COOLDOWN,
        },
        "npc": {
            "zombie_chase_range": "update range",
            "skeleton_move_prob": SKELETON_MOVE_PROB,
            "cow_move_prob": COW_MOVE_PROB,
            "plant_ripe_at": PLANT_RIPE_AT,
        },
        "meters": {
            "cap": METER_CAP,
            "thirst_rate": THIRST_RATE,
            "hunger_rate": HUNGER_RATE,
            "fatigue_rate": FATIGUE_RATE,
            "recover_rate": RECOVER_RATE,
            "food_from_cow": FOOD_FROM_COW,
            "food_from_plant": FOOD_FROM_PLANT,
        },
        "daylight_step": DAYLIGHT_STEP,
    }


# ---------------------------------------------------------------------------
# Queries.

def within_update_range(state: WorldState, entity: Entity) -> bool:
    p = state.player.position
    q = entity.position
    return abs(q.x - p.x) <= UPDATE_RADIUS[0] and abs(q.y - p.y) <= UPDATE_RADIUS[1]


def get_target_tile(state: WorldState) -> tuple[int, int]:
    p = state.player
    return p.position.x + p.facing.x, p.position.y + p.facing.y


def target_material(state: WorldState) -> str | None:
    return state.material_at(*get_target_tile(state))


def target_entity(state: WorldState) -> Entity | None:
    return state.entity_at(*get_target_tile(state))


def best_sword(player: Player) -> str:
    for tier in SWORD_TIERS:
        if player.inventory.get(tier, 0) >= 1:
            return tier
    return "none"


def attack_damage(player: Player, kind: str) -> int:
    return max(SWORD_DAMAGE[best_sword(player)] - TOUGHNESS.get(kind, 0), 0)


def is_walkable(state: WorldState, x: int, y: int) -> bool:
    return (state.in_bounds(x, y)
            and state.material_at(x, y) in WALKABLE
            and state.entity_at(x, y) is None)


def adjacent_material(state: WorldState, name: str) -> bool:
    """Material present in the 3x3 box around the player."""
    p = state.player.position
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if state.material_at(p.x + dx, p.y + dy) == name:
                return True
    return False


def next_entity_id(state: WorldState) -> int:
    return max(obj.entity_id for obj in state.objects) + 1


def _round6(x: float) -> float:
    return round(x, 6)


# ---------------------------------------------------------------------------
# Transition.

def transition(state: WorldState, action: str) -> WorldState:
    if action not in ACTIONS:
        raise ValueError(f"unknown action {action!r}")
    ns = state.copy()
    ns.event_log = []
    player = ns.player

    if player.inventory["health"] <= 0:
        # Dead world: only the clock advances.
        _advance_clock(ns)
        return ns

    player.last_action = action
    if not player.sleeping:
        _apply_player_action(ns, player, action)

    rng = StateRng.deserialize(ns.rng_state)
    rng, player_damaged = _update_npcs(ns, player, rng)
    _update_meters(ns, player, player_damaged)
    _advance_clock(ns)
    ns.rng_state = rng.serialize()
    return ns


def _advance_clock(ns: WorldState) -> None:
    d = ns.daylight
    ns.daylight = _round6(d - DAYLIGHT_STEP) if d >= DAYLIGHT_STEP else 1.0
    ns.step_count += 1


def _apply_player_action(ns: WorldState, player: Player, action: str) -> None:
    if action == "noop":
        return
    if action in MOVE_DELTAS:
        dx, dy = MOVE_DELTAS[action]
        player.facing = Position(dx, dy)
        tx, ty = player.position.x + dx, player.position.y + dy
        if is_walkable(ns, tx, ty):
            player.position = Position(tx, ty)
        return
    if action == "do":
        _apply_do(ns, player)
        return
    if action == "sleep":
        player.sleeping = True
        ns.event_log.append("player fell asleep")
        return
    if action in RECIPES:
        stations, consumed, produced = RECIPES[action]
        if all(adjacent_material(ns, s) for s in stations) and \
                all(player.inventory[k] >= v for k, v in consumed.items()):
            for k, v in consumed.items():
                player.inventory[k] -= v
            player.inventory[produced] += 1
            ns.event_log.append(f"crafted {produced}")
        return
    if action in PLACE_RULES:
        consumed, targets, placed = PLACE_RULES[action]
        tx, ty = get_target_tile(ns)
        if not ns.in_bounds(tx, ty) or ns.material_at(tx, ty) not in targets \
                or ns.entity_at(tx, ty) is not None \
                or any(player.inventory[k] < v for k, v in consumed.items()):
            return
        for k, v in consumed.items():
            player.inventory[k] -= v
        if placed == "plant":
            ns.objects.append(Plant(entity_id=next_entity_id(ns), kind="plant",
                                    position=Position(tx, ty), health=1))
            ns.event_log.append("planted a sapling")
        else:
            ns.materials[ty][tx] = placed
            ns.event_log.append(f"placed {placed}")
        return
    raise AssertionError(f"unhandled action {action!r}")


def _apply_do(ns: WorldState, player: Player) -> None:
    target = target_entity(ns)
    if target is not None:
        _interact_with_entity(ns, player, target)
        return
    material = target_material(ns)
    rule = COLLECT_RULES.get(material or "")
    if rule is None:
        return
    required, item, replacement = rule
    if required and not any(player.inventory[t] >= 1 for t in required):
        return
    if item == "drink":
        player.inventory["drink"] = min(player.inventory["drink"] + 1, METER_CAP)
    else:
        player.inventory[item] += 1
    tx, ty = get_target_tile(ns)
    if replacement != material:
        ns.materials[ty][tx] = replacement
    ns.event_log.append(f"collected {item}")


def _interact_with_entity(ns: WorldState, player: Player, target: Entity) -> None:
    kind = target.kind
    if kind == "plant":
        assert isinstance(target, Plant)
        if target.ripe:
            player.inventory["food"] = min(player.inventory["food"] + FOOD_FROM_PLANT,
                                           METER_CAP)
            target.ripe = False
            target.grown = 0
            ns.event_log.append("ate a ripe plant")
        return
    if kind not in NPC_HEALTH:
        return
    damage = attack_damage(player, kind)
    if damage <= 0:
        return
    target.health = max(target.health - damage, 0)
    ns.event_log.append(f"hit {kind} for {damage}")
    if target.health == 0:
        target.removed = True
        ns.event_log.append(f"defeated {kind}")
        if kind == "cow":
            player.inventory["food"] = min(player.inventory["food"] + FOOD_FROM_COW,
                                           METER_CAP)


def _update_npcs(ns: WorldState, player: Player, rng: StateRng) -> tuple[StateRng, bool]:
    player_damaged = False
    npcs = sorted((o for o in ns.objects
                   if not o.removed and o.entity_id != ns.player_id),
                  key=lambda o: o.entity_id)
    for obj in npcs:
        if not within_update_range(ns, obj):
            continue
        if isinstance(obj, Zombie):
            player_damaged |= _update_zombie(ns, player, obj)
        elif isinstance(obj, Skeleton):
            rng = _random_walk(ns, obj, rng, SKELETON_MOVE_PROB)
        elif isinstance(obj, Cow):
            rng = _random_walk(ns, obj, rng, COW_MOVE_PROB)
        elif isinstance(obj, Plant):
            if obj.grown < PLANT_RIPE_AT:
                obj.grown += 1
                if obj.grown >= PLANT_RIPE_AT:
                    obj.ripe = True
    return rng, player_damaged


def _update_zombie(ns: WorldState, player: Player, zombie: Zombie) -> bool:
    dx = player.position.x - zombie.position.x
    dy = player.position.y - zombie.position.y
    if abs(dx) + abs(dy) == 1:
        # In attack position: strike when off cooldown, never move.
        if zombie.cooldown == 0:
            player.inventory["health"] = max(
                player.inventory["health"] - ZOMBIE_ATTACK_DAMAGE, 0)
            zombie.cooldown = ZOMBIE_COOLDOWN
            ns.event_log.append("zombie hit the player")
            return True
        zombie.cooldown -= 1
        return False
    zombie.cooldown = max(zombie.cooldown - 1, 0)
    step = (0, 0)
    if dx != 0:
        step = (1 if dx > 0 else -1, 0)
    elif dy != 0:
        step = (0, 1 if dy > 0 else -1)
    tx, ty = zombie.position.x + step[0], zombie.position.y + step[1]
    if step != (0, 0) and is_walkable(ns, tx, ty):
        zombie.position = Position(tx, ty)
    return False


def _random_walk(ns: WorldState, obj: Entity, rng: StateRng, move_prob: float) -> StateRng:
    if move_prob < 1.0:
        roll, rng = rng.next_float()
        if roll >= move_prob:
            return rng
    idx, rng = rng.next_int(4)
    dx, dy = CARDINALS[idx]
    tx, ty = obj.position.x + dx, obj.position.y + dy
    if is_walkable(ns, tx, ty):
        obj.position = Position(tx, ty)
    return rng


def _update_meters(ns: WorldState, player: Player, player_damaged: bool) -> None:
    inv = player.inventory
    if player.sleeping:
        inv["energy"] = min(inv["energy"] + 1, METER_CAP)
        if inv["energy"] >= METER_CAP:
            player.sleeping = False
            ns.event_log.append("player woke up")
    else:
        player.fatigue = _round6(player.fatigue + FATIGUE_RATE)
        if player.fatigue >= 1.0:
            player.fatigue = 0.0
            inv["energy"] = max(inv["energy"] - 1, 0)
    player.thirst = _round6(player.thirst + THIRST_RATE)
    if player.thirst >= 1.0:
        player.thirst = 0.0
        inv["drink"] = max(inv["drink"] - 1, 0)
    player.hunger = _round6(player.hunger + HUNGER_RATE)
    if player.hunger >= 1.0:
        player.hunger = 0.0
        inv["food"] = max(inv["food"] - 1, 0)
    if inv["food"] == 0 or inv["drink"] == 0:
        # Starvation; recovery pauses entirely while unfed.
        inv["health"] = max(inv["health"] - 1, 0)
        if inv["health"] == 0:
            ns.event_log.append("player starved")
    elif player.recover + RECOVER_RATE >= 1.0 and inv["health"] < METER_CAP \
            and not player.sleeping and not player_damaged:
        # Taking a hit interrupts recovery for the step.
        player.recover = 0.0
        inv["health"] += 1
        ns.event_log.append("health regenerated")
    else:
        player.recover = _round6(min(player.recover + RECOVER_RATE, 1.0))


# ---------------------------------------------------------------------------
# Setup utilities (pure: every mutator returns a fresh state).

class SetupError(ValueError):
    pass


def set_tile_material(state: WorldState, x: int, y: int,
                      material: str | None) -> WorldState:
    from .state_core import MATERIALS
    if material is not None and material not in MATERIALS:
        raise SetupError(f"unknown material {material!r}")
    if not state.in_bounds(x, y):
        raise SetupError(f"tile ({x},{y}) out of bounds")
    ns = state.copy()
    ns.materials[y][x] = material
    return ns


_ENTITY_FACTORIES = {
    "zombie": lambda eid, pos: Zombie(entity_id=eid, kind="zombie", position=pos,
                                      health=NPC_HEALTH["zombie"]),
    "skeleton": lambda eid, pos: Skeleton(entity_id=eid, kind="skeleton", position=pos,
                                          health=NPC_HEALTH["skeleton"]),
    "cow": lambda eid, pos: Cow(entity_id=eid, kind="cow", position=pos,
                                health=NPC_HEALTH["cow"]),
    "plant": lambda eid, pos: Plant(entity_id=eid, kind="plant", position=pos, health=1),
}


def add_object(state: WorldState, kind: str, x: int, y: int,
               **fields: Any) -> tuple[WorldState, int]:
    if kind not in _ENTITY_FACTORIES:
        raise SetupError(f"cannot spawn entity kind {kind!r}")
    if not state.in_bounds(x, y):
        raise SetupError(f"tile ({x},{y}) out of bounds")
    if state.entity_at(x, y) is not None:
        raise SetupError(f"tile ({x},{y}) already occupied")
    ns = state.copy()
    eid = next_entity_id(ns)
    obj = _ENTITY_FACTORIES[kind](eid, Position(x, y))
    for name, value in fields.items():
        if not hasattr(obj, name):
            raise SetupError(f"{kind} has no field {name!r}")
        setattr(obj, name, value)
    ns.objects.append(obj)
    return ns, eid


def remove_object(state: WorldState, entity_id: int) -> WorldState:
    if entity_id == state.player_id:
        raise SetupError("cannot remove the player")
    ns = state.copy()
    obj = ns.entity_by_id(entity_id)
    if obj is None:
        raise SetupError(f"no entity with id {entity_id}")
    obj.removed = True
    obj.health = 0
    return ns


def set_daylight(state: WorldState, value: float) -> WorldState:
    if not 0.0 <= value <= 1.0:
        raise SetupError(f"daylight {value} outside [0, 1]")
    ns = state.copy()
    ns.daylight = _round6(value)
    return ns


def set_player_position(state: WorldState, x: int, y: int) -> WorldState:
    if not state.in_bounds(x, y):
        raise SetupError(f"tile ({x},{y}) out of bounds")
    occupant = state.entity_at(x, y)
    if occupant is not None and occupant.entity_id != state.player_id:
        raise SetupError(f"tile ({x},{y}) already occupied")
    ns = state.copy()
    ns.player.position = Position(x, y)
    return ns


def set_player_facing(state: WorldState, dx: int, dy: int) -> WorldState:
    if (dx, dy) not in CARDINALS:
        raise SetupError(f"facing ({dx},{dy}) is not a cardinal direction")
    ns = state.copy()
    ns.player.facing = Position(dx, dy)
    return ns


def set_player_inventory_item(state: WorldState, item: str, count: int) -> WorldState:
    ns = state.copy()
    if item not in ns.player.inventory:
        raise SetupError(f"unknown inventory item {item!r}")
    if count < 0 or (item in ("health", "food", "drink", "energy") and count > METER_CAP):
        raise SetupError(f"count {count} out of range for {item!r}")
    ns.player.inventory[item] = count
    return ns


def set_player_stat(state: WorldState, name: str, value: Any) -> WorldState:
    ns = state.copy()
    player = ns.player
    if name in ("thirst", "hunger", "fatigue", "recover"):
        setattr(player, name, _round6(float(value)))
    elif name == "sleeping":
        player.sleeping = bool(value)
    elif name == "last_action":
        player.last_action = str(value)
    else:
        raise SetupError(f"unknown player stat {name!r}")
    return ns


def move_object(state: WorldState, entity_id: int, x: int, y: int) -> WorldState:
    ns = state.copy()
    obj = ns.entity_by_id(entity_id)
    if obj is None:
        raise SetupError(f"no entity with id {entity_id}")
    if not ns.in_bounds(x, y):
        raise SetupError(f"tile ({x},{y}) out of bounds")
    occupant = ns.entity_at(x, y)
    if occupant is not None and occupant.entity_id != entity_id:
        raise SetupError(f"tile ({x},{y}) already occupied")
    obj.position = Position(x, y)
    return ns


def set_rng_seed(state: WorldState, seed: int) -> WorldState:
    ns = state.copy()
    ns.rng_state = StateRng(seed).serialize()
    return ns


# ---------------------------------------------------------------------------
# Map generation.

@dataclass
class MapConfig:
    width: int = 24
    height: int = 24
    seed: int = 0
    cows: int = 2
    zombies: int = 1
    skeletons: int = 1
    saplings: int = 3


def blank_state(width: int = 9, height: int = 9, material: str = "grass",
                player_xy: tuple[int, int] | None = None,
                seed: int = 0) -> WorldState:
    """Uniform-material map with just the player; scenario setups start here."""
    if width < 7 or height < 7:
        raise SetupError("grid must be at least 7x7")
    px, py = player_xy if player_xy is not None else (width // 2, height // 2)
    player = Player(entity_id=1, kind="player", position=Position(px, py), health=9,
                    inventory={"health": 9, "food": 9, "drink": 9, "energy": 9})
    return WorldState(
        size=(width, height),
        materials=[[material for _ in range(width)] for _ in range(height)],
        objects=[player],
        player_id=1,
        daylight=1.0,
        step_count=0,
        rng_state=StateRng(seed).serialize(),
    )


def initial_state(config: MapConfig | None = None) -> WorldState:
    """Seeded starter map: every material kind present and reachable, a few
    NPCs, the player at the center."""
    cfg = config or MapConfig()
    if cfg.width < 16 or cfg.height < 16:
        raise SetupError("generated maps must be at least 16x16")
    state = blank_state(cfg.width, cfg.height, "grass", seed=cfg.seed)
    rng = StateRng(cfg.seed ^ 0xA5A5)
    w, h = cfg.width, cfg.height

    def jitter(lo: int, hi: int) -> int:
        nonlocal rng
        v, rng = rng.next_int(hi - lo + 1)
        return lo + v

    m = state.materials
    # Water pond with a sand rim, upper left.
    for y in range(2, 5):
        for x in range(2, 6):
            m[y][x] = "water"
    for x in range(2, 6):
        m[5][x] = "sand"
    # Tree grove, upper right.
    for _ in range(8):
        x, y = jitter(w - 9, w - 3), jitter(2, 7)
        m[y][x] = "tree"
    # Mountain pocket, lower left: stone shell around ores.
    for y in range(h - 8, h - 2):
        for x in range(2, 9):
            m[y][x] = "stone"
    m[h - 5][4] = "coal"
    m[h - 4][5] = "coal"
    m[h - 5][6] = "iron"
    m[h - 4][3] = "iron"
    m[h - 3][5] = "diamond"
    m[h - 6][3] = "lava"
    # Carve a grass corridor into the pocket so the ores stay reachable.
    for y in range(h - 8, h - 2):
        m[y][7] = "grass"
    for x in range(2, 8):
        m[h - 7][x] = "grass"
    m[h - 5][5] = "grass"
    m[h - 4][4] = "grass"
    m[h - 5][3] = "grass"
    m[h - 4][6] = "grass"
    m[h - 3][4] = "grass"
    m[h - 6][4] = "grass"
    m[h - 6][5] = "grass"
    m[h - 6][6] = "grass"
    m[h - 4][2] = "grass"
    # Pre-placed crafting stations and a path tile near the center.
    cx, cy = w // 2, h // 2
    m[cy - 2][cx + 2] = "table"
    m[cy - 2][cx + 3] = "furnace"
    m[cy - 2][cx + 1] = "path"
    # Wild saplings.
    placed = 0
    while placed < cfg.saplings:
        x, y = jitter(1, w - 2), jitter(1, h - 2)
        if m[y][x] == "grass" and (x, y) != (cx, cy):
            m[y][x] = "plant-sapling"
            placed += 1

    def free_tile(x0: int, x1: int, y0: int, y1: int) -> tuple[int, int]:
        while True:
            x, y = jitter(x0, x1), jitter(y0, y1)
            if m[y][x] == "grass" and state.entity_at(x, y) is None \
                    and (x, y) != (cx, cy):
                return x, y

    for _ in range(cfg.cows):
        x, y = free_tile(w - 10, w - 3, 2, 9)
        state, _ = add_object(state, "cow", x, y)
    for _ in range(cfg.zombies):
        x, y = free_tile(w - 7, w - 3, h - 7, h - 3)
        state, _ = add_object(state, "zombie", x, y)
    for _ in range(cfg.skeletons):
        x, y = free_tile(9, 14, 2, 5)
        state, _ = add_object(state, "skeleton", x, y)
    state.rng_state = StateRng(cfg.seed).serialize()
    return state


# ---------------------------------------------------------------------------
# Rendering.

_MATERIAL_GLYPHS = {
    "grass": ".", "tree": "T", "water": "~", "stone": "#", "coal": "c",
    "iron": "i", "diamond": "d", "sand": ",", "path": ":", "table": "=",
    "furnace": "F", "lava": "L", "plant-sapling": '"', None: " ",
}
_ENTITY_GLYPHS = {
    "player": "@", "zombie": "Z", "skeleton": "S", "cow": "C",
    "arrow": "^", "plant": "p", "fence": "+",
}


def render_ascii(state: WorldState) -> str:
    rows = []
    overlay = {(o.position.x, o.position.y): _ENTITY_GLYPHS[o.kind]
               for o in state.objects if not o.removed}
    for y in range(state.height):
        row = []
        for x in range(state.width):
            row.append(overlay.get((x, y)) or _MATERIAL_GLYPHS[state.materials[y][x]])
        rows.append("".join(row))
    p = state.player
    inv = ", ".join(f"{k}={v}" for k, v in sorted(p.inventory.items()) if v)
    status = (f"step={state.step_count} daylight={state.daylight:.3f} "
              f"pos=({p.position.x},{p.position.y}) facing=({p.facing.x},{p.facing.y})")
    return "\n".join(rows + [status, f"inventory: {inv or '(empty)'}"])


__all__ = [
    "ACTIONS", "CARDINALS", "COLLECT_RULES", "COW_MOVE_PROB", "DAYLIGHT_STEP",
    "FATIGUE_RATE", "FOOD_FROM_COW", "FOOD_FROM_PLANT", "HUNGER_RATE", "MapConfig",
    "MOVE_DELTAS", "NPC_HEALTH", "PLACE_RULES", "PLANT_RIPE_AT", "RECIPES",
    "RECOVER_RATE", "SetupError", "SKELETON_MOVE_PROB", "SWORD_DAMAGE", "SWORD_TIERS",
    "THIRST_RATE", "TOUGHNESS", "UPDATE_RADIUS", "VIEW", "ZOMBIE_ATTACK_DAMAGE",
    "ZOMBIE_COOLDOWN", "add_object", "adjacent_material", "attack_damage",
    "best_sword", "blank_state", "get_target_tile", "initial_state", "is_walkable",
    "mechanics_table", "move_object", "next_entity_id", "remove_object",
    "render_ascii", "set_daylight", "set_player_facing", "set_player_inventory_item",
    "set_player_position", "set_player_stat", "set_rng_seed", "set_tile_material",
    "target_entity", "target_material", "transition", "within_update_range",
]
