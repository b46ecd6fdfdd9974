"""World-state records, canonical serialization, and leaf-level diffs.

The canonical document is the shared currency of the whole package: the
environment, the probabilistic model, the evaluation harness, and the CLI all
talk to each other through it.  Two design rules keep it dependable:

* Semantically equal states serialize to byte-identical UTF-8 JSON.  Map keys
  are emitted in lexicographic order, insignificant whitespace is dropped,
  real-valued meters are rounded to 6 decimals, and the two non-semantic
  fields (``rng_state``, ``event_log``) are excluded.
* Non-player entities live under ``objects`` keyed by zero-padded entity id,
  and the player is serialized under its own ``player`` key.  Diffing states
  therefore never pays for an entity merely changing its position in a list.

Diffs are leaf-granular JSON-patch style operations (``add`` / ``remove`` /
``replace`` with slash-delimited paths).  ``count_elements`` counts primitive
leaves, with empty containers counting as one element each, so the normalized
edit distance ``len(ops) / count_elements(target)`` is bounded by 2.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace as dc_replace
from typing import Any, Iterator

FLOAT_DECIMALS = 6

# Excluded from the canonical document: non-semantic bookkeeping.
EXCLUDED_FIELDS = ("rng_state", "event_log")

INVENTORY_KEYS = (
    "health", "food", "drink", "energy",
    "sapling", "wood", "stone", "coal", "iron", "diamond",
    "wood_pickaxe", "stone_pickaxe", "iron_pickaxe",
    "wood_sword", "stone_sword", "iron_sword",
)

ACHIEVEMENT_KEYS = (
    "collect_coal", "collect_diamond", "collect_drink", "collect_iron",
    "collect_sapling", "collect_stone", "collect_wood",
    "defeat_skeleton", "defeat_zombie",
    "eat_cow", "eat_plant",
    "make_iron_pickaxe", "make_iron_sword",
    "make_stone_pickaxe", "make_stone_sword",
    "make_wood_pickaxe", "make_wood_sword",
    "place_furnace", "place_plant", "place_stone", "place_table",
    "wake_up",
)

MATERIALS = (
    "grass", "tree", "water", "stone", "coal", "iron", "diamond",
    "sand", "path", "table", "furnace", "lava", "plant-sapling",
)

METER_CAP = 9  # health / food / drink / energy all top out here


@dataclass
class Position:
    x: int
    y: int

    def to_doc(self) -> dict[str, int]:
        return {"x": self.x, "y": self.y}

    @staticmethod
    def from_doc(doc: dict[str, int]) -> "Position":
        return Position(int(doc["x"]), int(doc["y"]))


@dataclass
class Entity:
    """Base record for anything that occupies a tile.

    ``removed`` entities stay in the objects list (their paths stay stable for
    diffing) but take no part in mechanics.
    """

    entity_id: int
    kind: str
    position: Position
    health: int
    removed: bool = False

    def extra_doc(self) -> dict[str, Any]:
        return {}

    def to_doc(self) -> dict[str, Any]:
        doc = {
            "entity_id": self.entity_id,
            "health": self.health,
            "kind": self.kind,
            "position": self.position.to_doc(),
            "removed": self.removed,
        }
        doc.update(self.extra_doc())
        return doc


@dataclass
class Zombie(Entity):
    cooldown: int = 0

    def extra_doc(self) -> dict[str, Any]:
        return {"cooldown": self.cooldown}


@dataclass
class Skeleton(Entity):
    reload: int = 0

    def extra_doc(self) -> dict[str, Any]:
        return {"reload": self.reload}


@dataclass
class Cow(Entity):
    pass


@dataclass
class Arrow(Entity):
    facing: Position = field(default_factory=lambda: Position(0, 1))

    def extra_doc(self) -> dict[str, Any]:
        return {"facing": self.facing.to_doc()}


@dataclass
class Plant(Entity):
    grown: int = 0
    ripe: bool = False

    def extra_doc(self) -> dict[str, Any]:
        return {"grown": self.grown, "ripe": self.ripe}


@dataclass
class Fence(Entity):
    pass


@dataclass
class Player(Entity):
    """The player's health is stored in the inventory (single canonical path
    ``player/inventory/health``); the ``health`` attribute of the base record
    mirrors it through properties."""

    facing: Position = field(default_factory=lambda: Position(0, 1))
    sleeping: bool = False
    last_action: str = "noop"
    inventory: dict[str, int] = field(default_factory=dict)
    achievements: dict[str, int] = field(default_factory=dict)
    thirst: float = 0.0
    hunger: float = 0.0
    fatigue: float = 0.0
    recover: float = 0.0

    def __post_init__(self) -> None:
        for k in INVENTORY_KEYS:
            self.inventory.setdefault(k, 0)
        for k in ACHIEVEMENT_KEYS:
            self.achievements.setdefault(k, 0)
        # Base health mirrors inventory health; inventory wins.
        self.inventory["health"] = int(self.inventory.get("health", self.health))
        self.health = self.inventory["health"]

    def to_doc(self) -> dict[str, Any]:
        return {
            "achievements": dict(sorted(self.achievements.items())),
            "entity_id": self.entity_id,
            "facing": self.facing.to_doc(),
            "fatigue": _round6(self.fatigue),
            "hunger": _round6(self.hunger),
            "inventory": dict(sorted(self.inventory.items())),
            "kind": "player",
            "last_action": self.last_action,
            "position": self.position.to_doc(),
            "recover": _round6(self.recover),
            "removed": self.removed,
            "sleeping": self.sleeping,
            "thirst": _round6(self.thirst),
        }


ENTITY_KINDS = ("player", "zombie", "skeleton", "cow", "arrow", "plant", "fence")


@dataclass
class WorldState:
    size: tuple[int, int]                    # (width, height)
    materials: list[list[str | None]]        # indexed [y][x]
    objects: list[Entity]                    # includes the player
    player_id: int
    daylight: float = 1.0
    step_count: int = 0
    rng_state: str = "splitmix64:0:0"
    event_log: list[str] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.size[0]

    @property
    def height(self) -> int:
        return self.size[1]

    @property
    def player(self) -> Player:
        for obj in self.objects:
            if obj.entity_id == self.player_id and isinstance(obj, Player):
                return obj
        raise KeyError(f"player_id {self.player_id} does not resolve to a player")

    def entity_by_id(self, entity_id: int) -> Entity | None:
        for obj in self.objects:
            if obj.entity_id == entity_id:
                return obj
        return None

    def live_entities(self) -> Iterator[Entity]:
        for obj in self.objects:
            if not obj.removed:
                yield obj

    def entity_at(self, x: int, y: int) -> Entity | None:
        for obj in self.objects:
            if not obj.removed and obj.position.x == x and obj.position.y == y:
                return obj
        return None

    def material_at(self, x: int, y: int) -> str | None:
        if 0 <= x < self.width and 0 <= y < self.height:
            return self.materials[y][x]
        return None

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def copy(self) -> "WorldState":
        return copy.deepcopy(self)


def _round6(x: float) -> float:
    return round(float(x), FLOAT_DECIMALS)


def entity_key(entity_id: int) -> str:
    """Zero-padded map key so lexicographic key order equals numeric id order."""
    return f"{entity_id:06d}"


def _entity_to_canonical(entity: Entity) -> dict[str, Any]:
    return entity.to_doc()


def canonicalize(state: WorldState) -> dict[str, Any]:
    """Project a state onto its canonical document.

    Excludes ``rng_state`` and ``event_log``; absent materials serialize as
    the string ``"none"`` so every leaf is a JSON primitive.
    """
    objects: dict[str, Any] = {}
    player_doc: dict[str, Any] | None = None
    for obj in state.objects:
        if obj.entity_id == state.player_id:
            player_doc = obj.to_doc()
        else:
            objects[entity_key(obj.entity_id)] = _entity_to_canonical(obj)
    if player_doc is None:
        raise ValueError(f"player_id {state.player_id} not present in objects")
    return {
        "daylight": _round6(state.daylight),
        "materials": [[m if m is not None else "none" for m in row]
                      for row in state.materials],
        "objects": objects,
        "player": player_doc,
        "size": [state.size[0], state.size[1]],
        "step_count": state.step_count,
    }


def canonical_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(state: WorldState) -> bytes:
    return canonical_json(canonicalize(state)).encode("utf-8")


def states_equal(a: WorldState, b: WorldState) -> bool:
    return canonical_bytes(a) == canonical_bytes(b)


# ---------------------------------------------------------------------------
# Canonical document -> WorldState (used when writing sampled leaves back).

def _entity_from_doc(doc: dict[str, Any]) -> Entity:
    kind = doc["kind"]
    base = dict(
        entity_id=int(doc["entity_id"]),
        kind=kind,
        position=Position.from_doc(doc["position"]),
        health=int(doc.get("health", 0)),
        removed=bool(doc["removed"]),
    )
    if kind == "zombie":
        return Zombie(**base, cooldown=int(doc["cooldown"]))
    if kind == "skeleton":
        return Skeleton(**base, reload=int(doc["reload"]))
    if kind == "cow":
        return Cow(**base)
    if kind == "arrow":
        return Arrow(**base, facing=Position.from_doc(doc["facing"]))
    if kind == "plant":
        return Plant(**base, grown=int(doc["grown"]), ripe=bool(doc["ripe"]))
    if kind == "fence":
        return Fence(**base)
    raise ValueError(f"unknown entity kind {kind!r}")


def _player_from_doc(doc: dict[str, Any]) -> Player:
    return Player(
        entity_id=int(doc["entity_id"]),
        kind="player",
        position=Position.from_doc(doc["position"]),
        health=int(doc["inventory"]["health"]),
        removed=bool(doc["removed"]),
        facing=Position.from_doc(doc["facing"]),
        sleeping=bool(doc["sleeping"]),
        last_action=str(doc["last_action"]),
        inventory={k: int(v) for k, v in doc["inventory"].items()},
        achievements={k: int(v) for k, v in doc["achievements"].items()},
        thirst=float(doc["thirst"]),
        hunger=float(doc["hunger"]),
        fatigue=float(doc["fatigue"]),
        recover=float(doc["recover"]),
    )


def from_canonical(doc: dict[str, Any], rng_state: str = "splitmix64:0:0",
                   event_log: list[str] | None = None) -> WorldState:
    """Rebuild a WorldState from a canonical document.

    The two excluded fields are supplied by the caller (typically carried over
    from the state the document was derived from).
    """
    player = _player_from_doc(doc["player"])
    objects: list[Entity] = [player]
    for key in sorted(doc["objects"].keys()):
        objects.append(_entity_from_doc(doc["objects"][key]))
    materials = [[None if m == "none" else str(m) for m in row]
                 for row in doc["materials"]]
    return WorldState(
        size=(int(doc["size"][0]), int(doc["size"][1])),
        materials=materials,
        objects=objects,
        player_id=player.entity_id,
        daylight=float(doc["daylight"]),
        step_count=int(doc["step_count"]),
        rng_state=rng_state,
        event_log=list(event_log or []),
    )


# ---------------------------------------------------------------------------
# Full-fidelity JSON (canonical document plus the excluded fields).

def state_to_json(state: WorldState) -> dict[str, Any]:
    doc = canonicalize(state)
    doc["rng_state"] = state.rng_state
    doc["event_log"] = list(state.event_log)
    return doc


def state_from_json(doc: dict[str, Any]) -> WorldState:
    return from_canonical(doc, rng_state=str(doc.get("rng_state", "splitmix64:0:0")),
                          event_log=list(doc.get("event_log", [])))


# ---------------------------------------------------------------------------
# Element counting, leaf diff, patch application.

def count_elements(doc: Any) -> int:
    """Number of primitive leaves; empty containers count as one element."""
    if isinstance(doc, dict):
        if not doc:
            return 1
        return sum(count_elements(v) for v in doc.values())
    if isinstance(doc, list):
        if not doc:
            return 1
        return sum(count_elements(v) for v in doc)
    return 1


def join_path(segments: list[str]) -> str:
    return "/".join(segments)


def split_path(path: str) -> list[str]:
    return path.split("/") if path else []


def _leaf_map(doc: Any) -> dict[tuple[str, ...], Any]:
    """Flatten to {leaf path: value}; leaves are the ``count_elements``
    atoms, so empty containers are leaves too."""
    leaves: dict[tuple[str, ...], Any] = {}

    def walk(node: Any, prefix: tuple[str, ...]) -> None:
        if isinstance(node, dict) and node:
            for key in sorted(node.keys()):
                walk(node[key], prefix + (str(key),))
        elif isinstance(node, list) and node:
            for index, item in enumerate(node):
                walk(item, prefix + (str(index),))
        else:
            leaves[prefix] = node

    walk(doc, ())
    return leaves


def _order_key(path: tuple[str, ...]) -> tuple:
    # digit segments compare numerically so list removes go high-index-first
    return tuple((0, int(seg), "") if seg.isdigit() else (1, 0, seg)
                 for seg in path)


def _values_differ(a: Any, b: Any) -> bool:
    # canonical JSON tells 5 from 5.0 and true from 1, so the diff must too
    return type(a) is not type(b) or a != b


def diff_ops(source: Any, target: Any) -> list[dict[str, Any]]:
    """Leaf-granular patch turning ``source`` into ``target``.

    One ``replace`` per shared leaf path whose value differs, one ``add``
    per leaf path present only in the target, one ``remove`` per leaf path
    present only in the source.  Removes come first (deepest paths first)
    and ``apply_patch`` prunes containers they empty; a container that is
    empty in the target is itself a leaf, so it reappears as an explicit
    add.  ``diff_ops(x, x) == []``.
    """
    src, dst = _leaf_map(source), _leaf_map(target)
    removes = sorted((p for p in src if p not in dst), key=_order_key,
                     reverse=True)
    adds = sorted((p for p in dst if p not in src), key=_order_key)
    replaces = sorted((p for p in src.keys() & dst.keys()
                       if _values_differ(src[p], dst[p])), key=_order_key)
    ops: list[dict[str, Any]] = [
        {"op": "remove", "path": join_path(list(p))} for p in removes]
    ops.extend({"op": "add", "path": join_path(list(p)),
                "value": copy.deepcopy(dst[p])} for p in adds)
    ops.extend({"op": "replace", "path": join_path(list(p)),
                "value": copy.deepcopy(dst[p])} for p in replaces)
    return ops


def _child(container: Any, seg: str) -> Any:
    return container[int(seg)] if isinstance(container, list) else container[seg]


def _delete(container: Any, seg: str) -> None:
    if isinstance(container, list):
        del container[int(seg)]
    else:
        del container[seg]


def apply_patch(doc: Any, ops: list[dict[str, Any]]) -> Any:
    """Apply ``diff_ops`` output.  Missing intermediate containers on
    ``add`` are created as maps (in-domain, list shapes never grow
    mid-path); a ``remove`` that empties its ancestors prunes them, and the
    diff emits an explicit add whenever the target keeps an emptied one."""
    result = copy.deepcopy(doc)
    holder: dict[str, Any] = {"root": result}
    for op in ops:
        segments = ["root"] + split_path(op["path"])
        chain: list[tuple[Any, str]] = []
        parent: Any = holder
        for seg in segments[:-1]:
            chain.append((parent, seg))
            if isinstance(parent, dict) and seg not in parent and op["op"] == "add":
                parent[seg] = {}
            parent = _child(parent, seg)
        last = segments[-1]
        if op["op"] == "remove":
            _delete(parent, last)
            for container, seg in reversed(chain):
                if container is holder:
                    break
                node = _child(container, seg)
                if isinstance(node, (dict, list)) and not node:
                    _delete(container, seg)
                else:
                    break
        else:
            value = copy.deepcopy(op["value"])
            if isinstance(parent, list) and op["op"] == "add" and int(last) == len(parent):
                parent.append(value)
            elif isinstance(parent, list):
                parent[int(last)] = value
            else:
                parent[last] = value
    return holder["root"]


def normalized_distance(source: Any, target: Any) -> float:
    """Edit distance normalized by the target's element count."""
    ops = diff_ops(source, target)
    return len(ops) / count_elements(target)


# ---------------------------------------------------------------------------
# State invariants (validated after writing sampled values back; violations
# reported, never silently repaired).

WALKABLE = ("grass", "sand", "path")


def validate_state(state: WorldState) -> list[str]:
    violations: list[str] = []
    try:
        player = state.player
    except KeyError:
        violations.append("player: player_id does not resolve to a player record")
        player = None
    seen: dict[tuple[int, int], int] = {}
    for obj in state.objects:
        if obj.removed:
            continue
        p = obj.position
        if not state.in_bounds(p.x, p.y):
            violations.append(
                f"objects/{entity_key(obj.entity_id)}/position: ({p.x},{p.y}) out of bounds")
        key = (p.x, p.y)
        if key in seen:
            violations.append(
                f"objects/{entity_key(obj.entity_id)}/position: tile ({p.x},{p.y}) "
                f"already occupied by entity {seen[key]}")
        else:
            seen[key] = obj.entity_id
    if player is not None:
        for name, count in player.inventory.items():
            if count < 0:
                violations.append(f"player/inventory/{name}: negative count {count}")
        for name in ("health", "food", "drink", "energy"):
            if player.inventory.get(name, 0) > METER_CAP:
                violations.append(
                    f"player/inventory/{name}: {player.inventory[name]} exceeds cap {METER_CAP}")
    return violations


__all__ = [
    "ACHIEVEMENT_KEYS", "Arrow", "Cow", "Entity", "ENTITY_KINDS", "EXCLUDED_FIELDS",
    "Fence", "FLOAT_DECIMALS", "INVENTORY_KEYS", "MATERIALS", "METER_CAP",
    "Plant", "Player", "Position", "Skeleton", "WALKABLE", "WorldState", "Zombie",
    "apply_patch", "canonical_bytes", "canonical_json", "canonicalize",
    "count_elements", "diff_ops", "entity_key", "from_canonical", "join_path",
    "normalized_distance", "split_path", "state_from_json", "state_to_json",
    "states_equal", "validate_state",
]
