"""State schema the law DSL is type-checked against.

Field tables here must stay in lockstep with the dataclasses in
`lawmix.state_core`; the test suite cross-checks them.
"""

from __future__ import annotations

from ..state_core import ACHIEVEMENT_KEYS, INVENTORY_KEYS, MATERIALS

INT = "int"
FLOAT = "float"
BOOL = "bool"
STR = "str"

ENTITY_KINDS = ("zombie", "skeleton", "cow", "plant", "arrow", "fence")

# Fields shared by the player and every non-player entity.
_COMMON_FIELDS: dict[tuple[str, ...], str] = {
    ("entity_id",): INT,
    ("kind",): STR,
    ("position", "x"): INT,
    ("position", "y"): INT,
    ("removed",): BOOL,
}

PLAYER_FIELDS: dict[tuple[str, ...], str] = dict(_COMMON_FIELDS)
PLAYER_FIELDS.update({
    ("facing", "x"): INT,
    ("facing", "y"): INT,
    ("sleeping",): BOOL,
    ("last_action",): STR,
    ("thirst",): FLOAT,
    ("hunger",): FLOAT,
    ("fatigue",): FLOAT,
    ("recover",): FLOAT,
})
for _key in INVENTORY_KEYS:
    PLAYER_FIELDS[("inventory", _key)] = INT
for _key in ACHIEVEMENT_KEYS:
    PLAYER_FIELDS[("achievements", _key)] = INT

ENTITY_FIELDS: dict[str, dict[tuple[str, ...], str]] = {}
for _kind in ENTITY_KINDS:
    ENTITY_FIELDS[_kind] = dict(_COMMON_FIELDS)
    ENTITY_FIELDS[_kind][("health",)] = INT
ENTITY_FIELDS["zombie"][("cooldown",)] = INT
ENTITY_FIELDS["skeleton"][("reload",)] = INT
ENTITY_FIELDS["plant"][("grown",)] = INT
ENTITY_FIELDS["plant"][("ripe",)] = BOOL
ENTITY_FIELDS["arrow"][("facing", "x")] = INT
ENTITY_FIELDS["arrow"][("facing", "y")] = INT

# Top-level scalar paths addressable without a dot.
GLOBAL_FIELDS: dict[str, str] = {
    "daylight": FLOAT,
    "step_count": INT,
}

# Structural identity is not a law's to predict.
UNASSIGNABLE_SEGMENTS = (("entity_id",), ("kind",))

VALID_MATERIALS = frozenset(MATERIALS) | {"none"}

# name -> (argument spec, result type).  Argument spec entries:
#   "num"    int or float expression
#   "int"    int expression
#   "str"    string expression
#   "entity" `player` or a loop variable
#   "kind"   string literal naming an entity kind
#   "mat"    string literal naming a material
BUILTINS: dict[str, tuple[tuple[str, ...], str]] = {
    "sign": (("num",), INT),
    "abs": (("num",), "same"),
    "min": (("num", "num"), "widen"),
    "max": (("num", "num"), "widen"),
    "exists": (("kind",), BOOL),
    "count": (("kind",), INT),
    "target_material": ((), STR),
    "target_entity_kind": ((), STR),
    "in_update_range": (("entity",), BOOL),
    "dx": (("entity", "entity"), INT),
    "dy": (("entity", "entity"), INT),
    "material_dir": (("int", "int"), STR),
    "occupied_dir": (("int", "int"), BOOL),
    "adjacent_material": (("mat",), BOOL),
}

KEYWORDS = frozenset({
    "law", "params", "when", "effect", "if", "else", "for", "in", "where",
    "entities", "dist", "not", "and", "or", "true", "false", "action",
    "set_facing_material", "set_material",
})


def is_numeric(ty: str) -> bool:
    return ty in (INT, FLOAT)


def widen(a: str, b: str) -> str:
    return FLOAT if FLOAT in (a, b) else INT
