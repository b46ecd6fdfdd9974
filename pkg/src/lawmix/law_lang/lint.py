"""Advisory structure audit for laws.

A law that touches several unrelated state aspects is harder to weight
independently, so the audit flags laws whose effect block writes more than
one (subject, aspect) bucket.  Warnings are advisory; mixed laws such as
"mine stone" (inventory plus the mined tile) still load and run.
"""

from __future__ import annotations

from .ast import (Assign, Block, For, If, LawDef, SetFacingMaterial,
                  SetMaterial, Stmt)

_PLAYER_ASPECTS = {
    "position": "position",
    "facing": "facing",
    "inventory": "inventory",
    "achievements": "achievements",
    "thirst": "meters",
    "hunger": "meters",
    "fatigue": "meters",
    "recover": "meters",
    "sleeping": "status",
    "last_action": "status",
    "removed": "status",
}

_ENTITY_ASPECTS = {
    "position": "position",
    "facing": "facing",
    "health": "health",
    "removed": "health",
    "cooldown": "status",
    "reload": "status",
    "grown": "status",
    "ripe": "status",
}


def _collect(stmt: Stmt, subject: str, buckets: set[tuple[str, str]]) -> None:
    if isinstance(stmt, Assign):
        target = stmt.target
        if not target.segments:
            buckets.add(("world", "clock"))
        elif target.root == "player":
            aspect = _PLAYER_ASPECTS.get(target.segments[0], "other")
            buckets.add(("player", aspect))
        else:
            aspect = _ENTITY_ASPECTS.get(target.segments[0], "other")
            buckets.add((subject or target.root, aspect))
    elif isinstance(stmt, (SetFacingMaterial, SetMaterial)):
        buckets.add(("world", "materials"))
    elif isinstance(stmt, If):
        _collect_block(stmt.then, subject, buckets)
        if isinstance(stmt.orelse, Block):
            _collect_block(stmt.orelse, subject, buckets)
        elif isinstance(stmt.orelse, If):
            _collect(stmt.orelse, subject, buckets)
    elif isinstance(stmt, For):
        _collect_block(stmt.body, stmt.kind, buckets)


def _collect_block(block: Block, subject: str,
                   buckets: set[tuple[str, str]]) -> None:
    for stmt in block.statements:
        _collect(stmt, subject, buckets)


def audit_law(law: LawDef) -> list[str]:
    """Returns warning strings, one per law that spans multiple aspects."""
    buckets: set[tuple[str, str]] = set()
    _collect_block(law.effect, "", buckets)
    if len(buckets) <= 1:
        return []
    listing = ", ".join(f"{subj}/{aspect}"
                        for subj, aspect in sorted(buckets))
    return [f"law {law.name!r} writes {len(buckets)} state aspects "
            f"({listing}); consider splitting it"]


def audit_library(laws: list[LawDef]) -> list[str]:
    warnings: list[str] = []
    for law in laws:
        warnings.extend(audit_law(law))
    return warnings
