"""Evaluation of laws against concrete states.

`eval_precondition` decides whether a law is active for an
(observation, action) pair; `eval_effect` produces the law's predicted
distributions as a mapping from canonical state paths to support tuples.
Each support tuple carries the distinct predicted values in listing order;
mass is uniform over them.
"""

from __future__ import annotations

from .. import env
from ..state_core import Entity, WorldState, entity_key
from . import schema
from .ast import (
    ActionRef,
    Assign,
    Binary,
    Block,
    Call,
    Expr,
    For,
    If,
    LawDef,
    Lit,
    PathRef,
    SetFacingMaterial,
    SetMaterial,
    Span,
    Stmt,
    Unary,
)

Value = int | float | bool | str


class LawEvalError(ValueError):
    """Raised when a type-checked law still fails at evaluation time,
    e.g. division by zero or two writes landing on one path."""

    def __init__(self, message: str, law_name: str, span: Span | None = None):
        self.law_name = law_name
        self.span = span
        where = f"law {law_name!r}"
        if span is not None:
            where += f" ({span})"
        super().__init__(f"{where}: {message}")


class _Evaluator:
    def __init__(self, law: LawDef, state: WorldState, action: str):
        self.law = law
        self.state = state
        self.action = action
        self.params = dict(law.params)
        self.bindings: dict[str, Entity] = {}

    def error(self, message: str, span: Span | None = None) -> LawEvalError:
        return LawEvalError(message, self.law.name, span)

    # --- entity and path resolution --------------------------------------

    def resolve_entity(self, name: str, span: Span) -> Entity:
        if name == "player":
            return self.state.player
        ent = self.bindings.get(name)
        if ent is None:
            raise self.error(f"unbound entity variable {name!r}", span)
        return ent

    def read_path(self, ref: PathRef) -> Value:
        if not ref.segments:
            if ref.root in self.params:
                return self.params[ref.root]
            if ref.root == "daylight":
                return self.state.daylight
            if ref.root == "step_count":
                return self.state.step_count
        ent = self.resolve_entity(ref.root, ref.span)
        return _read_entity_field(ent, ref.segments)

    def canonical_target(self, ref: PathRef) -> str:
        if not ref.segments:
            return ref.root  # daylight or step_count
        tail = "/".join(ref.segments)
        if ref.root == "player":
            return f"player/{tail}"
        ent = self.resolve_entity(ref.root, ref.span)
        return f"objects/{entity_key(ent.entity_id)}/{tail}"

    def target_type(self, ref: PathRef) -> str:
        if not ref.segments:
            return schema.GLOBAL_FIELDS[ref.root]
        if ref.root == "player":
            return schema.PLAYER_FIELDS[ref.segments]
        ent = self.resolve_entity(ref.root, ref.span)
        return schema.ENTITY_FIELDS[ent.kind][ref.segments]

    # --- expressions ------------------------------------------------------

    def eval(self, expr: Expr) -> Value:
        if isinstance(expr, Lit):
            return expr.value
        if isinstance(expr, ActionRef):
            return self.action
        if isinstance(expr, PathRef):
            return self.read_path(expr)
        if isinstance(expr, Unary):
            val = self.eval(expr.operand)
            if expr.op == "not":
                return not val
            return -val
        if isinstance(expr, Binary):
            return self.eval_binary(expr)
        if isinstance(expr, Call):
            return self.eval_call(expr)
        raise self.error(f"cannot evaluate {expr!r}")

    def eval_binary(self, expr: Binary) -> Value:
        op = expr.op
        if op == "and":
            return bool(self.eval(expr.left)) and bool(self.eval(expr.right))
        if op == "or":
            return bool(self.eval(expr.left)) or bool(self.eval(expr.right))
        left = self.eval(expr.left)
        right = self.eval(expr.right)
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0:
                raise self.error("division by zero", expr.span)
            return left / right
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        raise self.error(f"unknown operator {op!r}", expr.span)

    def eval_call(self, expr: Call) -> Value:
        name = expr.name
        args = expr.args
        state = self.state
        player = state.player
        if name == "sign":
            v = self.eval(args[0])
            return (v > 0) - (v < 0)
        if name == "abs":
            return abs(self.eval(args[0]))
        if name == "min":
            return min(self.eval(args[0]), self.eval(args[1]))
        if name == "max":
            return max(self.eval(args[0]), self.eval(args[1]))
        if name == "exists":
            kind = args[0].value  # checked literal
            return any(e.kind == kind for e in state.live_entities())
        if name == "count":
            kind = args[0].value
            return sum(1 for e in state.live_entities() if e.kind == kind)
        if name == "target_material":
            tx, ty = env.get_target_tile(state)
            if not state.in_bounds(tx, ty):
                return "none"
            return state.material_at(tx, ty) or "none"
        if name == "target_entity_kind":
            ent = env.target_entity(state)
            return ent.kind if ent is not None else "none"
        if name == "in_update_range":
            ent = self.resolve_entity(args[0].root, expr.span)
            return env.within_update_range(state, ent)
        if name in ("dx", "dy"):
            a = self.resolve_entity(args[0].root, expr.span)
            b = self.resolve_entity(args[1].root, expr.span)
            if name == "dx":
                return a.position.x - b.position.x
            return a.position.y - b.position.y
        if name == "material_dir":
            ox = self.eval(args[0])
            oy = self.eval(args[1])
            x, y = player.position.x + ox, player.position.y + oy
            if not state.in_bounds(x, y):
                return "none"
            return state.material_at(x, y) or "none"
        if name == "occupied_dir":
            ox = self.eval(args[0])
            oy = self.eval(args[1])
            x, y = player.position.x + ox, player.position.y + oy
            return state.entity_at(x, y) is not None
        if name == "adjacent_material":
            return env.adjacent_material(state, args[0].value)
        raise self.error(f"unknown builtin {name!r}", expr.span)

    def _write_material(self, tx: int, ty: int, material: str,
                        span: Span, out: dict[str, tuple[Value, ...]]) -> None:
        if not self.state.in_bounds(tx, ty):
            return
        path = f"materials/{ty}/{tx}"
        if path in out:
            raise self.error(f"two writes landed on path {path!r}", span)
        out[path] = (material,)

    # --- statements --------------------------------------------------------

    def run_block(self, block: Block,
                  out: dict[str, tuple[Value, ...]]) -> None:
        for stmt in block.statements:
            self.run_stmt(stmt, out)

    def run_stmt(self, stmt: Stmt, out: dict[str, tuple[Value, ...]]) -> None:
        if isinstance(stmt, Assign):
            path = self.canonical_target(stmt.target)
            ty = self.target_type(stmt.target)
            values: list[Value] = []
            for expr in stmt.values:
                val = self.eval(expr)
                if ty == schema.FLOAT:
                    val = round(float(val), 6)
                if val not in values:
                    values.append(val)
            if path in out:
                raise self.error(
                    f"two writes landed on path {path!r}", stmt.span)
            out[path] = tuple(values)
        elif isinstance(stmt, SetFacingMaterial):
            tx, ty = env.get_target_tile(self.state)
            self._write_material(tx, ty, stmt.material, stmt.span, out)
        elif isinstance(stmt, SetMaterial):
            tx = self.eval(stmt.x)
            ty = self.eval(stmt.y)
            self._write_material(tx, ty, stmt.material, stmt.span, out)
        elif isinstance(stmt, If):
            if self.eval(stmt.cond):
                self.run_block(stmt.then, out)
            elif isinstance(stmt.orelse, Block):
                self.run_block(stmt.orelse, out)
            elif isinstance(stmt.orelse, If):
                self.run_stmt(stmt.orelse, out)
        elif isinstance(stmt, For):
            matches = [e for e in self.state.live_entities()
                       if e.kind == stmt.kind]
            matches.sort(key=lambda e: e.entity_id)
            for ent in matches:
                self.bindings[stmt.var] = ent
                try:
                    if stmt.where is not None and not self.eval(stmt.where):
                        continue
                    self.run_block(stmt.body, out)
                finally:
                    del self.bindings[stmt.var]
        else:
            raise self.error(f"unknown statement {stmt!r}")


def _read_entity_field(ent: Entity, segments: tuple[str, ...]) -> Value:
    if segments == ("position", "x"):
        return ent.position.x
    if segments == ("position", "y"):
        return ent.position.y
    head = segments[0]
    if head == "facing":
        return ent.facing.x if segments[1] == "x" else ent.facing.y
    if head == "inventory":
        return ent.inventory[segments[1]]
    if head == "achievements":
        return ent.achievements[segments[1]]
    return getattr(ent, head)


def eval_precondition(law: LawDef, state: WorldState, action: str) -> bool:
    """True when the law is active for this (observation, action) pair."""
    result = _Evaluator(law, state, action).eval(law.when)
    if not isinstance(result, bool):
        raise LawEvalError("when-clause did not produce a boolean", law.name)
    return result


def eval_effect(law: LawDef, state: WorldState,
                action: str) -> dict[str, tuple[Value, ...]]:
    """Evaluates the law's effect block.

    Returns canonical path -> tuple of distinct predicted values (uniform
    mass).  Raises LawEvalError if two writes collide on one path.
    """
    evaluator = _Evaluator(law, state, action)
    out: dict[str, tuple[Value, ...]] = {}
    evaluator.run_block(law.effect, out)
    return out
