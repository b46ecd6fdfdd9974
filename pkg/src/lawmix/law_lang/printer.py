"""Canonical pretty printing for law ASTs.

`format_law(parse_law(text))` followed by a reparse yields an identical AST,
which the test suite exercises for the whole shipped corpus.
"""

from __future__ import annotations

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
    Stmt,
    Unary,
)

_INDENT = "  "

# Precedence levels for minimal parenthesization; higher binds tighter.
_PREC = {
    "or": 1,
    "and": 2,
    "not": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
    "neg": 7,
}
_ATOM = 8


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _float_text(value: float) -> str:
    text = repr(value)
    if "e" in text or "E" in text:
        # The grammar has no exponent form; spell the digits out.
        text = format(value, ".17f").rstrip("0")
        if text.endswith("."):
            text += "0"
    return text


def format_expr(expr: Expr) -> str:
    text, _ = _fmt(expr)
    return text


def _fmt(expr: Expr) -> tuple[str, int]:
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return ("true" if expr.value else "false"), _ATOM
        if isinstance(expr.value, float):
            return _float_text(expr.value), _ATOM
        if isinstance(expr.value, str):
            return _quote(expr.value), _ATOM
        return str(expr.value), _ATOM
    if isinstance(expr, ActionRef):
        return "action", _ATOM
    if isinstance(expr, PathRef):
        return expr.dotted(), _ATOM
    if isinstance(expr, Unary):
        if expr.op == "not":
            inner = _child(expr.operand, _PREC["not"])
            return f"not {inner}", _PREC["not"]
        inner = _child(expr.operand, _PREC["neg"])
        return f"-{inner}", _PREC["neg"]
    if isinstance(expr, Binary):
        prec = _PREC[expr.op]
        left = _child(expr.left, prec)
        # Binary operators associate left; right children at equal
        # precedence keep their parentheses.
        right = _child(expr.right, prec + 1)
        return f"{left} {expr.op} {right}", prec
    if isinstance(expr, Call):
        args = ", ".join(format_expr(a) for a in expr.args)
        return f"{expr.name}({args})", _ATOM
    raise TypeError(f"cannot format {expr!r}")


def _child(expr: Expr, min_prec: int) -> str:
    text, prec = _fmt(expr)
    if prec < min_prec:
        return f"({text})"
    return text


def _format_stmt(stmt: Stmt, depth: int, lines: list[str]) -> None:
    pad = _INDENT * depth
    if isinstance(stmt, Assign):
        values = ", ".join(format_expr(v) for v in stmt.values)
        lines.append(f"{pad}{stmt.target.dotted()} <- dist[{values}]")
    elif isinstance(stmt, SetFacingMaterial):
        lines.append(f"{pad}set_facing_material({_quote(stmt.material)})")
    elif isinstance(stmt, SetMaterial):
        lines.append(f"{pad}set_material({format_expr(stmt.x)}, "
                     f"{format_expr(stmt.y)}, {_quote(stmt.material)})")
    elif isinstance(stmt, If):
        lines.append(f"{pad}if {format_expr(stmt.cond)} {{")
        _format_block(stmt.then, depth + 1, lines)
        node = stmt
        while isinstance(node.orelse, If):
            node = node.orelse
            lines.append(f"{pad}}} else if {format_expr(node.cond)} {{")
            _format_block(node.then, depth + 1, lines)
        if isinstance(node.orelse, Block):
            lines.append(f"{pad}}} else {{")
            _format_block(node.orelse, depth + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, For):
        head = f"{pad}for {stmt.var} in entities({_quote(stmt.kind)})"
        if stmt.where is not None:
            head += f" where {format_expr(stmt.where)}"
        lines.append(head + " {")
        _format_block(stmt.body, depth + 1, lines)
        lines.append(f"{pad}}}")
    else:
        raise TypeError(f"cannot format {stmt!r}")


def _format_block(block: Block, depth: int, lines: list[str]) -> None:
    for stmt in block.statements:
        _format_stmt(stmt, depth, lines)


def _format_number(value: int | float) -> str:
    return _float_text(value) if isinstance(value, float) else str(value)


def format_law(law: LawDef) -> str:
    lines = [f"law {law.name} {{"]
    if law.params:
        inner = ", ".join(f"{name}: {_format_number(v)}"
                          for name, v in law.params)
        lines.append(f"{_INDENT}params {{ {inner} }}")
    lines.append(f"{_INDENT}when: {format_expr(law.when)}")
    lines.append(f"{_INDENT}effect: {{")
    _format_block(law.effect, 2, lines)
    lines.append(f"{_INDENT}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_library(laws: list[LawDef]) -> str:
    return "\n".join(format_law(law) for law in laws)
