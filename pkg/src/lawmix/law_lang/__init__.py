"""A small typed DSL for writing candidate transition laws.

A law has a name, optional numeric params, a boolean activation condition
over the pre-state and action, and an effect block that assigns uniform
distributions over listed support values to state paths.  Laws address
non-player entities by kind through `for ... in entities("kind")` loops,
never by id.
"""

from __future__ import annotations

import os

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
from .evaluator import LawEvalError, eval_effect, eval_precondition
from .lint import audit_law, audit_library
from .parser import GRAMMAR, LawParseError, parse_law, parse_library
from .printer import format_expr, format_law, format_library

__all__ = [
    "ActionRef", "Assign", "Binary", "Block", "Call", "Expr", "For", "If",
    "LawDef", "Lit", "PathRef", "SetFacingMaterial", "SetMaterial", "Span",
    "Stmt", "Unary",
    "GRAMMAR", "LawEvalError", "LawParseError",
    "audit_law", "audit_library",
    "eval_effect", "eval_precondition",
    "format_expr", "format_law", "format_library",
    "load_library", "parse_law", "parse_library",
]


def load_library(path: str) -> list[LawDef]:
    """Loads laws from a .law file or from every .law file in a directory.

    Files load in sorted name order; law names must be unique across the
    whole library.
    """
    if os.path.isdir(path):
        files = sorted(
            os.path.join(path, name) for name in os.listdir(path)
            if name.endswith(".law"))
        if not files:
            raise LawParseError(f"no .law files in directory {path!r}")
    else:
        files = [path]
    laws: list[LawDef] = []
    seen: dict[str, str] = {}
    for fname in files:
        with open(fname, "r", encoding="utf-8") as handle:
            text = handle.read()
        for law in parse_library(text, source_name=os.path.basename(fname)):
            if law.name in seen:
                raise LawParseError(
                    f"law {law.name!r} defined in both "
                    f"{seen[law.name]} and {os.path.basename(fname)}")
            seen[law.name] = os.path.basename(fname)
            laws.append(law)
    return laws
