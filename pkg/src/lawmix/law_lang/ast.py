"""AST node types for the law DSL.

Nodes are frozen dataclasses; source positions are carried for diagnostics
but excluded from equality so pretty-print round trips compare clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.col}"


_NOSPAN = Span(0, 0)


def _span_field() -> Span:
    return _NOSPAN


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: Union[int, float, bool, str]
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class ActionRef(Expr):
    """The action string of the transition being modeled."""
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class PathRef(Expr):
    """Dotted state path: `player.inventory.wood`, `z.health`, `daylight`."""
    root: str
    segments: tuple[str, ...]
    span: Span = field(default_factory=_span_field, compare=False)

    def dotted(self) -> str:
        return ".".join((self.root,) + self.segments)


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-" | "not"
    operand: Expr
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # arithmetic, comparison, "and", "or"
    left: Expr
    right: Expr
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class Stmt:
    pass


@dataclass(frozen=True)
class Block:
    statements: tuple[Stmt, ...]


@dataclass(frozen=True)
class Assign(Stmt):
    """`path <- dist[e1, e2, ...]`: uniform mass over the listed support."""
    target: PathRef
    values: tuple[Expr, ...]
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class SetFacingMaterial(Stmt):
    material: str
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class SetMaterial(Stmt):
    x: Expr
    y: Expr
    material: str
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Union[Block, "If", None]
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class For(Stmt):
    var: str
    kind: str
    where: Expr | None
    body: Block
    span: Span = field(default_factory=_span_field, compare=False)


@dataclass(frozen=True)
class LawDef:
    name: str
    params: tuple[tuple[str, Union[int, float]], ...]
    when: Expr
    effect: Block
    span: Span = field(default_factory=_span_field, compare=False)
