"""Lexer, parser, and load-time type checker for the law DSL.

Grammar (see docs/law-grammar.md for the full EBNF):

    library   := { law }
    law       := "law" IDENT "{" [params] "when" ":" expr "effect" ":" block "}"
    params    := "params" "{" [ IDENT ":" number { "," IDENT ":" number } ] "}"
    block     := "{" { statement } "}"
    statement := assign | if | for | set_facing_material
    assign    := path "<-" "dist" "[" expr { "," expr } "]"

Every law is type-checked against the state schema before it is returned;
unknown paths, unknown entity kinds, and type mismatches are rejected with
source positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

GRAMMAR = """\
library    := { law }
law        := "law" IDENT "{" [ params ] "when" ":" expr "effect" ":" block "}"
params     := "params" "{" [ param { "," param } ] "}"
param      := IDENT ":" [ "-" ] NUMBER
block      := "{" { statement } "}"
statement  := assign | if | for | set_facing | set_tile
assign     := path "<-" "dist" "[" expr { "," expr } "]"
if         := "if" expr block [ "else" ( if | block ) ]
for        := "for" IDENT "in" "entities" "(" STRING ")" [ "where" expr ] block
set_facing := "set_facing_material" "(" STRING ")"
set_tile   := "set_material" "(" expr "," expr "," STRING ")"
path       := IDENT { "." IDENT }

expr       := or
or         := and { "or" and }
and        := not { "and" not }
not        := { "not" } comparison
comparison := additive [ ( "==" | "!=" | "<" | "<=" | ">" | ">=" ) additive ]
additive   := term { ( "+" | "-" ) term }
term       := factor { ( "*" | "/" ) factor }
factor     := { "-" } atom
atom       := NUMBER | STRING | "true" | "false" | "action"
            | "(" expr ")" | call | path
call       := IDENT "(" [ expr { "," expr } ] ")"

builtins   := sign(num) | abs(num) | min(num, num) | max(num, num)
            | exists(kind) | count(kind) | in_update_range(entity)
            | dx(entity, entity) | dy(entity, entity)
            | material_dir(int, int) | occupied_dir(int, int)
            | adjacent_material(material)
            | target_material() | target_entity_kind()
"""

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


class LawParseError(ValueError):
    """Raised for lexical, syntactic, and type errors in law sources."""

    def __init__(self, message: str, span: Span | None = None,
                 source_name: str | None = None):
        self.span = span
        self.source_name = source_name
        where = ""
        if source_name:
            where = f"{source_name}: "
        if span is not None:
            where += f"{span}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", "float", "str", "op", "eof"
    text: str
    span: Span


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<float>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><-|==|!=|<=|>=|[{}\[\]().,:<>+\-*/])
""", re.VERBOSE)


def tokenize(text: str, source_name: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LawParseError(f"unexpected character {text[pos]!r}",
                                Span(line, col), source_name)
        span = Span(line, col)
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, span))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token], source_name: str | None):
        self.tokens = tokens
        self.pos = 0
        self.source_name = source_name

    # --- token plumbing -------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, span: Span | None = None) -> LawParseError:
        if span is None:
            span = self.peek().span
        return LawParseError(message, span, self.source_name)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.kind != "eof" else "end of input"
            raise self.error(f"expected {want!r}, got {got!r}")
        return self.advance()

    def match(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.advance()
        return None

    def ident(self, role: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"expected {role}, got {tok.text!r}")
        if tok.text in schema.KEYWORDS:
            raise self.error(f"keyword {tok.text!r} cannot be used as {role}")
        return self.advance()

    # --- grammar --------------------------------------------------------

    def parse_library(self) -> list[LawDef]:
        laws: list[LawDef] = []
        seen: dict[str, Span] = {}
        while self.peek().kind != "eof":
            law = self.parse_law()
            if law.name in seen:
                raise LawParseError(
                    f"duplicate law name {law.name!r} "
                    f"(first defined at {seen[law.name]})",
                    law.span, self.source_name)
            seen[law.name] = law.span
            laws.append(law)
        return laws

    def parse_law(self) -> LawDef:
        start = self.expect("ident", "law").span
        name = self.ident("a law name").text
        self.expect("op", "{")
        params: list[tuple[str, int | float]] = []
        if self.peek().kind == "ident" and self.peek().text == "params":
            self.advance()
            self.expect("op", "{")
            while not self.match("op", "}"):
                pname = self.ident("a parameter name").text
                if any(p == pname for p, _ in params):
                    raise self.error(f"duplicate parameter {pname!r}")
                self.expect("op", ":")
                params.append((pname, self.parse_number()))
                if not self.match("op", ","):
                    self.expect("op", "}")
                    break
        self.expect("ident", "when")
        self.expect("op", ":")
        when = self.parse_expr()
        self.expect("ident", "effect")
        self.expect("op", ":")
        effect = self.parse_block()
        self.expect("op", "}")
        return LawDef(name, tuple(params), when, effect, start)

    def parse_number(self) -> int | float:
        neg = self.match("op", "-") is not None
        tok = self.peek()
        if tok.kind == "float":
            self.advance()
            value: int | float = float(tok.text)
        elif tok.kind == "int":
            self.advance()
            value = int(tok.text)
        else:
            raise self.error(f"expected a number, got {tok.text!r}")
        return -value if neg else value

    def parse_block(self) -> Block:
        self.expect("op", "{")
        statements: list[Stmt] = []
        while not self.match("op", "}"):
            statements.append(self.parse_statement())
        return Block(tuple(statements))

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "if":
            return self.parse_if()
        if tok.kind == "ident" and tok.text == "for":
            return self.parse_for()
        if tok.kind == "ident" and tok.text == "set_facing_material":
            span = self.advance().span
            self.expect("op", "(")
            mat = self.expect("str").text
            self.expect("op", ")")
            return SetFacingMaterial(_unquote(mat), span)
        if tok.kind == "ident" and tok.text == "set_material":
            span = self.advance().span
            self.expect("op", "(")
            x = self.parse_expr()
            self.expect("op", ",")
            y = self.parse_expr()
            self.expect("op", ",")
            mat = self.expect("str").text
            self.expect("op", ")")
            return SetMaterial(x, y, _unquote(mat), span)
        return self.parse_assign()

    def parse_if(self) -> If:
        span = self.expect("ident", "if").span
        cond = self.parse_expr()
        then = self.parse_block()
        orelse: Block | If | None = None
        if self.match("ident", "else"):
            if self.peek().kind == "ident" and self.peek().text == "if":
                orelse = self.parse_if()
            else:
                orelse = self.parse_block()
        return If(cond, then, orelse, span)

    def parse_for(self) -> For:
        span = self.expect("ident", "for").span
        var = self.ident("a loop variable").text
        self.expect("ident", "in")
        self.expect("ident", "entities")
        self.expect("op", "(")
        kind_tok = self.expect("str")
        self.expect("op", ")")
        where = None
        if self.match("ident", "where"):
            where = self.parse_expr()
        body = self.parse_block()
        return For(var, _unquote(kind_tok.text), where, body, span)

    def parse_assign(self) -> Assign:
        target = self.parse_path()
        self.expect("op", "<-")
        self.expect("ident", "dist")
        self.expect("op", "[")
        values = [self.parse_expr()]
        while self.match("op", ","):
            values.append(self.parse_expr())
        self.expect("op", "]")
        return Assign(target, tuple(values), target.span)

    def parse_path(self) -> PathRef:
        root = self.ident("a state path")
        segments: list[str] = []
        while self.match("op", "."):
            segments.append(self.ident("a path segment").text)
        return PathRef(root.text, tuple(segments), root.span)

    # Precedence climbing: or < and < not < comparison < additive < term.

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while True:
            tok = self.match("ident", "or")
            if tok is None:
                return left
            left = Binary("or", left, self.parse_and(), tok.span)

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while True:
            tok = self.match("ident", "and")
            if tok is None:
                return left
            left = Binary("and", left, self.parse_not(), tok.span)

    def parse_not(self) -> Expr:
        tok = self.match("ident", "not")
        if tok is not None:
            return Unary("not", self.parse_not(), tok.span)
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind == "op" and tok.text in _COMPARISONS:
            self.advance()
            return Binary(tok.text, left, self.parse_additive(), tok.span)
        return left

    def parse_additive(self) -> Expr:
        left = self.parse_term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("+", "-"):
                self.advance()
                left = Binary(tok.text, left, self.parse_term(), tok.span)
            else:
                return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("*", "/"):
                self.advance()
                left = Binary(tok.text, left, self.parse_factor(), tok.span)
            else:
                return left

    def parse_factor(self) -> Expr:
        tok = self.match("op", "-")
        if tok is not None:
            return Unary("-", self.parse_factor(), tok.span)
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "float":
            self.advance()
            return Lit(float(tok.text), tok.span)
        if tok.kind == "int":
            self.advance()
            return Lit(int(tok.text), tok.span)
        if tok.kind == "str":
            self.advance()
            return Lit(_unquote(tok.text), tok.span)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect("op", ")")
            return inner
        if tok.kind == "ident":
            if tok.text == "true":
                self.advance()
                return Lit(True, tok.span)
            if tok.text == "false":
                self.advance()
                return Lit(False, tok.span)
            if tok.text == "action":
                self.advance()
                return ActionRef(tok.span)
            if tok.text in schema.KEYWORDS:
                raise self.error(f"unexpected keyword {tok.text!r}")
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "op" and nxt.text == "(":
                self.advance()
                self.advance()
                args: list[Expr] = []
                if not self.match("op", ")"):
                    args.append(self.parse_expr())
                    while self.match("op", ","):
                        args.append(self.parse_expr())
                    self.expect("op", ")")
                return Call(tok.text, tuple(args), tok.span)
            return self.parse_path()
        raise self.error(f"expected an expression, got {tok.text!r}")


# --- type checking -------------------------------------------------------


class _Checker:
    """Validates one law against the state schema."""

    def __init__(self, law: LawDef, source_name: str | None):
        self.law = law
        self.source_name = source_name
        self.params = dict(law.params)
        self.scopes: dict[str, str] = {}  # loop var -> entity kind

    def error(self, message: str, span: Span) -> LawParseError:
        return LawParseError(f"in law {self.law.name!r}: {message}",
                             span, self.source_name)

    def check(self) -> None:
        if self.type_of(self.law.when) != schema.BOOL:
            raise self.error("when-clause must be boolean", self.law.span)
        self.check_block(self.law.effect, static_targets={})

    # --- statements ---

    def check_block(self, block: Block, static_targets: dict[str, Span]) -> None:
        for stmt in block.statements:
            self.check_stmt(stmt, static_targets)

    def check_stmt(self, stmt: Stmt, static_targets: dict[str, Span]) -> None:
        if isinstance(stmt, Assign):
            ty = self.path_type(stmt.target, assigning=True)
            for expr in stmt.values:
                vty = self.type_of(expr)
                if ty == schema.FLOAT and vty == schema.INT:
                    continue
                if vty != ty:
                    raise self.error(
                        f"distribution value has type {vty}, "
                        f"target {stmt.target.dotted()!r} expects {ty}",
                        stmt.span)
            key = stmt.target.dotted()
            if key in static_targets:
                raise self.error(
                    f"path {key!r} assigned twice in the same block "
                    f"(first at {static_targets[key]})", stmt.span)
            static_targets[key] = stmt.span
        elif isinstance(stmt, SetFacingMaterial):
            if stmt.material not in schema.VALID_MATERIALS:
                raise self.error(f"unknown material {stmt.material!r}",
                                 stmt.span)
            if "__facing_material__" in static_targets:
                raise self.error(
                    "faced tile material written twice in the same block",
                    stmt.span)
            static_targets["__facing_material__"] = stmt.span
        elif isinstance(stmt, SetMaterial):
            if stmt.material not in schema.VALID_MATERIALS:
                raise self.error(f"unknown material {stmt.material!r}",
                                 stmt.span)
            for coord in (stmt.x, stmt.y):
                if self.type_of(coord) != schema.INT:
                    raise self.error(
                        "set_material coordinates must be integers", stmt.span)
        elif isinstance(stmt, If):
            if self.type_of(stmt.cond) != schema.BOOL:
                raise self.error("if-condition must be boolean", stmt.span)
            # Branches are exclusive, so each gets its own duplicate scope.
            self.check_block(stmt.then, dict(static_targets))
            if isinstance(stmt.orelse, Block):
                self.check_block(stmt.orelse, dict(static_targets))
            elif isinstance(stmt.orelse, If):
                self.check_stmt(stmt.orelse, dict(static_targets))
        elif isinstance(stmt, For):
            if stmt.kind not in schema.ENTITY_KINDS:
                raise self.error(f"unknown entity kind {stmt.kind!r}",
                                 stmt.span)
            if stmt.var in self.scopes or stmt.var == "player" \
                    or stmt.var in schema.GLOBAL_FIELDS \
                    or stmt.var in self.params:
                raise self.error(
                    f"loop variable {stmt.var!r} shadows an existing name",
                    stmt.span)
            self.scopes[stmt.var] = stmt.kind
            if stmt.where is not None \
                    and self.type_of(stmt.where) != schema.BOOL:
                raise self.error("where-clause must be boolean", stmt.span)
            # Distinct iterations hit distinct entities, so duplicate
            # detection within the body starts fresh.
            self.check_block(stmt.body, {})
            del self.scopes[stmt.var]
        else:
            raise self.error(f"unknown statement {stmt!r}",
                             getattr(stmt, "span", self.law.span))

    # --- expressions ---

    def path_type(self, ref: PathRef, assigning: bool = False) -> str:
        if ref.root in schema.GLOBAL_FIELDS:
            if ref.segments:
                raise self.error(
                    f"{ref.root!r} has no sub-fields", ref.span)
            return schema.GLOBAL_FIELDS[ref.root]
        if ref.root == "player":
            fields = schema.PLAYER_FIELDS
        elif ref.root in self.scopes:
            fields = schema.ENTITY_FIELDS[self.scopes[ref.root]]
        else:
            raise self.error(f"unknown name {ref.root!r}", ref.span)
        if ref.segments not in fields:
            raise self.error(
                f"unknown state path {ref.dotted()!r}", ref.span)
        if assigning and ref.segments in schema.UNASSIGNABLE_SEGMENTS:
            raise self.error(
                f"path {ref.dotted()!r} is not assignable", ref.span)
        return fields[ref.segments]

    def entity_kind_of(self, expr: Expr) -> str:
        if isinstance(expr, PathRef) and not expr.segments:
            if expr.root == "player":
                return "player"
            if expr.root in self.scopes:
                return self.scopes[expr.root]
        span = getattr(expr, "span", self.law.span)
        raise self.error(
            "expected `player` or a loop variable here", span)

    def type_of(self, expr: Expr) -> str:
        if isinstance(expr, Lit):
            if isinstance(expr.value, bool):
                return schema.BOOL
            if isinstance(expr.value, int):
                return schema.INT
            if isinstance(expr.value, float):
                return schema.FLOAT
            return schema.STR
        if isinstance(expr, ActionRef):
            return schema.STR
        if isinstance(expr, PathRef):
            if not expr.segments and expr.root in self.params:
                value = self.params[expr.root]
                return schema.INT if isinstance(value, int) else schema.FLOAT
            return self.path_type(expr)
        if isinstance(expr, Unary):
            ty = self.type_of(expr.operand)
            if expr.op == "not":
                if ty != schema.BOOL:
                    raise self.error("`not` needs a boolean", expr.span)
                return schema.BOOL
            if not schema.is_numeric(ty):
                raise self.error("unary `-` needs a number", expr.span)
            return ty
        if isinstance(expr, Binary):
            return self.binary_type(expr)
        if isinstance(expr, Call):
            return self.call_type(expr)
        raise self.error(f"unknown expression {expr!r}",
                         getattr(expr, "span", self.law.span))

    def binary_type(self, expr: Binary) -> str:
        if expr.op in ("and", "or"):
            for side in (expr.left, expr.right):
                if self.type_of(side) != schema.BOOL:
                    raise self.error(
                        f"`{expr.op}` needs boolean operands", expr.span)
            return schema.BOOL
        lt = self.type_of(expr.left)
        rt = self.type_of(expr.right)
        if expr.op in ("+", "-", "*", "/"):
            if not (schema.is_numeric(lt) and schema.is_numeric(rt)):
                raise self.error(
                    f"`{expr.op}` needs numeric operands", expr.span)
            if expr.op == "/":
                return schema.FLOAT
            return schema.widen(lt, rt)
        # Comparison.
        if expr.op in ("==", "!="):
            ok = (schema.is_numeric(lt) and schema.is_numeric(rt)) or lt == rt
            if not ok:
                raise self.error(
                    f"cannot compare {lt} with {rt}", expr.span)
            return schema.BOOL
        if not (schema.is_numeric(lt) and schema.is_numeric(rt)):
            raise self.error(
                f"`{expr.op}` needs numeric operands", expr.span)
        return schema.BOOL

    def call_type(self, expr: Call) -> str:
        sig = schema.BUILTINS.get(expr.name)
        if sig is None:
            raise self.error(f"unknown builtin {expr.name!r}", expr.span)
        arg_spec, result = sig
        if len(expr.args) != len(arg_spec):
            raise self.error(
                f"{expr.name} takes {len(arg_spec)} argument(s), "
                f"got {len(expr.args)}", expr.span)
        arg_types: list[str] = []
        for spec, arg in zip(arg_spec, expr.args):
            if spec == "entity":
                self.entity_kind_of(arg)
                arg_types.append("entity")
            elif spec == "kind":
                if not (isinstance(arg, Lit) and arg.value in schema.ENTITY_KINDS):
                    raise self.error(
                        f"{expr.name} needs an entity kind literal", expr.span)
                arg_types.append(schema.STR)
            elif spec == "mat":
                if not (isinstance(arg, Lit)
                        and arg.value in schema.VALID_MATERIALS):
                    raise self.error(
                        f"{expr.name} needs a material name literal",
                        expr.span)
                arg_types.append(schema.STR)
            else:
                ty = self.type_of(arg)
                if spec == "num" and not schema.is_numeric(ty):
                    raise self.error(
                        f"{expr.name} needs a numeric argument", expr.span)
                if spec == "int" and ty != schema.INT:
                    raise self.error(
                        f"{expr.name} needs an int argument", expr.span)
                if spec == "str" and ty != schema.STR:
                    raise self.error(
                        f"{expr.name} needs a string argument", expr.span)
                arg_types.append(ty)
        if result == "same":
            return arg_types[0]
        if result == "widen":
            return schema.widen(arg_types[0], arg_types[1])
        return result


def parse_library(text: str, source_name: str | None = None) -> list[LawDef]:
    """Parses and type-checks law source text into a list of definitions."""
    parser = _Parser(tokenize(text, source_name), source_name)
    laws = parser.parse_library()
    for law in laws:
        _Checker(law, source_name).check()
    return laws


def parse_law(text: str, source_name: str | None = None) -> LawDef:
    laws = parse_library(text, source_name)
    if len(laws) != 1:
        raise LawParseError(f"expected exactly one law, got {len(laws)}",
                            None, source_name)
    return laws[0]
