"""The `.scm` text format: parsing and serialization.

One statement per line; declarations may appear in any order and names are
resolved only after the whole file has been read.  ``#`` starts a comment.

    var <name> in {v1, v2, ...}
    noise <name> ~ bernoulli(<rational>)
    noise <name> ~ categorical(<value>:<rational>, ...)
    noise <name> ~ point(<value>)
    noise <name> ~ uniform
    assign <name> := <expression>
    nonintervenable <name>

Rationals are written ``3/8``, ``0.25`` or ``1`` and are kept exact.  A
``uniform`` noise takes its support from the declared range of the one
variable whose assignment uses it.  Expressions combine integer literals,
variable names, ``+ - *``, ``mod``, the comparisons ``== != < <= > >=``
(yielding 0/1), ``if ... then ... else ...`` and parentheses; ``mod`` binds
like ``*`` and comparisons bind loosest.

Every syntactic or binding problem raises :class:`DslError` with a 1-based
line and column; text that parses but describes a structurally broken model
raises :class:`ModelValidationError` carrying the full violation report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction

from . import core
from .core import Assignment, Distribution, NoiseDecl, Scm, VariableDecl
from .errors import DslError, ModelValidationError
from .expressions import (
    CMP_OPS,
    BinOp,
    Expression,
    IfExpr,
    IntLit,
    VarRef,
    format_expression,
)

KEYWORDS = frozenset({
    "var", "noise", "assign", "nonintervenable", "in", "if", "then", "else",
    "mod", "bernoulli", "categorical", "point", "uniform",
})

_MAX_EXPR_DEPTH = 200

_TOKEN_RE = re.compile(
    r"""[ \t\r]+
      | \#.*
      | (?P<number>\d+\.\d+|\d+)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op>:=|==|!=|<=|>=|[~{}(),:/+\-*<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    line: int
    col: int


def _tokenize_line(text: str, line_no: int) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line_no, pos + 1)
        if m.lastgroup is not None:
            tokens.append(_Token(m.lastgroup, m.group(), line_no, m.start() + 1))
        pos = m.end()
    tokens.append(_Token("end", "", line_no, len(text) + 1))
    return tokens


class _LineParser:
    """Recursive-descent parser over one line's tokens."""

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.refs: list[tuple[str, int, int]] = []  # variable references with positions

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise DslError(message, tok.line, tok.col)

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            self.fail(f"expected {text!r}" + (f", got {tok.text!r}" if tok.text else " before end of line"))
        return self.next()

    def expect_keyword(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "name" or tok.text != word:
            self.fail(f"expected {word!r}" + (f", got {tok.text!r}" if tok.text else " before end of line"))
        return self.next()

    def expect_name(self, what: str = "name") -> _Token:
        tok = self.peek()
        if tok.kind != "name":
            self.fail(f"expected {what}" + (f", got {tok.text!r}" if tok.text else " before end of line"))
        if tok.text in KEYWORDS:
            self.fail(f"{tok.text!r} is a reserved word and cannot name a variable", tok)
        return self.next()

    def expect_end(self):
        tok = self.peek()
        if tok.kind != "end":
            self.fail(f"unexpected trailing {tok.text!r}")

    # -- literals ---------------------------------------------------------

    def parse_int(self) -> int:
        negative = False
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            negative = True
            tok = self.peek()
        if tok.kind != "number" or "." in tok.text:
            self.fail("expected an integer" + (f", got {tok.text!r}" if tok.text else ""))
        self.next()
        value = int(tok.text)
        return -value if negative else value

    def parse_rational(self) -> tuple[Fraction, _Token]:
        tok = self.peek()
        if tok.kind != "number":
            self.fail("expected a probability" + (f", got {tok.text!r}" if tok.text else ""))
        self.next()
        if "." in tok.text:
            return Fraction(tok.text), tok
        value = Fraction(int(tok.text))
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text == "/":
            self.next()
            denom_tok = self.peek()
            if denom_tok.kind != "number" or "." in denom_tok.text:
                self.fail("expected an integer denominator")
            self.next()
            denom = int(denom_tok.text)
            if denom == 0:
                self.fail("zero denominator", denom_tok)
            value = Fraction(int(tok.text), denom)
        return value, tok

    # -- expressions ------------------------------------------------------

    def parse_expression(self) -> Expression:
        self.depth += 1
        if self.depth > _MAX_EXPR_DEPTH:
            self.fail("expression is too deeply nested")
        try:
            tok = self.peek()
            if tok.kind == "name" and tok.text == "if":
                self.next()
                cond = self.parse_expression()
                self.expect_keyword("then")
                then = self.parse_expression()
                self.expect_keyword("else")
                orelse = self.parse_expression()
                return IfExpr(cond, then, orelse)
            return self.parse_comparison()
        finally:
            self.depth -= 1

    def parse_comparison(self) -> Expression:
        left = self.parse_additive()
        tok = self.peek()
        if tok.kind == "op" and tok.text in CMP_OPS:
            self.next()
            right = self.parse_additive()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text in CMP_OPS:
                self.fail("comparisons do not chain; parenthesize one of them", nxt)
            return BinOp(tok.text, left, right)
        return left

    def parse_additive(self) -> Expression:
        node = self.parse_multiplicative()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in ("+", "-"):
                self.next()
                node = BinOp(tok.text, node, self.parse_multiplicative())
            else:
                return node

    def parse_multiplicative(self) -> Expression:
        node = self.parse_atom()
        while True:
            tok = self.peek()
            if (tok.kind == "op" and tok.text == "*") or (tok.kind == "name" and tok.text == "mod"):
                self.next()
                node = BinOp("mod" if tok.text == "mod" else "*", node, self.parse_atom())
            else:
                return node

    def parse_atom(self) -> Expression:
        self.depth += 1
        if self.depth > _MAX_EXPR_DEPTH:
            self.fail("expression is too deeply nested")
        try:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "(":
                self.next()
                node = self.parse_expression()
                self.expect_op(")")
                return node
            if tok.kind == "op" and tok.text == "-":
                self.next()
                inner = self.peek()
                if inner.kind != "number" or "." in inner.text:
                    self.fail("'-' may only prefix an integer literal")
                self.next()
                return IntLit(-int(inner.text))
            if tok.kind == "number":
                if "." in tok.text:
                    self.fail("expressions are integer-valued; decimals are not allowed")
                self.next()
                return IntLit(int(tok.text))
            if tok.kind == "name":
                if tok.text == "if":
                    self.fail("parenthesize a conditional used inside another expression")
                if tok.text in KEYWORDS:
                    self.fail(f"unexpected keyword {tok.text!r} in expression")
                self.next()
                self.refs.append((tok.text, tok.line, tok.col))
                return VarRef(tok.text)
            self.fail("expected an expression" + (f", got {tok.text!r}" if tok.text else ""))
        finally:
            self.depth -= 1


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True)
class _NoiseSpec:
    kind: str  # "bernoulli" | "categorical" | "point" | "uniform"
    distribution: Distribution | None
    line: int
    col: int


@dataclass(frozen=True)
class ScmDocument:
    """Parsed statements in source order, before binding into a model."""

    variables: tuple[tuple[VariableDecl, int], ...]
    noises: tuple[tuple[str, _NoiseSpec], ...]
    assignments: tuple[tuple[Assignment, int, tuple[tuple[str, int, int], ...]], ...]
    non_intervenable: tuple[tuple[str, int], ...]


def _parse_document(text: str) -> ScmDocument:
    variables: list[tuple[VariableDecl, int]] = []
    noises: list[tuple[str, _NoiseSpec]] = []
    assignments: list[tuple[Assignment, int, tuple[tuple[str, int, int], ...]]] = []
    noninterv: list[tuple[str, int]] = []
    declared: dict[str, int] = {}
    assigned: dict[str, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, line_no)
        p = _LineParser(tokens)
        head = p.peek()
        if head.kind == "end":
            continue
        if head.kind != "name":
            p.fail(f"expected a statement, got {head.text!r}")

        if head.text == "var":
            p.next()
            name_tok = p.expect_name("variable name")
            p.expect_keyword("in")
            p.expect_op("{")
            values = [p.parse_int()]
            while p.peek().text == ",":
                p.next()
                values.append(p.parse_int())
            p.expect_op("}")
            p.expect_end()
            if len(values) != len(set(values)):
                p.fail(f"range of {name_tok.text!r} repeats a value", name_tok)
            _declare(declared, name_tok, p)
            variables.append((VariableDecl(name_tok.text, tuple(values)), line_no))

        elif head.text == "noise":
            p.next()
            name_tok = p.expect_name("noise name")
            p.expect_op("~")
            spec = _parse_noise_spec(p)
            p.expect_end()
            _declare(declared, name_tok, p)
            noises.append((name_tok.text, spec))

        elif head.text == "assign":
            p.next()
            name_tok = p.expect_name("variable name")
            p.expect_op(":=")
            expr = p.parse_expression()
            p.expect_end()
            if name_tok.text in assigned:
                p.fail(f"duplicate assignment for {name_tok.text!r} (first on line {assigned[name_tok.text]})",
                       name_tok)
            assigned[name_tok.text] = line_no
            assignments.append((Assignment(name_tok.text, expr), line_no, tuple(p.refs)))

        elif head.text == "nonintervenable":
            p.next()
            name_tok = p.expect_name("variable name")
            p.expect_end()
            noninterv.append((name_tok.text, line_no))

        else:
            p.fail(f"unknown statement {head.text!r}")

    return ScmDocument(tuple(variables), tuple(noises), tuple(assignments), tuple(noninterv))


def _declare(declared: dict[str, int], name_tok: _Token, p: _LineParser):
    if name_tok.text in declared:
        p.fail(f"duplicate declaration of {name_tok.text!r} (first on line {declared[name_tok.text]})", name_tok)
    declared[name_tok.text] = name_tok.line


def _parse_noise_spec(p: _LineParser) -> _NoiseSpec:
    tok = p.peek()
    if tok.kind != "name" or tok.text not in ("bernoulli", "categorical", "point", "uniform"):
        p.fail("expected a distribution: bernoulli, categorical, point or uniform")
    p.next()
    if tok.text == "uniform":
        return _NoiseSpec("uniform", None, tok.line, tok.col)
    p.expect_op("(")
    if tok.text == "bernoulli":
        value, vtok = p.parse_rational()
        if not 0 <= value <= 1:
            p.fail(f"bernoulli parameter must lie in [0, 1], got {value}", vtok)
        p.expect_op(")")
        return _NoiseSpec("bernoulli", Distribution.bernoulli(value), tok.line, tok.col)
    if tok.text == "point":
        value = p.parse_int()
        p.expect_op(")")
        return _NoiseSpec("point", Distribution.point(value), tok.line, tok.col)
    # categorical(v: mass, ...)
    pairs: list[tuple[int, Fraction]] = []
    while True:
        value = p.parse_int()
        p.expect_op(":")
        mass, _ = p.parse_rational()
        pairs.append((value, mass))
        if p.peek().text == ",":
            p.next()
            continue
        break
    p.expect_op(")")
    values = [v for v, _ in pairs]
    if len(values) != len(set(values)):
        p.fail("categorical repeats a value", tok)
    total = sum(m for _, m in pairs)
    if total != 1:
        p.fail(f"categorical masses must sum to 1, got {total}", tok)
    if any(m < 0 for _, m in pairs):
        p.fail("categorical masses must be non-negative", tok)
    return _NoiseSpec("categorical", Distribution.from_pairs(pairs), tok.line, tok.col)


# ---------------------------------------------------------------------------
# Binding and the public entry points

def parse(text: str) -> Scm:
    """Parse `.scm` text into a validated model.

    Raises :class:`DslError` for lexical, syntactic and binding problems
    (with line/column), and :class:`ModelValidationError` when the text
    describes a structurally invalid model (cycle, range overflow, ...).
    """
    doc = _parse_document(text)

    endo = {decl.name: line for decl, line in doc.variables}
    noise_lines = {name: spec.line for name, spec in doc.noises}
    known = set(endo) | set(noise_lines)

    for assignment, line, refs in doc.assignments:
        if assignment.target not in endo:
            if assignment.target in noise_lines:
                raise DslError(f"cannot assign to noise variable {assignment.target!r}", line, 1)
            raise DslError(f"assignment to undeclared variable {assignment.target!r}", line, 1)
        for name, ref_line, ref_col in refs:
            if name not in known:
                raise DslError(f"unknown identifier {name!r}", ref_line, ref_col)

    for name, line in doc.non_intervenable:
        if name not in endo:
            detail = "a noise variable" if name in noise_lines else "undeclared"
            raise DslError(f"nonintervenable name {name!r} is {detail}", line, 1)

    # Resolve `uniform` noises from the single assignment that uses each one.
    users: dict[str, list[VariableDecl]] = {name: [] for name, _ in doc.noises}
    decl_by_name = {decl.name: decl for decl, _ in doc.variables}
    for assignment, _, refs in doc.assignments:
        for name, _, _ in refs:
            if name in users and assignment.target in decl_by_name:
                if decl_by_name[assignment.target] not in users[name]:
                    users[name].append(decl_by_name[assignment.target])

    noise_decls: list[NoiseDecl] = []
    for name, spec in doc.noises:
        if spec.kind == "uniform":
            targets = users.get(name, [])
            if len(targets) != 1:
                why = "is not used by any assignment" if not targets else "is used by several assignments"
                raise DslError(
                    f"uniform noise {name!r} {why}, so its support cannot be inferred",
                    spec.line, spec.col)
            noise_decls.append(NoiseDecl(name, Distribution.uniform_over(targets[0].values)))
        else:
            noise_decls.append(NoiseDecl(name, spec.distribution))

    scm = Scm(
        variables=tuple(decl for decl, _ in doc.variables),
        noises=tuple(noise_decls),
        assignments=tuple(a for a, _, _ in doc.assignments),
        non_intervenable=frozenset(name for name, _ in doc.non_intervenable),
    )

    report = core.validate(scm)
    if not report.ok:
        assign_lines = {a.target: line for a, line, _ in doc.assignments}
        located = []
        for violation in report.violations:
            line = None
            for name in violation.names:
                line = assign_lines.get(name) or endo.get(name) or noise_lines.get(name)
                if line:
                    break
            located.append(replace(violation, line=line))
        raise ModelValidationError(located)
    return scm


def parse_expression(text: str) -> Expression:
    """Parse a single expression; names are not checked against any model."""
    p = _LineParser(_tokenize_line(text, 1))
    expr = p.parse_expression()
    p.expect_end()
    return expr


def serialize(scm: Scm) -> str:
    """Render a model as `.scm` text that parses back to an equal model.

    Declarations are emitted in the model's own order; rationals come out
    in lowest terms; implicit point-mass noises stay implicit.
    """
    lines: list[str] = []
    for decl in scm.variables:
        values = ", ".join(str(v) for v in decl.values)
        lines.append(f"var {decl.name} in {{{values}}}")
    for noise in scm.noises:
        lines.append(f"noise {noise.name} ~ {_format_noise(noise.distribution)}")
    for assignment in scm.assignments:
        lines.append(f"assign {assignment.target} := {format_expression(assignment.expr)}")
    order = {v.name: i for i, v in enumerate(scm.variables)}
    for name in sorted(scm.non_intervenable, key=lambda n: order.get(n, len(order))):
        lines.append(f"nonintervenable {name}")
    return "\n".join(lines) + ("\n" if lines else "")


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _format_noise(dist: Distribution) -> str:
    if dist.support == (0, 1):
        return f"bernoulli({_format_rational(dist.mass(1))})"
    if len(dist.support) == 1:
        return f"point({dist.support[0]})"
    pairs = ", ".join(f"{v}:{_format_rational(m)}" for v, m in dist.items())
    return f"categorical({pairs})"
