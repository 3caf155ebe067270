"""Integer expression trees used as assignment right-hand sides.

The language is deliberately small: integer literals, variable references,
``+ - *`` and ``mod`` arithmetic, the six comparisons (yielding 0/1), and
``if <cond> then <a> else <b>`` where any nonzero condition counts as true.
Everything is total over integers except ``mod`` with a non-positive modulus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .errors import EvaluationError

Expression = Union["IntLit", "VarRef", "BinOp", "IfExpr"]

ARITH_OPS = ("+", "-", "*", "mod")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class IntLit:
    """A literal integer."""

    value: int


@dataclass(frozen=True)
class VarRef:
    """A reference to a declared variable (endogenous or noise)."""

    name: str


@dataclass(frozen=True)
class BinOp:
    """A binary arithmetic or comparison node; comparisons yield 0/1."""

    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True)
class IfExpr:
    """``if cond then a else b``; cond is true when it evaluates nonzero."""

    cond: Expression
    then: Expression
    orelse: Expression


def eval_expression(expr: Expression, env: Mapping[str, int]) -> int:
    """Evaluate ``expr`` under the integer bindings in ``env``.

    ``a mod b`` uses the non-negative remainder and requires ``b > 0``.
    Raises :class:`EvaluationError` for unbound names or a bad modulus.
    """
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, VarRef):
        try:
            return env[expr.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {expr.name!r}") from None
    if isinstance(expr, BinOp):
        left = eval_expression(expr.left, env)
        right = eval_expression(expr.right, env)
        op = expr.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "mod":
            if right <= 0:
                raise EvaluationError(f"modulus must be positive, got {right}")
            return left % right
        if op == "==":
            return int(left == right)
        if op == "!=":
            return int(left != right)
        if op == "<":
            return int(left < right)
        if op == "<=":
            return int(left <= right)
        if op == ">":
            return int(left > right)
        if op == ">=":
            return int(left >= right)
        raise EvaluationError(f"unknown operator {op!r}")
    if isinstance(expr, IfExpr):
        if eval_expression(expr.cond, env) != 0:
            return eval_expression(expr.then, env)
        return eval_expression(expr.orelse, env)
    raise EvaluationError(f"not an expression node: {expr!r}")


def referenced_names(expr: Expression) -> tuple[str, ...]:
    """All variable names referenced by ``expr``, deduplicated, in first-use order."""
    seen: dict[str, None] = {}

    def walk(node: Expression) -> None:
        if isinstance(node, VarRef):
            seen.setdefault(node.name)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, IfExpr):
            walk(node.cond)
            walk(node.then)
            walk(node.orelse)

    walk(expr)
    return tuple(seen)


# Binding strength used both for parsing and for minimal-paren printing.
_LEVEL_IF = 0
_LEVEL_CMP = 1
_LEVEL_ADD = 2
_LEVEL_MUL = 3
_LEVEL_ATOM = 4


def _level(expr: Expression) -> int:
    if isinstance(expr, IfExpr):
        return _LEVEL_IF
    if isinstance(expr, BinOp):
        if expr.op in CMP_OPS:
            return _LEVEL_CMP
        if expr.op in ("+", "-"):
            return _LEVEL_ADD
        return _LEVEL_MUL
    return _LEVEL_ATOM


def format_expression(expr: Expression) -> str:
    """Render ``expr`` as parseable text with a minimal set of parentheses."""

    def fmt(node: Expression, min_level: int) -> str:
        text = _fmt_bare(node)
        if _level(node) < min_level:
            return f"({text})"
        return text

    def _fmt_bare(node: Expression) -> str:
        if isinstance(node, IntLit):
            return str(node.value)
        if isinstance(node, VarRef):
            return node.name
        if isinstance(node, BinOp):
            level = _level(node)
            if level == _LEVEL_CMP:
                # Comparisons do not chain; operands must bind tighter.
                left = fmt(node.left, _LEVEL_ADD)
                right = fmt(node.right, _LEVEL_ADD)
            else:
                # Left-associative: the right operand must bind strictly tighter.
                left = fmt(node.left, level)
                right = fmt(node.right, level + 1)
            return f"{left} {node.op} {right}"
        if isinstance(node, IfExpr):
            cond = fmt(node.cond, _LEVEL_CMP)
            then = fmt(node.then, _LEVEL_IF)
            orelse = fmt(node.orelse, _LEVEL_IF)
            return f"if {cond} then {then} else {orelse}"
        raise TypeError(f"not an expression node: {node!r}")

    return fmt(expr, _LEVEL_IF)
