"""Expression evaluation and formatting."""

import pytest
from hypothesis import given, strategies as st

from scmkit.dsl import parse_expression
from scmkit.errors import EvaluationError
from scmkit.expressions import (
    BinOp,
    IfExpr,
    IntLit,
    VarRef,
    eval_expression,
    format_expression,
    referenced_names,
)


def ev(text, **env):
    return eval_expression(parse_expression(text), env)


class TestEvaluation:
    def test_additive_assignment(self):
        assert ev("X2 + W", X2=1, W=1) == 2

    def test_mod_flips_a_bit(self):
        assert ev("(N_X + 1) mod 2", N_X=1) == 0
        assert ev("(N_X + 1) mod 2", N_X=0) == 1

    def test_conditional_selects_else_branch(self):
        assert ev("if M == 1 then X else (X + 1) mod 2", M=0, X=1) == 0

    def test_conditional_selects_then_branch(self):
        assert ev("if M == 1 then X else (X + 1) mod 2", M=1, X=1) == 1

    def test_comparisons_yield_zero_or_one(self):
        assert ev("3 < 5") == 1
        assert ev("3 > 5") == 0
        assert ev("3 <= 3") == 1
        assert ev("3 >= 4") == 0
        assert ev("2 == 2") == 1
        assert ev("2 != 2") == 0

    def test_nonzero_condition_is_true(self):
        assert ev("if 2 then 10 else 20") == 10
        assert ev("if 0 then 10 else 20") == 20

    def test_precedence_mod_binds_like_times(self):
        # (2 * 3) mod 4, not 2 * (3 mod 4)
        assert ev("2 * 3 mod 4") == 2
        assert ev("1 + 2 * 3") == 7
        assert ev("(1 + 2) * 3") == 9

    def test_mod_is_nonnegative_for_negative_operand(self):
        assert ev("0 - 1 mod 3") == ev("0 - (1 mod 3)")  # precedence check
        assert ev("(0 - 1) mod 3") == 2

    def test_mod_by_zero_raises(self):
        with pytest.raises(EvaluationError):
            ev("5 mod 0")

    def test_mod_by_negative_raises(self):
        with pytest.raises(EvaluationError):
            ev("5 mod -2")

    def test_unbound_variable_raises(self):
        with pytest.raises(EvaluationError, match="unbound"):
            ev("X + 1")

    def test_negative_literal(self):
        assert ev("-3 + 5") == 2


def test_referenced_names_in_first_use_order():
    expr = parse_expression("if M == 1 then X + M else N")
    assert referenced_names(expr) == ("M", "X", "N")


# -- formatting ---------------------------------------------------------------

def expressions(max_depth=4):
    leaves = st.one_of(
        st.integers(min_value=-20, max_value=20).map(IntLit),
        st.sampled_from(["A", "B", "C"]).map(VarRef),
    )

    def extend(children):
        return st.one_of(
            st.tuples(st.sampled_from(["+", "-", "*", "mod", "==", "!=", "<", "<=", ">", ">="]),
                      children, children).map(lambda t: BinOp(*t)),
            st.tuples(children, children, children).map(lambda t: IfExpr(*t)),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@given(expressions())
def test_format_parse_round_trip(expr):
    assert parse_expression(format_expression(expr)) == expr


@given(expressions())
def test_format_uses_only_known_tokens(expr):
    text = format_expression(expr)
    assert "\n" not in text
    # A formatted expression must re-format identically (fixpoint).
    assert format_expression(parse_expression(text)) == text
