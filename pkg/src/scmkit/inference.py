"""Exact distributions by exhaustive enumeration of the noise space.

Enumeration walks every joint noise configuration, pushes it through the
assignments in topological order, and accumulates the configuration's mass
(a product of exact rationals) onto the resulting endogenous value tuple.
Deterministic assignments need no special casing: they simply contribute no
noise dimensions.  Joint tables are sparse; only positive-mass tuples are
stored.  The number of noise configurations is capped by a budget, beyond
which callers are pointed at the forward-sampling fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .core import Distribution, Scm, intervene, topological_order
from .errors import (
    BudgetExceededError,
    InterventionError,
    UndefinedConditionalError,
    UnknownVariableError,
)
from .expressions import eval_expression

DEFAULT_MAX_STATES = 1 << 24


@dataclass(frozen=True)
class EnumerationBudget:
    """Cap on the number of noise configurations enumerated exactly."""

    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")


@dataclass(frozen=True, eq=True)
class JointTable:
    """Sparse exact joint distribution over all endogenous variables.

    ``entries`` maps full value tuples (aligned with ``variables``) to
    positive rational masses summing to exactly 1.  Treat instances as
    immutable; the mapping is never mutated after construction.
    """

    variables: tuple[str, ...]
    ranges: tuple[tuple[int, ...], ...]
    entries: Mapping[tuple[int, ...], Fraction]

    def index_of(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise UnknownVariableError(f"variable {var!r} is not in this table") from None

    def mass(self, values: tuple[int, ...]) -> Fraction:
        return self.entries.get(values, Fraction(0))

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))


def entailed_joint(scm: Scm, budget: EnumerationBudget | None = None) -> JointTable:
    """The joint distribution over endogenous variables entailed by ``scm``.

    Assumes a valid model (run :func:`scmkit.core.validate` first when in
    doubt).  Raises :class:`BudgetExceededError` when the noise space has
    more configurations than the budget allows.
    """
    budget = budget or EnumerationBudget()
    supports = [n.distribution.support for n in scm.noises]
    states = 1
    for s in supports:
        states *= len(s)
    if states > budget.max_states:
        raise BudgetExceededError(
            f"noise space has {states} configurations, more than the budget of "
            f"{budget.max_states}; use forward sampling instead")

    order = topological_order(scm)
    ordered_assignments = [scm.assignment(name) for name in order]
    noise_names = scm.noise_names
    weighted_supports = [tuple(n.distribution.items()) for n in scm.noises]
    var_names = scm.variable_names

    entries: dict[tuple[int, ...], Fraction] = {}
    for combo in product(*weighted_supports):
        mass = Fraction(1)
        for _, m in combo:
            mass *= m
            if mass == 0:
                break
        if mass == 0:
            continue
        env = dict(zip(noise_names, (value for value, _ in combo)))
        for assignment in ordered_assignments:
            env[assignment.target] = eval_expression(assignment.expr, env)
        key = tuple(env[name] for name in var_names)
        entries[key] = entries.get(key, Fraction(0)) + mass

    table = JointTable(var_names, tuple(v.values for v in scm.variables), entries)
    assert table.total() == 1, "enumeration lost probability mass"
    return table


def marginal(joint: JointTable, var: str) -> Distribution:
    """Exact marginal of one variable, dense over its declared range."""
    idx = joint.index_of(var)
    acc = {value: Fraction(0) for value in joint.ranges[idx]}
    for key, mass in joint.entries.items():
        acc[key[idx]] += mass
    return Distribution(tuple(acc), tuple(acc.values()))


def conditional(joint: JointTable, target: str, evidence: Mapping[str, int]) -> Distribution:
    """Exact distribution of ``target`` given the ``evidence`` assignment.

    Raises :class:`UndefinedConditionalError` when the evidence event has
    zero probability.
    """
    tidx = joint.index_of(target)
    eidx = [(joint.index_of(name), value) for name, value in evidence.items()]
    acc = {value: Fraction(0) for value in joint.ranges[tidx]}
    total = Fraction(0)
    for key, mass in joint.entries.items():
        if all(key[i] == v for i, v in eidx):
            acc[key[tidx]] += mass
            total += mass
    if total == 0:
        event = ", ".join(f"{n}={v}" for n, v in evidence.items())
        raise UndefinedConditionalError(f"conditioning event {{{event}}} has probability zero")
    return Distribution(tuple(acc), tuple(m / total for m in acc.values()))


def post_intervention_distribution(
    scm: Scm,
    do_var: str,
    do_value: int,
    target: str,
    budget: EnumerationBudget | None = None,
) -> Distribution:
    """Marginal of ``target`` after atomically setting ``do_var`` to ``do_value``.

    The non-intervenable policy flag is deliberately not enforced here; this
    is the hypothetical-intervention workhorse.  Enforcement happens in
    :func:`scmkit.core.intervene` and at the command-line boundary.
    """
    modified = intervene(scm, do_var, do_value, check_policy=False)
    return marginal(entailed_joint(modified, budget), target)


def has_total_effect(
    scm: Scm,
    cause: str,
    target: str,
    budget: EnumerationBudget | None = None,
) -> bool:
    """Whether some atomic intervention on ``cause`` shifts ``target``.

    Exact rational comparison of distributions; no tolerance is involved.
    """
    if cause == target:
        raise InterventionError("cause and target must differ")
    cause_decl = scm.variable(cause)
    scm.variable(target)
    baseline = marginal(entailed_joint(scm, budget), target)
    for value in cause_decl.values:
        shifted = post_intervention_distribution(scm, cause, value, target, budget)
        if shifted != baseline:
            return True
    return False
