"""Model types for discrete structural causal systems.

Endogenous variables take integer values from declared finite ranges; each
has exactly one structural assignment built from parent variables plus at
most one noise term.  A variable whose assignment mentions no noise is
treated as having an implicit point-mass noise, so fully deterministic
assignments are legal.  Probability masses are exact `fractions.Fraction`
values throughout: distribution equality is decidable and never hinges on
a float tolerance.

All types here are immutable value objects and all operations are pure
functions, so sharing models between threads is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator

from .errors import (
    CyclicModelError,
    EvaluationError,
    InterventionError,
    NonIntervenableError,
    UnknownVariableError,
)
from .expressions import Expression, IntLit, eval_expression, referenced_names

# Exhaustive range checking enumerates every valuation of an assignment's
# inputs; beyond this many valuations the check is refused (and reported).
RANGE_CHECK_LIMIT = 1 << 20


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError(f"probability masses must be exact rationals, got float {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class Distribution:
    """An exact finite probability distribution over integer values.

    ``support`` lists the values in a fixed order and ``masses`` holds one
    non-negative rational per value; the masses must sum to exactly 1.
    """

    support: tuple[int, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        support = tuple(int(v) for v in self.support)
        masses = tuple(_as_fraction(m) for m in self.masses)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)
        if not support:
            raise ValueError("distribution support must be non-empty")
        if len(support) != len(set(support)):
            raise ValueError(f"duplicate values in support {support}")
        if len(support) != len(masses):
            raise ValueError("support and masses must have equal length")
        if any(m < 0 for m in masses):
            raise ValueError("masses must be non-negative")
        total = sum(masses)
        if total != 1:
            raise ValueError(f"masses must sum to exactly 1, got {total}")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, Fraction]]) -> "Distribution":
        items = list(pairs)
        return Distribution(tuple(v for v, _ in items), tuple(m for _, m in items))

    @staticmethod
    def point(value: int) -> "Distribution":
        return Distribution((value,), (Fraction(1),))

    @staticmethod
    def bernoulli(p) -> "Distribution":
        p = _as_fraction(p)
        if not 0 <= p <= 1:
            raise ValueError(f"bernoulli parameter must lie in [0, 1], got {p}")
        return Distribution((0, 1), (1 - p, p))

    @staticmethod
    def uniform_over(values: Iterable[int]) -> "Distribution":
        values = tuple(values)
        return Distribution(values, (Fraction(1, len(values)),) * len(values))

    def mass(self, value: int) -> Fraction:
        """Mass at ``value``; zero for values outside the support."""
        try:
            return self.masses[self.support.index(value)]
        except ValueError:
            return Fraction(0)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return zip(self.support, self.masses)

    @property
    def is_point_mass(self) -> bool:
        return any(m == 1 for m in self.masses)


@dataclass(frozen=True)
class VariableDecl:
    """An endogenous variable and its finite integer range."""

    name: str
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))


@dataclass(frozen=True)
class NoiseDecl:
    """An exogenous noise variable with a known exact distribution."""

    name: str
    distribution: Distribution


@dataclass(frozen=True)
class Assignment:
    """The structural assignment for one endogenous variable.

    The expression may reference parent endogenous variables and at most
    one noise variable.  No noise reference means an implicit point-mass
    noise: the assignment is deterministic in its parents.
    """

    target: str
    expr: Expression


@dataclass(frozen=True)
class Scm:
    """A complete structural causal model.

    ``non_intervenable`` is policy metadata: it is enforced by
    :func:`intervene` (and the command-line layer) but deliberately ignored
    by inference, which may explore hypothetical interventions.
    """

    variables: tuple[VariableDecl, ...]
    noises: tuple[NoiseDecl, ...] = ()
    assignments: tuple[Assignment, ...] = ()
    non_intervenable: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "noises", tuple(self.noises))
        object.__setattr__(self, "assignments", tuple(self.assignments))
        object.__setattr__(self, "non_intervenable", frozenset(self.non_intervenable))

    # -- lookups ---------------------------------------------------------

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def noise_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.noises)

    def variable(self, name: str) -> VariableDecl:
        for decl in self.variables:
            if decl.name == name:
                return decl
        raise UnknownVariableError(f"unknown endogenous variable {name!r}")

    def noise(self, name: str) -> NoiseDecl:
        for decl in self.noises:
            if decl.name == name:
                return decl
        raise UnknownVariableError(f"unknown noise variable {name!r}")

    def assignment(self, target: str) -> Assignment:
        for a in self.assignments:
            if a.target == target:
                return a
        raise UnknownVariableError(f"no assignment for variable {target!r}")

    def parents(self, name: str) -> tuple[str, ...]:
        """Endogenous variables referenced by ``name``'s assignment."""
        endo = set(self.variable_names)
        return tuple(r for r in referenced_names(self.assignment(name).expr) if r in endo)

    def noise_of(self, name: str) -> str | None:
        """The noise referenced by ``name``'s assignment, if any."""
        noise_names = set(self.noise_names)
        for r in referenced_names(self.assignment(name).expr):
            if r in noise_names:
                return r
        return None

    def edges(self) -> tuple[tuple[str, str], ...]:
        """Directed edges (parent, child) of the induced graph."""
        out = []
        for decl in self.variables:
            try:
                ps = self.parents(decl.name)
            except UnknownVariableError:
                continue
            out.extend((p, decl.name) for p in ps)
        return tuple(out)


def descendants(scm: Scm, name: str) -> frozenset[str]:
    """All endogenous variables reachable from ``name`` (excluding itself)."""
    scm.variable(name)
    children: dict[str, list[str]] = {v: [] for v in scm.variable_names}
    for parent, child in scm.edges():
        children[parent].append(child)
    seen: set[str] = set()
    stack = list(children[name])
    while stack:
        node = stack.pop()
        if node not in seen:
            seen.add(node)
            stack.extend(children[node])
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Violation:
    """One violated invariant; ``names`` identifies the offenders."""

    code: str
    message: str
    names: tuple[str, ...] = ()
    line: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]


def validate(scm: Scm) -> ValidationReport:
    """Check every structural invariant and report all violations at once.

    An empty report means the model is valid.  Problems are reported rather
    than raised so that a single pass can name everything that is wrong:
    duplicate names, dangling references, noise misuse, cycles, and
    assignments that can leave their target's declared range.
    """
    violations: list[Violation] = []
    endo = {v.name for v in scm.variables}
    noise = {n.name for n in scm.noises}

    # Name uniqueness across both kinds of variable.
    seen: set[str] = set()
    for name in [v.name for v in scm.variables] + [n.name for n in scm.noises]:
        if name in seen:
            violations.append(Violation("duplicate-name", f"duplicate declaration of {name!r}", (name,)))
        seen.add(name)

    # Ranges.
    for decl in scm.variables:
        if not decl.values:
            violations.append(Violation("empty-range", f"variable {decl.name!r} has an empty range", (decl.name,)))
        if len(decl.values) != len(set(decl.values)):
            violations.append(Violation(
                "duplicate-range-value", f"variable {decl.name!r} repeats a range value", (decl.name,)))

    # Assignment bookkeeping: exactly one per endogenous variable.
    targets: list[str] = [a.target for a in scm.assignments]
    for name in endo:
        count = targets.count(name)
        if count == 0:
            violations.append(Violation("missing-assignment", f"variable {name!r} has no assignment", (name,)))
        elif count > 1:
            violations.append(Violation("duplicate-assignment", f"variable {name!r} has {count} assignments", (name,)))
    for target in targets:
        if target not in endo:
            kind = "a noise variable" if target in noise else "undeclared"
            violations.append(Violation(
                "bad-assignment-target", f"assignment target {target!r} is {kind}", (target,)))

    # References within each assignment.
    noise_users: dict[str, list[str]] = {n: [] for n in noise}
    checkable: list[Assignment] = []
    for a in scm.assignments:
        refs = referenced_names(a.expr)
        bad = [r for r in refs if r not in endo and r not in noise]
        for r in bad:
            violations.append(Violation(
                "dangling-reference", f"assignment of {a.target!r} references undeclared {r!r}", (a.target, r)))
        used_noises = [r for r in refs if r in noise]
        for n in used_noises:
            noise_users[n].append(a.target)
        if len(used_noises) > 1:
            violations.append(Violation(
                "multiple-noise-refs",
                f"assignment of {a.target!r} references {len(used_noises)} noise variables",
                (a.target, *used_noises)))
        if not bad and len(used_noises) <= 1 and a.target in endo and targets.count(a.target) == 1:
            checkable.append(a)

    for n, users in noise_users.items():
        if not users:
            violations.append(Violation("unused-noise", f"noise {n!r} is not used by any assignment", (n,)))
        elif len(users) > 1:
            violations.append(Violation(
                "shared-noise", f"noise {n!r} is used by multiple assignments: {', '.join(sorted(users))}",
                (n, *users)))

    for name in sorted(scm.non_intervenable):
        if name not in endo:
            violations.append(Violation(
                "unknown-nonintervenable", f"non-intervenable name {name!r} is not an endogenous variable", (name,)))

    # Acyclicity of the induced endogenous graph.
    cycle = _find_cycle(scm, endo)
    if cycle:
        violations.append(Violation(
            "cycle", f"assignment graph has a cycle through {{{', '.join(cycle)}}}", tuple(cycle)))

    # Exhaustive range safety per assignment, over every input valuation.
    by_name = {v.name: v for v in scm.variables}
    noise_by_name = {n.name: n for n in scm.noises}
    for a in checkable:
        violations.extend(_check_assignment_range(a, by_name, noise_by_name))

    return ValidationReport(tuple(violations))


def _find_cycle(scm: Scm, endo: set[str]) -> list[str]:
    """Names on one directed cycle of the induced graph, or [] if acyclic."""
    graph: dict[str, list[str]] = {v: [] for v in endo}
    for a in scm.assignments:
        if a.target in endo:
            for r in referenced_names(a.expr):
                if r in endo and r != a.target:
                    graph[a.target].append(r)  # edges target -> parent for DFS
                elif r == a.target:
                    return [a.target]
    color: dict[str, int] = {}
    stack: list[str] = []

    def dfs(node: str) -> list[str] | None:
        color[node] = 1
        stack.append(node)
        for nxt in graph[node]:
            if color.get(nxt, 0) == 1:
                return stack[stack.index(nxt):]
            if color.get(nxt, 0) == 0:
                found = dfs(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = 2
        return None

    for start in sorted(endo):
        if color.get(start, 0) == 0:
            found = dfs(start)
            if found:
                return sorted(found)
    return []


def _check_assignment_range(a, by_name, noise_by_name) -> list[Violation]:
    refs = referenced_names(a.expr)
    domains: list[tuple[int, ...]] = []
    for r in refs:
        if r in by_name:
            domain = by_name[r].values
        else:
            domain = noise_by_name[r].distribution.support
        if not domain:
            return []  # empty-range violation already reported
        domains.append(domain)
    count = 1
    for d in domains:
        count *= len(d)
        if count > RANGE_CHECK_LIMIT:
            return [Violation(
                "range-check-too-large",
                f"assignment of {a.target!r} has more than {RANGE_CHECK_LIMIT} input valuations; refusing to check",
                (a.target,))]
    allowed = set(by_name[a.target].values)
    for combo in product(*domains):
        env = dict(zip(refs, combo))
        try:
            value = eval_expression(a.expr, env)
        except EvaluationError as exc:
            return [Violation(
                "evaluation-error", f"assignment of {a.target!r} fails to evaluate: {exc}", (a.target,))]
        if value not in allowed:
            binding = ", ".join(f"{k}={v}" for k, v in env.items())
            return [Violation(
                "range-violation",
                f"assignment of {a.target!r} yields {value} outside its range (at {binding})",
                (a.target,))]
    return []


# ---------------------------------------------------------------------------
# Graph operations

def topological_order(scm: Scm) -> list[str]:
    """Endogenous variables ordered so parents precede children.

    Deterministic: among ready variables, declaration order wins.  Raises
    :class:`CyclicModelError` when the induced graph has a cycle.
    """
    index = {v.name: i for i, v in enumerate(scm.variables)}
    remaining_parents: dict[str, set[str]] = {}
    children: dict[str, list[str]] = {name: [] for name in index}
    for decl in scm.variables:
        try:
            parents = set(scm.parents(decl.name))
        except UnknownVariableError:
            parents = set()
        parents &= set(index)
        remaining_parents[decl.name] = parents
        for p in parents:
            if p != decl.name:
                children[p].append(decl.name)

    ready = sorted((name for name, ps in remaining_parents.items() if not ps), key=index.__getitem__)
    order: list[str] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        newly_ready = []
        for child in children[node]:
            remaining_parents[child].discard(node)
            if not remaining_parents[child]:
                newly_ready.append(child)
        ready = sorted(ready + newly_ready, key=index.__getitem__)
    if len(order) != len(index):
        stuck = sorted(name for name, ps in remaining_parents.items() if ps)
        raise CyclicModelError(f"assignment graph has a cycle among {{{', '.join(stuck)}}}")
    return order


def intervene(scm: Scm, var: str, value: int, *, check_policy: bool = True) -> Scm:
    """Atomically set ``var`` to ``value``, returning the modified model.

    The variable's assignment is replaced by the constant ``value`` (an
    implicit point-mass noise), severing it from its parents; the noise it
    previously consumed, if any, is dropped.  The input model is unchanged.

    ``check_policy=False`` skips the ``non_intervenable`` restriction; it is
    meant for inference over hypothetical interventions.
    """
    decl = scm.variable(var)
    if check_policy and var in scm.non_intervenable:
        raise NonIntervenableError(f"variable {var!r} is marked non-intervenable")
    if value not in decl.values:
        raise InterventionError(f"value {value} is outside the range of {var!r}: {decl.values}")
    old_noise = scm.noise_of(var)
    assignments = tuple(
        Assignment(var, IntLit(value)) if a.target == var else a for a in scm.assignments
    )
    noises = tuple(n for n in scm.noises if n.name != old_noise)
    return Scm(scm.variables, noises, assignments, scm.non_intervenable)
