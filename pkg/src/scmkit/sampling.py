"""Seeded forward sampling and plug-in estimators.

The random source is counter-based: the 64-bit draw feeding noise slot ``j``
of row ``i`` is a pure function of ``(seed, i, j)`` (a SplitMix64-style
finalizer over a per-slot stream), so batches are reproducible bit-for-bit,
independent of generation order, and identical across platforms.  Draws are
turned into noise values by comparing against cumulative-mass thresholds
scaled to 2**64, computed from the exact rational masses; floats only ever
appear inside the entropy estimators.

Estimators are plain plug-in (maximum-likelihood) versions of the exact
quantities, with no bias correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .causal import InterventionProtocol, _check_causal_args
from .core import Scm, intervene, topological_order
from .errors import EvaluationError, UnknownVariableError
from .expressions import BinOp, Expression, IfExpr, IntLit, VarRef, eval_expression

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MASK = (1 << 64) - 1
_TWO64 = 1 << 64


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64."""
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def _draws(seed: int, slot: int, n: int) -> np.ndarray:
    """The uint64 draws for noise slot ``slot`` of rows 0..n-1."""
    stream = _mix(np.array([(seed & _MASK)], dtype=np.uint64) ^ _mix(
        np.array([(slot + 1) & _MASK], dtype=np.uint64)))[0]
    counters = stream + _GOLDEN * np.arange(n, dtype=np.uint64)
    return _mix(counters)


def _thresholds(masses: list[Fraction]) -> np.ndarray:
    """Cumulative masses scaled to 2**64; length len(masses) - 1.

    Callers pass positive masses only, so every partial sum is strictly
    below 1 and the scaled cuts fit in uint64.
    """
    cuts = []
    acc = Fraction(0)
    for mass in masses[:-1]:
        acc += mass
        cuts.append((acc.numerator * _TWO64) // acc.denominator)
    return np.array(cuts, dtype=np.uint64)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """``n`` forward-sampled rows over the model's endogenous variables.

    ``values`` is an (n, len(variables)) int64 array; ``rows`` materializes
    it as plain tuples.  Equal (model, seed, n, intervention) inputs always
    reproduce an identical batch.
    """

    variables: tuple[str, ...]
    values: np.ndarray = field(repr=False)
    seed: int
    n: int

    @property
    def rows(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.values]

    def column(self, var: str) -> np.ndarray:
        try:
            idx = self.variables.index(var)
        except ValueError:
            raise UnknownVariableError(f"variable {var!r} is not in this batch") from None
        return self.values[:, idx]


def forward_sample(
    scm: Scm,
    n: int,
    seed: int,
    do: tuple[str, int] | None = None,
) -> SampleBatch:
    """Draw ``n`` rows from the model (after applying ``do``, if given).

    ``do=(var, value)`` applies the atomic intervention first, honoring the
    model's non-intervenable policy, then samples the modified model.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if do is not None:
        scm = intervene(scm, do[0], do[1])
    return _sample(scm, n, seed)


def _sample(scm: Scm, n: int, seed: int) -> SampleBatch:
    env: dict[str, np.ndarray] = {}
    for slot, noise in enumerate(scm.noises):
        # Zero-mass values are never drawn; they are dropped up front so the
        # cumulative thresholds stay strictly below 2**64.
        positive = [(v, m) for v, m in noise.distribution.items() if m > 0]
        if len(positive) == 1:
            env[noise.name] = np.full(n, positive[0][0], dtype=np.int64)
            continue
        draws = _draws(seed, slot, n)
        idx = np.searchsorted(_thresholds([m for _, m in positive]), draws, side="right")
        env[noise.name] = np.asarray([v for v, _ in positive], dtype=np.int64)[idx]

    for name in topological_order(scm):
        expr = scm.assignment(name).expr
        try:
            value = _eval_vectorized(expr, env, n)
        except _ScalarFallback:
            value = _eval_rowwise(expr, env, n)
        env[name] = value

    if scm.variables:
        values = np.column_stack([env[name] for name in scm.variable_names])
    else:
        values = np.empty((n, 0), dtype=np.int64)
    return SampleBatch(scm.variable_names, values, seed, n)


class _ScalarFallback(Exception):
    """Vector evaluation hit a lane-dependent modulus; redo row by row."""


def _eval_vectorized(expr: Expression, env: dict[str, np.ndarray], n: int) -> np.ndarray:
    def ev(node: Expression):
        if isinstance(node, IntLit):
            return node.value
        if isinstance(node, VarRef):
            try:
                return env[node.name]
            except KeyError:
                raise EvaluationError(f"unbound variable {node.name!r}") from None
        if isinstance(node, BinOp):
            left, right = ev(node.left), ev(node.right)
            op = node.op
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if op == "mod":
                if np.any(np.asarray(right) <= 0):
                    # A never-selected branch may contain a bad modulus; the
                    # scalar path with proper short-circuiting decides.
                    raise _ScalarFallback
                return np.mod(left, right)
            if op == "==":
                return _as_int(left == right)
            if op == "!=":
                return _as_int(left != right)
            if op == "<":
                return _as_int(left < right)
            if op == "<=":
                return _as_int(left <= right)
            if op == ">":
                return _as_int(left > right)
            return _as_int(left >= right)
        if isinstance(node, IfExpr):
            cond = ev(node.cond)
            if isinstance(cond, (int, np.integer)):
                return ev(node.then) if cond != 0 else ev(node.orelse)
            return np.where(cond != 0, ev(node.then), ev(node.orelse))
        raise EvaluationError(f"not an expression node: {node!r}")

    value = ev(expr)
    if isinstance(value, (int, np.integer)):
        return np.full(n, int(value), dtype=np.int64)
    return value.astype(np.int64, copy=False)


def _as_int(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    return value.astype(np.int64)


def _eval_rowwise(expr: Expression, env: dict[str, np.ndarray], n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.int64)
    names = list(env)
    for i in range(n):
        row_env = {name: int(env[name][i]) for name in names}
        out[i] = eval_expression(expr, row_env)
    return out


# ---------------------------------------------------------------------------
# Plug-in estimators

def empirical_distribution(batch: SampleBatch, var: str) -> dict[int, float]:
    """Relative frequencies of ``var``'s values in the batch."""
    values, counts = np.unique(batch.column(var), return_counts=True)
    return {int(v): float(c) / batch.n for v, c in zip(values, counts)}


def estimate_entropy(batch: SampleBatch, var: str) -> float:
    """Plug-in entropy (bits) of the empirical distribution of ``var``."""
    _, counts = np.unique(batch.column(var), return_counts=True)
    p = counts / batch.n
    h = -math.fsum(pi * math.log2(pi) for pi in p if pi > 0)
    return 0.0 if h == 0 else h


def estimate_conditional_entropy(batch: SampleBatch, target: str, given: str) -> float:
    """Plug-in H(target | given) from empirical pair frequencies."""
    pairs = np.column_stack([batch.column(given), batch.column(target)])
    _, joint_counts = np.unique(pairs, axis=0, return_counts=True)
    _, given_counts = np.unique(batch.column(given), return_counts=True)
    n = batch.n
    h_pair = -math.fsum(c / n * math.log2(c / n) for c in joint_counts)
    h_given = -math.fsum(c / n * math.log2(c / n) for c in given_counts)
    h = h_pair - h_given
    return 0.0 if h == 0 else h


def estimate_mutual_information(batch: SampleBatch, x: str, y: str) -> float:
    """Plug-in I(x; y) = H(x) - H(x | y) from empirical frequencies."""
    value = estimate_entropy(batch, x) - estimate_conditional_entropy(batch, x, y)
    return 0.0 if value == 0 else value


def estimate_causal_quantities(
    scm: Scm,
    target: str,
    protocol: InterventionProtocol,
    n_per_intervention: int,
    seed: int,
    *,
    allow_nonintervenable: bool = False,
) -> tuple[float, float]:
    """Estimate (causal entropy, causal information gain) by simulation.

    One interventional batch of ``n_per_intervention`` rows per protocol
    value with positive mass, combined with the exact protocol weights; the
    target's native entropy comes from one observational batch of the same
    size.  All batches reuse ``seed``, so interventional batches share
    randomness (common random numbers).
    """
    _check_causal_args(scm, target, protocol, allow_nonintervenable)
    observational = forward_sample(scm, n_per_intervention, seed)
    h_observed = estimate_entropy(observational, target)

    terms = []
    for value in sorted(protocol.distribution.support):
        weight = protocol.distribution.mass(value)
        if weight == 0:
            continue
        modified = intervene(scm, protocol.target_var, value, check_policy=False)
        batch = _sample(modified, n_per_intervention, seed)
        terms.append(float(weight) * estimate_entropy(batch, target))
    hc = math.fsum(terms)
    hc = 0.0 if hc == 0 else hc
    gain = h_observed - hc
    return hc, 0.0 if gain == 0 else gain


def write_csv(batch: SampleBatch, path) -> None:
    """Write the batch as CSV: a header of variable names, then integer rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(batch.variables) + "\n")
        for row in batch.values:
            fh.write(",".join(str(int(v)) for v in row) + "\n")
