"""Intervention protocols, causal entropy, causal information gain, ranking.

Causal entropy is the expected entropy of a target variable after an atomic
intervention drawn from an "intervention protocol": an externally chosen
distribution over the intervened variable's range.  Causal information gain
is the drop from the target's observational entropy to its causal entropy.
It is asymmetric in its two variables and, unlike mutual information, it can
be negative: intervening can destroy dependable structure (see the bundled
``confounded_xor`` model, where the gain is exactly -1 bit).

Per-value computations iterate over intervention values in ascending order
and are combined with ``math.fsum``, so results do not depend on evaluation
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import Distribution, Scm
from .errors import NonIntervenableError, ProtocolError, ScmError
from .inference import (
    EnumerationBudget,
    entailed_joint,
    has_total_effect,
    marginal,
    post_intervention_distribution,
)
from .information import entropy, mutual_information

PROTOCOL_KINDS = ("uniform", "observational")


@dataclass(frozen=True)
class InterventionProtocol:
    """A distribution over the values to which ``target_var`` may be set.

    The distribution's support must equal the variable's declared range
    exactly (zero masses are allowed inside it); this is checked against
    the model at the point of use.  The protocol is external data, so it is
    independent of every model variable by construction.
    """

    target_var: str
    distribution: Distribution


def uniform_protocol(scm: Scm, var: str) -> InterventionProtocol:
    """Equal mass on every value in ``var``'s declared range."""
    decl = scm.variable(var)
    return InterventionProtocol(var, Distribution.uniform_over(decl.values))


def observational_protocol(
    scm: Scm, var: str, budget: EnumerationBudget | None = None
) -> InterventionProtocol:
    """A protocol matching ``var``'s observational (entailed) marginal."""
    scm.variable(var)
    return InterventionProtocol(var, marginal(entailed_joint(scm, budget), var))


def _check_protocol(scm: Scm, protocol: InterventionProtocol) -> None:
    decl = scm.variable(protocol.target_var)
    if protocol.distribution.support != decl.values:
        raise ProtocolError(
            f"protocol support {protocol.distribution.support} does not equal the "
            f"declared range {decl.values} of {protocol.target_var!r}")


def interventional_entropies(
    scm: Scm,
    cause: str,
    target: str,
    budget: EnumerationBudget | None = None,
) -> tuple[tuple[int, float], ...]:
    """H(target | do(cause=x)) for every x in cause's range, ascending in x."""
    decl = scm.variable(cause)
    out = []
    for value in sorted(decl.values):
        dist = post_intervention_distribution(scm, cause, value, target, budget)
        out.append((value, entropy(dist)))
    return tuple(out)


def causal_entropy(
    scm: Scm,
    target: str,
    protocol: InterventionProtocol,
    budget: EnumerationBudget | None = None,
    *,
    allow_nonintervenable: bool = False,
) -> float:
    """Expected post-intervention entropy of ``target`` under ``protocol``.

    Values with zero protocol mass are skipped.  By default the model's
    non-intervenable policy is honored; pass ``allow_nonintervenable=True``
    to evaluate the quantity as a diagnostic anyway.
    """
    _check_causal_args(scm, target, protocol, allow_nonintervenable)
    terms = []
    for value in sorted(protocol.distribution.support):
        weight = protocol.distribution.mass(value)
        if weight == 0:
            continue
        dist = post_intervention_distribution(scm, protocol.target_var, value, target, budget)
        terms.append(float(weight) * entropy(dist))
    h = math.fsum(terms)
    return 0.0 if h == 0 else h


def causal_information_gain(
    scm: Scm,
    target: str,
    protocol: InterventionProtocol,
    budget: EnumerationBudget | None = None,
    *,
    allow_nonintervenable: bool = False,
) -> float:
    """Observational entropy of ``target`` minus its causal entropy.

    May be negative, and is not symmetric under swapping the roles of the
    target and the intervened variable.
    """
    _check_causal_args(scm, target, protocol, allow_nonintervenable)
    prior = entropy(marginal(entailed_joint(scm, budget), target))
    hc = causal_entropy(scm, target, protocol, budget, allow_nonintervenable=allow_nonintervenable)
    gain = prior - hc
    return 0.0 if gain == 0 else gain


def _check_causal_args(scm, target, protocol, allow_nonintervenable):
    scm.variable(target)
    if protocol.target_var == target:
        raise ProtocolError(f"protocol variable and target are both {target!r}")
    _check_protocol(scm, protocol)
    if protocol.target_var in scm.non_intervenable and not allow_nonintervenable:
        raise NonIntervenableError(
            f"variable {protocol.target_var!r} is marked non-intervenable "
            "(pass allow_nonintervenable=True to evaluate anyway)")


# ---------------------------------------------------------------------------
# Feature ranking

@dataclass(frozen=True)
class CandidateRecord:
    """Causal and observational relevance of one candidate variable."""

    candidate: str
    protocol: InterventionProtocol
    target_entropy: float
    causal_entropy: float
    causal_information_gain: float
    mutual_information: float
    has_total_effect: bool
    per_value_entropies: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class CausalReport:
    """Candidates ranked by causal information gain, best first.

    ``mi_ranking`` orders the same candidates by plain mutual information
    instead, for contrasting the two notions of relevance.
    """

    target: str
    records: tuple[CandidateRecord, ...]
    mi_ranking: tuple[str, ...]

    def ranking(self) -> tuple[str, ...]:
        return tuple(r.candidate for r in self.records)


def rank_features(
    scm: Scm,
    target: str,
    candidates: Iterable[str],
    protocol_kind: str | Mapping[str, InterventionProtocol] = "uniform",
    budget: EnumerationBudget | None = None,
) -> CausalReport:
    """Score candidate intervention variables for control over ``target``.

    ``protocol_kind`` is ``"uniform"``, ``"observational"``, or an explicit
    mapping from candidate name to protocol.  Records are sorted by causal
    information gain, descending, with ties broken by the candidates'
    declaration order in the model; each record carries the plain mutual
    information for side-by-side comparison.
    """
    candidates = list(candidates)
    if not candidates:
        raise ScmError("no candidate variables to rank")
    decl_index = {name: i for i, name in enumerate(scm.variable_names)}
    for name in candidates:
        scm.variable(name)
        if name == target:
            raise ScmError(f"target {target!r} cannot be one of the candidates")
        if name in scm.non_intervenable:
            raise NonIntervenableError(f"candidate {name!r} is marked non-intervenable")
    if len(set(candidates)) != len(candidates):
        raise ScmError("candidate list repeats a variable")

    joint = entailed_joint(scm, budget)
    target_entropy = entropy(marginal(joint, target))

    records = []
    for name in candidates:
        if isinstance(protocol_kind, str):
            if protocol_kind == "uniform":
                protocol = uniform_protocol(scm, name)
            elif protocol_kind == "observational":
                protocol = InterventionProtocol(name, marginal(joint, name))
            else:
                raise ProtocolError(f"unknown protocol kind {protocol_kind!r}")
        else:
            try:
                protocol = protocol_kind[name]
            except KeyError:
                raise ProtocolError(f"no protocol given for candidate {name!r}") from None
            if protocol.target_var != name:
                raise ProtocolError(
                    f"protocol for candidate {name!r} targets {protocol.target_var!r}")
        _check_protocol(scm, protocol)

        per_value = interventional_entropies(scm, name, target, budget)
        weights = dict(protocol.distribution.items())
        hc = math.fsum(float(weights[v]) * h for v, h in per_value if weights[v] != 0)
        hc = 0.0 if hc == 0 else hc
        gain = target_entropy - hc
        records.append(CandidateRecord(
            candidate=name,
            protocol=protocol,
            target_entropy=target_entropy,
            causal_entropy=hc,
            causal_information_gain=0.0 if gain == 0 else gain,
            mutual_information=mutual_information(joint, target, name),
            has_total_effect=has_total_effect(scm, name, target, budget),
            per_value_entropies=per_value,
        ))

    records.sort(key=lambda r: (-r.causal_information_gain, decl_index[r.candidate]))
    mi_ranking = tuple(sorted(
        (r.candidate for r in records),
        key=lambda c: (-next(r.mutual_information for r in records if r.candidate == c),
                       decl_index[c]),
    ))
    return CausalReport(target, tuple(records), mi_ranking)
