"""Entropy, conditional entropy, mutual information and KL divergence.

All quantities are in bits (base-2 logarithms) and returned as floats.
Masses stay exact rationals until the final log/multiply step, and sums
use ``math.fsum``, so results are reproducible and order-insensitive.
The convention 0 * log 0 = 0 applies throughout.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .core import Distribution
from .errors import DivergenceUndefinedError
from .inference import JointTable, conditional, marginal

_FORM_AGREEMENT_TOL = 1e-9


def entropy(dist: Distribution) -> float:
    """H(p) = -sum over p(x) > 0 of p(x) * log2 p(x)."""
    h = -math.fsum(float(m) * math.log2(float(m)) for m in dist.masses if m > 0)
    return 0.0 if h == 0 else h


def conditional_entropy(joint: JointTable, target: str, given: str) -> float:
    """Expected entropy of ``target`` across values of ``given``.

    Sums p(given=x) * H(target | given=x) over positive-mass x only.
    """
    weights = marginal(joint, given)
    terms = []
    for x, w in weights.items():
        if w == 0:
            continue
        terms.append(float(w) * entropy(conditional(joint, target, {given: x})))
    h = math.fsum(terms)
    return 0.0 if h == 0 else h


def mutual_information(joint: JointTable, x: str, y: str) -> float:
    """I(x; y) computed as H(x) - H(x | y).

    The equivalent KL form (joint against product of marginals) is computed
    as an internal cross-check; the two must agree to within 1e-9 bits.
    """
    value = entropy(marginal(joint, x)) - conditional_entropy(joint, x, y)
    kl_form = _mutual_information_kl(joint, x, y)
    assert abs(value - kl_form) <= _FORM_AGREEMENT_TOL, (
        f"mutual information forms disagree: {value} vs {kl_form}")
    return 0.0 if value == 0 else value


def _mutual_information_kl(joint: JointTable, x: str, y: str) -> float:
    xi, yi = joint.index_of(x), joint.index_of(y)
    pair: dict[tuple[int, int], Fraction] = {}
    for key, mass in joint.entries.items():
        k = (key[xi], key[yi])
        pair[k] = pair.get(k, Fraction(0)) + mass
    px = marginal(joint, x)
    py = marginal(joint, y)
    terms = []
    for (xv, yv), mass in pair.items():
        if mass == 0:
            continue
        ratio = mass / (px.mass(xv) * py.mass(yv))
        terms.append(float(mass) * math.log2(float(ratio)))
    return math.fsum(terms)


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """KL(p || q) = sum over p(x) > 0 of p(x) * log2(p(x) / q(x)).

    Masses are matched by value.  Raises
    :class:`DivergenceUndefinedError` when p puts mass on a value where q
    has none (the divergence would be infinite).
    """
    terms = []
    for value, mass in p.items():
        if mass == 0:
            continue
        q_mass = q.mass(value)
        if q_mass == 0:
            raise DivergenceUndefinedError(
                f"divergence is infinite: p({value}) = {mass} but q({value}) = 0")
        terms.append(float(mass) * math.log2(float(mass / q_mass)))
    d = math.fsum(terms)
    return 0.0 if d == 0 else d
