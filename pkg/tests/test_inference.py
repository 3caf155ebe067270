"""Exact enumeration: joints, marginals, conditionals, interventions."""

import random
from fractions import Fraction

import pytest

from scmkit.core import descendants
from scmkit.dsl import parse
from scmkit.errors import (
    BudgetExceededError,
    InterventionError,
    UndefinedConditionalError,
    UnknownVariableError,
)
from scmkit.inference import (
    EnumerationBudget,
    conditional,
    entailed_joint,
    has_total_effect,
    marginal,
    post_intervention_distribution,
)

from genmodels import random_scm
from oracles import brute_force_joint

F = Fraction


def dist_as_dict(dist):
    return dict(dist.items())


class TestEntailedJoint:
    def test_icecream_marginal_of_y(self, icecream):
        dist = marginal(entailed_joint(icecream), "Y")
        assert dist_as_dict(dist) == {0: F(3, 8), 1: F(1, 2), 2: F(1, 8)}

    def test_icecream_marginals_match_noises(self, icecream):
        joint = entailed_joint(icecream)
        assert dist_as_dict(marginal(joint, "X2")) == {0: F(3, 4), 1: F(1, 4)}
        assert dist_as_dict(marginal(joint, "W")) == {0: F(1, 2), 1: F(1, 2)}
        assert dist_as_dict(marginal(joint, "X1")) == {0: F(63, 128), 1: F(1, 2), 2: F(1, 128)}

    def test_point_mass_model(self):
        scm = parse("var X in {0,1}\nassign X := 1\n")
        joint = entailed_joint(scm)
        assert joint.entries == {(1,): F(1)}

    def test_appendix_b_marginal(self, appendix_b):
        dist = marginal(entailed_joint(appendix_b), "Y")
        assert dist_as_dict(dist) == {0: F(3, 10), 1: F(7, 10)}

    def test_masses_sum_to_one_exactly(self):
        rng = random.Random(5150)
        for _ in range(40):
            joint = entailed_joint(random_scm(rng))
            assert joint.total() == 1

    def test_agrees_with_independent_enumeration(self, icecream, appendix_b):
        rng = random.Random(314159)
        models = [icecream, appendix_b] + [random_scm(rng) for _ in range(30)]
        for scm in models:
            assert dict(entailed_joint(scm).entries) == brute_force_joint(scm)

    def test_budget_exceeded_names_the_fallback(self, icecream):
        with pytest.raises(BudgetExceededError, match="sampling"):
            entailed_joint(icecream, EnumerationBudget(max_states=7))

    def test_budget_boundary_is_inclusive(self, icecream):
        assert entailed_joint(icecream, EnumerationBudget(max_states=8)).total() == 1

    def test_budget_must_be_positive(self):
        with pytest.raises(ValueError):
            EnumerationBudget(0)

    def test_tuples_stay_inside_declared_ranges(self):
        rng = random.Random(222)
        for _ in range(25):
            scm = random_scm(rng)
            joint = entailed_joint(scm)
            for key, mass in joint.entries.items():
                assert mass > 0
                for value, values in zip(key, joint.ranges):
                    assert value in values


class TestMarginalAndConditional:
    def test_marginal_unknown_variable(self, icecream):
        with pytest.raises(UnknownVariableError):
            marginal(entailed_joint(icecream), "Z")

    def test_single_variable_marginal_is_identity(self):
        scm = parse("var X in {0,1}\nnoise N ~ bernoulli(1/3)\nassign X := N\n")
        joint = entailed_joint(scm)
        assert dist_as_dict(marginal(joint, "X")) == {0: F(2, 3), 1: F(1, 3)}

    def test_conditional_given_x1_zero(self, icecream):
        dist = conditional(entailed_joint(icecream), "Y", {"X1": 0})
        assert dist_as_dict(dist) == {0: F(3, 4), 1: F(1, 4), 2: F(0)}

    def test_conditional_given_x1_one(self, icecream):
        # With q = 1/64: (3q/4, 3/4 - q/2, (1-q)/4).
        dist = conditional(entailed_joint(icecream), "Y", {"X1": 1})
        assert dist_as_dict(dist) == {0: F(3, 256), 1: F(95, 128), 2: F(63, 256)}

    def test_conditioning_on_full_tuple_is_point_mass(self, icecream):
        joint = entailed_joint(icecream)
        dist = conditional(joint, "Y", {"X1": 0, "X2": 1, "W": 0})
        assert dist.mass(1) == 1

    def test_zero_probability_evidence_rejected(self, icecream):
        joint = entailed_joint(icecream)
        with pytest.raises(UndefinedConditionalError):
            conditional(joint, "Y", {"X1": 2, "W": 0})  # X1=2 forces W=1

    def test_law_of_total_probability(self):
        rng = random.Random(6021)
        for _ in range(25):
            scm = random_scm(rng, max_vars=4)
            if len(scm.variables) < 2:
                continue
            joint = entailed_joint(scm)
            target, given = scm.variable_names[-1], scm.variable_names[0]
            if target == given:
                continue
            weights = marginal(joint, given)
            mixed = {v: F(0) for v in scm.variable(target).values}
            for x, w in weights.items():
                if w == 0:
                    continue
                for v, m in conditional(joint, target, {given: x}).items():
                    mixed[v] += w * m
            assert mixed == dist_as_dict(marginal(joint, target))


class TestPostIntervention:
    def test_do_x2_shifts_y(self, icecream):
        dist = post_intervention_distribution(icecream, "X2", 1, "Y")
        assert dist_as_dict(dist) == {0: F(0), 1: F(1, 2), 2: F(1, 2)}

    def test_do_x1_leaves_y_untouched(self, icecream):
        baseline = marginal(entailed_joint(icecream), "Y")
        for value in (0, 1, 2):
            assert post_intervention_distribution(icecream, "X1", value, "Y") == baseline

    def test_appendix_b_interventions_mirror_each_other(self, appendix_b):
        # do(X=1) gives Bern(3/10); do(X=0) the mirrored Bern(7/10), which
        # happens to coincide with the observational marginal.
        do0 = post_intervention_distribution(appendix_b, "X", 0, "Y")
        do1 = post_intervention_distribution(appendix_b, "X", 1, "Y")
        assert dist_as_dict(do0) == {0: F(3, 10), 1: F(7, 10)}
        assert dist_as_dict(do1) == {0: F(7, 10), 1: F(3, 10)}

    def test_ignores_nonintervenable_policy(self, icecream):
        dist = post_intervention_distribution(icecream, "W", 1, "Y")
        assert dist_as_dict(dist) == {0: F(0), 1: F(3, 4), 2: F(1, 4)}

    def test_non_descendants_are_invariant(self):
        rng = random.Random(8080)
        checked = 0
        for _ in range(25):
            scm = random_scm(rng, max_vars=4)
            joint = entailed_joint(scm)
            for cause in scm.variable_names:
                downstream = descendants(scm, cause)
                for target in scm.variable_names:
                    if target == cause or target in downstream:
                        continue
                    baseline = marginal(joint, target)
                    for value in scm.variable(cause).values:
                        assert post_intervention_distribution(scm, cause, value, target) == baseline
                        checked += 1
        assert checked > 50

    def test_truncated_factorization_for_parentless_cause(self, icecream):
        # X2 has no parents, so conditioning and intervening coincide exactly.
        joint = entailed_joint(icecream)
        for value in (0, 1):
            assert (post_intervention_distribution(icecream, "X2", value, "Y")
                    == conditional(joint, "Y", {"X2": value}))


class TestHasTotalEffect:
    def test_icecream_pairs(self, icecream):
        assert has_total_effect(icecream, "X1", "Y") is False
        assert has_total_effect(icecream, "X2", "Y") is True
        assert has_total_effect(icecream, "W", "Y") is True

    def test_appendix_b(self, appendix_b):
        assert has_total_effect(appendix_b, "X", "Y") is True

    def test_cause_equals_target_rejected(self, icecream):
        with pytest.raises(InterventionError):
            has_total_effect(icecream, "Y", "Y")

    def test_never_bidirectional(self):
        rng = random.Random(4004)
        for _ in range(20):
            scm = random_scm(rng, max_vars=4)
            names = scm.variable_names
            for a in names:
                for b in names:
                    if a >= b:
                        continue
                    assert not (has_total_effect(scm, a, b) and has_total_effect(scm, b, a))
