"""Exact analysis of discrete structural causal models.

Build a model from `.scm` text or from the types in :mod:`scmkit.core`,
compute exact observational and post-intervention distributions, measure
entropies and information quantities in bits, and rank variables by how
much control an intervention on them gives over a chosen outcome.
A seeded forward sampler doubles as an independent estimate of every exact
quantity.
"""

from . import bundled, errors
from .causal import (
    CandidateRecord,
    CausalReport,
    InterventionProtocol,
    causal_entropy,
    causal_information_gain,
    interventional_entropies,
    observational_protocol,
    rank_features,
    uniform_protocol,
)
from .core import (
    Assignment,
    Distribution,
    NoiseDecl,
    Scm,
    ValidationReport,
    VariableDecl,
    Violation,
    descendants,
    intervene,
    topological_order,
    validate,
)
from .dsl import parse, parse_expression, serialize
from .expressions import (
    BinOp,
    Expression,
    IfExpr,
    IntLit,
    VarRef,
    eval_expression,
    format_expression,
    referenced_names,
)
from .inference import (
    EnumerationBudget,
    JointTable,
    conditional,
    entailed_joint,
    has_total_effect,
    marginal,
    post_intervention_distribution,
)
from .information import conditional_entropy, entropy, kl_divergence, mutual_information
from .sampling import (
    SampleBatch,
    empirical_distribution,
    estimate_causal_quantities,
    estimate_conditional_entropy,
    estimate_entropy,
    estimate_mutual_information,
    forward_sample,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BinOp",
    "CandidateRecord",
    "CausalReport",
    "Distribution",
    "EnumerationBudget",
    "Expression",
    "IfExpr",
    "IntLit",
    "InterventionProtocol",
    "JointTable",
    "NoiseDecl",
    "SampleBatch",
    "Scm",
    "ValidationReport",
    "VarRef",
    "VariableDecl",
    "Violation",
    "bundled",
    "causal_entropy",
    "causal_information_gain",
    "conditional",
    "conditional_entropy",
    "descendants",
    "empirical_distribution",
    "entailed_joint",
    "entropy",
    "errors",
    "estimate_causal_quantities",
    "estimate_conditional_entropy",
    "estimate_entropy",
    "estimate_mutual_information",
    "eval_expression",
    "format_expression",
    "forward_sample",
    "has_total_effect",
    "intervene",
    "interventional_entropies",
    "kl_divergence",
    "marginal",
    "mutual_information",
    "observational_protocol",
    "parse",
    "parse_expression",
    "post_intervention_distribution",
    "rank_features",
    "referenced_names",
    "serialize",
    "topological_order",
    "uniform_protocol",
    "validate",
    "write_csv",
]
