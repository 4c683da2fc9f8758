"""Epistemic probabilistic argumentation over bipolar argumentation frameworks.

Core pipeline: build a BAF, compile semantics flags and user constraints into
a ConstraintSet, then check satisfiability, compute entailment bounds, or
compute the maximum-entropy labelling and query it. The oracle module holds
exponential world-space reference implementations for cross-validation.
"""

from .constraints import (ConstraintSet, LinearAtomicConstraint, RawConstraint,
                          SemanticsFlag, compile_semantics, normalize,
                          satisfies, satisfies_all)
from .errors import (ConditionInconsistentError, LimitExceededError, ParseError,
                     ProbArgError, SolverError, StructuralError,
                     UnknownArgumentError, UnsatisfiableError)
from .model import (BAF, And, Argument, Atom, Formula, Labelling, Not, Or,
                    World, WorldDistribution, entropy_distribution,
                    entropy_labelling, eval_formula, factorized_distribution,
                    formula_atoms, kl_divergence, labelling_of, marginal,
                    prob_of_formula)
from .reasoner import EntailmentBounds, SatResult, check_sat, entail, entail_all
from .maxent import (ConjunctiveQuery, MaxEntResult, conditional_query,
                     conjunctive_query, exclusive_dnf_query, maxent_labelling)
from .oracle import random_instance, world_lp_entail, world_lp_sat, world_maxent

__version__ = "0.1.0"

__all__ = [
    "BAF", "Argument", "World", "Formula", "Atom", "Not", "And", "Or",
    "Labelling", "WorldDistribution",
    "eval_formula", "prob_of_formula", "marginal", "factorized_distribution",
    "labelling_of", "entropy_labelling", "entropy_distribution", "kl_divergence",
    "formula_atoms",
    "LinearAtomicConstraint", "RawConstraint", "SemanticsFlag", "ConstraintSet",
    "normalize", "compile_semantics", "satisfies", "satisfies_all",
    "SatResult", "EntailmentBounds", "check_sat", "entail", "entail_all",
    "ConjunctiveQuery", "MaxEntResult", "maxent_labelling", "conjunctive_query",
    "exclusive_dnf_query", "conditional_query",
    "world_lp_sat", "world_lp_entail", "world_maxent", "random_instance",
    "ProbArgError", "StructuralError", "UnknownArgumentError",
    "UnsatisfiableError", "ConditionInconsistentError", "LimitExceededError",
    "SolverError", "ParseError",
]
