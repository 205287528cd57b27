"""gradbound: exact pairwise-independence deficits and gradient-variance
bounds for LWE-style hypothesis classes, with high-frequency landscape
diagnostics and a reporting CLI."""

__version__ = "0.1.0"

from .measures import (
    FinitePmf,
    RestrictedInputSpec,
    SizeLimitError,
    collision_entropy,
    collision_probability,
    restricted_uniform_inputs,
)
from .hypotheses import HypothesisClass, class_size, enumerate_secrets, eval_hypothesis
from .pairwise import (
    EpsilonReport,
    JointOutputPmf,
    PearsonEpsilon,
    aggregate_epsilon,
    closed_form_epsilon_uniform_lwe,
    epsilon_diag,
    epsilon_pearson,
    epsilon_tv,
    joint_output_pmf,
    uniform_outputs,
)

__all__ = [
    "__version__",
    "FinitePmf",
    "RestrictedInputSpec",
    "SizeLimitError",
    "collision_entropy",
    "collision_probability",
    "restricted_uniform_inputs",
    "HypothesisClass",
    "class_size",
    "enumerate_secrets",
    "eval_hypothesis",
    "EpsilonReport",
    "JointOutputPmf",
    "PearsonEpsilon",
    "aggregate_epsilon",
    "closed_form_epsilon_uniform_lwe",
    "epsilon_diag",
    "epsilon_pearson",
    "epsilon_tv",
    "joint_output_pmf",
    "uniform_outputs",
]
