"""Game-theoretic upper expectations for finite-state uncertain processes."""

from .errors import (
    AxiomEvaluationError,
    BudgetError,
    ConsistencyError,
    ContractError,
    GameExpError,
    ParseError,
)
from .extreal import INF, NEG_INF, ext, ext_add, ext_mul
from .localmodel import LocalModel, lower_exp_local, upper_exp_local
from .tree import ImpreciseTree, explicit_tree, iid_tree, parse_tree, resolve_local_model, stationary_tree
from .variables import FinitaryVariable, VariableSequenceSpec, generate_term
from .globalexp import conditional_process, lower_exp_finitary_global, upper_exp_finitary_global
from .process import Process
from .approx import (
    ApproxOptions,
    ApproxResult,
    lower_expected_hitting_time,
    lower_hitting_probability,
    monotone_limit,
    upper_expected_hitting_time,
    upper_hitting_probability,
)
from .martingale import certify_upper_bound, doob_crossing, verify_supermartingale

__all__ = [
    "AxiomEvaluationError", "BudgetError", "ConsistencyError", "ContractError",
    "GameExpError", "ParseError", "INF", "NEG_INF", "ext", "ext_add", "ext_mul",
    "LocalModel", "lower_exp_local", "upper_exp_local", "ImpreciseTree", "parse_tree",
    "resolve_local_model", "FinitaryVariable", "VariableSequenceSpec", "generate_term",
    "conditional_process", "lower_exp_finitary_global", "upper_exp_finitary_global", "Process",
    "explicit_tree", "iid_tree", "stationary_tree", "ApproxOptions", "ApproxResult",
    "lower_expected_hitting_time", "lower_hitting_probability", "monotone_limit",
    "upper_expected_hitting_time", "upper_hitting_probability", "certify_upper_bound",
    "doob_crossing", "verify_supermartingale",
]
