"""Concentration bounds for (M, a, b) self-bounding functions."""

from .bounds import (
    CumulantBound,
    DeltaValue,
    Method,
    SelfBoundingParams,
    Tail,
    TailBound,
    c_plus,
    chernoff_supremum_lower,
    chernoff_supremum_upper,
    cumulant_bound,
    delta_minus,
    delta_plus,
    evaluate_all,
    lower_tail_improved,
    lower_tail_mcdiarmid_ab,
    lower_tail_symmetric,
    remark_threshold,
    upper_tail_boucheron_ab,
    upper_tail_improved,
    upper_tail_mcdiarmid_ab,
    upper_tail_symmetric,
)
from .conditions import GammaFamily, check_condition1, condition_report
from .errors import DomainError, InvalidParamsError, PoleError
from .scaling import compare_lower, compare_upper
from .special import alpha, mu, psi, s_func, y_func

__version__ = "0.1.0"
