"""Special-function kernel: gamma family, finite-form confluent
hypergeometric, Meijer G (ordinary and upper-incomplete) and double
Mellin-Barnes integration."""
from .gamma import (
    NonConvergenceError,
    PoleError,
    kummer_1f1_finite,
    log_gamma,
    lower_incomplete_gamma,
    upper_gamma_log,
    upper_incomplete_gamma,
)
from .meijer import (
    DEFAULT_POLICY,
    DegeneratePolesError,
    GResult,
    MeijerGSpec,
    TruncationPolicy,
    meijer_g,
    meijer_g_many,
    mellin_line_integral,
)
from .doublemb import DoubleMBKernel, double_mellin_barnes

__all__ = [
    "NonConvergenceError",
    "PoleError",
    "kummer_1f1_finite",
    "log_gamma",
    "lower_incomplete_gamma",
    "upper_gamma_log",
    "upper_incomplete_gamma",
    "DEFAULT_POLICY",
    "DegeneratePolesError",
    "GResult",
    "MeijerGSpec",
    "TruncationPolicy",
    "meijer_g",
    "meijer_g_many",
    "mellin_line_integral",
    "DoubleMBKernel",
    "double_mellin_barnes",
]
