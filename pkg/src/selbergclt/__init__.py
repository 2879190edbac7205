"""Value-distribution expansion of L-functions just right of the critical line.

The package computes the Hermite-expansion coefficients b_{k,l} of the
joint law of (log|L_j|, arg L_j) under the random Euler product model,
evaluates the resulting density and rectangle probabilities, and
validates both against Monte Carlo sampling of the model and against
empirical sampling of the actual zeta function.
"""

from .errors import GateError, NumericalAssertionError, ValidationError
from .expansion import (
    CoeffTable,
    ExpansionConfig,
    b_table,
    coefficient_envelope,
    log_char_series,
    pair_correlation_sum,
    quadratic_split,
)
from .hermite import (
    gauss_hermite_segment,
    gaussian_fourier_hermite,
    hermite_coefficients,
    hermite_eval,
)
from .lfunctions import (
    LFunctionSpec,
    builtin_spec,
    joint_spec,
    parse_spec_file,
    psi_exact,
    psi_vector,
    resolve_spec,
    sigma_T,
)
from .localmoments import A_moment, R_series, g_poly, mc_moment_oracle
from .primes import primes_up_to
from .series import TruncatedSeries

__version__ = "0.1.0"

__all__ = [
    "A_moment",
    "CoeffTable",
    "ExpansionConfig",
    "GateError",
    "LFunctionSpec",
    "NumericalAssertionError",
    "R_series",
    "TruncatedSeries",
    "ValidationError",
    "b_table",
    "builtin_spec",
    "coefficient_envelope",
    "gauss_hermite_segment",
    "gaussian_fourier_hermite",
    "g_poly",
    "hermite_coefficients",
    "hermite_eval",
    "joint_spec",
    "log_char_series",
    "mc_moment_oracle",
    "pair_correlation_sum",
    "parse_spec_file",
    "primes_up_to",
    "psi_exact",
    "psi_vector",
    "quadratic_split",
    "resolve_spec",
    "sigma_T",
]
