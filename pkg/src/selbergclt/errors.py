"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific class that applies.
"""


class ValidationError(ValueError):
    """Bad input: parameter out of range, malformed file, shape mismatch."""


class NumericalAssertionError(ArithmeticError):
    """A quantity that must hold by construction failed its numeric check
    (e.g. an imaginary residue above threshold on coefficients that are
    real by theory)."""


class GateError(RuntimeError):
    """A configured safety gate refused to run a computation (e.g. prime
    truncation mismatch too large for a Monte Carlo comparison)."""
