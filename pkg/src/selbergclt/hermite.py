"""Hermite polynomials and the Gaussian integrals built on them.

Convention: *physicists'* Hermite polynomials throughout,

    H_n(x) = (-1)^n e^{x^2} d^n/dx^n e^{-x^2},
    H_0 = 1,  H_1 = 2x,  H_{n+1}(x) = 2x H_n(x) - 2n H_{n-1}(x).

Do not substitute the probabilists' family He_n; every closed form below
is specific to this normalization.

Two integral identities are exposed:

* the weighted segment integral

      int_a^b e^{-pi u^2} H_k(sqrt(pi) u) du
        = -(1/sqrt(pi)) [ e^{-pi u^2} H_{k-1}(sqrt(pi) u) ]_a^b     (k >= 1)

  which telescopes exactly and vanishes over the full line for k >= 1;

* the Gaussian Fourier moment

      int e^{-psi pi^2 x^2 - 2 pi i x u} x^k dx
        = (2 pi i)^{-k} pi^{-1/2} psi^{-(k+1)/2} e^{-u^2/psi} H_k(u/sqrt(psi)),

  returned here *without* the (2 pi i)^{-k} phase; callers own that
  bookkeeping because the phases cancel in aggregate.
"""

import math

from .errors import ValidationError

MAX_DEGREE = 64  # coefficient growth passes double range not far beyond

_SQRT_PI = math.sqrt(math.pi)


def hermite_eval(n: int, x: float) -> float:
    """H_n(x) by the stable three-term recurrence."""
    if not 0 <= n <= MAX_DEGREE:
        raise ValidationError(f"Hermite degree {n} outside [0, {MAX_DEGREE}]")
    if n == 0:
        return 1.0
    hm, h = 1.0, 2.0 * x
    for k in range(1, n):
        hm, h = h, 2.0 * x * h - 2.0 * k * hm
    return h


def hermite_values(n_max: int, x: float) -> list[float]:
    """[H_0(x), ..., H_{n_max}(x)] in one recurrence pass."""
    if not 0 <= n_max <= MAX_DEGREE:
        raise ValidationError(f"Hermite degree {n_max} outside [0, {MAX_DEGREE}]")
    vals = [1.0]
    if n_max == 0:
        return vals
    vals.append(2.0 * x)
    for k in range(1, n_max):
        vals.append(2.0 * x * vals[k] - 2.0 * k * vals[k - 1])
    return vals


def hermite_coefficients(n: int) -> list[int]:
    """Exact integer coefficients of H_n, ascending powers of x."""
    if not 0 <= n <= MAX_DEGREE:
        raise ValidationError(f"Hermite degree {n} outside [0, {MAX_DEGREE}]")
    prev = [1]
    if n == 0:
        return prev
    cur = [0, 2]
    for k in range(1, n):
        nxt = [0] * (k + 2)
        for j, c in enumerate(cur):
            nxt[j + 1] += 2 * c
        for j, c in enumerate(prev):
            nxt[j] -= 2 * k * c
        prev, cur = cur, nxt
    return cur


def _endpoint_term(k: int, u: float) -> float:
    """e^{-pi u^2} H_{k-1}(sqrt(pi) u), with the correct 0 limit at +-inf."""
    if math.isinf(u):
        return 0.0
    e = math.pi * u * u
    if e > 700.0:
        # Gaussian underflow beats polynomial growth (product < 1e-190);
        # flush to avoid exp-underflow * huge-polynomial = 0 * inf
        return 0.0
    return math.exp(-e) * hermite_eval(k - 1, _SQRT_PI * u)


def gauss_hermite_segment(k: int, a: float, b: float) -> float:
    """int_a^b e^{-pi u^2} H_k(sqrt(pi) u) du, endpoints may be +-inf.

    k = 0 reduces to the Gaussian mass (erf); k >= 1 uses the exact
    closed form, a difference of endpoint evaluations, so adjacent
    segments telescope with no quadrature error.
    """
    if k < 0:
        raise ValidationError("negative Hermite degree")
    if a > b:
        raise ValidationError(f"segment endpoints out of order: {a} > {b}")
    if k == 0:
        return 0.5 * (math.erf(_SQRT_PI * b) - math.erf(_SQRT_PI * a)) if a != b else 0.0
    return -(_endpoint_term(k, b) - _endpoint_term(k, a)) / _SQRT_PI


def gaussian_fourier_hermite(psi: float, k: int, u: float) -> float:
    """pi^{-1/2} psi^{-(k+1)/2} e^{-u^2/psi} H_k(u/sqrt(psi)) for psi > 0."""
    if psi <= 0.0:
        raise ValidationError(f"Gaussian width psi = {psi} must be positive")
    rpsi = math.sqrt(psi)
    return (
        hermite_eval(k, u / rpsi)
        * math.exp(-u * u / psi)
        / (_SQRT_PI * rpsi ** (k + 1))
    )
