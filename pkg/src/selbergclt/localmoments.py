"""Per-prime local objects of the random Euler product model.

For a single prime p the model contributes the random variable

    g_{j,p}(sigma) = sum_{m>=1} beta_j(p^m) X(p)^m / p^(m sigma),

with X(p) uniform on the unit circle and shared across components j.
This module supplies:

* ``g_poly`` -- the coefficient sequence c_m = beta_j(p^m) p^(-m sigma)
  with an automatically selected power cutoff M;
* ``A_moment`` -- the exact mixed moment
  E[ prod_j g_{j,p}^{k_j} conj(g_{j,p})^{l_j} ], computed by expanding the
  two products as polynomials in the single variable X and pairing equal
  powers (E[X^a conj(X)^b] = delta_{a,b});
* ``R_series`` -- the local remainder of the characteristic function,
  phi_{p,sigma} = 1 + R, whose (k, l) coefficient is
  (pi i)^(K(k+l)) A(k, l) / (k! l!) over keys with k != 0 and l != 0;
* ``mc_moment_oracle`` -- an independent Monte Carlo estimate of A used
  to validate the exact path.

The polynomial-in-X representation keeps the cost at O(K * M^2) products
per moment instead of the combinatorial sum over power compositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lfunctions import LFunctionSpec
from .rng import derive_seed, unit_circle_array
from .series import TruncatedSeries, exponent_keys

MAX_TOTAL_EXPONENT = 64

_IPOW = (1 + 0j, 1j, -1 + 0j, -1j)


def local_power_cutoff(d: int, eta: float, p: int, sigma: float, tol: float) -> int:
    """Smallest M whose dropped tail sum_{m>M} (d/m) p^(-m(sigma-eta))
    is below tol (geometric bound)."""
    if sigma <= eta:
        raise ValidationError(f"sigma = {sigma} must exceed eta = {eta}")
    if tol <= 0.0:
        raise ValidationError("tolerance must be positive")
    x = float(p) ** (-(sigma - eta))
    M = 1
    while (d / (M + 1)) * x ** (M + 1) / (1.0 - x) >= tol:
        M += 1
        if M > 10_000:
            raise ValidationError("power cutoff did not converge; sigma too close to eta")
    return M


@dataclass(frozen=True)
class LocalFactorPoly:
    """Coefficients of g_{j,p} as a polynomial in X: coeffs[m-1] = c_m."""

    p: int
    j: int
    sigma: float
    coeffs: np.ndarray
    tail_bound: float

    @property
    def M(self) -> int:
        return len(self.coeffs)


def g_poly(
    spec: LFunctionSpec, j: int, p: int, sigma: float, tol: float = 1e-15
) -> LocalFactorPoly:
    M = local_power_cutoff(spec.d, spec.eta, p, sigma, tol)
    ps = np.array([p], dtype=np.int64)
    coeffs = np.array(
        [spec.beta_array(j, ps, m)[0] * float(p) ** (-m * sigma) for m in range(1, M + 1)],
        dtype=np.complex128,
    )
    x = float(p) ** (-(sigma - spec.eta))
    tail = (spec.d / (M + 1)) * x ** (M + 1) / (1.0 - x)
    return LocalFactorPoly(p=int(p), j=j, sigma=sigma, coeffs=coeffs, tail_bound=tail)


def _poly_pow(base: np.ndarray, n: int) -> np.ndarray:
    """base(X)^n for a polynomial with zero constant term, coeffs[0] = X^1
    coefficient.  Returns coefficients of X^n .. X^(n*M) (offset n)."""
    out = base
    for _ in range(n - 1):
        out = np.convolve(out, base)
    return out


def _product_poly(polys: list[np.ndarray], powers: tuple[int, ...]) -> tuple[np.ndarray, int]:
    """prod_j polys[j]^powers[j]; returns (coeffs, X-offset of coeffs[0])."""
    acc = None
    offset = 0
    for poly, n in zip(polys, powers):
        if n == 0:
            continue
        piece = _poly_pow(poly, n)
        offset += n
        acc = piece if acc is None else np.convolve(acc, piece)
    if acc is None:
        return np.ones(1, dtype=np.complex128), 0
    return acc, offset


def A_moment(
    spec: LFunctionSpec,
    p: int,
    sigma: float,
    k: tuple[int, ...],
    l: tuple[int, ...],
    tol: float = 1e-15,
) -> complex:
    """E[ prod_j g_{j,p}^{k_j} conj(g_{j,p})^{l_j} ] for X uniform on the circle.

    A(0,0) = 1 and A(k,0) = A(0,k) = 0 for k != 0 hold exactly: the two
    product polynomials share no X power unless both sides are nonempty.
    """
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    if len(k) != spec.J or len(l) != spec.J:
        raise ValidationError("exponent tuples must have length J")
    if any(v < 0 for v in k) or any(v < 0 for v in l):
        raise ValidationError("negative exponents")
    if sum(k) + sum(l) > MAX_TOTAL_EXPONENT:
        raise ValidationError(f"total exponent above {MAX_TOTAL_EXPONENT}")
    if sum(k) == 0 and sum(l) == 0:
        return 1.0 + 0.0j
    if sum(k) == 0 or sum(l) == 0:
        return 0.0 + 0.0j
    polys = [g_poly(spec, j, p, sigma, tol).coeffs for j in range(1, spec.J + 1)]
    P, offP = _product_poly(polys, k)
    Q, offQ = _product_poly(polys, l)
    lo = max(offP, offQ)
    hi = min(offP + len(P) - 1, offQ + len(Q) - 1)
    if hi < lo:
        return 0.0 + 0.0j
    a = P[lo - offP: hi - offP + 1]
    b = Q[lo - offQ: hi - offQ + 1]
    return complex(np.sum(a * np.conj(b)))


def R_series(
    spec: LFunctionSpec, p: int, sigma: float, N: int, tol: float = 1e-15
) -> TruncatedSeries:
    """Local remainder R_{p,sigma} as a (zbar, z)-indexed series up to degree N.

    Coefficient at (k, l): (pi i)^(K(k+l)) A(k, l) / (k! l!), present only
    when both k and l are nonzero, so the series starts at degree 2.
    """
    if N < 2:
        raise ValidationError("need N >= 2: the remainder starts at degree 2")
    polys = [g_poly(spec, j, p, sigma, tol).coeffs for j in range(1, spec.J + 1)]
    coeffs = {}
    cache: dict[tuple[int, ...], tuple[np.ndarray, int]] = {}

    def prod(powers):
        if powers not in cache:
            cache[powers] = _product_poly(polys, powers)
        return cache[powers]

    for k, l in exponent_keys(spec.J, N, min_degree=2, require_both=True):
        P, offP = prod(k)
        Q, offQ = prod(l)
        lo = max(offP, offQ)
        hi = min(offP + len(P) - 1, offQ + len(Q) - 1)
        if hi < lo:
            continue
        a = P[lo - offP: hi - offP + 1]
        b = Q[lo - offQ: hi - offQ + 1]
        A = complex(np.sum(a * np.conj(b)))
        n = sum(k) + sum(l)
        fact = 1.0
        for v in k:
            fact *= math.factorial(v)
        for v in l:
            fact *= math.factorial(v)
        c = (math.pi ** n) * _IPOW[n % 4] * A / fact
        if c != 0.0:
            coeffs[(k, l)] = c
    return TruncatedSeries(spec.J, N, coeffs)


def mc_moment_oracle(
    spec: LFunctionSpec,
    p: int,
    sigma: float,
    k: tuple[int, ...],
    l: tuple[int, ...],
    n_samples: int,
    seed: int,
    tol: float = 1e-15,
) -> tuple[complex, float]:
    """Monte Carlo estimate of A_moment from i.i.d. unit-circle draws.

    Returns (estimate, stderr) with stderr = s / sqrt(n), s^2 the sample
    variance of the complex summand (E |w - wbar|^2 / (n-1)).
    """
    if n_samples < 1000:
        raise ValidationError("need at least 1e3 samples for a meaningful stderr")
    k = tuple(int(v) for v in k)
    l = tuple(int(v) for v in l)
    xr, xi = unit_circle_array(
        derive_seed(seed, p), np.arange(n_samples, dtype=np.uint64), 0
    )
    X = xr + 1j * xi
    w = np.ones(n_samples, dtype=np.complex128)
    for j in range(1, spec.J + 1):
        if k[j - 1] == 0 and l[j - 1] == 0:
            continue
        c = g_poly(spec, j, p, sigma, tol).coeffs
        g = np.full(n_samples, c[-1], dtype=np.complex128)
        for m in range(len(c) - 2, -1, -1):
            g = g * X + c[m]
        g = g * X
        if k[j - 1]:
            w = w * g ** k[j - 1]
        if l[j - 1]:
            w = w * np.conj(g) ** l[j - 1]
    est = complex(np.mean(w))
    if n_samples > 1:
        var = float(np.sum(np.abs(w - est) ** 2)) / (n_samples - 1)
    else:
        var = 0.0
    return est, math.sqrt(var / n_samples)
