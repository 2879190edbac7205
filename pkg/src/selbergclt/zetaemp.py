"""Desk-scale empirical sampling of zeta just right of the critical line.

``zeta_eval`` computes zeta(s) by Euler-Maclaurin: the main Dirichlet
block sum_{n<N} n^-s is filled multiplicatively through a smallest-
prime-factor table (one complex multiply per composite; transcendental
calls at primes only), followed by the standard midpoint/Bernoulli
corrections with ratio-iterated terms so no factorial ever materializes.
N scales like |t|/5, which keeps the correction ratio (t / 2 pi N)^2
near 0.64 and 26 Bernoulli terms deliver ~1e-10 accuracy; heights are
capped at 1e9.

``log_zeta_tracked`` continues log zeta horizontally from 3 + it (where
the Euler product converges absolutely and the principal branch is the
continuous one, since |zeta(3+it) - 1| < 0.21) down to the target sigma,
stitching principal-branch increments and halving the step whenever one
increment's argument reaches pi/2.  Batch runs share the expensive part:
the phase table e^{-i t ln n} is built once per t and dotted against
precomputed sigma-ladder weight tables n^-sigma.

Empirical summaries (KS distance of the normalized log modulus against
the leading Gaussian, mean, variance) normalize by the *exact* variance
sum psi_exact(sigma_T) -- the zeta-specific normalization of the
one-dimensional theory.  Rectangle indicators in ``empirical_Phi``
normalize by the asymptotic psi_1 = theta loglog T to stay comparable
with the multi-component expansion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import bernoulli as _bernoulli_numbers

from .errors import GateError, ValidationError
from .lfunctions import builtin_spec, psi_exact, psi_vector, sigma_T
from .primes import smallest_prime_factor
from .rng import uniform_block

__all__ = [
    "zeta_eval",
    "log_zeta_tracked",
    "ZetaRun",
    "empirical_run",
    "empirical_Phi",
    "ks_distance_to_gaussian",
    "leading_gaussian_cdf",
]

_K_BERN = 40  # correction ratio (t/2piN)^2 ~ 0.63 at N = t/5; 40 terms reach ~1e-12
_T_MAX = 1e9


def _bern_over_fact(K: int) -> np.ndarray:
    """b_k = B_{2k} / (2k)! for k = 1..K (index 0 unused)."""
    B = _bernoulli_numbers(2 * K)
    out = np.zeros(K + 1, dtype=np.float64)
    for k in range(1, K + 1):
        out[k] = float(B[2 * k]) / float(math.factorial(2 * k))
    return out


_BERN = _bern_over_fact(_K_BERN)


@njit(cache=True)
def _phase_fill(t, N, spf, buf):
    """buf[n] = e^{-i t ln n} for 1 <= n < N, multiplicative over spf."""
    buf[1] = 1.0 + 0.0j
    for n in range(2, N):
        p = spf[n]
        if p == n:
            ph = -t * math.log(float(n))
            buf[n] = complex(math.cos(ph), math.sin(ph))
        else:
            buf[n] = buf[p] * buf[n // p]


@njit(cache=True)
def _zeta_em(sigma, t, N, K, bern, spf, zbuf):
    """Euler-Maclaurin zeta(sigma + it) with main sum cutoff N."""
    zbuf[1] = 1.0 + 0.0j
    sr = 1.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    for n in range(2, N):
        p = spf[n]
        if p == n:
            lg = math.log(float(n))
            mag = math.exp(-sigma * lg)
            ph = -t * lg
            z = complex(mag * math.cos(ph), mag * math.sin(ph))
        else:
            z = zbuf[p] * zbuf[n // p]
        zbuf[n] = z
        x = z.real
        tt = sr + x
        cr += (sr - tt) + x
        sr = tt
        x = z.imag
        tt = si + x
        ci += (si - tt) + x
        si = tt
    s = complex(sigma, t)
    total = complex(sr + cr, si + ci)
    lgN = math.log(float(N))
    Nms = cmath.exp(-s * lgN)  # N^-s
    total += Nms * (0.5 + float(N) / (s - 1.0))
    # T_k = b_k * s(s+1)...(s+2k-2) * N^{1-s-2k}, iterated by ratios
    term = bern[1] * s * Nms / float(N)
    total += term
    for k in range(1, K):
        ratio = (bern[k + 1] / bern[k]) * (s + (2 * k - 1)) * (s + (2 * k)) / (float(N) * float(N))
        term = term * ratio
        total += term
    return total


def _em_cutoff(t: float) -> int:
    return max(50, int(abs(t) / 5.0) + 17)


class _SpfCache:
    """Grow-only smallest-prime-factor table plus reusable buffers."""

    def __init__(self):
        self.spf = smallest_prime_factor(64)
        self.zbuf = np.zeros(66, dtype=np.complex128)

    def ensure(self, N: int):
        if N >= len(self.spf):
            self.spf = smallest_prime_factor(int(N * 1.2) + 64)
        if N + 2 > len(self.zbuf):
            self.zbuf = np.zeros(int(N * 1.2) + 66, dtype=np.complex128)
        return self.spf, self.zbuf


_CACHE = _SpfCache()


def zeta_eval(s: complex, target_digits: int = 10) -> complex:
    """zeta(s) to at least target_digits significant digits (<= 12).

    Heights are limited to |Im s| <= 1e9 (the N ~ |t|/5 main sum is the
    cost and accuracy envelope).
    """
    s = complex(s)
    if s == 1.0:
        raise ValidationError("zeta has a pole at s = 1")
    if not 1 <= target_digits <= 12:
        raise ValidationError("supported target_digits range is 1..12")
    if abs(s.imag) > _T_MAX:
        raise ValidationError(f"|Im s| above supported height {_T_MAX:g}")
    N = _em_cutoff(s.imag)
    spf, zbuf = _CACHE.ensure(N)
    return complex(_zeta_em(float(s.real), float(s.imag), N, _K_BERN, _BERN, spf, zbuf))


# ---------------------------------------------------------------------------
# tracked logarithm
# ---------------------------------------------------------------------------

def _sigma_ladder(sigma_target: float) -> list[float]:
    """Fixed descent 3.0 -> sigma_target with steps that shrink left of 1."""
    if sigma_target >= 3.0:
        return [sigma_target]
    pts = [3.0, 2.5, 2.0, 1.75, 1.5, 1.3, 1.15, 1.0]
    pts = [p for p in pts if p > sigma_target + 1e-12]
    lo = pts[-1] if pts else 3.0
    steps = max(1, int(math.ceil((lo - sigma_target) / 0.05)))
    for i in range(1, steps):
        pts.append(lo - (lo - sigma_target) * i / steps)
    pts.append(sigma_target)
    return pts


def _em_tail(s: complex, N: int) -> complex:
    """Midpoint + pole + Bernoulli corrections for the cutoff-N main sum."""
    Nms = cmath.exp(-s * math.log(N))
    total = Nms * (0.5 + N / (s - 1.0))
    term = _BERN[1] * s * Nms / N
    total += term
    for k in range(1, _K_BERN):
        term *= (_BERN[k + 1] / _BERN[k]) * (s + (2 * k - 1)) * (s + (2 * k)) / (N * N)
        total += term
    return total


def _principal_log(z: complex) -> complex:
    if z == 0.0:
        raise ZeroDivisionError("log of zero")
    return cmath.log(z)


class _TrackingFailure(Exception):
    pass


def _continue_log(values: list[complex]) -> complex:
    """Continuous log along a value path, principal step increments.

    Requires |arg increment| < pi/2 per step; larger jumps mean the path
    resolution is insufficient (possibly a zero nearby) and the caller
    must refine or flag.
    """
    total = _principal_log(values[0])
    for prev, cur in zip(values, values[1:]):
        if cur == 0.0 or prev == 0.0:
            raise _TrackingFailure("zero on the continuation path")
        step = _principal_log(cur / prev)
        if abs(step.imag) >= math.pi / 2:
            raise _TrackingFailure("argument step >= pi/2")
        total += step
    return complex(math.log(abs(values[-1])), total.imag)


def log_zeta_tracked(
    sigma: float, t: float, step: float = 0.25, max_halvings: int = 12
) -> complex:
    """log zeta(sigma + it) with the argument continued from 3 + it.

    The horizontal path is walked in steps <= step; any segment whose
    principal increment reaches pi/2 is bisected, up to max_halvings
    times, after which the evaluation fails (flagged by callers).
    """
    if sigma <= 0.5:
        raise ValidationError(f"sigma = {sigma} must exceed 1/2")
    if sigma > 3.0:
        return _principal_log(zeta_eval(complex(sigma, t)))
    sigmas = [3.0]
    while sigmas[-1] - step > sigma + 1e-12:
        sigmas.append(sigmas[-1] - step)
    sigmas.append(sigma)
    vals = [zeta_eval(complex(sg, t)) for sg in sigmas]

    def refine(values, sgs, depth):
        out_v, out_s = [values[0]], [sgs[0]]
        for i in range(1, len(values)):
            try:
                _continue_log(values[i - 1: i + 1])
                out_v.append(values[i])
                out_s.append(sgs[i])
            except _TrackingFailure:
                if depth >= max_halvings:
                    raise
                mid = 0.5 * (sgs[i - 1] + sgs[i])
                vmid = zeta_eval(complex(mid, t))
                sub_v, sub_s = refine(
                    [values[i - 1], vmid, values[i]], [sgs[i - 1], mid, sgs[i]], depth + 1
                )
                out_v.extend(sub_v[1:])
                out_s.extend(sub_s[1:])
        return out_v, out_s

    vals, sigmas = refine(vals, sigmas, 0)
    return _continue_log(vals)


# ---------------------------------------------------------------------------
# batch empirical runs
# ---------------------------------------------------------------------------

@dataclass
class ZetaRun:
    """Sampled rows (t, log|zeta|, arg zeta or nan, flag) over [T, 2T]."""

    T: float
    theta: float
    seed: int
    tracked: bool
    samples: np.ndarray  # columns: t, log_abs, arg, flag(0 ok / 1 excluded)
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def excluded(self) -> int:
        return int(np.count_nonzero(self.samples[:, 3]))

    def good(self) -> np.ndarray:
        return self.samples[self.samples[:, 3] == 0.0]

    def to_csv(self, path):
        import json

        head = "# config: " + json.dumps(
            {"T": self.T, "theta": self.theta, "seed": self.seed, "tracked": self.tracked},
            sort_keys=True,
        )
        with open(path, "w") as fh:
            fh.write(head + "\nt,log_abs,arg,flag\n")
            np.savetxt(fh, self.samples, delimiter=",", fmt="%.17g")


def _sample_ts(T: float, n: int, seed: int) -> np.ndarray:
    return T * (1.0 + uniform_block(seed, n, stream=1))


def empirical_run(
    T: float, theta: float, n_points: int, seed: int, tracked: bool = False
) -> ZetaRun:
    """Evaluate log zeta(sigma_T + it) at n_points uniform t in [T, 2T].

    Untracked runs record the log modulus only (argument column nan);
    tracked runs continue the argument from sigma = 3 along a fixed
    sigma ladder whose weight tables are shared across samples, with
    scalar refinement where a step is too coarse.
    """
    if n_points < 1:
        raise ValidationError("need n_points >= 1")
    if T < 100.0 or 2.0 * T > _T_MAX:
        raise ValidationError("T outside supported range [100, 5e8]")
    lt = math.log(T)
    st = sigma_T(theta, lt)
    ts = _sample_ts(T, n_points, seed)
    Nmax = _em_cutoff(2.0 * T)
    spf, zbuf = _CACHE.ensure(Nmax)
    out = np.empty((n_points, 4), dtype=np.float64)

    if not tracked:
        for i, t in enumerate(ts):
            z = _zeta_em(st, float(t), _em_cutoff(t), _K_BERN, _BERN, spf, zbuf)
            out[i] = (t, math.log(abs(z)), math.nan, 0.0)
    else:
        ladder = _sigma_ladder(st)
        wtab = [np.arange(1, Nmax).astype(np.float64) ** (-sg) for sg in ladder]
        phase = np.zeros(Nmax, dtype=np.complex128)
        for i, t in enumerate(ts):
            N = _em_cutoff(t)
            _phase_fill(float(t), N, spf, phase)
            vals = []
            ok = True
            for li, sg in enumerate(ladder):
                main = complex(np.dot(wtab[li][: N - 1], phase[1:N]))
                vals.append(main + _em_tail(complex(sg, float(t)), N))
            try:
                lg = _continue_log(vals)
            except _TrackingFailure:
                try:
                    lg = log_zeta_tracked(st, float(t))
                except (_TrackingFailure, ZeroDivisionError):
                    ok = False
                    lg = complex(math.nan, math.nan)
            out[i] = (t, lg.real, lg.imag, 0.0 if ok else 1.0)

    run = ZetaRun(T=T, theta=theta, seed=seed, tracked=tracked, samples=out)
    run.meta = {
        "sigma_T": st,
        "logT": lt,
        "n": n_points,
        "excluded": run.excluded,
    }
    return run


def leading_gaussian_cdf(u: np.ndarray) -> np.ndarray:
    """CDF of the e^{-pi u^2} leading density."""
    from scipy.special import erf

    return 0.5 * (1.0 + erf(math.sqrt(math.pi) * np.asarray(u)))


def ks_distance_to_gaussian(values: np.ndarray) -> float:
    """sup_x |ECDF(x) - Gaussian CDF(x)| for already-normalized values."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = len(v)
    if n == 0:
        raise ValidationError("empty sample")
    cdf = leading_gaussian_cdf(v)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def normalized_log_abs(run: ZetaRun, psi_mode: str = "exact", P: int = 10 ** 6) -> np.ndarray:
    """log|zeta| samples normalized by sqrt(pi psi).

    psi_mode "exact" uses the truncated variance sum psi_exact(sigma_T)
    (the one-dimensional zeta normalization); "asymptotic" uses
    theta loglog T.
    """
    good = run.good()
    lt = math.log(run.T)
    if psi_mode == "exact":
        st = sigma_T(run.theta, lt)
        psi = psi_exact(builtin_spec("zeta"), st, P, 64).value
    elif psi_mode == "asymptotic":
        psi = float(psi_vector(builtin_spec("zeta"), run.theta, lt)[0])
    else:
        raise ValidationError(f"unknown psi_mode {psi_mode!r}")
    return good[:, 1] / math.sqrt(math.pi * psi)


def run_summary(run: ZetaRun, P: int = 10 ** 6) -> dict:
    """KS distance, mean and variance diagnostics for a run."""
    lt = math.log(run.T)
    st = sigma_T(run.theta, lt)
    pe = psi_exact(builtin_spec("zeta"), st, P, 64)
    good = run.good()
    la = good[:, 1]
    norm = normalized_log_abs(run, "exact", P)
    return {
        "T": run.T,
        "theta": run.theta,
        "sigma_T": st,
        "n": run.n,
        "excluded": run.excluded,
        "psi_exact": pe.value,
        "psi_asymptotic": float(psi_vector(builtin_spec("zeta"), run.theta, lt)[0]),
        "mean_log_abs": float(np.mean(la)),
        "stderr_mean": float(np.std(la, ddof=1) / math.sqrt(len(la))),
        "var_log_abs": float(np.var(la, ddof=1)),
        "var_predicted": pe.value / 2.0,
        "ks_normalized": ks_distance_to_gaussian(norm),
        "ks_normalized_asym": ks_distance_to_gaussian(
            normalized_log_abs(run, "asymptotic", P)
        ),
    }


def empirical_Phi(
    T: float,
    theta: float,
    rect,
    n_points: int,
    seed: int,
    run: ZetaRun | None = None,
) -> tuple[float, float, int]:
    """Empirical rectangle mass of normalized log zeta over t in [T, 2T].

    Normalization is by sqrt(pi psi_1) with psi_1 = theta loglog T (the
    convention of the J-component expansion).  Aborts if more than 1% of
    the samples failed argument tracking.
    """
    if n_points < 10 ** 3:
        raise ValidationError("need n_points >= 1e3")
    if run is None:
        run = empirical_run(T, theta, n_points, seed, tracked=True)
    if run.excluded > 0.01 * run.n:
        raise GateError(
            f"{run.excluded}/{run.n} samples failed argument tracking; "
            "inspect the run before using it"
        )
    good = run.good()
    psi1 = float(psi_vector(builtin_spec("zeta"), theta, math.log(T))[0])
    scale = math.sqrt(math.pi * psi1)
    u = good[:, 1] / scale
    v = good[:, 2] / scale
    inside = (u >= rect.a[0]) & (u <= rect.b[0]) & (v >= rect.c[0]) & (v <= rect.d[0])
    phat = float(np.count_nonzero(inside)) / len(good)
    stderr = math.sqrt(max(phat * (1.0 - phat), 1.0 / len(good)) / len(good))
    return phat, stderr, run.excluded
