"""Monte Carlo sampling of the random Euler product model.

One sample of the model draws an independent uniform unit-circle value
X(p) for every prime p <= P_MC (shared across the J components) and
accumulates

    log L_j = sum_p sum_{m <= M_p} beta_j(p^m) X(p)^m p^(-m sigma),

whose real and imaginary parts are (log modulus, argument).  Everything
is driven by the counter-based generator in ``rng``: the variate for
(sample i, prime index q) is a pure function of (seed, i, q), so batches
are bit-identical for a fixed seed no matter how the sample loop is
scheduled, and the per-sample prime accumulation is compensated.

Truncation control: ``tail_sd`` estimates the standard deviation of the
discarded tail sum over p > P_MC.  A comparison between a sampled batch
and an expansion table is meaningful only when the two describe the same
prime range; ``check_compare_gate`` enforces that the *mismatch* between
the two cutoffs is negligible against the target resolution.  (At desk
scale the tail against the infinite model is never small -- the degree-2
prime sums converge like 1/log -- so the infinite-model tail is reported
but cannot gate; matching cutoffs is what makes the bias cancel.)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange, set_num_threads

from .distribution import Rectangle
from .errors import GateError, ValidationError
from .lfunctions import LFunctionSpec
from .localmoments import local_power_cutoff
from .primes import primes_up_to
from .rng import unit_circle
from .sums import prime_tail_estimate

__all__ = [
    "SampleBatch",
    "sample_logL",
    "empirical_probability",
    "tail_sd",
    "cutoff_mismatch_sd",
    "check_compare_gate",
]

_MAGIC = b"SCLTBATCH1\n"


@dataclass
class SampleBatch:
    """n x 2J matrix of (log|L_1|..log|L_J|, arg L_1..arg L_J) rows."""

    samples: np.ndarray
    spec_label: str
    sigma: float
    P_MC: int
    seed: int
    truncation_sd: np.ndarray  # per component j

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def J(self) -> int:
        return self.samples.shape[1] // 2

    def save(self, path):
        """Flat binary: one JSON header line, then row-major float64."""
        header = {
            "spec": self.spec_label,
            "sigma": self.sigma,
            "P_MC": self.P_MC,
            "n": int(self.n),
            "J": int(self.J),
            "seed": int(self.seed),
            "truncation_sd": [repr(float(x)) for x in self.truncation_sd],
        }
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.ascontiguousarray(self.samples, dtype=np.float64).tobytes())

    @classmethod
    def load(cls, path) -> "SampleBatch":
        raw = Path(path).read_bytes()
        if not raw.startswith(_MAGIC):
            raise ValidationError(f"{path}: not a sample batch file")
        nl = raw.index(b"\n", len(_MAGIC))
        header = json.loads(raw[len(_MAGIC): nl].decode())
        n, J = header["n"], header["J"]
        payload = np.frombuffer(raw[nl + 1:], dtype=np.float64)
        if payload.size != n * 2 * J:
            raise ValidationError(f"{path}: payload size mismatch")
        return cls(
            samples=payload.reshape(n, 2 * J).copy(),
            spec_label=header["spec"],
            sigma=header["sigma"],
            P_MC=header["P_MC"],
            seed=header["seed"],
            truncation_sd=np.array([float(x) for x in header["truncation_sd"]]),
        )

    def to_csv(self, path):
        J = self.J
        cols = [f"log_abs_{j + 1}" for j in range(J)] + [f"arg_{j + 1}" for j in range(J)]
        head = "# spec=%s sigma=%.17g P_MC=%d seed=%d\n" % (
            self.spec_label,
            self.sigma,
            self.P_MC,
            self.seed,
        )
        with open(path, "w") as fh:
            fh.write(head)
            fh.write(",".join(cols) + "\n")
            np.savetxt(fh, self.samples, delimiter=",", fmt="%.17g")


@njit(parallel=True, cache=True)
def _sample_kernel(seed, n, cre, cim, offs, nj, out):
    # per sample: sequential over primes, Horner in X per component,
    # Neumaier-compensated accumulation; samples are independent so the
    # schedule cannot change any result bit
    nq = offs.shape[0] - 1
    tot = offs[nq]
    for i in prange(n):
        acc = np.zeros(2 * nj, dtype=np.float64)
        comp = np.zeros(2 * nj, dtype=np.float64)
        for q in range(nq):
            xr, xi = unit_circle(seed, i, q)
            for j in range(nj):
                base = j * tot
                lo = base + offs[q]
                hi = base + offs[q + 1]
                gr = cre[hi - 1]
                gi = cim[hi - 1]
                for m in range(hi - 2, lo - 1, -1):
                    tr = gr * xr - gi * xi
                    gi = gr * xi + gi * xr
                    gr = tr + cre[m]
                    gi = gi + cim[m]
                tr = gr * xr - gi * xi
                gi = gr * xi + gi * xr
                gr = tr
                t = acc[2 * j] + gr
                if abs(acc[2 * j]) >= abs(gr):
                    comp[2 * j] += (acc[2 * j] - t) + gr
                else:
                    comp[2 * j] += (gr - t) + acc[2 * j]
                acc[2 * j] = t
                t = acc[2 * j + 1] + gi
                if abs(acc[2 * j + 1]) >= abs(gi):
                    comp[2 * j + 1] += (acc[2 * j + 1] - t) + gi
                else:
                    comp[2 * j + 1] += (gi - t) + acc[2 * j + 1]
                acc[2 * j + 1] = t
        for j in range(nj):
            out[i, j] = acc[2 * j] + comp[2 * j]
            out[i, nj + j] = acc[2 * j + 1] + comp[2 * j + 1]


def _coef_tables(spec: LFunctionSpec, sigma: float, P_MC: int, tol: float):
    """Flattened c_{j,p,m} tables for the kernel (j-major, ragged in m)."""
    ps = primes_up_to(P_MC)
    fp = ps.astype(np.float64)
    Ms = np.array(
        [local_power_cutoff(spec.d, spec.eta, int(p), sigma, tol) for p in ps],
        dtype=np.int64,
    )
    offs = np.zeros(len(ps) + 1, dtype=np.int64)
    np.cumsum(Ms, out=offs[1:])
    tot = int(offs[-1])
    cre = np.zeros(spec.J * tot, dtype=np.float64)
    cim = np.zeros(spec.J * tot, dtype=np.float64)
    Mmax = int(Ms.max())
    for m in range(1, Mmax + 1):
        sel = Ms >= m
        idx = offs[:-1][sel] + (m - 1)
        with np.errstate(under="ignore"):
            pw = fp[sel] ** (-m * sigma)
        for j in range(1, spec.J + 1):
            vals = spec.beta_array(j, ps[sel], m) * pw
            cre[(j - 1) * tot + idx] = vals.real
            cim[(j - 1) * tot + idx] = vals.imag
    return ps, cre, cim, offs


def sample_logL(
    spec: LFunctionSpec,
    sigma: float,
    P_MC: int,
    n: int,
    seed: int,
    tol: float = 1e-9,
    workers: int | None = None,
) -> SampleBatch:
    """Draw n joint samples of (log|L_j|, arg L_j) under the random model.

    tol is the per-prime power-truncation tolerance; the induced
    deterministic error per sample is below (number of primes) * tol,
    orders of magnitude under the statistical noise at any feasible n.
    """
    if sigma <= 0.5:
        raise ValidationError(f"sigma = {sigma} must exceed 1/2 for the model to converge")
    if P_MC < 10 ** 3:
        raise ValidationError("need P_MC >= 1e3")
    if n < 1:
        raise ValidationError("need n >= 1")
    if workers is not None:
        import numba

        set_num_threads(min(max(1, int(workers)), numba.config.NUMBA_NUM_THREADS))
    _, cre, cim, offs = _coef_tables(spec, sigma, P_MC, tol)
    out = np.empty((n, 2 * spec.J), dtype=np.float64)
    _sample_kernel(np.uint64(seed & ((1 << 64) - 1)), n, cre, cim, offs, spec.J, out)
    return SampleBatch(
        samples=out,
        spec_label=spec.label,
        sigma=sigma,
        P_MC=P_MC,
        seed=seed,
        truncation_sd=tail_sd(spec, sigma, P_MC),
    )


def empirical_probability(
    batch: SampleBatch, rect: Rectangle, psi: np.ndarray
) -> tuple[float, float]:
    """Fraction of samples inside the normalized rectangle, with binomial
    standard error."""
    if batch.n == 0:
        raise ValidationError("empty batch")
    if rect.J != batch.J:
        raise ValidationError("rectangle J != batch J")
    J = batch.J
    scale = np.sqrt(math.pi * np.asarray(psi, dtype=np.float64))
    inside = np.ones(batch.n, dtype=bool)
    for j in range(J):
        uj = batch.samples[:, j] / scale[j]
        vj = batch.samples[:, J + j] / scale[j]
        inside &= (uj >= rect.a[j]) & (uj <= rect.b[j])
        inside &= (vj >= rect.c[j]) & (vj <= rect.d[j])
    phat = float(np.count_nonzero(inside)) / batch.n
    return phat, math.sqrt(max(phat * (1.0 - phat), 1.0 / batch.n) / batch.n)


def tail_sd(spec: LFunctionSpec, sigma: float, P_MC: int) -> np.ndarray:
    """Per-component sd of the dropped tail sum_{p > P_MC} g_{j,p}.

    Var(Re tail) = Var(Im tail) = (1/2) sum_{p>P} sum_m |beta_j(p^m)|^2 p^(-2m sigma),
    estimated with the prime-density integral: the m = 1 term uses the
    orthogonality average |beta_j(p)|^2 ~ xi_j, higher powers the
    (d, eta) envelope.
    """
    if sigma <= 0.5:
        raise ValidationError(f"sigma = {sigma} must exceed 1/2")
    d, eta = spec.d, spec.eta
    base = prime_tail_estimate(2.0 * sigma, float(P_MC))
    extra = 0.0
    m = 2
    while True:
        term = (d / m) ** 2 * prime_tail_estimate(2.0 * m * (sigma - eta), float(P_MC))
        extra += term
        m += 1
        if term < 1e-18 or m > 64:
            break
    out = np.array([0.5 * (xi * base + extra) for xi in spec.xi])
    return np.sqrt(out)


def cutoff_mismatch_sd(spec: LFunctionSpec, sigma: float, P_a: int, P_b: int) -> np.ndarray:
    """sd of the model mass between two prime cutoffs (0 when they agree)."""
    if P_a == P_b:
        return np.zeros(spec.J)
    lo, hi = sorted((P_a, P_b))
    return np.sqrt(np.maximum(tail_sd(spec, sigma, lo) ** 2 - tail_sd(spec, sigma, hi) ** 2, 0.0))


def check_compare_gate(
    spec: LFunctionSpec,
    sigma: float,
    P_expansion: int,
    P_MC: int,
    psi: np.ndarray,
    limit: float = 0.02,
):
    """Refuse a comparison whose prime-cutoff mismatch could bias it.

    The shared truncation (both sides missing p > min cutoff) cancels in
    the comparison; what biases it is the mass one side has and the other
    lacks.  That mismatch sd must stay below limit * sqrt(min psi).
    """
    mism = cutoff_mismatch_sd(spec, sigma, P_expansion, P_MC)
    bound = limit * math.sqrt(float(np.min(psi)))
    worst = float(np.max(mism))
    if worst > bound:
        raise GateError(
            f"prime-cutoff mismatch sd {worst:.4g} exceeds {bound:.4g}; "
            f"use matching cutoffs (expansion P_max = {P_expansion}, MC P_MC = {P_MC})"
        )
    return worst, bound
