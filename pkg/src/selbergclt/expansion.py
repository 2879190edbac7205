"""Global expansion objects: prime sums, quadratic split, coefficient table.

Pipeline, in the variables z = x + iy in C^J:

1. ``log_char_series`` accumulates sum_p log(1 + R_{p,sigma}) over primes
   p <= P_max as a (zbar, z)-indexed series; its degree-n slices are the
   homogeneous parts I_n of the log characteristic function.
2. ``quadratic_split`` rewrites the degree-2 part as
   -pi^2 sum_j psi_j |z_j|^2  +  sum C_{j1,j2} zbar_{j1} z_{j2},
   i.e. it pulls out the Gaussian quadratic form with the asymptotic
   scale psi_j = xi_j theta loglogT and keeps the finite remainder in a
   Hermitian matrix C.
3. ``b_table`` exponentiates (C-form quadratic) + (degrees >= 3), after
   rescaling the degree-n part by (2 pi i)^(-n) and changing variables to
   the real pair (x, y).  The resulting coefficients b_{k,l} are real up
   to rounding; reality is asserted, never assumed.

Prime sums are banded: consecutive primes sharing the same power cutoff M
and the same retained-degree cap are processed as one numpy batch, and
band partials are combined with exact summation.  Band boundaries depend
only on (spec, sigma, tol), never on the requested degree cutoff N, which
makes truncation consistency bit-exact: a table computed at N = 10 and
restricted to degree 6 equals the table computed at N = 6.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import NumericalAssertionError, ValidationError
from .lfunctions import LFunctionSpec, psi_vector, sigma_T
from .localmoments import local_power_cutoff
from .primes import primes_up_to
from .series import TruncatedSeries, degree as key_degree, exponent_keys
from .sums import fsum_blocks, prime_tail_bound, prime_tail_estimate

_IPOW = (1 + 0j, 1j, -1 + 0j, -1j)
_CHUNK = 1 << 14  # fixed prime-block width for deterministic reduction
_NCAP_MAX = 64


@dataclass(frozen=True)
class ExpansionConfig:
    """Numerical policy for building a coefficient table.

    n3_sigma_mode selects where the degree >= 3 prime sums are evaluated:
    at sigma_T (keeps every prime sum at the operating sigma; default) or
    at 1/2 (the T-independent normalization); the two differ by
    O((log T)^-theta) per degree.

    tail_mode controls whether the diagonal degree-2 prime sums get a
    prime-density tail correction for p > P_max ("pnt") or stay bare
    truncations ("none").  Off-diagonal sums never get a correction
    (orthogonality makes their tails cancel).

    delta1..delta4 are validation radii only: delta1 bounds the region
    where |R_p| <= 1/2 is checked, delta2 bounds where the truncated
    characteristic function may be evaluated.
    """

    N: int = 8
    P_max: int = 10 ** 6
    tol: float = 1e-15
    n3_sigma_mode: str = "sigma_T"  # or "half"
    tail_mode: str = "pnt"  # or "none"
    delta1: float = 0.05
    delta2: float = 0.05
    delta3: float = 0.5
    delta4: float = 0.05
    key_drop: float = 1e-17  # per-prime envelope threshold for retained degrees

    def __post_init__(self):
        if self.N < 2:
            raise ValidationError("need degree cutoff N >= 2")
        if self.P_max < 10 ** 3:
            raise ValidationError("need P_max >= 1e3")
        if self.n3_sigma_mode not in ("sigma_T", "half"):
            raise ValidationError(f"unknown n3_sigma_mode {self.n3_sigma_mode!r}")
        if self.tail_mode not in ("pnt", "none"):
            raise ValidationError(f"unknown tail_mode {self.tail_mode!r}")
        if not (self.tol > 0 and self.key_drop > 0):
            raise ValidationError("tolerances must be positive")


class LogCharSeries(NamedTuple):
    series: TruncatedSeries
    tail_bounds: dict[int, float]  # degree -> bound on the dropped p > P_max mass


# ---------------------------------------------------------------------------
# banded prime machinery
# ---------------------------------------------------------------------------

def _band_plan(spec, ps, sigma, tol, key_drop):
    """Split the prime array into (start, end, M, ncap) bands.

    M and ncap derive from the (d, eta) envelope only, so they are
    monotone in p; bands are additionally split at fixed _CHUNK
    boundaries to pin the reduction order and bound memory.
    """
    d, eta = spec.d, spec.eta
    fp = ps.astype(np.float64)
    x = fp ** (-(sigma - eta))
    e = d * x / (1.0 - x)
    # retained-degree cap: drop degrees with e^n below key_drop
    ncap = np.full(len(ps), _NCAP_MAX, dtype=np.int64)
    small = e < 1.0
    with np.errstate(divide="ignore"):
        raw = np.floor(math.log(key_drop) / np.log(e[small]))
    ncap[small] = np.clip(raw, 2, _NCAP_MAX).astype(np.int64)
    M = np.array(
        [local_power_cutoff(d, eta, int(p), sigma, tol) for p in ps], dtype=np.int64
    )

    bands = []
    start = 0
    for i in range(1, len(ps) + 1):
        boundary = (
            i == len(ps)
            or M[i] != M[start]
            or ncap[i] != ncap[start]
            or i % _CHUNK == 0
        )
        if boundary:
            bands.append((start, i, int(M[start]), int(ncap[start])))
            start = i
    return bands


def _conv_axis0(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1]), dtype=np.complex128)
    for i in range(A.shape[0]):
        out[i: i + B.shape[0]] += A[i] * B
    return out


def _band_R(spec, ps_band, sigma, M, N_band, tol):
    """R_{p,sigma} for a prime band, as a series with array coefficients."""
    J = spec.J
    fp = ps_band.astype(np.float64)
    g = []
    for j in range(1, J + 1):
        rows = [spec.beta_array(j, ps_band, m) * fp ** (-m * sigma) for m in range(1, M + 1)]
        g.append(np.stack(rows))  # row m-1 <-> X^m
    pw: dict[tuple[int, int], np.ndarray] = {}

    def power(j, n):
        key = (j, n)
        if key not in pw:
            pw[key] = g[j] if n == 1 else _conv_axis0(power(j, n - 1), g[j])
        return pw[key]

    prod_cache: dict[tuple[int, ...], tuple[np.ndarray, int]] = {}

    def product(powers):
        if powers in prod_cache:
            return prod_cache[powers]
        acc, off = None, 0
        for j, n in enumerate(powers):
            if n == 0:
                continue
            piece = power(j, n)
            off += n
            acc = piece if acc is None else _conv_axis0(acc, piece)
        if acc is None:
            acc = np.ones((1, len(ps_band)), dtype=np.complex128)
        prod_cache[powers] = (acc, off)
        return acc, off

    coeffs = {}
    for k, l in exponent_keys(J, N_band, min_degree=2, require_both=True):
        P, offP = product(k)
        Q, offQ = product(l)
        lo = max(offP, offQ)
        hi = min(offP + P.shape[0] - 1, offQ + Q.shape[0] - 1)
        if hi < lo:
            continue
        a = P[lo - offP: hi - offP + 1]
        b = Q[lo - offQ: hi - offQ + 1]
        A = np.sum(a * np.conj(b), axis=0)
        n = key_degree((k, l))
        fact = 1.0
        for v in k:
            fact *= math.factorial(v)
        for v in l:
            fact *= math.factorial(v)
        coeffs[(k, l)] = ((math.pi ** n) * _IPOW[n % 4] / fact) * A
    return TruncatedSeries(J, N_band, coeffs)


def _degree_mass_factors(J: int, N: int) -> np.ndarray:
    """c[n] such that the degree-n coefficient mass of log(1 + R_p) is
    bounded by c[n] * e_p^n, where e_p is the per-prime envelope.

    Derived from mass_n(R_p) <= r_n e_p^n with
    r_n = pi^n sum_{deg-n keys} 1/(k! l!), combined through the series
    sum_m (1/m) (abs R)^m on scalar degree-mass vectors.
    """
    r = np.zeros(N + 1)
    for k, l in exponent_keys(J, N, min_degree=2, require_both=True):
        n = key_degree((k, l))
        fact = 1.0
        for v in k:
            fact *= math.factorial(v)
        for v in l:
            fact *= math.factorial(v)
        r[n] += math.pi ** n / fact
    c = np.zeros(N + 1)
    power = r.copy()
    m = 1
    while m <= N // 2:
        c += power / m
        # next power: degree-truncated convolution
        nxt = np.zeros(N + 1)
        for a in range(N + 1):
            if power[a] == 0.0:
                continue
            top = N - a
            nxt[a: a + top + 1] += power[a] * r[: top + 1]
        power = nxt
        m += 1
    return c


def log_char_series(
    spec: LFunctionSpec,
    sigma: float,
    config: ExpansionConfig,
    min_degree: int = 2,
) -> LogCharSeries:
    """sum_{p <= P_max} log(1 + R_{p,sigma}) truncated at total degree N.

    Convergence floors: sigma > 1/2 when degree-2 terms are requested,
    otherwise sigma >= (5 + 2 eta)/12 suffices for the degree >= 3 part.
    """
    floor3 = (5.0 + 2.0 * spec.eta) / 12.0
    if min_degree <= 2:
        if sigma <= 0.5:
            raise ValidationError(f"sigma = {sigma} needs to exceed 1/2 for degree 2")
    elif sigma < floor3:
        raise ValidationError(f"sigma = {sigma} below the degree-3 floor {floor3}")

    N = config.N
    ps = primes_up_to(config.P_max)
    partials: dict = {}
    for start, end, M, ncap in _band_plan(spec, ps, sigma, config.tol, config.key_drop):
        N_band = min(N, ncap)
        if N_band < 2:
            continue
        R = _band_R(spec, ps[start:end], sigma, M, N_band, config.tol)
        L = R.log1p()
        for key in sorted(L.coeffs):
            val = L.coeffs[key]
            s = complex(np.sum(val.real), np.sum(val.imag)) if isinstance(val, np.ndarray) else complex(val)
            partials.setdefault(key, []).append(s)

    coeffs = {}
    for key in sorted(partials):
        if key_degree(key) < min_degree:
            continue
        vals = partials[key]
        coeffs[key] = complex(
            fsum_blocks([v.real for v in vals]), fsum_blocks([v.imag for v in vals])
        )
    series = TruncatedSeries(spec.J, N, coeffs)

    # p > P_max mass per degree, via the envelope (degree 2 may diverge at
    # sigma = 1/2; report inf there)
    cmass = _degree_mass_factors(spec.J, N)
    xP = float(config.P_max) ** (-(sigma - spec.eta))
    gfac = spec.d / (1.0 - xP)
    tails = {}
    for n in range(max(2, min_degree), N + 1):
        expo = n * (sigma - spec.eta)
        if expo <= 1.0:
            tails[n] = math.inf
        else:
            tails[n] = cmass[n] * gfac ** n * prime_tail_bound(expo, float(config.P_max))
    return LogCharSeries(series, tails)


# ---------------------------------------------------------------------------
# degree-2: pair correlation sums and the quadratic split
# ---------------------------------------------------------------------------

class PairSum(NamedTuple):
    value: complex
    tail_estimate: float  # added to value in "pnt" mode (diagonal only)
    tail_bound: float


def pair_correlation_sum(
    spec: LFunctionSpec,
    j1: int,
    j2: int,
    sigma: float,
    P: int,
    tol: float = 1e-15,
) -> PairSum:
    """D_{j1,j2}(sigma) = sum_{p<=P} sum_m beta_{j1}(p^m) conj(beta_{j2}(p^m)) p^(-2m sigma).

    The tail estimate is the prime-density integral for the diagonal
    (scaled by xi_j, the average of |beta_j(p)|^2), zero off-diagonal;
    the tail bound is the rigorous envelope bound either way.
    """
    if sigma <= 0.5:
        raise ValidationError(f"sigma = {sigma} must exceed 1/2")
    ps = primes_up_to(P)
    fp = ps.astype(np.float64)
    M = local_power_cutoff(spec.d, spec.eta, 2, sigma, tol)
    parts_re, parts_im = [], []
    for m in range(1, M + 1):
        with np.errstate(under="ignore"):
            pm = fp ** (-2.0 * m * sigma)
        vals = spec.beta_array(j1, ps, m) * np.conj(spec.beta_array(j2, ps, m)) * pm
        for s in range(0, len(ps), _CHUNK):
            blk = vals[s: s + _CHUNK]
            parts_re.append(float(np.sum(blk.real)))
            parts_im.append(float(np.sum(blk.imag)))
    value = complex(fsum_blocks(parts_re), fsum_blocks(parts_im))

    d, eta = spec.d, spec.eta
    tail_bound = 0.0
    for m in range(1, M + 1):
        tail_bound += (d / m) ** 2 * prime_tail_bound(2.0 * m * (sigma - eta), float(P))
    xP = float(P) ** (-2.0 * (sigma - eta))
    tail_bound += (d / (M + 1)) ** 2 * prime_tail_bound(
        2.0 * (M + 1) * (sigma - eta), float(P)
    ) / (1.0 - xP)

    if j1 == j2:
        est = spec.xi[j1 - 1] * prime_tail_estimate(2.0 * sigma, float(P))
        for m in range(2, M + 1):
            est += (d / m) ** 2 * prime_tail_estimate(2.0 * m * (sigma - eta), float(P))
    else:
        est = 0.0
    return PairSum(value, est, tail_bound)


def quadratic_split(
    spec: LFunctionSpec,
    theta: float,
    logT: float,
    config: ExpansionConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """(psi vector, C matrix): the degree-2 data of the expansion.

    C_{j,j}   = -pi^2 (D_{j,j}(sigma_T) - psi_j)
    C_{j1,j2} = -pi^2 D_{j1,j2}(sigma_T)        (j1 != j2)

    with the tail-corrected D in "pnt" mode.  Hermiticity is exact by
    construction: the lower triangle is stored as the conjugate of the
    computed upper triangle.
    """
    st = sigma_T(theta, logT)
    psi = psi_vector(spec, theta, logT)
    J = spec.J
    C = np.zeros((J, J), dtype=np.complex128)
    pi2 = math.pi * math.pi
    for j1 in range(1, J + 1):
        for j2 in range(j1, J + 1):
            ps = pair_correlation_sum(spec, j1, j2, st, config.P_max, config.tol)
            D = ps.value + (ps.tail_estimate if config.tail_mode == "pnt" else 0.0)
            if j1 == j2:
                C[j1 - 1, j1 - 1] = -pi2 * (D - psi[j1 - 1])
            else:
                C[j1 - 1, j2 - 1] = -pi2 * D
                C[j2 - 1, j1 - 1] = np.conj(C[j1 - 1, j2 - 1])
    return psi, C


# ---------------------------------------------------------------------------
# the coefficient table
# ---------------------------------------------------------------------------

@dataclass
class CoeffTable:
    """Real coefficients b_{k,l} of the Hermite expansion, plus scale data.

    b keys are (k, l) exponent-tuple pairs over the J components; meta
    records the full provenance (config, sigma, residues, tail bounds) so
    a table is reproducible from its own file.
    """

    J: int
    N: int
    b: dict
    psi: np.ndarray
    C: np.ndarray
    meta: dict = field(default_factory=dict)

    def get(self, k: tuple[int, ...], l: tuple[int, ...]) -> float:
        return self.b.get((tuple(k), tuple(l)), 0.0)

    def items(self):
        for key in sorted(self.b):
            yield key, self.b[key]

    def restrict(self, N_new: int) -> "CoeffTable":
        if N_new > self.N:
            raise ValidationError("cannot extend a table by restriction")
        bb = {k: v for k, v in self.b.items() if key_degree(k) <= N_new}
        meta = dict(self.meta)
        meta["restricted_from_N"] = self.N
        return CoeffTable(self.J, N_new, bb, self.psi.copy(), self.C.copy(), meta)

    # -- serialization (self-describing, byte-stable round trip) -------

    def to_json(self) -> str:
        payload = {
            "format": "selbergclt-coefftable-v1",
            "J": self.J,
            "N": self.N,
            "psi": [repr(float(x)) for x in self.psi],
            "C": [
                [repr(float(self.C[i, j].real)), repr(float(self.C[i, j].imag))]
                for i in range(self.J)
                for j in range(self.J)
            ],
            "b": {
                ",".join(map(str, k)) + "|" + ",".join(map(str, l)): repr(float(v))
                for (k, l), v in self.b.items()
            },
            "meta": self.meta,
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        data = json.loads(text)
        if data.get("format") != "selbergclt-coefftable-v1":
            raise ValidationError("not a coefficient table file")
        J, N = data["J"], data["N"]
        psi = np.array([float(x) for x in data["psi"]], dtype=np.float64)
        C = np.zeros((J, J), dtype=np.complex128)
        flat = data["C"]
        for i in range(J):
            for j in range(J):
                re, im = flat[i * J + j]
                C[i, j] = complex(float(re), float(im))
        b = {}
        for keystr, val in data["b"].items():
            kk, ll = keystr.split("|")
            k = tuple(int(x) for x in kk.split(","))
            l = tuple(int(x) for x in ll.split(","))
            b[(k, l)] = float(val)
        return cls(J, N, b, psi, C, data.get("meta", {}))

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CoeffTable":
        return cls.from_json(Path(path).read_text())


def _validate_small_R(spec, sigma, delta1, P_probe=100, n_z=200, seed=7):
    """|R_{p,sigma}(z)| <= 1/2 for ||z|| <= delta1, on a point sample.

    The existence of such a radius is a theorem; the configured value is
    re-checked per family since the bound constant is family-dependent.
    The remainder decays in p, so probing the small primes covers the
    worst case.
    """
    from .localmoments import R_series as _R

    rs = np.random.RandomState(seed)
    pts = rs.standard_normal((n_z, 2 * spec.J))
    norms = np.sqrt(np.sum(pts ** 2, axis=1))
    pts = pts / norms[:, None] * (delta1 * rs.uniform(0.2, 1.0, n_z)[:, None])
    worst = 0.0
    for p in primes_up_to(P_probe):
        series = _R(spec, int(p), sigma, N=8)
        for row in pts:
            x = row[: spec.J]
            y = row[spec.J:]
            z = x + 1j * y
            val = abs(series.evaluate(np.conj(z), z))
            worst = max(worst, val)
    if worst > 0.5:
        raise NumericalAssertionError(
            f"|R_p(z)| reached {worst:.3f} > 1/2 inside ||z|| <= {delta1}; "
            "reduce delta1 for this family"
        )
    return worst


def b_table(
    spec: LFunctionSpec,
    theta: float,
    logT: float,
    config: ExpansionConfig | None = None,
) -> CoeffTable:
    """Build the coefficient table b_{k,l} for one operating point.

    Exponentiates the C-form quadratic plus the degree >= 3 homogeneous
    parts, each degree-n slice scaled by (2 pi i)^(-n), in the real
    variables (x, y).  Asserts b(0,0) = 1, vanishing at total degree 1,
    and reality of every coefficient (worst imaginary residue recorded in
    meta and required below 1e-12).
    """
    config = config or ExpansionConfig()
    st = sigma_T(theta, logT)
    worst_R = _validate_small_R(spec, st, config.delta1)
    psi, C = quadratic_split(spec, theta, logT, config)

    J, N = spec.J, config.N
    # quadratic part in C-form
    quad = {}
    for j1 in range(J):
        for j2 in range(J):
            if C[j1, j2] != 0.0:
                k = tuple(1 if t == j1 else 0 for t in range(J))
                l = tuple(1 if t == j2 else 0 for t in range(J))
                quad[(k, l)] = quad.get((k, l), 0.0 + 0.0j) + C[j1, j2]
    S_z = TruncatedSeries(J, N, quad)

    tails = {}
    if N >= 3:
        sig3 = st if config.n3_sigma_mode == "sigma_T" else 0.5
        high = log_char_series(spec, sig3, config, min_degree=3)
        tails = high.tail_bounds
        for n in range(3, N + 1):
            S_z = S_z + high.series.extract_degree(n)

    # rescale degree slices by (2 pi i)^(-n) and move to (x, y) variables
    S_xy = TruncatedSeries.zero(J, N)
    twopi = 2.0 * math.pi
    for n in range(2, N + 1):
        part = S_z.extract_degree(n)
        if not part.coeffs:
            continue
        scale = (twopi ** -n) * _IPOW[(-n) % 4]
        S_xy = S_xy + part.conjugate_to_real().scale(scale)

    G = S_xy.exp()
    residue = G.max_abs_imag()
    if residue >= 1e-12:
        worst_key = max(G.coeffs, key=lambda k: abs(np.imag(G.coeffs[k])))
        raise NumericalAssertionError(
            f"coefficient reality violated: residue {residue:.3e} at {worst_key} "
            "(raise P_max or inspect the spec)"
        )
    b = {}
    zerokey = ((0,) * J, (0,) * J)
    for key, c in G.items():
        b[key] = float(np.real(c))
    if b.get(zerokey) != 1.0:
        raise NumericalAssertionError(f"b(0,0) = {b.get(zerokey)!r} != 1")
    for key in list(b):
        if key_degree(key) == 1 and abs(b[key]) >= 1e-12:
            raise NumericalAssertionError(f"degree-1 coefficient {key} = {b[key]:.3e}")

    meta = {
        "spec": spec.label,
        "theta": theta,
        "logT": logT,
        "sigma_T": st,
        "psi": [float(x) for x in psi],
        "config": asdict(config),
        "imag_residue": residue,
        "tail_bounds": {str(n): (None if math.isinf(v) else v) for n, v in tails.items()},
        "worst_local_R": worst_R,
    }
    return CoeffTable(J, N, b, psi, C, meta)


class EnvelopeFit(NamedTuple):
    c0: float
    r: float
    max_violation: float
    degenerate: bool
    n_points: int


def coefficient_envelope(table: CoeffTable) -> EnvelopeFit:
    """Geometric envelope |b| <= c0 * r^(-K) fitted to the nonzero entries.

    Least squares on log|b| vs total degree K, then c0 is raised so the
    envelope covers every entry (reported max_violation is 0 by
    construction).  A table with fewer than two distinct degrees among
    its nonzero entries cannot pin a ratio and is reported degenerate.
    """
    ks, logs = [], []
    for key, v in table.items():
        if v != 0.0:
            ks.append(key_degree(key))
            logs.append(math.log(abs(v)))
    if len(set(ks)) < 2:
        return EnvelopeFit(1.0, 1.0, 0.0, True, len(ks))
    ks_arr = np.array(ks, dtype=np.float64)
    ls = np.array(logs)
    slope, intercept = np.polyfit(ks_arr, ls, 1)
    r = math.exp(-slope)
    c0 = math.exp(intercept)
    # raise c0 until it covers all points
    excess = ls - (intercept + slope * ks_arr)
    c0 *= math.exp(max(0.0, float(np.max(excess))))
    return EnvelopeFit(c0, r, 0.0, False, len(ks))
