"""L-function families and their scale parameters.

A family is described by its local roots: for component j and prime p the
Euler factor is prod_i (1 - alpha_{j,i}(p) p^{-s})^{-1} with
|alpha_{j,i}(p)| <= p^eta for some 0 <= eta < 1/2.  The Dirichlet-series
coefficients of the logarithm are

    beta_j(p^k) = (1/k) * sum_i alpha_{j,i}(p)^k,

which is all the downstream machinery ever consumes.  Built-in families
(the zeta function and the real non-principal Dirichlet characters mod 3
and mod 4) have degree d = 1, eta = 0 and orthogonality constant xi = 1,
and come with vectorized beta tables; user families can supply a root
callback or a root table file.

Scale conventions: everything is parametrized by log T (natural log),
never T itself -- the interesting log T range 1e3..1e5 corresponds to
astronomically large T.  For 0 < theta < 1/2,

    sigma_T = 1/2 + (log T)^(-theta),
    psi_j   = xi_j * theta * log log T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .errors import ValidationError
from .primes import primes_up_to
from .sums import fsum_blocks, prime_tail_bound

__all__ = [
    "LFunctionSpec",
    "ScaleParams",
    "builtin_spec",
    "joint_spec",
    "resolve_spec",
    "parse_spec_file",
    "sigma_T",
    "psi_vector",
    "psi_exact",
    "PsiExact",
]


@dataclass(frozen=True)
class LFunctionSpec:
    """A tuple (L_1, ..., L_J) of L-functions given by local roots.

    alpha(j, i, p) -> complex uses 1-based j and i.  beta_array(j, ps, m)
    must return beta_j(p^m) for an int64 array of primes; the default
    implementation loops over alpha, built-ins override it with closed
    forms.
    """

    J: int
    d: int
    eta: float
    xi: tuple[float, ...]
    labels: tuple[str, ...]
    alpha: Callable[[int, int, int], complex]
    beta_vec: Callable[[int, np.ndarray, int], np.ndarray] | None = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if self.J < 1 or self.d < 1:
            raise ValidationError("need J >= 1 and d >= 1")
        if not 0.0 <= self.eta < 0.5:
            raise ValidationError(f"eta = {self.eta} outside [0, 1/2)")
        if len(self.xi) != self.J or len(self.labels) != self.J:
            raise ValidationError("xi/labels length != J")
        if any(x <= 0 for x in self.xi):
            raise ValidationError("xi entries must be positive")

    @property
    def label(self) -> str:
        return "+".join(self.labels)

    def beta(self, j: int, p: int, k: int) -> complex:
        """beta_j(p^k) = (1/k) sum_i alpha_{j,i}(p)^k."""
        if not 1 <= j <= self.J:
            raise ValidationError(f"component {j} outside 1..{self.J}")
        if k < 1:
            raise ValidationError("prime power k must be >= 1")
        s = 0.0 + 0.0j
        for i in range(1, self.d + 1):
            a = complex(self.alpha(j, i, p))
            if a != 0.0:
                s += a ** k
        return s / k

    def beta_array(self, j: int, ps: np.ndarray, k: int) -> np.ndarray:
        """Vectorized beta_j(p^k) over a prime array."""
        if self.beta_vec is not None:
            return self.beta_vec(j, ps, k)
        return np.array([self.beta(j, int(p), k) for p in ps], dtype=np.complex128)


class ScaleParams(NamedTuple):
    """Derived scale data for one (theta, logT) operating point."""

    theta: float
    logT: float
    sigmaT: float
    psi: tuple[float, ...]


def sigma_T(theta: float, logT: float) -> float:
    """1/2 + (log T)^(-theta) for 0 < theta < 1/2 and logT > 1."""
    if not 0.0 < theta < 0.5:
        raise ValidationError(f"theta = {theta} outside (0, 1/2)")
    if logT <= 1.0:
        raise ValidationError(f"logT = {logT} must exceed 1")
    return 0.5 + logT ** (-theta)


def psi_vector(spec: LFunctionSpec, theta: float, logT: float) -> np.ndarray:
    """Per-component psi_j = xi_j * theta * log log T (requires logT > e)."""
    if not 0.0 < theta < 0.5:
        raise ValidationError(f"theta = {theta} outside (0, 1/2)")
    if logT <= math.e:
        raise ValidationError(f"logT = {logT} must exceed e for log log T > 0")
    return np.array(spec.xi, dtype=np.float64) * (theta * math.log(logT))


def scale_params(spec: LFunctionSpec, theta: float, logT: float) -> ScaleParams:
    return ScaleParams(theta, logT, sigma_T(theta, logT), tuple(psi_vector(spec, theta, logT)))


class PsiExact(NamedTuple):
    value: float
    tail_bound: float


def psi_exact(
    spec: LFunctionSpec,
    sigma: float,
    P: int,
    M: int,
    j: int = 1,
) -> PsiExact:
    """Truncation of the diagonal variance sum

        sum_p sum_m |beta_j(p^m)|^2 p^(-2 m sigma)

    over p <= P, m <= M, with a rigorous bound on everything dropped
    (integer integral test over p > P, geometric bound over m > M).
    Requires sigma > 1/2 for convergence of the full sum.
    """
    if sigma <= 0.5:
        raise ValidationError(f"sigma = {sigma} must exceed 1/2")
    if P < 2 or M < 1:
        raise ValidationError("need P >= 2 and M >= 1")
    ps = primes_up_to(P)
    fp = ps.astype(np.float64)
    partials = []
    for m in range(1, M + 1):
        bm = np.abs(spec.beta_array(j, ps, m)) ** 2
        partials.append(float(np.sum(bm * fp ** (-2.0 * m * sigma))))
    value = fsum_blocks(partials)

    # p > P tail: |beta(p^m)| <= (d/m) p^(m eta), summed as integers
    d, eta = spec.d, spec.eta
    tail_p = 0.0
    for m in range(1, M + 1):
        tail_p += (d / m) ** 2 * prime_tail_bound(2.0 * m * (sigma - eta), float(P))
    # m > M tail over all p <= P: geometric in p^(-2(sigma-eta))
    tail_m = 0.0
    for p in ps:
        x = float(p) ** (-2.0 * (sigma - eta))
        t0 = (d / (M + 1)) ** 2 * x ** (M + 1) / (1.0 - x)
        tail_m += t0
        if t0 < 1e-300:
            break
    # and m > M for p > P, dominated by the same geometric at x = P^-2(sigma-eta)
    xP = float(P) ** (-2.0 * (sigma - eta))
    tail_pm = (d / (M + 1)) ** 2 * prime_tail_bound(
        2.0 * (M + 1) * (sigma - eta), float(P)
    ) / (1.0 - xP)
    return PsiExact(value, tail_p + tail_m + tail_pm)


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _chi_mod4(n: int) -> int:
    r = n % 4
    return 0 if r % 2 == 0 else (1 if r == 1 else -1)


def _chi_mod3(n: int) -> int:
    r = n % 3
    return 0 if r == 0 else (1 if r == 1 else -1)


_CHARACTERS = {3: _chi_mod3, 4: _chi_mod4}


def _zeta_component():
    def alpha(j, i, p):
        return 1.0 + 0.0j

    def beta_vec(j, ps, k):
        return np.full(len(ps), 1.0 / k, dtype=np.complex128)

    return ("zeta", alpha, beta_vec)


def _character_component(modulus: int):
    chi = _CHARACTERS.get(modulus)
    if chi is None:
        raise ValidationError(
            f"no built-in character mod {modulus} (supported: {sorted(_CHARACTERS)})"
        )
    table = np.array([chi(r) for r in range(modulus)], dtype=np.float64)

    def alpha(j, i, p):
        return complex(chi(int(p)))

    def beta_vec(j, ps, k):
        # chi completely multiplicative: beta(p^k) = chi(p)^k / k
        vals = table[np.asarray(ps) % modulus]
        return (vals ** k / k).astype(np.complex128)

    return (f"chi{modulus}", alpha, beta_vec)


def _single_spec(label, alpha, beta_vec, d=1, eta=0.0, xi=1.0) -> LFunctionSpec:
    return LFunctionSpec(
        J=1, d=d, eta=eta, xi=(xi,), labels=(label,), alpha=alpha, beta_vec=beta_vec
    )


def builtin_spec(name: str) -> LFunctionSpec:
    """One of: "zeta", "chi3", "chi4"."""
    name = name.strip().lower()
    if name == "zeta":
        return _single_spec(*_zeta_component())
    if name.startswith("chi"):
        try:
            modulus = int(name[3:])
        except ValueError:
            raise ValidationError(f"unknown built-in spec {name!r}") from None
        return _single_spec(*_character_component(modulus))
    raise ValidationError(f"unknown built-in spec {name!r}")


def joint_spec(components: list[LFunctionSpec]) -> LFunctionSpec:
    """Bundle J=1 specs into one J-component family.

    The joint degree is the max over components; missing roots are padded
    with zeros, which leaves every beta_j unchanged.
    """
    if not components:
        raise ValidationError("empty component list")
    if any(c.J != 1 for c in components):
        raise ValidationError("joint_spec expects J=1 components")
    if len(components) == 1:
        return components[0]
    d = max(c.d for c in components)
    eta = max(c.eta for c in components)
    comps = list(components)

    def alpha(j, i, p):
        c = comps[j - 1]
        return c.alpha(1, i, p) if i <= c.d else 0.0 + 0.0j

    def beta_vec(j, ps, k):
        return comps[j - 1].beta_array(1, ps, k)

    return LFunctionSpec(
        J=len(comps),
        d=d,
        eta=eta,
        xi=tuple(c.xi[0] for c in comps),
        labels=tuple(c.labels[0] for c in comps),
        alpha=alpha,
        beta_vec=beta_vec,
    )


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

def parse_spec_file(path: str | Path) -> LFunctionSpec:
    """Read a single-component family from a key = value text file.

    Recognized keys: name, d, eta, xi, kind (zeta | character | roots),
    modulus (for character), and for kind = roots one line per prime

        root <p> = <c1>, <c2>, ...      # d complex values, python syntax

    plus an optional "root default = ..." fallback used for unlisted
    primes.  Lines starting with "#" are comments.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"spec file not found: {path}")
    fields: dict[str, str] = {}
    roots: dict[int, tuple[complex, ...]] = {}
    default_roots: tuple[complex, ...] | None = None
    for ln, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("root"):
            vals = tuple(complex(v.strip().replace(" ", "")) for v in val.split(","))
            sel = key[4:].strip()
            if sel == "default":
                default_roots = vals
            else:
                roots[int(sel)] = vals
        else:
            fields[key.lower()] = val

    name = fields.get("name", path.stem)
    kind = fields.get("kind", "roots").lower()
    d = int(fields.get("d", "1"))
    eta = float(fields.get("eta", "0"))
    xi = float(fields.get("xi", "1"))

    if kind == "zeta":
        base = _zeta_component()
        return _single_spec(name, base[1], base[2], d=1, eta=0.0, xi=xi)
    if kind == "character":
        if "modulus" not in fields:
            raise ValidationError(f"{path}: character spec needs modulus")
        base = _character_component(int(fields["modulus"]))
        return _single_spec(name, base[1], base[2], d=1, eta=0.0, xi=xi)
    if kind != "roots":
        raise ValidationError(f"{path}: unknown kind {kind!r}")
    if not roots and default_roots is None:
        raise ValidationError(f"{path}: roots spec without any root lines")
    for p, vals in roots.items():
        if len(vals) != d:
            raise ValidationError(f"{path}: root {p} has {len(vals)} values, d = {d}")
    if default_roots is not None and len(default_roots) != d:
        raise ValidationError(f"{path}: default root has {len(default_roots)} values, d = {d}")

    fallback = default_roots if default_roots is not None else (0.0 + 0.0j,) * d

    def alpha(j, i, p):
        return roots.get(int(p), fallback)[i - 1]

    return _single_spec(name, alpha, None, d=d, eta=eta, xi=xi)


def resolve_spec(selector: str) -> LFunctionSpec:
    """Comma-separated list of built-in names and/or spec file paths."""
    parts = [s.strip() for s in selector.split(",") if s.strip()]
    if not parts:
        raise ValidationError("empty spec selector")
    comps = []
    for part in parts:
        if part.lower() == "zeta" or part.lower().startswith("chi"):
            comps.append(builtin_spec(part))
        else:
            comps.append(parse_spec_file(part))
    return joint_spec(comps)
