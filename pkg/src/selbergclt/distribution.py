"""Density, rectangle probabilities and the truncated characteristic function.

Coordinates: a rectangle is specified in normalized units; component j of
the value vector lives in the window

    [a_j sqrt(pi psi_j), b_j sqrt(pi psi_j)] x [c_j sqrt(pi psi_j), d_j sqrt(pi psi_j)]

for (real part, imaginary part) = (log|L_j|, arg L_j).  The density
``H(u, v)`` is evaluated in the *unnormalized* coordinates (u, v); the
closed-form ``probability`` uses the normalized endpoints directly.

With S_k(a, b) the weighted Hermite segment integral, the two displayed
forms are

    H(u, v)   = sum b_{k,l} prod_j pi^-1 psi_j^{-(k_j+l_j+2)/2}
                e^{-(u_j^2+v_j^2)/psi_j} H_{k_j}(u_j/sqrt(psi_j)) H_{l_j}(v_j/sqrt(psi_j))
    Phi(rect) = sum b_{k,l} prod_j psi_j^{-(k_j+l_j)/2} S_{k_j}(a_j,b_j) S_{l_j}(c_j,d_j)

and they are linked exactly by integrating H over the scaled box.  Over
the full space every S_k with k >= 1 vanishes, so Phi = b(0,0) = 1 in
closed form, which is the normalization of the whole expansion.

The truncated density can dip slightly negative deep in the tails; that
is a truncation artifact of a finite-degree Hermite series and values
are reported unclamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .expansion import CoeffTable
from .hermite import gauss_hermite_segment, hermite_values
from .series import degree as key_degree

__all__ = [
    "Rectangle",
    "density",
    "density_grid",
    "probability",
    "probability_tail_hint",
    "gaussian_leading",
    "char_function",
    "marginal_cdf",
    "write_density_grid_csv",
    "write_probability_csv",
]


@dataclass(frozen=True)
class Rectangle:
    """Per-component windows in normalized units; endpoints may be +-inf.

    a/b bound the real part (log modulus), c/d the imaginary part
    (argument).  Degenerate windows (a == b) are allowed and carry zero
    mass.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    d: tuple[float, ...]

    def __post_init__(self):
        J = len(self.a)
        if not (len(self.b) == len(self.c) == len(self.d) == J) or J == 0:
            raise ValidationError("rectangle tuples must share a positive length")
        for j in range(J):
            if not (self.a[j] <= self.b[j] and self.c[j] <= self.d[j]):
                raise ValidationError(f"rectangle windows out of order at component {j + 1}")

    @property
    def J(self) -> int:
        return len(self.a)

    @classmethod
    def central(cls, J: int, half_u: float, half_v: float | None = None) -> "Rectangle":
        hv = half_u if half_v is None else half_v
        return cls(
            a=(-half_u,) * J, b=(half_u,) * J, c=(-hv,) * J, d=(hv,) * J
        )

    @classmethod
    def full(cls, J: int) -> "Rectangle":
        inf = math.inf
        return cls(a=(-inf,) * J, b=(inf,) * J, c=(-inf,) * J, d=(inf,) * J)

    def label(self) -> str:
        def fmt(t):
            return ";".join("%g" % v for v in t)

        return f"[{fmt(self.a)}|{fmt(self.b)}]x[{fmt(self.c)}|{fmt(self.d)}]"


def _check_table_rect(table: CoeffTable, rect: Rectangle):
    if rect.J != table.J:
        raise ValidationError(f"rectangle J = {rect.J} != table J = {table.J}")


def density(table: CoeffTable, u, v) -> float:
    """Truncated expansion density at unnormalized (u, v), u, v in R^J."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if len(u) != table.J or len(v) != table.J:
        raise ValidationError("u, v must have length J")
    psi = table.psi
    deg = max((key_degree(k) for k in table.b), default=0)
    hu = [hermite_values(deg, u[j] / math.sqrt(psi[j])) for j in range(table.J)]
    hv = [hermite_values(deg, v[j] / math.sqrt(psi[j])) for j in range(table.J)]
    base = 1.0
    for j in range(table.J):
        base *= math.exp(-(u[j] ** 2 + v[j] ** 2) / psi[j]) / (math.pi * psi[j])
    total = 0.0
    for (k, l), b in table.items():
        term = b
        for j in range(table.J):
            kj, lj = k[j], l[j]
            if kj or lj:
                term *= psi[j] ** (-(kj + lj) / 2.0) * hu[j][kj] * hv[j][lj]
        total += term
    return base * total


def density_grid(table: CoeffTable, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Density on a (u, v) grid for J = 1 (vectorized)."""
    if table.J != 1:
        raise ValidationError("density_grid supports J = 1 only")
    us = np.asarray(us, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    psi = float(table.psi[0])
    deg = max((key_degree(k) for k in table.b), default=0)
    hu = _hermite_table(deg, us / math.sqrt(psi))
    hv = _hermite_table(deg, vs / math.sqrt(psi))
    gu = np.exp(-(us ** 2) / psi)
    gv = np.exp(-(vs ** 2) / psi)
    out = np.zeros((len(us), len(vs)))
    for (k, l), b in table.items():
        kj, lj = k[0], l[0]
        coef = b * psi ** (-(kj + lj) / 2.0)
        out += coef * np.outer(hu[kj] * gu, hv[lj] * gv)
    return out / (math.pi * psi)


def _hermite_table(deg: int, xs: np.ndarray) -> list[np.ndarray]:
    vals = [np.ones_like(xs)]
    if deg >= 1:
        vals.append(2.0 * xs)
    for k in range(1, deg):
        vals.append(2.0 * xs * vals[k] - 2.0 * k * vals[k - 1])
    return vals


def probability(table: CoeffTable, rect: Rectangle) -> float:
    """Closed-form rectangle mass of the truncated expansion."""
    _check_table_rect(table, rect)
    psi = table.psi
    deg = max((key_degree(k) for k in table.b), default=0)
    su = [
        [gauss_hermite_segment(k, rect.a[j], rect.b[j]) for k in range(deg + 1)]
        for j in range(table.J)
    ]
    sv = [
        [gauss_hermite_segment(k, rect.c[j], rect.d[j]) for k in range(deg + 1)]
        for j in range(table.J)
    ]
    total = 0.0
    for (k, l), b in table.items():
        term = b
        for j in range(table.J):
            kj, lj = k[j], l[j]
            term *= psi[j] ** (-(kj + lj) / 2.0) * su[j][kj] * sv[j][lj]
        total += term
    return total


def probability_tail_hint(table: CoeffTable, rect: Rectangle) -> float:
    """Heuristic size of the dropped degrees: the top-degree contribution
    magnitude, extrapolated geometrically.  A diagnostic, not a bound."""
    _check_table_rect(table, rect)
    psi = table.psi
    deg = max((key_degree(k) for k in table.b), default=0)
    if deg < 2:
        return 0.0
    su = [
        [abs(gauss_hermite_segment(k, rect.a[j], rect.b[j])) for k in range(deg + 1)]
        for j in range(table.J)
    ]
    sv = [
        [abs(gauss_hermite_segment(k, rect.c[j], rect.d[j])) for k in range(deg + 1)]
        for j in range(table.J)
    ]
    mass = {}
    for (k, l), b in table.items():
        n = key_degree((k, l))
        term = abs(b)
        for j in range(table.J):
            kj, lj = k[j], l[j]
            term *= psi[j] ** (-(kj + lj) / 2.0) * su[j][kj] * sv[j][lj]
        mass[n] = mass.get(n, 0.0) + term
    top = mass.get(deg, 0.0) + mass.get(deg - 1, 0.0)
    prev = mass.get(deg - 2, 0.0) + mass.get(deg - 3, 0.0)
    ratio = min(0.9, top / prev) if prev > 0 else 0.5
    return top * ratio / max(1e-12, 1.0 - ratio)


def gaussian_leading(rect: Rectangle) -> float:
    """Leading Gaussian mass: product of e^{-pi u^2} window integrals."""
    total = 1.0
    for j in range(rect.J):
        total *= gauss_hermite_segment(0, rect.a[j], rect.b[j])
        total *= gauss_hermite_segment(0, rect.c[j], rect.d[j])
    return total


def char_function(table: CoeffTable, x, y) -> complex:
    """Truncated characteristic function e^{Q(z)} * polynomial at z = x + iy.

    Valid only inside ||z|| <= delta2 (from the table's build config);
    outside that radius the truncated representation is unsupported and
    the call refuses.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if len(x) != table.J or len(y) != table.J:
        raise ValidationError("x, y must have length J")
    delta2 = float(table.meta.get("config", {}).get("delta2", 0.05))
    norm = math.sqrt(float(np.sum(x ** 2 + y ** 2)))
    if norm > delta2:
        raise ValidationError(
            f"||z|| = {norm:.4g} outside the supported radius delta2 = {delta2}"
        )
    psi = table.psi
    Q = -math.pi ** 2 * float(np.sum(psi * (x ** 2 + y ** 2)))
    twopi_i = 2j * math.pi
    poly = 0.0 + 0.0j
    for (k, l), b in table.items():
        n = key_degree((k, l))
        term = (twopi_i ** n) * b
        for j in range(table.J):
            if k[j]:
                term *= x[j] ** k[j]
            if l[j]:
                term *= y[j] ** l[j]
        poly += term
    return math.exp(Q) * poly


def marginal_cdf(table: CoeffTable, u: float, component: int = 1, part: str = "re") -> float:
    """CDF of one marginal (log modulus or argument) of the expansion.

    Integrating out every other coordinate kills all their Hermite
    factors except degree 0, so only keys supported on this coordinate
    survive; the running integral uses the closed segment form.
    """
    j = component - 1
    psi = table.psi
    end = u / math.sqrt(math.pi * psi[j])
    total = 0.0
    for (k, l), b in table.items():
        others = [(k[t], l[t]) for t in range(table.J) if t != j]
        if any(kk or ll for kk, ll in others):
            continue
        kj, lj = (k[j], l[j]) if part == "re" else (l[j], k[j])
        if lj != 0:
            continue
        total += b * psi[j] ** (-kj / 2.0) * gauss_hermite_segment(kj, -math.inf, end)
    return total


# ---------------------------------------------------------------------------
# CSV emitters (fixed column layouts, config echoed in header comments)
# ---------------------------------------------------------------------------

def _config_header(meta: dict) -> str:
    import json

    return "# config: " + json.dumps(meta, sort_keys=True, default=str)


def write_density_grid_csv(path, table: CoeffTable, us, vs):
    """Columns: u, v, H  (row-major over the u x v grid)."""
    H = density_grid(table, us, vs)
    lines = [_config_header(table.meta), "u,v,H"]
    for i, uu in enumerate(us):
        for k, vv in enumerate(vs):
            lines.append("%.17g,%.17g,%.17g" % (uu, vv, H[i, k]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_probability_csv(path, table: CoeffTable, rects):
    """Columns: rect, expansion, gaussian_leading, tail_hint."""
    lines = [_config_header(table.meta), "rect,expansion,gaussian_leading,tail_hint"]
    for rect in rects:
        p = probability(table, rect)
        g = gaussian_leading(rect)
        t = probability_tail_hint(table, rect)
        lines.append("%s,%.17g,%.17g,%.17g" % (rect.label(), p, g, t))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
