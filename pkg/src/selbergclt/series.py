"""Truncated multivariate formal power series.

A ``TruncatedSeries`` holds complex coefficients indexed by exponent pairs
``(k, l)`` with ``k, l`` in Z_{>=0}^J and total degree K(k) + K(l) <= N,
where K sums the entries of a tuple.  The two tuples are interpreted by
the caller: either as exponents of the conjugate pair (zbar, z), or as
exponents of the real pair (x, y) after a change of variables.

Design notes:

* sparse dict keyed by exponent tuples -- at the working envelope
  (J <= 3, N <= 16) dense arrays would be nearly all zeros;
* iteration is always in lexicographic key order, so sums are
  bit-reproducible;
* values may be numpy arrays instead of scalars (one coefficient per
  prime in a band); all operations are arithmetic-only, so they broadcast
  transparently.  Public semantics are specified for complex scalars.

Only the ring operations and exp/log of constant-free series are
provided; no division, no general composition.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError

Key = tuple[tuple[int, ...], tuple[int, ...]]

# exact complex units i^m, m mod 4
_IPOW = (1 + 0j, 1j, -1 + 0j, -1j)


def degree(key: Key) -> int:
    k, l = key
    return sum(k) + sum(l)


def exponent_keys(J: int, N: int, min_degree: int = 0, require_both: bool = False):
    """All exponent pairs of total degree <= N, lexicographically sorted.

    ``require_both`` keeps only keys with k != 0 and l != 0 (the support
    of the local remainder series).
    """
    def vecs(total_max):
        out = []
        def rec(prefix, remaining, slots):
            if slots == 0:
                out.append(tuple(prefix))
                return
            for v in range(remaining + 1):
                rec(prefix + [v], remaining - v, slots - 1)
        rec([], total_max, J)
        return out

    ks = vecs(N)
    keys = []
    for k in ks:
        dk = sum(k)
        for l in vecs(N - dk):
            d = dk + sum(l)
            if d < min_degree or d > N:
                continue
            if require_both and (dk == 0 or sum(l) == 0):
                continue
            keys.append((k, l))
    keys.sort()
    return keys


class TruncatedSeries:
    """Formal power series over 2J variables, truncated at total degree N."""

    __slots__ = ("J", "N", "coeffs")

    def __init__(self, J: int, N: int, coeffs: dict | None = None):
        if J < 1 or N < 0:
            raise ValidationError("need J >= 1 and N >= 0")
        self.J = J
        self.N = N
        self.coeffs = {}
        if coeffs:
            for key, c in coeffs.items():
                self._check_key(key)
                self.coeffs[key] = c

    def _check_key(self, key: Key):
        k, l = key
        if len(k) != self.J or len(l) != self.J:
            raise ValidationError(f"exponent tuple length != J = {self.J}")
        if any(v < 0 for v in k) or any(v < 0 for v in l):
            raise ValidationError("negative exponent")
        if degree(key) > self.N:
            raise ValidationError(f"exponent degree {degree(key)} above cutoff {self.N}")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, J: int, N: int) -> "TruncatedSeries":
        return cls(J, N)

    @classmethod
    def one(cls, J: int, N: int) -> "TruncatedSeries":
        z = (0,) * J
        return cls(J, N, {(z, z): 1.0 + 0.0j})

    @classmethod
    def monomial(cls, J: int, N: int, key: Key, c=1.0 + 0.0j) -> "TruncatedSeries":
        return cls(J, N, {key: c})

    # -- basics -------------------------------------------------------

    def copy(self) -> "TruncatedSeries":
        return TruncatedSeries(self.J, self.N, dict(self.coeffs))

    def items(self):
        """(key, coefficient) pairs in lexicographic key order."""
        for key in sorted(self.coeffs):
            yield key, self.coeffs[key]

    def get(self, key: Key):
        return self.coeffs.get(key, 0.0 + 0.0j)

    def constant_term(self):
        z = (0,) * self.J
        return self.coeffs.get((z, z), 0.0 + 0.0j)

    def min_degree(self) -> int:
        """Smallest degree carrying a nonzero coefficient (N+1 if none)."""
        best = self.N + 1
        for k, v in self.coeffs.items():
            if isinstance(v, np.ndarray):
                if not np.any(v):
                    continue
            elif v == 0.0:
                continue
            best = min(best, degree(k))
        return best

    def _shape_check(self, other: "TruncatedSeries"):
        if self.J != other.J or self.N != other.N:
            raise ValidationError(
                f"shape mismatch: (J={self.J}, N={self.N}) vs (J={other.J}, N={other.N})"
            )

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._shape_check(other)
        out = dict(self.coeffs)
        for key in sorted(other.coeffs):
            out[key] = out.get(key, 0.0 + 0.0j) + other.coeffs[key]
        return TruncatedSeries(self.J, self.N, out)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + other.scale(-1.0)

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.J, self.N, {k: v * c for k, v in self.coeffs.items()})

    def mul(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Cauchy product, discarding degrees above the cutoff."""
        self._shape_check(other)
        out = {}
        a_items = sorted(self.coeffs)
        b_items = sorted(other.coeffs)
        for ka in a_items:
            da = degree(ka)
            ca = self.coeffs[ka]
            for kb in b_items:
                if da + degree(kb) > self.N:
                    continue
                key = (
                    tuple(x + y for x, y in zip(ka[0], kb[0])),
                    tuple(x + y for x, y in zip(ka[1], kb[1])),
                )
                prod = ca * other.coeffs[kb]
                if key in out:
                    out[key] = out[key] + prod
                else:
                    out[key] = prod
        return TruncatedSeries(self.J, self.N, out)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.mul(other)
        return self.scale(other)

    # -- exp / log ----------------------------------------------------

    def _require_no_constant(self, what: str):
        c = self.constant_term()
        mag = np.max(np.abs(c)) if isinstance(c, np.ndarray) else abs(c)
        if mag != 0.0:
            raise ValidationError(f"{what} requires a zero constant term, got {c!r}")

    def exp(self) -> "TruncatedSeries":
        """exp(S) = sum_r S^r / r! for S with no constant term."""
        self._require_no_constant("exp")
        out = TruncatedSeries.one(self.J, self.N)
        md = self.min_degree()
        if md > self.N:
            return out
        rmax = self.N // md
        power = TruncatedSeries.one(self.J, self.N)
        fact = 1.0
        for r in range(1, rmax + 1):
            power = power.mul(self)
            fact *= r
            out = out + power.scale(1.0 / fact)
        return out

    def log1p(self) -> "TruncatedSeries":
        """log(1 + R) = sum_m (-1)^(m-1)/m R^m for R with no constant term.

        Orders beyond N // min_degree(R) cannot reach the retained degrees
        and are dropped.
        """
        self._require_no_constant("log1p")
        out = TruncatedSeries.zero(self.J, self.N)
        md = self.min_degree()
        if md > self.N:
            return out
        mmax = self.N // md
        power = TruncatedSeries.one(self.J, self.N)
        for m in range(1, mmax + 1):
            power = power.mul(self)
            out = out + power.scale(((-1.0) ** (m - 1)) / m)
        return out

    # -- structure ----------------------------------------------------

    def extract_degree(self, n: int) -> "TruncatedSeries":
        """Only the monomials of total degree exactly n."""
        if not 0 <= n <= self.N:
            raise ValidationError(f"degree {n} outside [0, {self.N}]")
        return TruncatedSeries(
            self.J, self.N, {k: v for k, v in self.coeffs.items() if degree(k) == n}
        )

    def truncate(self, N_new: int) -> "TruncatedSeries":
        """Restrict to total degree <= N_new (N_new <= N)."""
        if N_new > self.N:
            raise ValidationError("cannot extend the cutoff by truncation")
        return TruncatedSeries(
            self.J, N_new, {k: v for k, v in self.coeffs.items() if degree(k) <= N_new}
        )

    def max_abs(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(float(np.max(np.abs(v))) for v in self.coeffs.values())

    def max_abs_imag(self) -> float:
        if not self.coeffs:
            return 0.0
        return max(float(np.max(np.abs(np.imag(v)))) for v in self.coeffs.values())

    def evaluate(self, first, second):
        """Evaluate at concrete values: sum c * first^k * second^l.

        ``first``/``second`` are length-J sequences; which variables they
        denote (zbar/z or x/y) depends on the representation the caller
        maintains for this series.
        """
        if len(first) != self.J or len(second) != self.J:
            raise ValidationError("evaluation point length != J")
        total = 0.0 + 0.0j
        for (k, l), c in self.items():
            term = c
            for j in range(self.J):
                if k[j]:
                    term = term * first[j] ** k[j]
                if l[j]:
                    term = term * second[j] ** l[j]
            total += term
        return total

    # -- conjugate-pair -> real-pair change of variables ---------------

    def conjugate_to_real(self) -> "TruncatedSeries":
        """Rewrite a (zbar, z)-indexed series over (x, y), z = x + iy.

        zbar^k z^l expands per component through binomials of
        (x - iy)^k (x + iy)^l; powers of i are taken from an exact table
        so conjugate-symmetric inputs cancel their imaginary parts to
        rounding only.
        """
        out = {}
        for (k, l), c in self.items():
            parts = [None] * self.J
            for j in range(self.J):
                comp = {}
                kj, lj = k[j], l[j]
                for a in range(kj + 1):
                    ca = math.comb(kj, a) * _IPOW[(3 * (kj - a)) % 4]  # (-i)^(kj-a)
                    for b in range(lj + 1):
                        w = ca * math.comb(lj, b) * _IPOW[(lj - b) % 4]  # i^(lj-b)
                        key = (a + b, kj + lj - a - b)
                        comp[key] = comp.get(key, 0.0 + 0.0j) + w
                parts[j] = sorted(comp.items())
            stack = [((), (), c)]
            for j in range(self.J):
                nxt = []
                for xs, ys, w in stack:
                    for (xe, ye), f in parts[j]:
                        nxt.append((xs + (xe,), ys + (ye,), w * f))
                stack = nxt
            for xs, ys, w in stack:
                key = (xs, ys)
                if key in out:
                    out[key] = out[key] + w
                else:
                    out[key] = w
        return TruncatedSeries(self.J, self.N, out)

    # -- debugging ----------------------------------------------------

    def dump_lines(self) -> list[str]:
        """One line per monomial: "k-tuple | l-tuple | re | im"."""
        lines = []
        for (k, l), c in self.items():
            cc = complex(c)
            lines.append(
                "%s | %s | %.17g | %.17g"
                % (",".join(map(str, k)), ",".join(map(str, l)), cc.real, cc.imag)
            )
        return lines

    def __repr__(self):
        return f"TruncatedSeries(J={self.J}, N={self.N}, terms={len(self.coeffs)})"
