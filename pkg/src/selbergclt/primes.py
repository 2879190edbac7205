"""Prime sieving.

A segmented, odd-only sieve of Eratosthenes backed by numpy.  Output is an
ascending int64 array, immutable by convention (callers must not write to
it); the sieve is deterministic so repeated calls agree elementwise.
"""

import numpy as np

from .errors import ValidationError

SIEVE_LIMIT = 10 ** 8
_SEGMENT = 1 << 21


def _small_sieve(limit: int) -> np.ndarray:
    """Plain boolean sieve, used for the base primes up to sqrt(limit)."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for k in range(2, int(limit ** 0.5) + 1):
        if flags[k]:
            flags[k * k:: k] = False
    return np.nonzero(flags)[0].astype(np.int64)


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit, ascending.  Empty array for limit < 2."""
    limit = int(limit)
    if limit > SIEVE_LIMIT:
        raise ValidationError(f"sieve cutoff {limit} above supported {SIEVE_LIMIT}")
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit < 1 << 16:
        return _small_sieve(limit)

    base = _small_sieve(int(limit ** 0.5) + 1)
    out = [base[base <= limit]]
    lo = int(base[-1]) + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = ((lo + p - 1) // p) * p
            if start < p * p:
                start = p * p
            if start < hi:
                flags[start - lo:: p] = False
        out.append(np.nonzero(flags)[0].astype(np.int64) + lo)
        lo = hi
    return np.concatenate(out)


def smallest_prime_factor(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n (spf[0] = spf[1] = 0).

    Drives multiplicative recurrences n^-s = spf^-s * (n/spf)^-s, so that
    transcendental evaluations are needed at primes only.
    """
    limit = int(limit)
    if limit > SIEVE_LIMIT:
        raise ValidationError(f"spf cutoff {limit} above supported {SIEVE_LIMIT}")
    spf = np.zeros(limit + 1, dtype=np.int32)
    if limit < 2:
        return spf
    for p in range(2, int(limit ** 0.5) + 1):
        if spf[p] == 0:
            spf[p * p:: p][spf[p * p:: p] == 0] = p
            spf[p] = p
    unset = spf == 0
    unset[:2] = False
    spf[unset] = np.nonzero(unset)[0].astype(np.int32)
    return spf
