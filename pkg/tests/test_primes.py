import numpy as np
import pytest

from selbergclt.errors import ValidationError
from selbergclt.primes import primes_up_to, smallest_prime_factor


def _reference_sieve(limit):
    """Independent oracle: textbook trial-division-free boolean sieve."""
    if limit < 2:
        return []
    flags = [True] * (limit + 1)
    flags[0] = flags[1] = False
    p = 2
    while p * p <= limit:
        if flags[p]:
            for q in range(p * p, limit + 1, p):
                flags[q] = False
        p += 1
    return [n for n in range(limit + 1) if flags[n]]


def test_small_examples():
    assert primes_up_to(10).tolist() == [2, 3, 5, 7]
    assert primes_up_to(1).tolist() == []
    assert primes_up_to(0).tolist() == []
    assert primes_up_to(2).tolist() == [2]


def test_count_below_1e6_against_independent_sieve():
    ps = primes_up_to(10 ** 6)
    assert len(ps) == 78498
    ref = _reference_sieve(10 ** 5)
    assert ps[: len(ref)].tolist() == ref


def test_segmented_matches_small_path():
    # force the segmented branch and compare against the plain sieve
    hi = (1 << 16) + 7919
    seg = primes_up_to(hi)
    ref = _reference_sieve(hi)
    assert seg.tolist() == ref


def test_determinism_and_order():
    a = primes_up_to(10 ** 5)
    b = primes_up_to(10 ** 5)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) > 0)


def test_cutoff_cap():
    with pytest.raises(ValidationError):
        primes_up_to(10 ** 8 + 1)


def test_smallest_prime_factor():
    spf = smallest_prime_factor(10 ** 4)
    assert spf[0] == 0 and spf[1] == 0
    for n in range(2, 10 ** 4 + 1):
        p = int(spf[n])
        assert n % p == 0
        # p is the smallest factor
        for q in (2, 3, 5, 7):
            if q < p:
                assert n % q != 0
    ps = set(primes_up_to(10 ** 4).tolist())
    for n in range(2, 10 ** 4 + 1):
        assert (spf[n] == n) == (n in ps)
