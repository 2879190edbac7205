import math

import numpy as np
import pytest

from selbergclt.errors import ValidationError
from selbergclt.lfunctions import builtin_spec, resolve_spec
from selbergclt.localmoments import (
    A_moment,
    R_series,
    g_poly,
    local_power_cutoff,
    mc_moment_oracle,
)
from selbergclt.series import degree


def li2(x, terms=400):
    return sum(x ** m / m ** 2 for m in range(1, terms))


def test_g_poly_zeta_p2_sigma1():
    gp = g_poly(builtin_spec("zeta"), 1, 2, 1.0, tol=1e-16)
    assert gp.M == 48
    for m in range(1, gp.M + 1):
        assert gp.coeffs[m - 1] == pytest.approx(1.0 / (m * 2.0 ** m), rel=1e-15)
    assert gp.tail_bound < 1e-16


def test_g_poly_c1_and_large_p():
    spec = builtin_spec("chi3")
    gp = g_poly(spec, 1, 7, 0.8)
    assert gp.coeffs[0] == pytest.approx(spec.beta(1, 7, 1) * 7.0 ** -0.8)
    # p -> infinity: M -> 1 and c_1 -> 0
    big = g_poly(builtin_spec("zeta"), 1, 99999989, 1.0, tol=1e-12)
    assert big.M == 1
    assert abs(big.coeffs[0]) < 1e-7


def test_local_power_cutoff_edge():
    with pytest.raises(ValidationError):
        local_power_cutoff(1, 0.0, 2, 0.0, 1e-12)
    with pytest.raises(ValidationError):
        local_power_cutoff(1, 0.25, 2, 0.25, 1e-12)


def test_A_trivial_values():
    spec = resolve_spec("chi3,chi4")
    assert A_moment(spec, 5, 0.7, (0, 0), (0, 0)) == 1.0
    assert A_moment(spec, 5, 0.7, (2, 1), (0, 0)) == 0.0
    assert A_moment(spec, 5, 0.7, (0, 0), (1, 1)) == 0.0


def test_A_dilogarithm_example():
    a = A_moment(builtin_spec("zeta"), 2, 1.0, (1,), (1,))
    assert a.real == pytest.approx(li2(0.25), rel=1e-13)
    assert a.imag == 0.0


def test_A_conjugate_symmetry():
    spec = resolve_spec("chi3,chi4")
    rs = np.random.RandomState(0)
    keys = [((1, 0), (0, 1)), ((2, 0), (1, 1)), ((1, 1), (2, 0)), ((1, 2), (1, 0))]
    for p in (2, 3, 5, 7):
        for sigma in (0.55, 0.8):
            for k, l in keys:
                a = A_moment(spec, p, sigma, k, l)
                b = A_moment(spec, p, sigma, l, k)
                assert abs(np.conj(a) - b) < 1e-14


def test_A_magnitude_bound():
    # |A(k,l)| <= (sum_m max_j |beta(p^m)| p^{-m sigma})^{K(k+l)}
    spec = resolve_spec("chi3,chi4")
    for p in (2, 3, 5):
        for sigma in (0.55, 1.0):
            s = 0.0
            M = local_power_cutoff(spec.d, spec.eta, p, sigma, 1e-15)
            for m in range(1, M + 1):
                s += max(abs(spec.beta(j, p, m)) for j in (1, 2)) * p ** (-m * sigma)
            for k, l in [((1, 0), (1, 0)), ((1, 1), (1, 1)), ((2, 0), (0, 2))]:
                n = sum(k) + sum(l)
                assert abs(A_moment(spec, p, sigma, k, l)) <= s ** n + 1e-12


def test_R_series_structure():
    spec = builtin_spec("zeta")
    st = 0.5251188643150958
    R = R_series(spec, 2, st, N=8)
    assert R.min_degree() == 2
    for key in R.coeffs:
        assert sum(key[0]) > 0 and sum(key[1]) > 0
    # coefficient at k = l = e_j is -pi^2 A(e_j, e_j)
    a11 = A_moment(spec, 2, st, (1,), (1,))
    assert R.get(((1,), (1,))) == pytest.approx(-math.pi ** 2 * a11, rel=1e-14)


def test_R_series_small_on_disk():
    # |R_p(z)| <= 1/2 for ||z|| <= 0.05 -- quick version on a few primes
    spec = builtin_spec("zeta")
    st = 0.5251188643150958
    rs = np.random.RandomState(5)
    for p in (2, 3, 997):
        R = R_series(spec, p, st, N=8)
        for _ in range(50):
            w = rs.standard_normal(2)
            w *= 0.05 * rs.uniform() / np.linalg.norm(w)
            z = complex(w[0], w[1])
            assert abs(R.evaluate([z.conjugate()], [z])) <= 0.5


def test_mc_oracle_trivial_and_exact():
    spec = builtin_spec("zeta")
    est, se = mc_moment_oracle(spec, 2, 1.0, (0,), (0,), 2000, seed=1)
    assert est == 1.0 and se == 0.0
    est, se = mc_moment_oracle(spec, 2, 1.0, (1,), (0,), 100_000, seed=2)
    assert abs(est) <= 4 * se
    est, se = mc_moment_oracle(spec, 2, 1.0, (1,), (1,), 200_000, seed=3)
    assert abs(est - li2(0.25)) <= 4 * se


def test_mc_oracle_determinism():
    # p = 7 is coprime to both moduli, so neither component degenerates
    spec = resolve_spec("chi3,chi4")
    a = mc_moment_oracle(spec, 7, 0.7, (1, 0), (0, 1), 5000, seed=9)
    b = mc_moment_oracle(spec, 7, 0.7, (1, 0), (0, 1), 5000, seed=9)
    assert a == b
    c = mc_moment_oracle(spec, 7, 0.7, (1, 0), (0, 1), 5000, seed=10)
    assert a != c


def test_moment_matrix_small_sample():
    # module-scale version of the exact-vs-MC sweep (fast; the full 1e6
    # sweep is in the acceptance suite)
    spec = builtin_spec("zeta")
    for p in (2, 5):
        for sigma in (0.55, 1.0):
            for k in range(3):
                for l in range(3):
                    if k + l == 0 or k + l > 3:
                        continue
                    exact = A_moment(spec, p, sigma, (k,), (l,))
                    est, se = mc_moment_oracle(
                        spec, p, sigma, (k,), (l,), 100_000, seed=100 + k + 10 * l
                    )
                    assert abs(exact - est) <= 5 * se + 1e-12


def test_A_moment_input_validation():
    spec = builtin_spec("zeta")
    with pytest.raises(ValidationError):
        A_moment(spec, 2, 1.0, (1, 0), (1,))  # tuple length != J
    with pytest.raises(ValidationError):
        A_moment(spec, 2, 1.0, (-1,), (1,))
    with pytest.raises(ValidationError):
        A_moment(spec, 2, 1.0, (40,), (40,))  # above the configured maximum
