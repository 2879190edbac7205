import json
import math

import numpy as np
import pytest

from selbergclt.errors import NumericalAssertionError, ValidationError
from selbergclt.expansion import (
    CoeffTable,
    ExpansionConfig,
    b_table,
    coefficient_envelope,
    log_char_series,
    pair_correlation_sum,
    quadratic_split,
)
from selbergclt.lfunctions import builtin_spec, psi_exact, psi_vector, resolve_spec, sigma_T
from selbergclt.localmoments import A_moment
from selbergclt.primes import primes_up_to
from selbergclt.series import TruncatedSeries, degree

THETA, LOGT = 0.4, 1e4
ST = sigma_T(THETA, LOGT)


def test_config_validation():
    with pytest.raises(ValidationError):
        ExpansionConfig(N=1)
    with pytest.raises(ValidationError):
        ExpansionConfig(P_max=100)
    with pytest.raises(ValidationError):
        ExpansionConfig(n3_sigma_mode="other")
    with pytest.raises(ValidationError):
        ExpansionConfig(tail_mode="magic")


def test_log_char_degree2_matches_psi_exact():
    # the (e,e) coefficient is -pi^2 * (truncated diagonal variance sum)
    cfg = ExpansionConfig(N=4, P_max=10 ** 4, tail_mode="none")
    lc = log_char_series(builtin_spec("zeta"), ST, cfg)
    value = psi_exact(builtin_spec("zeta"), ST, 10 ** 4, 90).value
    got = lc.series.get(((1,), (1,)))
    assert got.imag == 0.0
    assert got.real == pytest.approx(-math.pi ** 2 * value, rel=1e-12)


def test_log_char_scalar_prime_oracle_degree3():
    cfg = ExpansionConfig(N=5, P_max=10 ** 3, tail_mode="none")
    spec = resolve_spec("chi3,chi4")
    lc = log_char_series(spec, ST, cfg)
    # independent scalar accumulation for one degree-3 key
    key = ((1, 0), (1, 1))
    acc = 0j
    for p in primes_up_to(10 ** 3):
        acc += A_moment(spec, int(p), ST, key[0], key[1])
    expect = (math.pi ** 3) * (1j ** 3) * acc
    assert abs(lc.series.get(key) - expect) < 1e-12 * max(1.0, abs(expect))


def test_log_char_convergence_floor():
    cfg = ExpansionConfig(N=4, P_max=10 ** 3)
    with pytest.raises(ValidationError):
        log_char_series(builtin_spec("zeta"), 0.5, cfg, min_degree=2)
    # degree >= 3 is fine at sigma = 1/2
    lc = log_char_series(builtin_spec("zeta"), 0.5, cfg, min_degree=3)
    assert all(degree(k) >= 3 for k in lc.series.coeffs)
    with pytest.raises(ValidationError):
        log_char_series(builtin_spec("zeta"), 0.3, cfg, min_degree=3)


def test_log_char_tail_bounds_cover_pmax_gap():
    # degree-n coefficients are Cauchy in P_max; observed gaps sit below
    # the reported tail bound of the smaller cutoff
    spec = builtin_spec("zeta")
    cfg_lo = ExpansionConfig(N=6, P_max=10 ** 4, tail_mode="none")
    cfg_hi = ExpansionConfig(N=6, P_max=10 ** 5, tail_mode="none")
    lo = log_char_series(spec, ST, cfg_lo)
    hi = log_char_series(spec, ST, cfg_hi)
    gaps = {}
    for key in hi.series.coeffs:
        n = degree(key)
        g = abs(hi.series.get(key) - lo.series.get(key))
        gaps[n] = max(gaps.get(n, 0.0), g)
    for n, g in gaps.items():
        if n >= 3:
            assert g <= lo.tail_bounds[n]
    # degree-2 at sigma_T: bound exists (2 sigma_T > 1) and covers the gap
    assert gaps[2] <= lo.tail_bounds[2]


def test_empty_prime_range_gives_zero_series():
    # internal band plan on an empty array: no bands, zero series
    from selbergclt.expansion import _band_plan

    assert _band_plan(builtin_spec("zeta"), np.empty(0, dtype=np.int64), ST, 1e-15, 1e-17) == []


def test_truncation_consistency_bit_exact(table_zeta_small):
    cfg6 = ExpansionConfig(N=6, P_max=10 ** 4, tail_mode="none")
    t6 = b_table(builtin_spec("zeta"), THETA, LOGT, cfg6)
    r6 = table_zeta_small.restrict(6)
    assert set(t6.b) == set(r6.b)
    for key in t6.b:
        assert t6.b[key] == r6.b[key]  # bit-exact


def test_sigma_mode_gap_shrinks_with_logT():
    # max-coefficient distance of degree-n slices between sigma_T and 1/2
    # decreases as logT grows (n = 3, 4)
    spec = builtin_spec("zeta")
    cfg = ExpansionConfig(N=4, P_max=10 ** 4, tail_mode="none")
    half = log_char_series(spec, 0.5, cfg, min_degree=3).series
    gaps = {3: [], 4: []}
    for logT in (1e3, 1e4, 1e5):
        st = sigma_T(THETA, logT)
        at = log_char_series(spec, st, cfg, min_degree=3).series
        for n in (3, 4):
            d = at.extract_degree(n) - half.extract_degree(n)
            gaps[n].append(d.max_abs())
    for n in (3, 4):
        assert gaps[n][0] > gaps[n][1] > gaps[n][2]


def test_pair_sum_hermitian_and_tail_modes():
    spec = resolve_spec("chi3,chi4")
    a = pair_correlation_sum(spec, 1, 2, ST, 10 ** 4)
    b = pair_correlation_sum(spec, 2, 1, ST, 10 ** 4)
    assert abs(np.conj(a.value) - b.value) < 1e-13
    assert a.tail_estimate == 0.0  # off-diagonal: orthogonality
    d = pair_correlation_sum(spec, 1, 1, ST, 10 ** 4)
    assert d.tail_estimate > 0.0
    assert d.tail_bound >= d.tail_estimate * 0.5  # bound is the lossier object
    assert d.value.imag == 0.0 and d.value.real > 0.0


def test_quadratic_split_consistency():
    spec = builtin_spec("zeta")
    cfg = ExpansionConfig(N=4, P_max=10 ** 4, tail_mode="none")
    psi, C = quadratic_split(spec, THETA, LOGT, cfg)
    assert psi[0] == pytest.approx(psi_vector(spec, THETA, LOGT)[0], rel=1e-15)
    pe = psi_exact(spec, ST, 10 ** 4, 90)
    assert C[0, 0].real == pytest.approx(-math.pi ** 2 * (pe.value - psi[0]), rel=1e-12)
    assert C[0, 0].imag == 0.0


def test_quadratic_split_hermitian():
    spec = resolve_spec("chi3,chi4")
    cfg = ExpansionConfig(N=4, P_max=10 ** 4)
    _, C = quadratic_split(spec, THETA, LOGT, cfg)
    assert np.max(np.abs(C - C.conj().T)) < 1e-13


def test_b_table_structure(table_zeta_small):
    t = table_zeta_small
    assert t.get((0,), (0,)) == 1.0
    for key in t.b:
        assert degree(key) != 1
    assert t.meta["imag_residue"] < 1e-12
    assert t.get((1,), (1,)) == 0.0


def test_b_table_degree2_oracle(table_zeta_small):
    pe = psi_exact(builtin_spec("zeta"), ST, 10 ** 4, 90)
    oracle = (pe.value - 0.4 * math.log(1e4)) / 4.0
    assert table_zeta_small.get((2,), (0,)) == pytest.approx(oracle, abs=1e-12)
    assert table_zeta_small.get((0,), (2,)) == pytest.approx(oracle, abs=1e-12)


def test_exp_of_quadratic_has_even_degrees_only():
    # with the degree >= 3 input suppressed, the generating identity forces
    # b = 0 at every odd degree; replicate the quadratic-only path
    spec = builtin_spec("zeta")
    cfg = ExpansionConfig(N=8, P_max=10 ** 4, tail_mode="none")
    _, C = quadratic_split(spec, THETA, LOGT, cfg)
    quad = TruncatedSeries(1, 8, {((1,), (1,)): complex(C[0, 0])})
    scale = (2 * math.pi) ** -2 * (-1.0)  # (2 pi i)^-2
    G = quad.conjugate_to_real().scale(scale).exp()
    for key, c in G.items():
        if degree(key) % 2 == 1:
            assert abs(c) == 0.0


def test_coefftable_json_roundtrip(table_zeta_small, tmp_path):
    path = tmp_path / "table.json"
    table_zeta_small.save(path)
    back = CoeffTable.load(path)
    assert back.b == table_zeta_small.b  # bit-exact floats via repr round trip
    assert np.array_equal(back.psi, table_zeta_small.psi)
    assert np.array_equal(back.C, table_zeta_small.C)
    # byte-identical rewrite
    text1 = path.read_text()
    back.save(path)
    assert path.read_text() == text1
    with pytest.raises(ValidationError):
        CoeffTable.from_json(json.dumps({"format": "other"}))


def test_envelope_fit(table_zeta_small):
    env = coefficient_envelope(table_zeta_small)
    assert not env.degenerate
    assert env.max_violation == 0.0
    for key, v in table_zeta_small.items():
        if v != 0.0:
            assert abs(v) <= env.c0 * env.r ** (-degree(key)) * (1 + 1e-12)
    trivial = CoeffTable(
        1, 4, {((0,), (0,)): 1.0}, np.array([1.0]), np.zeros((1, 1), dtype=complex)
    )
    assert coefficient_envelope(trivial).degenerate


@pytest.mark.slow
def test_envelope_ratio_stable_under_pmax():
    spec = builtin_spec("zeta")
    cfg5 = ExpansionConfig(N=10, P_max=10 ** 5, tail_mode="none")
    cfg6 = ExpansionConfig(N=10, P_max=10 ** 6, tail_mode="none")
    r5 = coefficient_envelope(b_table(spec, THETA, LOGT, cfg5)).r
    r6 = coefficient_envelope(b_table(spec, THETA, LOGT, cfg6)).r
    assert abs(r5 - r6) <= 0.2 * max(r5, r6)


def test_reality_assertion_raises(monkeypatch):
    # corrupt the quadratic data (non-Hermitian C) and the reality check
    # must refuse the table, naming the residue
    import selbergclt.expansion as ex

    def bad_split(spec, theta, logT, config):
        psi = psi_vector(spec, theta, logT)
        return psi, np.array([[1.0 + 1e-6j]])

    monkeypatch.setattr(ex, "quadratic_split", bad_split)
    cfg = ExpansionConfig(N=4, P_max=10 ** 3, tail_mode="none")
    with pytest.raises(NumericalAssertionError, match="reality"):
        ex.b_table(builtin_spec("zeta"), THETA, LOGT, cfg)


def test_offdiagonal_orthogonality_suppression():
    # distinct characters: the cross coefficient stays bounded in P (it
    # converges to a character L-value of size ~0.3) while the diagonal
    # grows like the truncated variance sum, so their ratio shrinks; at
    # this operating point the ratio lands near 1/8
    spec = resolve_spec("chi3,chi4")
    ratios = []
    for P in (10 ** 4, 10 ** 5, 10 ** 6):
        cfg = ExpansionConfig(N=4, P_max=P, tail_mode="none")
        lc = log_char_series(spec, ST, cfg)
        diag = abs(lc.series.get(((1, 0), (1, 0))))
        off = abs(lc.series.get(((1, 0), (0, 1))))
        ratios.append(off / diag)
    assert ratios[-1] < 1.0 / 7.0
    assert ratios[0] > ratios[-1]
    # the cross sum itself matches a direct scalar prime-sum oracle
    cfg = ExpansionConfig(N=4, P_max=10 ** 4, tail_mode="none")
    lc = log_char_series(spec, ST, cfg)
    acc = 0j
    for p in primes_up_to(10 ** 4):
        acc += A_moment(spec, int(p), ST, (1, 0), (0, 1))
    assert abs(lc.series.get(((1, 0), (0, 1))) - (-math.pi ** 2 * acc)) < 1e-12
