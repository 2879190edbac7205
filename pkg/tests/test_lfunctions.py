import cmath
import math

import numpy as np
import pytest

from selbergclt.errors import ValidationError
from selbergclt.lfunctions import (
    LFunctionSpec,
    builtin_spec,
    joint_spec,
    parse_spec_file,
    psi_exact,
    psi_vector,
    resolve_spec,
    sigma_T,
)
from selbergclt.primes import primes_up_to


def two_root_spec(angle=math.pi / 3):
    a = cmath.exp(1j * angle)

    def alpha(j, i, p):
        return a if i == 1 else a.conjugate()

    return LFunctionSpec(J=1, d=2, eta=0.0, xi=(1.0,), labels=("toy",), alpha=alpha)


def test_beta_zeta_is_one_over_k():
    z = builtin_spec("zeta")
    for p in (2, 3, 97):
        for k in (1, 2, 7):
            assert z.beta(1, p, k) == pytest.approx(1.0 / k)
    ps = primes_up_to(100)
    assert np.allclose(z.beta_array(1, ps, 3), 1.0 / 3.0)


def test_beta_character_mod4():
    chi4 = builtin_spec("chi4")
    assert chi4.beta(1, 3, 1) == pytest.approx(-1.0)
    assert chi4.beta(1, 5, 1) == pytest.approx(1.0)
    assert chi4.beta(1, 2, 1) == 0.0
    # completely multiplicative: beta(p^k) = chi(p)^k / k
    assert chi4.beta(1, 3, 2) == pytest.approx(0.5)
    ps = primes_up_to(50)
    vec = chi4.beta_array(1, ps, 1)
    for p, v in zip(ps, vec):
        assert v == pytest.approx(chi4.beta(1, int(p), 1))


def test_beta_two_root_example():
    toy = two_root_spec()
    # (1/2)(a^2 + conj(a)^2) = cos(2 pi / 3) = -1/2
    assert toy.beta(1, 7, 2) == pytest.approx(-0.5, abs=1e-15)


def test_beta_envelope_bound():
    for spec in (builtin_spec("zeta"), builtin_spec("chi3"), two_root_spec()):
        for p in primes_up_to(10 ** 4)[::97]:
            for k in range(1, 21):
                b = spec.beta(1, int(p), k)
                assert abs(b) <= (spec.d / k) * float(p) ** (k * spec.eta) + 1e-12


def test_alpha_magnitude_bound():
    for spec in (builtin_spec("zeta"), builtin_spec("chi3"), builtin_spec("chi4")):
        for p in primes_up_to(1000):
            for i in range(1, spec.d + 1):
                assert abs(spec.alpha(1, i, int(p))) <= float(p) ** spec.eta + 1e-15


def test_ramanujan_on_average():
    # sum_{p<=x} sum_i |alpha|^2 <= c x^1.01 with one frozen constant
    c = 0.16
    for spec in (builtin_spec("zeta"), builtin_spec("chi3"), builtin_spec("chi4")):
        for x in (10 ** 3, 10 ** 4, 10 ** 5):
            ps = primes_up_to(x)
            total = sum(
                sum(abs(spec.alpha(1, i, int(p))) ** 2 for i in range(1, spec.d + 1))
                for p in ps
            )
            assert total <= c * x ** 1.01


def test_sigma_T_values():
    assert sigma_T(0.4, 1e4) == pytest.approx(0.5251188643150958, rel=1e-15)
    assert sigma_T(0.25, 16.0) == pytest.approx(1.0, rel=1e-15)
    # monotone decrease to 1/2
    vals = [sigma_T(0.3, lt) for lt in (1e3, 1e5, 1e7)]
    assert vals[0] > vals[1] > vals[2] > 0.5
    with pytest.raises(ValidationError):
        sigma_T(0.0, 1e4)
    with pytest.raises(ValidationError):
        sigma_T(0.5, 1e4)
    with pytest.raises(ValidationError):
        sigma_T(0.4, 0.5)


def test_psi_vector_values():
    z = builtin_spec("zeta")
    assert psi_vector(z, 0.4, 1e4)[0] == pytest.approx(0.4 * math.log(1e4), rel=1e-15)
    # xi = 2 doubles it
    double = LFunctionSpec(
        J=1, d=1, eta=0.0, xi=(2.0,), labels=("x",), alpha=lambda j, i, p: 1.0
    )
    assert psi_vector(double, 0.4, 1e4)[0] == pytest.approx(0.8 * math.log(1e4), rel=1e-15)
    # theta -> 0 gives 0 in the limit
    assert psi_vector(z, 1e-9, 1e4)[0] < 1e-7
    with pytest.raises(ValidationError):
        psi_vector(z, 0.4, 2.0)


def test_psi_exact_zeta_value():
    z = builtin_spec("zeta")
    value, tail = psi_exact(z, 1.0, 10 ** 6, 20)
    # prime zeta partial sums: P(2) + P(4)/4 + P(6)/9 + ...
    assert value == pytest.approx(0.4737, abs=5e-4)
    assert 0 < tail < 1e-5
    # monotone decreasing in sigma, termwise
    v2 = psi_exact(z, 1.5, 10 ** 6, 20).value
    v3 = psi_exact(z, 3.0, 10 ** 6, 20).value
    assert value > v2 > v3 > 0
    # sigma -> infinity limit is 0
    assert psi_exact(z, 40.0, 10 ** 4, 5).value == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(ValidationError):
        psi_exact(z, 0.5, 10 ** 4, 5)


def test_psi_exact_against_prime_zeta_oracle():
    # independent oracle: psi(sigma) = sum_m P(2 m sigma) / m^2 via mpmath
    mpmath = pytest.importorskip("mpmath")
    z = builtin_spec("zeta")
    for sigma in (0.5251188643150958, 0.7, 1.0):
        value, tail = psi_exact(z, sigma, 10 ** 6, 64)
        full = sum(
            float(mpmath.primezeta(2 * m * sigma)) / m ** 2 for m in range(1, 65)
        )
        assert abs(value - full) <= tail


def test_joint_spec_combines_components():
    pair = joint_spec([builtin_spec("chi3"), builtin_spec("chi4")])
    assert pair.J == 2
    assert pair.labels == ("chi3", "chi4")
    assert pair.beta(1, 7, 1) == builtin_spec("chi3").beta(1, 7, 1)
    assert pair.beta(2, 7, 1) == builtin_spec("chi4").beta(1, 7, 1)
    ps = primes_up_to(100)
    assert np.array_equal(pair.beta_array(2, ps, 1), builtin_spec("chi4").beta_array(1, ps, 1))


def test_resolve_spec_selector():
    assert resolve_spec("zeta").label == "zeta"
    assert resolve_spec("chi3,chi4").J == 2
    with pytest.raises(ValidationError):
        resolve_spec("")
    with pytest.raises(ValidationError):
        resolve_spec("chi5")  # only 3 and 4 are built in
    with pytest.raises(ValidationError):
        resolve_spec("nonsense-name")


def test_spec_file_roundtrip(tmp_path):
    path = tmp_path / "toy.spec"
    path.write_text(
        "\n".join(
            [
                "# a two-root toy family",
                "name = toy2",
                "kind = roots",
                "d = 2",
                "eta = 0.0",
                "xi = 1.5",
                "root 2 = 0.5+0.1j, 0.5-0.1j",
                "root default = 1.0, 0.0",
            ]
        )
    )
    spec = parse_spec_file(path)
    assert spec.labels == ("toy2",)
    assert spec.d == 2 and spec.xi == (1.5,)
    assert spec.alpha(1, 1, 2) == 0.5 + 0.1j
    assert spec.alpha(1, 1, 3) == 1.0
    assert spec.beta(1, 3, 1) == pytest.approx(1.0)  # 1.0 + 0.0

    zpath = tmp_path / "z.spec"
    zpath.write_text("kind = zeta\nname = myzeta\n")
    assert parse_spec_file(zpath).beta(1, 11, 3) == pytest.approx(1 / 3)

    cpath = tmp_path / "c.spec"
    cpath.write_text("kind = character\nmodulus = 3\n")
    assert parse_spec_file(cpath).beta(1, 2, 1) == pytest.approx(-1.0)

    bad = tmp_path / "bad.spec"
    bad.write_text("kind = roots\nd = 2\nroot 2 = 1.0\n")
    with pytest.raises(ValidationError):
        parse_spec_file(bad)


def test_spec_validation():
    with pytest.raises(ValidationError):
        LFunctionSpec(J=0, d=1, eta=0.0, xi=(), labels=(), alpha=lambda j, i, p: 1.0)
    with pytest.raises(ValidationError):
        LFunctionSpec(J=1, d=1, eta=0.6, xi=(1.0,), labels=("x",), alpha=lambda j, i, p: 1.0)
    with pytest.raises(ValidationError):
        LFunctionSpec(J=1, d=1, eta=0.0, xi=(-1.0,), labels=("x",), alpha=lambda j, i, p: 1.0)
