"""Shared fixtures.

The expensive artifacts (million-sample Monte Carlo batches, empirical
zeta runs, full-cutoff coefficient tables) are session-scoped and shared
between the acceptance criteria and the module invariants that reuse the
same operating points.
"""

import math

import numpy as np
import pytest

from selbergclt import builtin_spec, resolve_spec, sigma_T
from selbergclt.expansion import ExpansionConfig, b_table
from selbergclt import montecarlo as mc
from selbergclt import zetaemp

THETA = 0.4
LOGT = 1e4
P_COMPARE = 10 ** 5
N_BIG = 10 ** 6
SEED_J1 = 20260809
SEED_J2 = 20260810


@pytest.fixture(scope="session")
def zeta_spec():
    return builtin_spec("zeta")


@pytest.fixture(scope="session")
def chi_pair_spec():
    return resolve_spec("chi3,chi4")


@pytest.fixture(scope="session")
def table_zeta_small(zeta_spec):
    """Quick table for structural tests: P_max = 1e4, bare truncation."""
    cfg = ExpansionConfig(N=8, P_max=10 ** 4, tail_mode="none")
    return b_table(zeta_spec, THETA, LOGT, cfg)


@pytest.fixture(scope="session")
def table_zeta_compare(zeta_spec):
    """Expansion table matched to the Monte Carlo cutoff (P = 1e5)."""
    cfg = ExpansionConfig(N=8, P_max=P_COMPARE, tail_mode="none")
    return b_table(zeta_spec, THETA, LOGT, cfg)


@pytest.fixture(scope="session")
def table_chi_compare(chi_pair_spec):
    cfg = ExpansionConfig(N=8, P_max=P_COMPARE, tail_mode="none")
    return b_table(chi_pair_spec, THETA, LOGT, cfg)


@pytest.fixture(scope="session")
def table_zeta_1e6_none(zeta_spec):
    cfg = ExpansionConfig(N=8, P_max=10 ** 6, tail_mode="none")
    return b_table(zeta_spec, THETA, LOGT, cfg)


@pytest.fixture(scope="session")
def table_zeta_1e6_pnt(zeta_spec):
    cfg = ExpansionConfig(N=8, P_max=10 ** 6, tail_mode="pnt")
    return b_table(zeta_spec, THETA, LOGT, cfg)


def _timed(build):
    import time

    t0 = time.monotonic()
    obj = build()
    obj.build_seconds = time.monotonic() - t0
    return obj


@pytest.fixture(scope="session")
def batch_zeta_big(zeta_spec):
    """1e6 samples of the zeta model at sigma_T(0.4, 1e4), P_MC = 1e5."""
    st = sigma_T(THETA, LOGT)
    return _timed(lambda: mc.sample_logL(zeta_spec, st, P_COMPARE, N_BIG, SEED_J1, tol=1e-9))


@pytest.fixture(scope="session")
def batch_chi_big(chi_pair_spec):
    st = sigma_T(THETA, LOGT)
    return _timed(lambda: mc.sample_logL(chi_pair_spec, st, P_COMPARE, N_BIG, SEED_J2, tol=1e-9))


@pytest.fixture(scope="session")
def zeta_run_1e6():
    return _timed(lambda: zetaemp.empirical_run(1e6, THETA, 10 ** 4, seed=11, tracked=False))


@pytest.fixture(scope="session")
def zeta_run_1e7():
    return _timed(lambda: zetaemp.empirical_run(1e7, THETA, 10 ** 4, seed=12, tracked=False))
