import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from racah.core import (
    PolyMatrix,
    log_norm_d2,
    log_weight_rho,
    log_weighted_row0,
    norm_d2,
    sigma_tau_lambda,
    validate_params,
    weight_ratio_next,
    weight_rho,
)
from racah.errors import (
    ConstraintViolation,
    DomainError,
    NonIntegerSize,
    RacahOverflowError,
)


def mp_rho(a, b, al, be, s):
    g = mp.gamma
    return (g(a + s + 1) * g(s - a + be + 1) * g(b + al - s) * g(b + al + s + 1)
            / (g(a - be + s + 1) * g(s - a + 1) * g(b - s) * g(b + s + 1)))


def mp_d2(a, b, al, be, n):
    g = mp.gamma
    return (g(al + n + 1) * g(be + n + 1) * g(a + b + al + n + 1) * g(b - a + al + be + n + 1)
            / ((al + be + 2 * n + 1) * g(al + be + n + 1) * g(n + 1) * g(b - a - n)
               * g(a + b - n - be)))


@pytest.mark.parametrize("args, exc", [
    ((float("nan"), 5, 0, 0), ConstraintViolation),
    ((-0.5, 5, 0, 0), ConstraintViolation),
    ((3, 3, 0, 0), ConstraintViolation),
    ((0, 2.5, 0, 0), NonIntegerSize),
    ((0, 4, -1, 0), ConstraintViolation),
    ((0, 4, 0, -1), ConstraintViolation),
    ((0, 4, 0, 1), ConstraintViolation),
    ((1, 4, 0, 3), ConstraintViolation),
])
def test_validation_rejects(args, exc):
    with pytest.raises(exc):
        validate_params(*args)


def test_validation_accepts_edges():
    p = validate_params(-0.25, 2.75, -0.5, 0.4)
    assert p.n_size == 3
    assert p.lattice().tolist() == [-0.25, 0.75, 1.75]
    assert validate_params(0, 1, 0, 0).n_size == 1
    assert validate_params(0, 8, 0, 0).is_special
    assert not validate_params(0, 8, 0.5, 0).is_special


def test_size_within_tolerance_rounds():
    p = validate_params(0.1, 16.1 + 1e-12, 0, 0)
    assert p.n_size == 16


@pytest.mark.parametrize("prm", [(4, 20, 2, 1), (0, 12, 0, 0), (1.5, 9.5, -0.5, 2.5)])
def test_weight_and_norm_match_gamma_definitions(prm):
    p = validate_params(*prm)
    with mp.workdps(40):
        for s in p.lattice():
            assert weight_rho(p, s) == pytest.approx(float(mp_rho(*prm, mp.mpf(s))), rel=1e-12)
        for n in range(p.n_size):
            assert norm_d2(p, n) == pytest.approx(float(mp_d2(*prm, n)), rel=1e-11)


def test_norm_at_zero_handles_alpha_beta_minus_one():
    # al + be + 1 = 0 makes the generic form 0 * Gamma(0); the n = 0 branch avoids it.
    p = validate_params(1, 6, -0.5, -0.5)
    assert math.isfinite(log_norm_d2(p, 0))
    g = mp.gamma
    with mp.workdps(30):
        # (al+be+1) Gamma(al+be+1) -> Gamma(al+be+2) = Gamma(1)
        want = g(0.5) * g(0.5) * g(7.5) * g(5) / (g(1) * g(1) * g(5) * g(7.5))
        assert norm_d2(p, 0) == pytest.approx(float(want), rel=1e-12)


def test_weight_accepts_arrays_and_rejects_off_lattice():
    p = validate_params(4, 20, 2, 1)
    logs = log_weight_rho(p, p.lattice())
    assert logs.shape == (16,)
    with pytest.raises(DomainError):
        log_weight_rho(p, 3.0)
    with pytest.raises(DomainError):
        log_weight_rho(p, 20.0)
    with pytest.raises(DomainError):
        log_norm_d2(p, 16)


def test_weight_overflow_is_reported():
    p = validate_params(200, 1200, 300, 100)
    with pytest.raises(RacahOverflowError):
        weight_rho(p, p.lattice())
    assert np.all(np.isfinite(log_weight_rho(p, p.lattice())))


def test_sigma_tau_lambda_values():
    p = validate_params(4, 20, 2, 1)
    sig, tau, lam = sigma_tau_lambda(p, 4.0, 3)
    assert sig == 0
    assert lam == 3 * (3 + 1 + 3)
    assert tau == 4 * 3 * 3 + 20 * 22 * 2 - 3 * 2 - 4 * 5 * 5


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0, 30), size=st.integers(3, 40), al=st.floats(-0.9, 20),
       be_frac=st.floats(0.0, 0.99))
def test_weight_ratio_matches_log_weights(a, size, al, be_frac):
    be = -0.9 + be_frac * (2 * a + 1.9)
    p = validate_params(a, a + size, al, be)
    s = p.lattice()[:-1]
    logs = log_weight_rho(p, p.lattice())
    assert np.allclose(weight_ratio_next(p, s), np.exp(np.diff(logs)), rtol=1e-9)
    if abs(al) > 1e-6:
        assert weight_ratio_next(p, p.b - 1) == 0


def test_row0_logs_are_normalized():
    p = validate_params(10, 74, 5, 3)
    r0 = np.exp(log_weighted_row0(p))
    assert np.sum(r0 ** 2) == pytest.approx(1.0, abs=1e-12)


def test_polymatrix_is_read_only_and_checks_shape():
    p = validate_params(0, 4, 0, 0)
    src = np.eye(4)
    m = PolyMatrix(p, src, "test")
    src[0, 0] = 5
    assert m.values[0, 0] == 1
    with pytest.raises(ValueError):
        m.values[0, 0] = 2
    assert m.max_order == 3 and m.n_size == 4 and m.is_finite()
    with pytest.raises(ValueError):
        PolyMatrix(p, np.eye(3))
    with pytest.raises(ValueError):
        PolyMatrix(p, np.zeros((5, 4)))
