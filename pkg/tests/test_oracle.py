import mpmath as mp
import numpy as np
import pytest

from racah.core import validate_params
from racah.errors import DomainError, PoleError, SizeLimit
from racah.io import load_fixture
from racah.oracle import (
    exact_matrix,
    hyp4f3_terminating,
    log_gamma,
    pochhammer,
    weighted_drp_exact,
)

from conftest import oracle_values, ortho_error


def test_pochhammer_and_log_gamma():
    assert pochhammer(3, 0) == 1
    assert pochhammer(3, 4) == 3 * 4 * 5 * 6
    assert pochhammer(-2, 3) == 0
    assert float(log_gamma(10)) == pytest.approx(float(mp.log(362880)), rel=1e-15)
    with pytest.raises(DomainError):
        log_gamma(0)
    with pytest.raises(DomainError):
        pochhammer(1, -1)


@pytest.mark.parametrize("num, den", [
    ([-3, 2.5, 1.25, 4], [1.5, 7, -5.5]),
    ([-5, -1.5, 3, 2], [2, 9.5, -8]),
    ([-2, 0.5, 0.5, 0.5], [1, 1, 1]),
])
def test_hyp4f3_matches_mpmath(num, den):
    with mp.workdps(40):
        want = mp.hyper(num, den, 1)
    got = hyp4f3_terminating(num, den, 1, -num[0], digits=40)
    assert float(abs(got - want)) < 1e-30


def test_hyp4f3_stops_at_zero_numerator_and_raises_on_pole():
    # A zero numerator factor at k = 1 truncates before the pole in the denominator.
    assert hyp4f3_terminating([-4, -1, 1, 1], [1, 1, -2], 1, 4) == 1 + (-4) * (-1) / (-2)
    with pytest.raises(PoleError):
        hyp4f3_terminating([-4, 1, 1, 1], [1, 1, -2], 1, 4)
    with pytest.raises(ValueError):
        hyp4f3_terminating([1, 2], [3], 1, 1)


@pytest.mark.parametrize("prm", [(0, 2, 0, 0), (0, 8, 0, 0), (4, 20, 2, 1),
                                 (1.5, 13.5, -0.5, 3), (0.25, 24.25, 7.5, -0.75)])
def test_oracle_rows_are_orthonormal(prm):
    assert ortho_error(oracle_values(*prm)) <= 1e-12


def test_oracle_n8_special_example():
    assert ortho_error(oracle_values(0, 8, 0, 0)) <= 1e-12


def test_oracle_first_row_has_closed_form():
    p = validate_params(0, 10, 0, 0)
    s = np.arange(10)
    assert np.allclose(oracle_values(0, 10, 0, 0)[0], np.sqrt(2 * s + 1) / 10, atol=1e-15)
    # and the degree-1 row of the a = alpha = beta = 0 case
    want = -(100 - 2 * s * s - 2 * s - 1) * np.sqrt(3) / 99 * np.sqrt(2 * s + 1) / 10
    assert np.allclose(exact_matrix(p).values[1], want, atol=1e-15)


def test_single_value_and_domain_checks():
    p = validate_params(4, 20, 2, 1)
    v = weighted_drp_exact(p, 3, 9)
    assert float(v) == pytest.approx(oracle_values(4, 20, 2, 1)[3, 5], abs=1e-16)
    with pytest.raises(DomainError):
        weighted_drp_exact(p, 16, 9)
    with pytest.raises(DomainError):
        weighted_drp_exact(p, 1, 9.5)
    with pytest.raises(DomainError):
        weighted_drp_exact(p, 1, 20)


def test_precision_escalation_is_stable():
    p = validate_params(4, 20, 2, 1)
    lo = weighted_drp_exact(p, 15, 19, digits=30)
    hi = weighted_drp_exact(p, 15, 19, digits=80)
    assert abs(float(lo - hi)) <= 1e-25 * abs(float(hi))


def test_size_limit():
    with pytest.raises(SizeLimit):
        exact_matrix(validate_params(0, 257, 0, 0))


def test_fixture_is_current():
    fx = load_fixture("oracle_a4_b20_al2_be1")
    assert fx.algorithm == "oracle"
    assert np.array_equal(fx.values, oracle_values(4, 20, 2, 1))
