import json
import math

import numpy as np
import pytest

from racah.analysis import (
    PARAM_RULES,
    BenchRecord,
    ImageGrid,
    MomentMatrix,
    bench,
    bench_json,
    get_rule,
    markov_covariance,
    max_size_search,
    moments_2d,
    nmse,
    orthogonality_error,
    psnr,
    reconstruct_2d,
    restriction_error,
    restriction_study,
    run_trial,
    table2,
)
from racah.baselines import generate
from racah.core import PolyMatrix, validate_params
from racah.errors import DimensionMismatch, ZeroSignal
from racah.io import random_image

from conftest import oracle_values


def _oracle_matrix(*prm):
    return PolyMatrix(validate_params(*prm), oracle_values(*prm), "oracle")


def test_orthogonality_error_basics():
    p = validate_params(0, 5, 0, 0)
    assert orthogonality_error(PolyMatrix(p, np.eye(5), "id")) == 0
    assert orthogonality_error(_oracle_matrix(4, 20, 2, 1)) <= 1e-12
    bad = np.eye(5)
    bad[2, 2] = np.nan
    assert orthogonality_error(bad) == math.inf
    assert orthogonality_error(2 * np.eye(3)) == pytest.approx(3.0)


def test_param_rules():
    p = PARAM_RULES["col3"](100)
    assert (p.a, p.alpha, p.beta, p.n_size) == (25, 13, 6, 100)
    p = PARAM_RULES["col4"](53)
    assert (p.a, p.alpha, p.beta) == (27, 27, 13)
    p = PARAM_RULES["col2"](4)
    assert (p.a, p.alpha) == (1, 4 / 10000)
    p = PARAM_RULES["timing"](2)
    assert p.a == 1 and p.alpha == 0.25
    with pytest.raises(ValueError):
        get_rule("nope")
    assert get_rule(PARAM_RULES["col1"]) is PARAM_RULES["col1"]


def test_run_trial_turns_breakdowns_into_inf():
    err, secs, note = run_trial("zhu_n", PARAM_RULES["col1"](2000))
    assert err == math.inf and secs > 0 and note
    err, _, note = run_trial("imst", PARAM_RULES["col1"](32))
    assert err <= 1e-6 and note == ""


def test_max_size_search_zhu_n():
    res = max_size_search("zhu_n", "col1")
    assert abs(res.n_max - 23) <= 2
    assert res.bisection_n >= res.n_max
    tested = {t.n_size: t.passed for t in res.trials}
    assert all(tested[n] for n in tested if n <= res.n_max)
    assert not tested[res.n_max + 1]
    if res.bisection_n != res.n_max:
        assert res.instabilities
    d = res.to_dict()
    assert d["algorithm"] == "zhu_n" and d["rule"] == "col1"


def test_max_size_search_ceiling_and_time_budget():
    res = max_size_search("imst", "col1", ceiling=100)
    assert res.reached_ceiling and res.n_max == 100
    assert [t.n_size for t in res.trials] == [1, 2, 4, 8, 16, 32, 64, 100]
    res = max_size_search("imst", "col1", t_max=0.0, start=64)
    assert res.timed_out and len(res.trials) == 1


def test_moments_of_a_basis_image():
    rx = _oracle_matrix(4, 20, 2, 1)
    ry = _oracle_matrix(0, 12, 0, 0)
    f = np.outer(rx.values[3], ry.values[7])
    phi = moments_2d(ImageGrid(f), rx, ry).coeffs
    assert phi[3, 7] == pytest.approx(1.0, abs=1e-12)
    phi[3, 7] = 0
    assert np.abs(phi).max() <= 1e-12
    assert np.all(moments_2d(np.zeros((16, 12)), rx, ry).coeffs == 0)
    with pytest.raises(DimensionMismatch):
        moments_2d(np.zeros((12, 16)), rx, ry)


def test_round_trip_with_oracle_and_imst():
    f = random_image(32, 32, seed=3)
    ro = _oracle_matrix(2, 34, 1, 0)
    rec = reconstruct_2d(moments_2d(f, ro, ro), ro, ro)
    assert nmse(f, rec) <= 1e-12
    p = validate_params(10, 74, 12, 3)
    rm = generate("imst", p)
    e = orthogonality_error(rm)
    g = random_image(64, 64, seed=1)
    err = nmse(g, reconstruct_2d(moments_2d(g, rm, rm), rm, rm))
    assert err <= 1e-10
    assert err <= max(100 * e * e, 1e-28)


def test_order_capped_reconstruction_is_monotone():
    f = random_image(24, 24, seed=9)
    r = _oracle_matrix(0, 24, 0, 0)
    mom = moments_2d(f, r, r)
    zero = reconstruct_2d(mom, r, r, order_cap=0)
    assert np.all(zero.pixels == 0)
    assert nmse(f, zero) == 1.0
    errs = [nmse(f, reconstruct_2d(mom, r, r, order_cap=k)) for k in range(25)]
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
    with pytest.raises(DimensionMismatch):
        reconstruct_2d(mom, r, r, order_cap=25)
    small = _oracle_matrix(0, 8, 0, 0)
    with pytest.raises(DimensionMismatch):
        reconstruct_2d(mom, small, small)


def test_image_grid_validation():
    with pytest.raises(DimensionMismatch):
        ImageGrid(np.zeros(4))
    with pytest.raises(ValueError):
        ImageGrid(np.array([[np.inf]]))
    assert ImageGrid([[1, 2]]).shape == (1, 2)


def test_nmse_examples():
    i = random_image(8, 8, seed=2) + 1.0
    assert nmse(i, i) == 0
    assert nmse(i, np.zeros_like(i)) == 1
    assert nmse(i, 2 * i) == pytest.approx(1.0)
    with pytest.raises(ZeroSignal):
        nmse(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        nmse(i, i[:4])


def test_psnr_examples():
    i = np.zeros((4, 4))
    i[0, 0] = 255.0
    assert psnr(i, i) == math.inf
    r = i + 255.0  # every pixel off by 255, so MSE = 255^2
    assert psnr(i, r) == pytest.approx(0.0, abs=1e-12)
    r1 = i.copy()
    r1[1, 1] = 10.0
    r2 = i.copy()
    r2[1, 1] = 10.0
    r2[2, 2] = 10.0
    assert psnr(i, r1) - psnr(i, r2) == pytest.approx(10 * math.log10(2), abs=1e-12)
    assert psnr(i, r1, natural_log=True) == pytest.approx(psnr(i, r1) * math.log(10), rel=1e-12)
    with pytest.raises(DimensionMismatch):
        psnr(i, i[:2])


def test_markov_covariance():
    s = markov_covariance(0.5, 4)
    assert s[0, 3] == 0.125 and s[2, 2] == 1.0 and np.array_equal(s, s.T)


def test_restriction_error_shape():
    j = restriction_error([4.0, 3.0, 2.0, 1.0])
    assert j.tolist() == [1.0, 0.6, 0.3, 0.1]


@pytest.mark.parametrize("rho", [0.9, 0.95, 0.98])
def test_restriction_study_properties(rho):
    p = validate_params(4, 20, 2, 1)
    m = generate("imst", p)
    res = restriction_study(p, rho, 16, matrix=m)
    assert res.j[0] == 1.0
    assert np.all(res.diag >= 0)
    assert np.all(np.diff(res.j) <= 0)
    e = orthogonality_error(m)
    assert abs(res.diag.sum() - 16) <= max(16 * e, 1e-12)
    lines = res.to_csv().splitlines()
    assert lines[0] == "l,sigma2,J" and len(lines) == 17
    assert float(lines[1].split(",")[1]) == res.diag[0]


def test_restriction_study_checks():
    p = validate_params(0, 16, 0, 0)
    with pytest.raises(ValueError):
        restriction_study(p, 1.0)
    with pytest.raises(DimensionMismatch):
        restriction_study(p, 0.9, 8)


def test_table2_first_cells():
    t = table2(a_values=(0,))
    assert t[(0.9, 0)][0] == pytest.approx(9.159, abs=1e-3)
    assert t[(0.95, 0)][0] == pytest.approx(11.325, abs=1e-3)
    assert t[(0.98, 0)][0] == pytest.approx(12.975, abs=1e-3)


def test_bench_records():
    recs = bench("imst", [8, 16], repeats=1)
    assert [r.n_size for r in recs] == [8, 16]
    assert all(r.wall_time_s > 0 and r.repeats == 1 for r in recs)
    doc = json.loads(bench_json(recs))
    assert set(doc[0]) >= {"algorithm", "n", "params", "repeats", "mean_seconds", "ortho_error"}
    assert set(doc[0]["params"]) == {"a", "alpha", "beta"}
    with pytest.raises(ValueError):
        bench("imst", [8], repeats=0)


def test_bench_records_failures_and_timeouts():
    recs = bench("zhu_n", [2000], repeats=2)
    assert recs[0].ortho_error == math.inf
    assert json.loads(bench_json(recs))[0]["ortho_error"] is None
    recs = bench("imst", [64], repeats=3, t_max=0.0)
    assert recs[0].timed_out and recs[0].repeats == 1


def test_moment_matrix_container():
    p = validate_params(0, 2, 0, 0)
    mm = MomentMatrix(np.eye(2), p, p)
    assert mm.coeffs.shape == (2, 2)
    assert isinstance(BenchRecord("x", 1, 1.0, 1, 0.0).to_json_dict(), dict)
