import math

import numpy as np
import pytest
from scipy import stats as sps

from pottsgrid import InputError, PreconditionError
from pottsgrid.stats import (
    HittingSummary,
    Verdict,
    fit_exponent,
    geometric_first_success,
    ks_statistic_exp1,
    ratio_ci,
    rescale_by_mean,
    summarize,
    test_exit_uniform,
    test_exp1,
    test_wald,
)


def test_summarize_numbers():
    s = summarize([1, 2, 3, 4])
    assert s.n == 4 and s.mean == 2.5
    assert s.variance == pytest.approx(5 / 3)
    half = 1.959963984540054 * math.sqrt(5 / 12)
    assert s.ci95 == pytest.approx((2.5 - half, 2.5 + half))
    with pytest.raises(InputError):
        summarize([])


def test_fit_exponent_exact_on_synthetic():
    betas = [1.5, 2.0, 2.5, 3.0]
    for C in (0.1, 1.0, 37.0):
        slope, se = fit_exponent([(b, C * math.exp(3 * b)) for b in betas])
        assert abs(slope - 3) < 1e-10
        assert se < 1e-8


def test_fit_exponent_affine_equivariance():
    rng = np.random.default_rng(0)
    pts = [(b, math.exp(2.7 * b + rng.normal(0, 0.1))) for b in (1, 2, 3, 4)]
    s1, _ = fit_exponent(pts)
    s2, _ = fit_exponent([(b, 5 * m) for b, m in pts])
    assert s1 == pytest.approx(s2, abs=1e-12)


def test_fit_exponent_refusals():
    censored = HittingSummary(10, 5.0, 1.0, (4.0, 6.0), censored_count=2)
    with pytest.raises(PreconditionError):
        fit_exponent([(1, censored), (2, 10.0), (3, 20.0)])
    with pytest.raises(PreconditionError):
        fit_exponent([(1, 1.0), (2, 2.0)])
    with pytest.raises(PreconditionError):
        fit_exponent([(1, 1.0), (2, 0.0), (3, 2.0)])


def test_ks_statistic_matches_scipy():
    rng = np.random.default_rng(1)
    for n in (1, 5, 50, 500):
        x = rng.exponential(size=n)
        assert ks_statistic_exp1(x) == pytest.approx(sps.kstest(x, "expon").statistic, abs=1e-14)


def test_ks_single_point():
    for x in (0.1, 0.7, 3.0):
        F = 1 - math.exp(-x)
        assert ks_statistic_exp1([x]) == pytest.approx(max(F, 1 - F))


def test_exp1_null_and_alternative():
    rng = np.random.default_rng(2)
    d, p = test_exp1(rescale_by_mean(rng.exponential(4.0, size=10**4)))
    assert 0 <= p <= 1 and p > 0.001
    d, p = test_exp1(np.full(500, 3.0))
    assert p < 1e-10
    with pytest.raises(InputError):
        test_exp1([1.0, -1.0] * 100)
    with pytest.raises(PreconditionError):
        test_exp1([1.0] * 10)


def test_exp1_pvalues_roughly_uniform_under_null():
    rng = np.random.default_rng(3)
    ps = [test_exp1(rng.exponential(size=400))[1] for _ in range(300)]
    assert sps.kstest(ps, "uniform").pvalue > 0.001


def test_exit_uniformity_check():
    assert test_exit_uniform([2, 3, 4] * 10, 1, 4) == (0.0, 1.0)
    chi2, p = test_exit_uniform([2] * 300, 1, 3)
    assert p < 1e-6
    assert test_exit_uniform([2] * 5, 1, 2) == (0.0, 1.0)
    with pytest.raises(InputError):
        test_exit_uniform([1, 2, 3], 1, 3)


def test_ratio_ci():
    a = HittingSummary(100, 20.0, 100.0, (0, 0))
    b = HittingSummary(100, 10.0, 25.0, (0, 0))
    r, (lo, hi) = ratio_ci(a, b)
    rel = math.sqrt(1 / 400 + 0.25 / 100)
    assert r == 2.0
    assert (lo, hi) == pytest.approx((2 - 1.959963984540054 * 2 * rel, 2 + 1.959963984540054 * 2 * rel))


def test_wald_identity_synthetic():
    rng = np.random.default_rng(5)
    to_set = HittingSummary(4000, 100.0, 100.0**2, (0, 0))
    to_d = HittingSummary(4000, 200.0, 200.0**2, (0, 0))
    v = test_wald((to_set, to_d), 3)
    assert isinstance(v, Verdict) and v.passed
    rec = v.record()
    assert set(rec) >= {"test", "statistic", "p_value", "pass", "seed_provenance", "ratio", "ratio_ci95"}
    lo, hi = rec["ratio_ci95"]
    assert lo <= 2 <= hi
    wrong = test_wald((summarize(rng.exponential(100.0, size=4000)), summarize(rng.exponential(400.0, size=4000))), 3)
    assert not wrong.passed
    same = test_wald((to_set, to_set), 2)
    assert same.passed and same.extra["ratio"] == 1.0


def test_geometric_first_success():
    rng = np.random.default_rng(6)
    r = rng.geometric(0.5, size=3000)
    assert geometric_first_success(r, 3).passed
    assert not geometric_first_success(np.ones(3000, dtype=int), 3).passed
