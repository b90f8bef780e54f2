import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hammersley_lpp.estimators import (PATH_COUNT_FACTOR, EstimatorReport, estimate_gamma, fluctuation_scan,
                                       ks_pvalue, ks_statistic, log_log_slope, map_invariance_violations,
                                       martin_bound_check, oracle_suite, parse_record, path_count_tail, ray_scan,
                                       run_replicas, scale_invariance_test, shape_residual, straightness_scan)
from hammersley_lpp.geometry import ShapeFunction
from hammersley_lpp.points import ConfigurationError, PointCloud, sample_cloud
from hammersley_lpp.weights import Bernoulli, Dirac, Exponential

ZERO = Bernoulli(0.0)


def test_report_ci_and_record():
    rep = EstimatorReport("x", 10, 1.5, 0.1, {"k": 0.25, "flag": True, "n": 3})
    assert rep.ci95 == pytest.approx((1.5 - 0.196, 1.5 + 0.196))
    rec = parse_record(rep.to_record())
    assert rec["name"] == "x" and rec["replicas"] == 10 and rec["mean"] == 1.5
    assert rec["aux.k"] == 0.25 and rec["aux.flag"] == 1 and rec["aux.n"] == 3


@settings(max_examples=100)
@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(0, 1e6))
def test_record_round_trips_floats(mean, se):
    rec = parse_record(EstimatorReport("r", 5, mean, se).to_record())
    assert rec["mean"] == mean and rec["std_error"] == se


def test_report_needs_two_replicas():
    with pytest.raises(ConfigurationError):
        EstimatorReport("x", 1, 0.0, 0.0)


def test_ks_identical_samples():
    assert ks_statistic([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_ks_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.normal(size=rng.integers(5, 60))
        b = np.round(rng.normal(0.3, 1, size=rng.integers(5, 60)), 1)
        assert ks_statistic(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


def test_ks_pvalue_asymptotic():
    # limiting Kolmogorov law of sqrt(n1 n2 / (n1 + n2)) D
    ref = stats.kstwobign.sf(math.sqrt(200) * 30 / 400)
    assert ks_pvalue(30 / 400, 400, 400) == pytest.approx(ref, rel=1e-9)
    assert ks_pvalue(0.0, 300, 300) == 1.0


def test_log_log_slope():
    rs = np.array([1.0, 2.0, 4.0, 8.0])
    assert log_log_slope(rs, 3 * rs ** 0.4) == pytest.approx(0.4)
    assert math.isnan(log_log_slope(rs, [0.0, 1.0, 2.0, 3.0]))


def test_run_replicas_ordered():
    assert run_replicas(lambda i: i * i, 20, threads=4) == [i * i for i in range(20)]


def test_zero_law_gamma_is_zero():
    rep = estimate_gamma(ZERO, 30, 5, seed=1)
    assert rep.mean == 0.0 and rep.std_error == 0.0


def test_gamma_is_deterministic_and_thread_independent():
    a = estimate_gamma(Dirac(1.0), 40, 6, seed=3, threads=1)
    b = estimate_gamma(Dirac(1.0), 40, 6, seed=3, threads=3)
    assert a.to_record() == b.to_record() and a.rows == b.rows
    c = estimate_gamma(Dirac(1.0), 40, 6, seed=4)
    assert c.mean != a.mean


def test_fluct_zero_law_is_degenerate():
    rep = fluctuation_scan(ZERO, [8, 16, 32, 64], 4, seed=0)
    assert all(rep.aux[f"sd_{r}"] == 0 for r in (8, 16, 32, 64))
    assert math.isnan(rep.aux["exponent"]) and rep.aux["degenerate"]


def test_fluct_needs_four_radii():
    with pytest.raises(ConfigurationError):
        fluctuation_scan(Dirac(1.0), [8, 16, 32], 4, seed=0)


def test_martin_bound_small():
    rep = martin_bound_check(Exponential(1.0), 40, 10, seed=2)
    assert rep.aux["integral"] == pytest.approx(2.0)
    assert "bound" in rep.aux and "passes" in rep.aux


def test_scale_invariance_requires_sample_size():
    with pytest.raises(ConfigurationError):
        scale_invariance_test(Dirac(1.0), 20, 2.0, 50, seed=0)
    with pytest.raises(ConfigurationError):
        scale_invariance_test(Dirac(1.0), 20, 0.0, 300, seed=0)


def test_map_invariance_exact():
    cloud = sample_cloud((0, 50, 0, 50), 1.0, Exponential(1.0), 9)
    corners = [((0, 0), (50, 50)), ((3, 7), (40, 22)), ((10, 10), (10, 40))]
    assert map_invariance_violations(cloud, [0.5, 1.0, 2.0, 3.0, 4.0], corners) == 0


def test_path_count_zero_law():
    rep = path_count_tail(ZERO, 20, 3, seed=0)
    assert rep.aux["max_ratio"] == 0.0 and rep.aux["violations"] == 0
    assert rep.aux["threshold"] == pytest.approx(PATH_COUNT_FACTOR * 20)
    assert PATH_COUNT_FACTOR == pytest.approx(12.26, abs=0.01)


def test_straightness_zero_law():
    rep = straightness_scan(ZERO, [8, 16, 32, 64], 0.2, 3, seed=0)
    assert all(rep.aux[f"dev_{r}"] == 0 for r in (8, 16, 32, 64))
    with pytest.raises(ConfigurationError):
        straightness_scan(ZERO, [8, 16, 32, 64], 0.3, 3, seed=0)


def test_shape_residual_examples():
    empty = PointCloud.from_points([], (0, 10, 0, 10))
    f = ShapeFunction(2.0)
    assert shape_residual(empty, f, (0, 0), (4, 9)).value == -12.0
    cloud = sample_cloud((0, 10, 0, 10), 1.0, Dirac(1.0), 0)
    assert shape_residual(cloud, f, (3, 3), (3, 3)).value == 0.0


def test_ray_scan_small():
    rep = ray_scan(Dirac(1.0), math.pi / 4, [50, 100, 200], [(0, 0), (3, 0), (6, 0)], 4, seed=0)
    assert 0 <= rep.aux["stabilized_frac"] <= 1
    assert rep.aux["antisym_bad"] == 0 and rep.aux["cocycle_bad"] == 0
    assert len(rep.rows) == 4


def test_oracle_suite_small():
    rep = oracle_suite(200, seed=5)
    assert rep.aux["mismatches"] == 0
