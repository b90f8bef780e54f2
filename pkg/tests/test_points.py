import numpy as np
import pytest
from scipy import stats

from hammersley_lpp.points import (ConfigurationError, PointCloud, apply_hyperbolic_map, dump_cloud,
                                   load_cloud, map_point, replica_seed, sample_cloud)
from hammersley_lpp.weights import Dirac, Exponential


def test_degenerate_region_rejected():
    with pytest.raises(ConfigurationError):
        sample_cloud((0, 0, 0, 1), 1.0, Dirac(1.0), 1)


def test_bad_intensity_rejected():
    with pytest.raises(ConfigurationError):
        sample_cloud((0, 1, 0, 1), 0.0, Dirac(1.0), 1)


def test_mean_count_is_area():
    counts = [len(sample_cloud((0, 100, 0, 100), 1.0, Dirac(1.0), replica_seed(5, i))) for i in range(1000)]
    assert 9900 <= np.mean(counts) <= 10100


def test_intensity_scales_count():
    counts = [len(sample_cloud((0, 10, 0, 10), 0.25, Dirac(1.0), replica_seed(6, i))) for i in range(1000)]
    assert abs(np.mean(counts) - 25.0) < 4 * np.sqrt(25.0 / 1000)


def test_same_seed_same_cloud():
    a = sample_cloud((0, 30, 0, 20), 1.0, Exponential(1.0), 99)
    b = sample_cloud((0, 30, 0, 20), 1.0, Exponential(1.0), 99)
    assert a.same_as(b)
    assert a.x.tobytes() == b.x.tobytes() and a.w.tobytes() == b.w.tobytes()


def test_cloud_invariants():
    c = sample_cloud((-5, 5, 2, 9), 3.0, Exponential(1.0), 3)
    assert np.all((c.x >= -5) & (c.x <= 5) & (c.t >= 2) & (c.t <= 9))
    assert np.all(np.diff(c.x) > 0)
    with pytest.raises(ValueError):
        c.x[0] = 1.0


def test_locations_uniform_given_count():
    c = sample_cloud((0, 40, 0, 40), 1.0, Dirac(1.0), 2718)
    counts, _, _ = np.histogram2d(c.x, c.t, bins=4, range=[[0, 40], [0, 40]])
    assert stats.chisquare(counts.ravel()).pvalue > 0.001


def test_replica_seeds_differ_and_repeat():
    seeds = [replica_seed(1, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [replica_seed(1, i) for i in range(100)]
    assert replica_seed(1, 0, arm=1) != replica_seed(1, 0)


def test_from_points_sorts_and_rejects_duplicates():
    c = PointCloud.from_points([(2, 1, 1), (1, 3, 1), (1, 2, 1)], (0, 4, 0, 4))
    assert list(zip(c.x, c.t)) == [(1, 2), (1, 3), (2, 1)]
    with pytest.raises(ValueError):
        PointCloud.from_points([(1, 1, 1), (1, 1, 2)], (0, 4, 0, 4))
    with pytest.raises(ValueError):
        PointCloud.from_points([(1, 1, -1)], (0, 4, 0, 4))
    with pytest.raises(ValueError):
        PointCloud.from_points([(5, 1, 1)], (0, 4, 0, 4))


def test_identity_map():
    c = sample_cloud((0, 10, 0, 10), 1.0, Exponential(1.0), 4)
    assert apply_hyperbolic_map(c, 1.0, (0.0, 0.0)).same_as(c)


def test_map_single_point():
    c = PointCloud.from_points([(2, 3, 0.7)], (0, 4, 0, 4))
    m = apply_hyperbolic_map(c, 2.0)
    assert m[0] == (4.0, 1.5, 0.7)
    assert tuple(m.region) == (0.0, 8.0, 0.0, 2.0)
    assert map_point((2, 3), 2.0) == (4.0, 1.5)


def test_map_with_shift():
    c = PointCloud.from_points([(2, 3, 0.7)], (0, 4, 0, 4))
    assert apply_hyperbolic_map(c, 2.0, (1.0, -1.0))[0] == (5.0, 0.5, 0.7)


def test_map_rejects_nonpositive_lambda():
    c = PointCloud.from_points([(2, 3, 0.7)], (0, 4, 0, 4))
    with pytest.raises(ConfigurationError):
        apply_hyperbolic_map(c, 0.0)


@pytest.mark.parametrize("lam", [0.3, 0.5, 2.0, 3.0, 7.5])
def test_map_preserves_comparability(lam):
    c = sample_cloud((0, 8, 0, 8), 1.0, Dirac(1.0), int(lam * 10))
    m = apply_hyperbolic_map(c, lam, (1.5, -2.0))
    le = (c.x[:, None] <= c.x[None, :]) & (c.t[:, None] <= c.t[None, :])
    le_m = (m.x[:, None] <= m.x[None, :]) & (m.t[:, None] <= m.t[None, :])
    lt = (c.x[:, None] < c.x[None, :]) & (c.t[:, None] < c.t[None, :])
    lt_m = (m.x[:, None] < m.x[None, :]) & (m.t[:, None] < m.t[None, :])
    assert np.array_equal(le, le_m) and np.array_equal(lt, lt_m)


def test_dump_load_round_trip(tmp_path):
    c = sample_cloud((0, 6, 0, 6), 1.0, Exponential(1.0), 77)
    path = tmp_path / "cloud.txt"
    dump_cloud(c, path)
    back = load_cloud(path)
    assert back.same_as(c) and back.seed == 77
    assert path.read_text().splitlines()[0].startswith("# x t w")


def test_load_empty_cloud(tmp_path):
    c = PointCloud.from_points([], (0, 1, 0, 1))
    dump_cloud(c, tmp_path / "e.txt")
    assert len(load_cloud(tmp_path / "e.txt")) == 0
