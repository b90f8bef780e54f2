"""Monte Carlo estimators for the shape constant, fluctuations and geodesic geometry.

Every estimator draws one cloud per replica from a seed split off the master
seed, so a report is a deterministic function of its arguments whatever
the thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kolmogorov

from .geometry import ShapeFunction, cone_contains, norm, straightness_cone, transversal_deviation
from .lpp import passage_field
from .points import (ConfigurationError, PointCloud, apply_hyperbolic_map, map_point,
                     replica_seed, sample_cloud)
from .weights import Dirac, WeightLaw

PATH_COUNT_FACTOR = 2.0 * (math.log(2.0) + 2.0 * math.e)
MIN_KS_SAMPLE = 200

HONE_NOTE = ("mean of L(0,(r,r))/r underestimates gamma by at most O(r^-1/2 log^2 r); "
             "superadditivity makes it a lower bound in expectation")


@dataclass
class EstimatorReport:
    name: str
    replicas: int
    mean: float
    std_error: float
    aux: dict = field(default_factory=dict)
    columns: tuple = ()
    rows: list = field(default_factory=list)
    note: str = ""

    def __post_init__(self):
        if self.replicas < 2:
            raise ConfigurationError("a report needs at least 2 replicas")

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.mean - 1.96 * self.std_error, self.mean + 1.96 * self.std_error)

    def to_record(self) -> str:
        """One line of space-separated ``key=value`` pairs."""
        lo, hi = self.ci95
        items = [("name", self.name), ("replicas", self.replicas), ("mean", self.mean),
                 ("std_error", self.std_error), ("ci95_lo", lo), ("ci95_hi", hi)]
        items += [(f"aux.{k}", v) for k, v in self.aux.items()]
        return " ".join(f"{k}={format_value(v)}" for k, v in items)


@dataclass(frozen=True)
class ShapeResidual:
    p: tuple
    q: tuple
    value: float


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v).replace(" ", "_")


def parse_record(line: str) -> dict:
    out = {}
    for item in line.split():
        key, value = item.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out


def default_threads() -> int:
    return max(1, int(os.environ.get("HAMMERSLEY_LPP_THREADS", "1")))


def run_replicas(fn, replicas: int, threads: int | None = None) -> list:
    """``[fn(0), ..., fn(replicas - 1)]``, evaluated on a thread pool.

    The compiled sweeps release the GIL, so threads give real parallelism;
    results always come back in replica order.
    """
    threads = threads or default_threads()
    if threads == 1:
        return [fn(i) for i in range(replicas)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(replicas)))


def mean_and_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def ols_slope(xs, ys) -> float:
    """Least-squares slope of ``ys`` on ``xs``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xc = x - x.mean()
    return float(xc @ (y - y.mean()) / (xc @ xc))


def log_log_slope(rs, ys) -> float:
    ys = np.asarray(ys, dtype=float)
    if np.any(~(ys > 0)):
        return math.nan
    return ols_slope(np.log(rs), np.log(ys))


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (ties handled exactly)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.union1d(a, b)
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_pvalue(stat: float, n1: int, n2: int) -> float:
    """Asymptotic Kolmogorov p-value for the two-sample statistic."""
    return float(kolmogorov(math.sqrt(n1 * n2 / (n1 + n2)) * stat))


def _square_cloud(law, r, seed, arm=0, index=0):
    return sample_cloud((0.0, r, 0.0, r), 1.0, law, replica_seed(seed, index, arm))


def _passage_values(law, r, replicas, seed, threads, arm=0):
    def one(i):
        cloud = _square_cloud(law, r, seed, arm, i)
        return passage_field(cloud).last_passage((r, r))
    return np.array(run_replicas(one, replicas, threads))


def estimate_gamma(law: WeightLaw, r: float, replicas: int, seed: int, threads=None, arm: int = 0) -> EstimatorReport:
    """Mean of ``L(0, (r, r)) / r`` over independent clouds on ``[0, r]^2``."""
    if not r > 0:
        raise ConfigurationError(f"r must be > 0, got {r!r}")
    values = _passage_values(law, r, replicas, seed, threads, arm)
    mean, se = mean_and_se(values / r)
    rows = [(i, replica_seed(seed, i, arm), r, v) for i, v in enumerate(values)]
    return EstimatorReport("gamma", replicas, mean, se, {"r": r}, ("replica", "seed", "r", "L"), rows, HONE_NOTE)


def martin_bound_check(law: WeightLaw, r: float, replicas: int, seed: int, threads=None) -> EstimatorReport:
    """Compare the law's estimate with ``gamma(delta_1) * int sqrt(1 - F)``.

    The classical constant comes from a same-budget Dirac(1) run on an
    independent stream.
    """
    integral = law.sqrt_tail_integral()
    if not math.isfinite(integral):
        raise ConfigurationError("int sqrt(1 - F) diverges; the bound does not apply")
    est = estimate_gamma(law, r, replicas, seed, threads, arm=0)
    base = estimate_gamma(Dirac(1.0), r, replicas, seed, threads, arm=1)
    bound = base.mean * integral
    slack = 3.0 * math.hypot(est.std_error, integral * base.std_error)
    aux = {"r": r, "integral": integral, "gamma1": base.mean, "gamma1_se": base.std_error,
           "bound": bound, "passes": est.mean <= bound + slack}
    rows = [row + ("law",) for row in est.rows] + [row + ("dirac1",) for row in base.rows]
    return EstimatorReport("martin", replicas, est.mean, est.std_error, aux,
                           ("replica", "seed", "r", "L", "arm"), rows, HONE_NOTE)


def _check_radii(radii, minimum=4):
    radii = [float(r) for r in radii]
    if len(radii) < minimum or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ConfigurationError(f"need at least {minimum} positive increasing radii, got {radii}")
    return radii


def fluctuation_scan(law: WeightLaw, radii, replicas: int, seed: int, threads=None) -> EstimatorReport:
    """Standard deviation of ``L(0, (r, r))`` against ``r`` and its log-log slope.

    Each replica samples one cloud on the largest square and reads every
    radius off the same passage field.
    """
    radii = _check_radii(radii)
    ok, _ = law.exponential_moment()
    if not ok:
        raise ConfigurationError("fluctuation scan needs a law with an exponential moment")
    rmax = radii[-1]

    def one(i):
        fld = passage_field(_square_cloud(law, rmax, seed, 0, i))
        return [fld.last_passage((r, r)) for r in radii]

    table = np.array(run_replicas(one, replicas, threads))
    sds = table.std(axis=0, ddof=1)
    exponent = log_log_slope(radii, sds)
    aux = {f"sd_{r:g}": s for r, s in zip(radii, sds)}
    aux["exponent"] = exponent
    aux["degenerate"] = not math.isfinite(exponent)
    if math.isfinite(exponent):
        r0 = radii[0]
        c = sds[0] / (math.sqrt(r0) * math.log(r0))
        aux["diffusive_c"] = c
        aux["diffusive_ok"] = bool(all(s <= c * math.sqrt(r) * math.log(r) for r, s in zip(radii, sds)))
    else:
        aux["diffusive_ok"] = False
    mean, se = mean_and_se(table[:, -1] / rmax)
    rows = [(i, replica_seed(seed, i), r, table[i, k]) for i in range(replicas) for k, r in enumerate(radii)]
    return EstimatorReport("fluct", replicas, mean, se, aux, ("replica", "seed", "r", "L"), rows)


def scale_invariance_test(law: WeightLaw, r: float, lam: float, replicas: int, seed: int,
                          threads=None) -> EstimatorReport:
    """KS test of ``L(0, (r, r))`` against ``L(0, (lam r, r / lam))`` on independent clouds."""
    if not lam > 0:
        raise ConfigurationError(f"lambda must be > 0, got {lam!r}")
    if replicas < MIN_KS_SAMPLE:
        raise ConfigurationError(f"KS test needs at least {MIN_KS_SAMPLE} replicas per arm")
    corner = (lam * r, r / lam)

    def one_a(i):
        return passage_field(_square_cloud(law, r, seed, 0, i)).last_passage((r, r))

    def one_b(i):
        cloud = sample_cloud((0.0, corner[0], 0.0, corner[1]), 1.0, law, replica_seed(seed, i, 1))
        return passage_field(cloud).last_passage(corner)

    a = np.array(run_replicas(one_a, replicas, threads))
    b = np.array(run_replicas(one_b, replicas, threads))
    stat = ks_statistic(a, b)
    mean, se = mean_and_se(a / r)
    mean_b, se_b = mean_and_se(b / r)
    aux = {"r": r, "lambda": lam, "mean_mapped": mean_b, "se_mapped": se_b,
           "ks_stat": stat, "ks_pvalue": ks_pvalue(stat, a.size, b.size)}
    rows = [(i, replica_seed(seed, i, 0), "square", v) for i, v in enumerate(a)]
    rows += [(i, replica_seed(seed, i, 1), "mapped", v) for i, v in enumerate(b)]
    return EstimatorReport("scale", replicas, mean, se, aux, ("replica", "seed", "arm", "L"), rows)


def map_invariance_violations(cloud: PointCloud, lambdas, corners) -> int:
    """Count ``(lambda, (p, q))`` pairs where mapping the cloud changes ``L(p, q)``."""
    bad = 0
    for lam in lambdas:
        mapped = apply_hyperbolic_map(cloud, lam)
        for p, q in corners:
            before = passage_field(cloud, p, q).last_passage(q)
            mq = map_point(q, lam)
            after = passage_field(mapped, map_point(p, lam), mq).last_passage(mq)
            bad += before != after
    return bad


def path_count_tail(law: WeightLaw, r: float, replicas: int, seed: int, threads=None) -> EstimatorReport:
    """Number of points on the lowest geodesic to ``(r, r)``, against ``2 (log 2 + 2e) r``."""
    if r < 10:
        raise ConfigurationError("path count tail needs r >= 10")

    def one(i):
        return len(passage_field(_square_cloud(law, r, seed, 0, i)).geodesic((r, r)))

    counts = np.array(run_replicas(one, replicas, threads), dtype=float)
    ratios = counts / r
    mean, se = mean_and_se(ratios)
    aux = {"r": r, "threshold": PATH_COUNT_FACTOR * r, "max_ratio": float(ratios.max()),
           "violations": int(np.sum(counts > PATH_COUNT_FACTOR * r))}
    rows = [(i, replica_seed(seed, i), r, int(c)) for i, c in enumerate(counts)]
    return EstimatorReport("pathcount", replicas, mean, se, aux, ("replica", "seed", "r", "points"), rows)


def _cone_pair(chain, r):
    """Chain point whose norm is closest to ``r / 2``."""
    norms = [norm((z.x, z.t)) for z in chain]
    k = int(np.argmin(np.abs(np.asarray(norms) - r / 2.0)))
    return chain[k]


def straightness_scan(law: WeightLaw, radii, delta: float, replicas: int, seed: int,
                      threads=None) -> EstimatorReport:
    """Transversal wandering of geodesics to ``(r, r)`` and a cone check at the largest radius."""
    if not 0 < delta < 0.25:
        raise ConfigurationError(f"delta must lie in (0, 1/4), got {delta!r}")
    radii = _check_radii(radii)
    rmax = radii[-1]

    def one(i):
        fld = passage_field(_square_cloud(law, rmax, seed, 0, i))
        devs = []
        cone = math.nan
        for r in radii:
            geo = fld.geodesic((r, r))
            devs.append(transversal_deviation(geo))
            if r == rmax and geo.chain:
                p = _cone_pair(geo.chain, r)
                cone = float(cone_contains(straightness_cone((p.x, p.t), delta), (r, r)))
        return devs, cone

    results = run_replicas(one, replicas, threads)
    devs = np.array([d for d, _ in results])
    cones = np.array([c for _, c in results])
    mean_dev = devs.mean(axis=0)
    aux = {f"dev_{r:g}": d for r, d in zip(radii, mean_dev)}
    aux["wander_exponent"] = log_log_slope(radii, mean_dev)
    aux["delta"] = delta
    valid = cones[~np.isnan(cones)]
    aux["cone_ok"] = float(valid.mean()) if valid.size else math.nan
    mean, se = mean_and_se(devs[:, -1] / rmax)
    rows = [(i, replica_seed(seed, i), r, devs[i, k]) for i in range(replicas) for k, r in enumerate(radii)]
    return EstimatorReport("straightness", replicas, mean, se, aux, ("replica", "seed", "r", "deviation"), rows)


def shape_residual(cloud: PointCloud, f: ShapeFunction, p, q) -> ShapeResidual:
    """``L(p, q) - f(q - p)``."""
    lp = passage_field(cloud, p, q).last_passage(q)
    value = lp - float(f(q[0] - p[0], q[1] - p[1]))
    return ShapeResidual(tuple(p), tuple(q), value)


def residual_scan(law: WeightLaw, r: float, gamma: float, replicas: int, seed: int, threads=None,
                  tolerance: float = 0.15) -> EstimatorReport:
    """Distribution of ``|Delta(0, (r, r))| / r`` with a plug-in ``gamma``."""
    f = ShapeFunction(gamma)

    def one(i):
        return shape_residual(_square_cloud(law, r, seed, 0, i), f, (0.0, 0.0), (r, r)).value

    res = np.array(run_replicas(one, replicas, threads)) / r
    mean, se = mean_and_se(res)
    aux = {"r": r, "gamma": gamma, "within_tolerance": float(np.mean(np.abs(res) <= tolerance)),
           "tolerance": tolerance}
    rows = [(i, replica_seed(seed, i), r, v) for i, v in enumerate(res)]
    return EstimatorReport("residual", replicas, mean, se, aux, ("replica", "seed", "r", "residual_over_r"), rows)


def _divergence_radius(ray) -> float:
    """Distance from the start to the first point where the last two prefixes differ."""
    a, b = ray.prefixes[-2].chain, ray.prefixes[-1].chain
    k = len(ray.stable_indices)
    rest = [z for z in (a[k:k + 1] + b[k:k + 1])]
    if not rest:
        return math.inf
    s = ray.start
    return min(norm((z.x - s[0], z.t - s[1])) for z in rest)


def ray_scan(law: WeightLaw, alpha: float, radii, starts, replicas: int, seed: int,
             threads=None, direction_tol: float = 0.15) -> EstimatorReport:
    """Ray stabilisation, coalescence and Busemann identities over replicas.

    ``starts`` holds two or three points.  Stabilisation and coalescence are
    reported for the first two starts; with three starts the cocycle identity
    ``B(x, z) = B(x, y) + B(y, z)`` is checked on replicas where all pairs
    coalesce.
    """
    from . import rays

    starts = [tuple(map(float, s)) for s in starts]
    if len(starts) not in (2, 3):
        raise ConfigurationError("ray scan takes two or three starts")
    radii = [float(r) for r in radii]
    region = rays.region_for(starts, alpha, radii[-1])

    def one(i):
        cloud = sample_cloud(region, 1.0, law, replica_seed(seed, i))
        rs = [rays.approx_alpha_ray(cloud, s, alpha, radii) for s in starts]
        stable = rs[0].stabilized and rs[1].stabilized
        c = rays.coalescence_point(rs[0], rs[1])
        out = {
            "stabilized": stable,
            "coalesced": c is not None,
            "coalescence_x": c.x if c else math.nan,
            "coalescence_t": c.t if c else math.nan,
            "antisym_bad": 0,
            "cocycle_checked": 0,
            "cocycle_bad": 0,
        }
        for k, r in enumerate(rs):
            out[f"stabilized_{k}"] = r.stabilized
            out[f"stable_len_{k}"] = len(r.stable_indices)
            out[f"divergence_{k}"] = _divergence_radius(r)
            last = r.prefixes[-1].chain
            if r.stabilized and last:
                z = last[-1]
                out[f"direction_err_{k}"] = abs(math.atan2(z.t - r.start[1], z.x - r.start[0]) - alpha)
            else:
                out[f"direction_err_{k}"] = math.nan
        bxy = rays.busemann_from_rays(rs[0], rs[1])
        byx = rays.busemann_from_rays(rs[1], rs[0])
        out["busemann_xy"] = bxy.value if bxy else math.nan
        if bxy is not None:
            out["antisym_bad"] = int(byx is None or byx.value != -bxy.value)
        if len(rs) == 3:
            byz = rays.busemann_from_rays(rs[1], rs[2])
            bxz = rays.busemann_from_rays(rs[0], rs[2])
            if bxy and byz and bxz:
                out["cocycle_checked"] = 1
                out["cocycle_bad"] = int(bxz.value != bxy.value + byz.value)
        return out

    results = run_replicas(one, replicas, threads)
    stab = np.array([r["stabilized"] for r in results], dtype=float)
    coal = np.array([r["coalesced"] for r in results], dtype=float)
    mean, se = mean_and_se(stab)
    dir_errs = np.array([r["direction_err_0"] for r in results])
    dir_errs = dir_errs[~np.isnan(dir_errs)]
    aux = {
        "alpha": alpha,
        "stabilized_frac": mean,
        "coalesced_given_stable": float(coal[stab == 1].mean()) if stab.any() else math.nan,
        "direction_ok": float(np.mean(dir_errs <= direction_tol)) if dir_errs.size else math.nan,
        "antisym_bad": int(sum(r["antisym_bad"] for r in results)),
        "cocycle_checked": int(sum(r["cocycle_checked"] for r in results)),
        "cocycle_bad": int(sum(r["cocycle_bad"] for r in results)),
    }
    for k in range(len(starts)):
        aux[f"ray{k}_stabilized_frac"] = float(np.mean([r[f"stabilized_{k}"] for r in results]))
    columns = ("replica", "seed") + tuple(results[0]) if results else ()
    rows = [(i, replica_seed(seed, i)) + tuple(r.values()) for i, r in enumerate(results)]
    return EstimatorReport("rays", replicas, mean, se, aux, columns, rows)


def _random_small_cloud(rng: np.random.Generator, max_points: int) -> PointCloud:
    from .weights import Bernoulli, Exponential, UniformInterval, Empirical

    laws = [Dirac(1.0), Bernoulli(0.5), Exponential(1.0), UniformInterval(0.0, 2.0), Empirical((0.0, 1.0, 2.0))]
    law = laws[rng.integers(len(laws))]
    n = int(rng.integers(0, max_points + 1))
    if rng.random() < 0.25:
        # integer grid: coordinate ties exercise the tie-break rules
        cells = rng.choice(36, size=min(n, 36), replace=False)
        pts = [(1.0 + c // 6, 1.0 + c % 6) for c in cells]
    else:
        pts = list(zip(rng.uniform(0, 7, n), rng.uniform(0, 7, n)))
    w = law.sample(rng, len(pts))
    return PointCloud.from_points([(x, t, wk) for (x, t), wk in zip(pts, w)], (0.0, 7.0, 0.0, 7.0))


def oracle_suite(clouds: int, seed: int, max_points: int = 10) -> EstimatorReport:
    """Solver against exhaustive enumeration on small random clouds.

    A mismatch is any of: different value, geodesic outside the optimal
    set, or an optimal chain whose staircase dips below the geodesic's.
    """
    from .lpp import brute_force_last_passage, lies_below

    rng = np.random.default_rng(seed)
    rows = []
    mismatches = 0
    for i in range(clouds):
        cloud = _random_small_cloud(rng, max_points)
        p = (0.0, 0.0)
        q = (7.0, 7.0)
        value, optimal = brute_force_last_passage(cloud, p, q)
        geo = passage_field(cloud, p, q).geodesic(q)
        chain = tuple(geo.chain)
        ok_value = geo.value == value
        ok_member = chain in set(optimal)
        ok_lowest = all(lies_below(chain, other, p) for other in optimal)
        bad = not (ok_value and ok_member and ok_lowest)
        mismatches += bad
        rows.append((i, len(cloud), value, geo.value, len(optimal), int(ok_member), int(ok_lowest)))
    aux = {"mismatches": mismatches, "max_points": max_points}
    frac = np.array([r[2] == r[3] for r in rows], dtype=float)
    mean, se = mean_and_se(frac) if clouds >= 2 else (float(frac.mean()), 0.0)
    return EstimatorReport("oracle-suite", max(clouds, 2), mean, se, aux,
                           ("cloud", "points", "oracle_value", "solver_value", "optimal_chains",
                            "in_optimal_set", "lowest"), rows)
