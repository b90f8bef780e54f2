"""Marked Poisson clouds on rectangles and their volume-preserving transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .weights import WeightLaw


class ConfigurationError(ValueError):
    """Parameters outside the domain an operation accepts."""


class MarkedPoint(NamedTuple):
    x: float
    t: float
    w: float


class Region(NamedTuple):
    x0: float
    x1: float
    t0: float
    t1: float

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.t1 - self.t0)

    def contains(self, x, t) -> bool:
        return self.x0 <= x <= self.x1 and self.t0 <= t <= self.t1


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Immutable marked point set, sorted lexicographically by ``(x, t)``.

    The coordinate and weight columns are read-only numpy arrays; use
    ``cloud[i]`` or ``cloud.points()`` for :class:`MarkedPoint` views.
    """

    region: Region
    x: np.ndarray
    t: np.ndarray
    w: np.ndarray
    seed: int | None = None
    _points: list | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        region = Region(*map(float, self.region))
        if not (region.x1 > region.x0 and region.t1 > region.t0):
            raise ConfigurationError(f"region {tuple(region)} has zero area")
        x, t, w = _readonly(self.x), _readonly(self.t), _readonly(self.w)
        if not (x.shape == t.shape == w.shape and x.ndim == 1):
            raise ValueError("x, t, w must be 1-d arrays of equal length")
        if x.size:
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
                raise ValueError("coordinates and weights must be finite")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            if (x.min() < region.x0 or x.max() > region.x1
                    or t.min() < region.t0 or t.max() > region.t1):
                raise ValueError("cloud has points outside its region")
            dx = np.diff(x)
            if not np.all((dx > 0) | ((dx == 0) & (np.diff(t) > 0))):
                raise ValueError("points must be strictly sorted by (x, t)")
        object.__setattr__(self, "region", region)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_points(cls, points, region=None, seed=None) -> PointCloud:
        """Build a cloud from ``(x, t, w)`` triples in any order.

        Without ``region`` the bounding box of the points (padded to positive
        area) is used.
        """
        arr = np.asarray(list(points), dtype=float).reshape(-1, 3)
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = arr[order]
        if region is None:
            if len(arr):
                x0, t0 = min(0.0, arr[:, 0].min()), min(0.0, arr[:, 1].min())
                x1, t1 = arr[:, 0].max(), arr[:, 1].max()
            else:
                x0 = t0 = 0.0
                x1 = t1 = 1.0
            region = (x0, max(x1, x0 + 1.0), t0, max(t1, t0 + 1.0))
        return cls(Region(*region), arr[:, 0], arr[:, 1], arr[:, 2], seed)

    def __len__(self) -> int:
        return self.x.size

    def __getitem__(self, i) -> MarkedPoint:
        return MarkedPoint(float(self.x[i]), float(self.t[i]), float(self.w[i]))

    def points(self) -> list[MarkedPoint]:
        if self._points is None:
            pts = [MarkedPoint(*row) for row in zip(self.x.tolist(), self.t.tolist(), self.w.tolist())]
            object.__setattr__(self, "_points", pts)
        return self._points

    def index_of(self, x: float, t: float) -> int:
        """Index of the point at ``(x, t)``; ``KeyError`` if absent."""
        lo = int(np.searchsorted(self.x, x, side="left"))
        hi = int(np.searchsorted(self.x, x, side="right"))
        j = lo + int(np.searchsorted(self.t[lo:hi], t, side="left"))
        if j < hi and self.t[j] == t:
            return j
        raise KeyError((x, t))

    def with_point(self, point) -> PointCloud:
        return PointCloud.from_points(self.points() + [tuple(point)], self.region, self.seed)

    def with_weights(self, w) -> PointCloud:
        return PointCloud(self.region, self.x, self.t, np.asarray(w, dtype=float), self.seed)

    def same_as(self, other: PointCloud) -> bool:
        return (self.region == other.region
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.t, other.t)
                and np.array_equal(self.w, other.w))


def replica_seed(master_seed: int, index: int, arm: int = 0) -> int:
    """64-bit seed for replica ``index`` of stream ``arm``, split from ``master_seed``.

    Uses numpy's SeedSequence spawn keys, so every replica stream is
    independent and reproducible on its own.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(arm), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_cloud(region, intensity: float, law: WeightLaw, seed: int) -> PointCloud:
    """Poisson cloud of ``intensity`` on ``region`` with i.i.d. ``law`` weights.

    The x coordinates are drawn already sorted as normalised partial sums of
    exponential spacings (the joint law of uniform order statistics), which
    avoids an O(n log n) sort on multi-million point clouds.
    """
    region = Region(*map(float, region))
    if not (region.x1 > region.x0 and region.t1 > region.t0):
        raise ConfigurationError(f"region {tuple(region)} has zero area")
    if not (intensity > 0 and math.isfinite(intensity)):
        raise ConfigurationError(f"intensity must be > 0, got {intensity!r}")
    rng = np.random.default_rng(seed)
    n = int(rng.poisson(intensity * region.area))
    gaps = np.cumsum(rng.standard_exponential(n + 1))
    x = region.x0 + (region.x1 - region.x0) * (gaps[:-1] / gaps[-1])
    t = rng.uniform(region.t0, region.t1, n)
    w = law.sample(rng, n)
    # the spacings construction can round two neighbours onto one float
    dup = np.flatnonzero(np.diff(x) == 0)
    if dup.size:
        order = np.lexsort((t, x))
        x, t = x[order], t[order]
        w = w[order]
        keep = np.ones(n, dtype=bool)
        same = (np.diff(x) == 0) & (np.diff(t) == 0)
        keep[1:][same] = False
        x, t, w = x[keep], t[keep], w[keep]
    return PointCloud(region, x, t, w, seed)


def apply_hyperbolic_map(cloud: PointCloud, lam: float, shift=(0.0, 0.0)) -> PointCloud:
    """Image of ``cloud`` under ``(x, t) -> shift + (lam * x, t / lam)``.

    The map has unit Jacobian, so it sends a unit-intensity Poisson cloud to
    another one, and it preserves the coordinatewise order.
    """
    if not lam > 0:
        raise ConfigurationError(f"lambda must be > 0, got {lam!r}")
    sx, st = map(float, shift)
    r = cloud.region
    region = Region(sx + lam * r.x0, sx + lam * r.x1, st + r.t0 / lam, st + r.t1 / lam)
    return PointCloud(region, sx + lam * cloud.x, st + cloud.t / lam, cloud.w, cloud.seed)


def map_point(p, lam: float, shift=(0.0, 0.0)) -> tuple[float, float]:
    return (shift[0] + lam * p[0], shift[1] + p[1] / lam)


HEADER = "# x t w"


def dump_cloud(cloud: PointCloud, path) -> None:
    """Write ``cloud`` as a text table: region line, then ``x t w`` rows."""
    r = cloud.region
    with open(path, "w") as fh:
        fh.write(f"{HEADER} region={r.x0!r},{r.x1!r},{r.t0!r},{r.t1!r} seed={cloud.seed}\n")
        for x, t, w in zip(cloud.x.tolist(), cloud.t.tolist(), cloud.w.tolist()):
            fh.write(f"{x!r} {t!r} {w!r}\n")


def load_cloud(path) -> PointCloud:
    with open(path) as fh:
        header = fh.readline().split()
        if header[:4] != HEADER.split():
            raise ValueError(f"{path}: not a cloud table")
        meta = dict(item.split("=", 1) for item in header[4:])
        region = tuple(float(v) for v in meta["region"].split(","))
        seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
        rows = np.array([[float(v) for v in line.split()] for line in fh if line.strip()], dtype=float)
    rows = rows.reshape(-1, 3)
    return PointCloud(Region(*region), rows[:, 0], rows[:, 1], rows[:, 2], seed)
