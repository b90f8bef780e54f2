"""Finite-radius approximations of semi-infinite geodesics in a fixed direction.

A ray from ``start`` in direction ``alpha`` is approximated by the lowest
geodesics from ``start`` to the targets ``R (cos alpha, sin alpha)`` for an
increasing radius schedule.  Targets do not move with ``start``, so rays
from nearby starts aim at the same far points.  The part shared by the last two geodesics is taken as the
stable prefix; coalescence and Busemann increments are read off it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import norm
from .lpp import Geodesic, PassageField, passage_field
from .points import ConfigurationError, MarkedPoint, PointCloud


@dataclass(frozen=True, eq=False)
class RayApproximation:
    start: tuple
    alpha: float
    radii: tuple
    prefixes: list
    stable_prefix: list
    stable_indices: list
    stabilized: bool
    field: PassageField

    @property
    def cloud(self) -> PointCloud:
        return self.field.cloud


@dataclass(frozen=True)
class BusemannSample:
    alpha: float
    x: tuple
    y: tuple
    coalescence: MarkedPoint
    value: float


def ray_target(alpha: float, radius: float) -> tuple:
    return (radius * math.cos(alpha), radius * math.sin(alpha))


def region_for(starts, alpha: float, radius: float, margin: float = 1.3) -> tuple:
    """Square region reaching ``margin`` times the farthest target coordinate."""
    far = max(ray_target(alpha, radius))
    lo = min(min(s) for s in starts)
    return (min(0.0, lo), margin * far, min(0.0, lo), margin * far)


def _common_prefix(a: list, b: list) -> int:
    k = 0
    for u, v in zip(a, b):
        if u != v:
            break
        k += 1
    return k


def approx_alpha_ray(cloud: PointCloud, start, alpha: float, radii) -> RayApproximation:
    if not (0 < alpha < math.pi / 2):
        raise ConfigurationError(f"alpha must lie in (0, pi/2), got {alpha!r}")
    radii = tuple(float(r) for r in radii)
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ConfigurationError("radii must be positive, strictly increasing, at least two")
    start = tuple(map(float, start))
    targets = [ray_target(alpha, r) for r in radii]
    if not (start[0] <= targets[0][0] and start[1] <= targets[0][1]):
        raise ConfigurationError(f"start {start} is not below the first ray target {targets[0]}")
    for q in targets:
        if not cloud.region.contains(*q):
            raise ConfigurationError(f"ray target {q} lies outside the cloud region {tuple(cloud.region)}")
    field = passage_field(cloud, start, bound=targets[-1])
    prefixes = [field.geodesic(q) for q in targets]
    a, b = prefixes[-2].indices, prefixes[-1].indices
    k = _common_prefix(a, b)
    stable = b[:k]
    window = radii[-1] / 4.0

    def inner(geo: Geodesic) -> int:
        # chain points move monotonically away from start
        return sum(1 for z in geo.chain if norm((z.x - start[0], z.t - start[1])) <= window)

    stabilized = k >= inner(prefixes[-2]) and k >= inner(prefixes[-1])
    return RayApproximation(start, float(alpha), radii, prefixes, [cloud[i] for i in stable],
                            stable, stabilized, field)


def _check_pair(ray_a: RayApproximation, ray_b: RayApproximation):
    if ray_a.cloud is not ray_b.cloud:
        raise ConfigurationError("rays were computed on different clouds")
    if ray_a.alpha != ray_b.alpha or ray_a.radii != ray_b.radii:
        raise ConfigurationError("rays differ in direction or radius schedule")


def coalescence_index(ray_a: RayApproximation, ray_b: RayApproximation) -> int | None:
    """Cloud index of the first point from which both stable prefixes coincide."""
    _check_pair(ray_a, ray_b)
    a, b = ray_a.stable_indices, ray_b.stable_indices
    where_b = {idx: j for j, idx in enumerate(b)}
    for i, idx in enumerate(a):
        j = where_b.get(idx)
        if j is None:
            continue
        m = min(len(a) - i, len(b) - j)
        if a[i:i + m] == b[j:j + m]:
            return idx
    return None


def coalescence_point(ray_a: RayApproximation, ray_b: RayApproximation) -> MarkedPoint | None:
    idx = coalescence_index(ray_a, ray_b)
    return None if idx is None else ray_a.cloud[idx]


def busemann_from_rays(ray_x: RayApproximation, ray_y: RayApproximation) -> BusemannSample | None:
    """``L(y, c) - L(x, c)`` at the coalescence point ``c`` of the two rays."""
    c = coalescence_index(ray_x, ray_y)
    if c is None:
        return None
    # c sits on both rays, so each field already holds L(start, c)
    value = float(ray_y.field.value[c]) - float(ray_x.field.value[c])
    return BusemannSample(ray_x.alpha, ray_x.start, ray_y.start, ray_x.cloud[c], value)


def busemann(cloud: PointCloud, alpha: float, x, y, radii) -> BusemannSample | None:
    ray_x = approx_alpha_ray(cloud, x, alpha, radii)
    ray_y = ray_x if tuple(map(float, x)) == tuple(map(float, y)) else approx_alpha_ray(cloud, y, alpha, radii)
    return busemann_from_rays(ray_x, ray_y)
