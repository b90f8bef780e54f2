"""Deterministic geometry of the limit shape ``f(x, t) = gamma * sqrt(x t)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .points import ConfigurationError

DEFAULT_DELTA = 0.2


@dataclass(frozen=True)
class ShapeFunction:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma!r}")

    def __call__(self, x, t):
        return shape_value(self, x, t)


def shape_value(f: ShapeFunction, x, t):
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(t) < 0):
        raise ConfigurationError("shape function needs x, t >= 0")
    return f.gamma * np.sqrt(np.multiply(x, t))


def curvature_gap(f: ShapeFunction, p, q) -> float:
    """``f(q) - f(q - p) - f(p)``; nonnegative since ``f`` is superadditive."""
    if not (0 <= p[0] <= q[0] and 0 <= p[1] <= q[1]):
        raise ConfigurationError(f"need 0 <= p <= q, got p={tuple(p)} q={tuple(q)}")
    return float(f(q[0], q[1]) - f(q[0] - p[0], q[1] - p[1]) - f(p[0], p[1]))


def norm(p) -> float:
    return math.hypot(p[0], p[1])


def angle_between(u, v) -> float:
    """Unsigned angle in ``[0, pi]`` between two nonzero planar vectors."""
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    return abs(math.atan2(cross, dot))


@dataclass(frozen=True)
class Cone:
    """Cone with vertex ``apex`` whose axis is parallel to ``0 -> axis_through``."""

    apex: tuple
    axis_through: tuple
    half_angle: float

    def __post_init__(self):
        if not (0 < self.half_angle < math.pi / 4):
            raise ConfigurationError(f"half angle must lie in (0, pi/4), got {self.half_angle!r}")
        if not (self.axis_through[0] > 0 and self.axis_through[1] > 0):
            raise ConfigurationError("cone axis needs positive coordinates")


def cone_contains(cone: Cone, q) -> bool:
    d = (q[0] - cone.apex[0], q[1] - cone.apex[1])
    if d == (0, 0) or d == (0.0, 0.0):
        return True
    return angle_between(d, cone.axis_through) <= cone.half_angle


def straightness_cone(p, delta: float = DEFAULT_DELTA, c: float = 1.0) -> Cone:
    """Cone from the origin around the axis through ``p``, half-angle ``c |p|^-delta``."""
    return Cone((0.0, 0.0), tuple(map(float, p)), c * norm(p) ** (-delta))


@dataclass(frozen=True)
class TruncatedCylinder:
    """Strip around the line through 0 and ``anchor``, cut to ``q >= anchor, |q| <= 2|anchor|``."""

    anchor: tuple
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigurationError(f"cylinder width must be > 0, got {self.width!r}")


def cylinder_side_edge_points(cyl: TruncatedCylinder, samples: int) -> list[tuple]:
    """Evenly spaced points on both side edges of ``cyl``.

    Each edge is the line at distance ``width`` from the axis; the feasible
    stretch is found in closed form along the axis coordinate ``s``.
    Returns an empty list when no point satisfies the constraints.
    """
    if samples < 2:
        raise ConfigurationError("need at least 2 samples per edge")
    p = cyl.anchor
    r = norm(p)
    if r == 0:
        return []
    u = (p[0] / r, p[1] / r)
    out = []
    for sign in (1.0, -1.0):
        nx, ny = -u[1] * sign * cyl.width, u[0] * sign * cyl.width
        lo = -math.inf
        for uc, nc, pc in ((u[0], nx, p[0]), (u[1], ny, p[1])):
            if uc > 0:
                lo = max(lo, (pc - nc) / uc)
            elif nc < pc:
                lo = math.inf
        cap = 4 * r * r - cyl.width ** 2
        if cap < 0:
            continue
        hi = math.sqrt(cap)
        if lo > hi:
            continue
        for s in np.linspace(lo, hi, samples):
            q = (s * u[0] + nx, s * u[1] + ny)
            # clamp rounding at the corner constraints
            q = (max(q[0], p[0]), max(q[1], p[1]))
            out.append(q)
    return out


def line_distance(q, through) -> float:
    """Distance from ``q`` to the line through the origin and ``through``."""
    return abs(q[0] * through[1] - q[1] * through[0]) / norm(through)


def segment_distance(z, a, b) -> float:
    ax, at = a
    dx, dt = b[0] - ax, b[1] - at
    L2 = dx * dx + dt * dt
    if L2 == 0:
        return math.hypot(z[0] - ax, z[1] - at)
    s = min(1.0, max(0.0, ((z[0] - ax) * dx + (z[1] - at) * dt) / L2))
    return math.hypot(z[0] - ax - s * dx, z[1] - at - s * dt)


def transversal_deviation(geo) -> float:
    """Largest distance from a chain point to the segment ``start -> end``."""
    if not geo.chain:
        return 0.0
    pts = np.array([(z[0], z[1]) for z in geo.chain])
    a = np.asarray(geo.start, dtype=float)
    d = np.asarray(geo.end, dtype=float) - a
    L2 = float(d @ d)
    rel = pts - a
    if L2 == 0:
        return float(np.max(np.hypot(rel[:, 0], rel[:, 1])))
    s = np.clip(rel @ d / L2, 0.0, 1.0)
    off = rel - s[:, None] * d
    return float(np.max(np.hypot(off[:, 0], off[:, 1])))
