"""Exact last-passage values and lowest geodesics on a marked cloud.

A chain from ``p`` to ``q`` uses cloud points ``z`` with ``p < z`` in both
coordinates and ``z <= q``; its weight is the left-to-right sum of the marks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .points import ConfigurationError, MarkedPoint, PointCloud

BRUTE_FORCE_CAP = 20


@dataclass(frozen=True, eq=False)
class PassageField:
    """Last-passage values from ``source`` to every cloud point above it.

    ``value[i]`` is ``L(source, point i)`` (NaN for points outside the field)
    and ``pred[i]`` the previous point on the lowest optimal chain, or -1.
    """

    cloud: PointCloud
    source: tuple
    bound: tuple | None
    value: np.ndarray
    pred: np.ndarray
    members: np.ndarray

    def _in_box(self, q):
        c = self.cloud
        idx = self.members
        return idx[(c.x[idx] <= q[0]) & (c.t[idx] <= q[1])]

    def last_passage(self, q) -> float:
        _check_order(self.source, q)
        self._check_bound(q)
        inside = self._in_box(q)
        if inside.size == 0:
            return 0.0
        return float(max(self.value[inside].max(), 0.0))

    def endpoint(self, q) -> int:
        """Index of the last point of the lowest geodesic to ``q`` (-1 if empty)."""
        _check_order(self.source, q)
        self._check_bound(q)
        inside = self._in_box(q)
        if inside.size == 0:
            return -1
        vals = self.value[inside]
        best = vals.max()
        if best <= 0.0:
            return -1
        cands = inside[vals == best]
        c = self.cloud
        # lowest t, then rightmost
        k = np.lexsort((-c.x[cands], c.t[cands]))[0]
        return int(cands[k])

    def chain_indices(self, end: int) -> list[int]:
        out = []
        while end >= 0:
            out.append(end)
            end = int(self.pred[end])
        out.reverse()
        return out

    def geodesic(self, q) -> Geodesic:
        end = self.endpoint(q)
        idx = self.chain_indices(end)
        value = float(self.value[end]) if end >= 0 else 0.0
        c = self.cloud
        chain = [c[i] for i in idx]
        return Geodesic(tuple(map(float, self.source)), tuple(map(float, q)), chain, value, idx)

    def _check_bound(self, q):
        if self.bound is not None and (q[0] > self.bound[0] or q[1] > self.bound[1]):
            raise ValueError(f"query {q} lies beyond the field bound {self.bound}")


@dataclass(frozen=True)
class Geodesic:
    start: tuple
    end: tuple
    chain: list
    value: float
    indices: list

    def __len__(self) -> int:
        return len(self.chain)


def _check_order(p, q):
    if not (p[0] <= q[0] and p[1] <= q[1]):
        raise ConfigurationError(f"need p <= q coordinatewise, got p={tuple(p)} q={tuple(q)}")


def _pick_method(w: np.ndarray) -> str:
    pos = w[w > 0]
    if pos.size == 0 or np.all(pos == pos[0]):
        return "staircase"
    return "fenwick"


def sweep(x, t, w, method: str = "auto"):
    """Run the recursion on x-sorted arrays; returns ``(value, pred)``."""
    x = np.ascontiguousarray(x, dtype=float)
    t = np.ascontiguousarray(t, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if method == "auto":
        method = _pick_method(w)
    if method == "staircase":
        return _kernels.sweep_staircase(x, t, w)
    if method != "fenwick":
        raise ValueError(f"unknown method {method!r}")
    order = np.lexsort((-x, t))
    rank = np.empty(x.size, dtype=np.int64)
    rank[order] = np.arange(x.size)
    qlen = np.searchsorted(t[order], t, side="left").astype(np.int64)
    return _kernels.sweep_fenwick(x, t, w, qlen, rank)


def passage_field(cloud: PointCloud, source=(0.0, 0.0), bound=None, method: str = "auto") -> PassageField:
    """Values ``L(source, z)`` for every cloud point ``z`` strictly above ``source``.

    With ``bound`` only points ``<= bound`` are processed; queries beyond it
    are rejected.
    """
    sx, st = map(float, source)
    if bound is not None:
        _check_order(source, bound)
        bound = tuple(map(float, bound))
    n = len(cloud)
    mask = (cloud.x > sx) & (cloud.t > st)
    if bound is not None:
        mask &= (cloud.x <= bound[0]) & (cloud.t <= bound[1])
    members = np.flatnonzero(mask)
    value = np.full(n, np.nan)
    pred = np.full(n, -1, dtype=np.int64)
    if members.size == n:
        v, pr = sweep(cloud.x, cloud.t, cloud.w, method)
        value[:] = v
        pred[:] = pr
    elif members.size:
        v, pr = sweep(cloud.x[members], cloud.t[members], cloud.w[members], method)
        value[members] = v
        pred[members] = np.where(pr >= 0, members[np.maximum(pr, 0)], -1)
    value.setflags(write=False)
    pred.setflags(write=False)
    return PassageField(cloud, (sx, st), bound, value, pred, members)


def last_passage(cloud: PointCloud, p, q) -> float:
    """Maximum chain weight between ``p`` and ``q`` (0 for no chain)."""
    _check_order(p, q)
    return passage_field(cloud, p, q).last_passage(q)


def geodesic(cloud: PointCloud, p, q) -> Geodesic:
    """Lowest optimal chain from ``p`` to ``q``."""
    _check_order(p, q)
    return passage_field(cloud, p, q).geodesic(q)


def r_out_member(cloud: PointCloud, p, q, origin=(0.0, 0.0)) -> bool:
    """Whether the point ``p`` lies on the lowest geodesic from ``origin`` to ``q``."""
    geo = geodesic(cloud, origin, q)
    return any(z.x == p[0] and z.t == p[1] for z in geo.chain)


def chain_weight(chain) -> float:
    total = 0.0
    for z in chain:
        total = total + z[2]
    return total


def brute_force_last_passage(cloud: PointCloud, p, q, cap: int = BRUTE_FORCE_CAP):
    """Exhaustive maximisation over every chain; returns ``(value, chains)``.

    ``chains`` lists every optimal chain as a tuple of :class:`MarkedPoint`.
    Intended as a test oracle only.
    """
    _check_order(p, q)
    pts = [z for z in cloud.points()
           if p[0] < z.x <= q[0] and p[1] < z.t <= q[1]]
    if len(pts) > cap:
        raise ConfigurationError(f"{len(pts)} points in the order interval exceed the cap of {cap}")
    best = 0.0
    optimal = [()]

    def visit(chain, total):
        nonlocal best, optimal
        if chain:
            if total > best:
                best = total
                optimal = [tuple(chain)]
            elif total == best:
                optimal.append(tuple(chain))
        last = chain[-1] if chain else None
        for z in pts:
            if last is None or (z.x > last.x and z.t > last.t):
                chain.append(z)
                visit(chain, total + z.w)
                chain.pop()

    visit([], 0.0)
    return best, optimal


def staircase_heights(chain, start, xs) -> np.ndarray:
    """Height of the lowest up-right path through ``chain`` at each abscissa in ``xs``."""
    xs = np.asarray(xs, dtype=float)
    h = np.full(xs.shape, float(start[1]))
    for z in chain:
        h = np.where(xs >= z[0], np.maximum(h, z[1]), h)
    return h


def lies_below(chain_a, chain_b, start) -> bool:
    """True if the staircase of ``chain_a`` is nowhere above that of ``chain_b``."""
    xs = sorted({z[0] for z in chain_a} | {z[0] for z in chain_b} | {float(start[0])})
    return bool(np.all(staircase_heights(chain_a, start, xs) <= staircase_heights(chain_b, start, xs)))


def as_points(chain) -> list[MarkedPoint]:
    return [MarkedPoint(*z) for z in chain]
