import itertools

import pytest

from hammersley_lpp import PointCloud


@pytest.fixture
def three_points():
    return PointCloud.from_points([(1, 1, 2), (2, 3, 1), (3, 2, 5)], (0, 4, 0, 4))


def enumerate_chains(points, p, q):
    """Every up-right chain in the order interval, by subset enumeration."""
    inside = [z for z in points if p[0] < z[0] <= q[0] and p[1] < z[1] <= q[1]]
    for k in range(len(inside) + 1):
        for subset in itertools.combinations(sorted(inside), k):
            if all(a[0] < b[0] and a[1] < b[1] for a, b in zip(subset, subset[1:])):
                yield subset
