"""Countable products of closed intervals and their metric.

Coordinates are weighted by 2^-n and capped at 1, so the distance between
any two points of the product is at most 2 and the topology agrees with the
product topology on every finite truncation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functions import Interval

__all__ = [
    "Interval",
    "ProductPoint",
    "coordinate_weights",
    "cap_metric",
    "product_distance",
    "distances_to_cloud",
    "rowwise_distance",
    "tail_bound",
    "InclusionReport",
    "check_ball_cylinder_inclusions",
    "write_point_cloud_csv",
    "read_point_cloud_csv",
]

Space = tuple[Interval, ...]


def coordinate_weights(n: int) -> np.ndarray:
    """Weights 1, 1/2, 1/4, ... for the first n coordinates."""
    return 0.5 ** np.arange(n)


@dataclass(frozen=True)
class ProductPoint:
    """A point of a finite product of closed intervals.

    Containment of each coordinate in its interval is exact, with no
    tolerance; values produced by descriptor evaluation satisfy this by
    construction.
    """

    coords: tuple[float, ...]
    space: Space

    def __post_init__(self) -> None:
        if not isinstance(self.coords, tuple):
            object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not isinstance(self.space, tuple):
            object.__setattr__(self, "space", tuple(self.space))
        if len(self.coords) != len(self.space):
            raise ValueError(
                f"point has {len(self.coords)} coordinates for a "
                f"{len(self.space)}-interval space"
            )
        for n, (c, iv) in enumerate(zip(self.coords, self.space)):
            if not iv.contains(c):
                raise ValueError(
                    f"coordinate {n} = {c!r} outside [{iv.lo}, {iv.hi}]"
                )

    def __len__(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64)


def cap_metric(u: float, v: float) -> float:
    """min{1, |u - v|}, the capped distance used on each factor."""
    return min(1.0, abs(u - v))


def _require_same_space(x: ProductPoint, y: ProductPoint) -> None:
    if x.space != y.space:
        raise ValueError("points live in incompatible product spaces")


def product_distance(x: ProductPoint, y: ProductPoint) -> float:
    """Weighted capped distance sum_n min{1, |x_n - y_n|} / 2^n.

    Bounded above by 2.  Raises ValueError when the points do not share a
    space.
    """
    _require_same_space(x, y)
    total = 0.0
    w = 1.0
    for u, v in zip(x.coords, y.coords):
        total += cap_metric(u, v) * w
        w *= 0.5
    return total


def distances_to_cloud(p: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    """Distances from a single coordinate row to every row of a cloud.

    Accumulates coordinate by coordinate in fixed order so results are
    reproducible bit for bit.
    """
    p = np.asarray(p, dtype=np.float64)
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if cloud.shape[1] != p.shape[0]:
        raise ValueError("cloud and point have different coordinate counts")
    acc = np.zeros(cloud.shape[0])
    w = 1.0
    for n in range(p.shape[0]):
        acc += np.minimum(1.0, np.abs(cloud[:, n] - p[n])) * w
        w *= 0.5
    return acc


def rowwise_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance between corresponding rows of two equally shaped clouds."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("clouds have different shapes")
    if a.ndim == 1:
        a = a[:, None]
        b = b[:, None]
    acc = np.zeros(a.shape[0])
    w = 1.0
    for n in range(a.shape[1]):
        acc += np.minimum(1.0, np.abs(a[:, n] - b[:, n])) * w
        w *= 0.5
    return acc


def tail_bound(n_coords: int) -> float:
    """Total weight 2^(1-N) of the coordinates dropped after the first N.

    Truncating the metric to N coordinates changes no distance by more than
    this amount.
    """
    if n_coords < 1:
        raise ValueError("need at least one retained coordinate")
    return 2.0 ** (1 - n_coords)


@dataclass(frozen=True)
class InclusionReport:
    """Outcome of the ball/cylinder inclusion checks on a sample.

    ``coordinate_violations`` lists (i, j, n) where d(x_i, x_j) < r / 2^n
    failed to force coordinate distance n below r.  ``cylinder_violations``
    lists (i, j) where closeness below r/4 on every coordinate up to k
    failed to force d(x_i, x_j) < r.
    """

    r: float
    k: int
    pairs_checked: int
    coordinate_violations: list[tuple[int, int, int]] = field(default_factory=list)
    cylinder_violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.coordinate_violations and not self.cylinder_violations


def _truncation_depth(r: float) -> int:
    # Smallest k with 2^(1-k) < r/2: beyond coordinate k the whole tail
    # weighs less than half of r.
    k = 1
    while 2.0 ** (1 - k) >= r / 2.0:
        k += 1
    return k


def check_ball_cylinder_inclusions(
    space: Space, samples: Sequence[ProductPoint], r: float
) -> InclusionReport:
    """Check both metric-ball vs cylinder inclusions on all sample pairs.

    For every unordered pair x, y from ``samples`` and every coordinate n:
    whenever d(x, y) < r / 2^n the n-th capped coordinate distance is below
    r.  And with k the smallest truncation depth whose tail weighs less
    than r/2: whenever all capped coordinate distances up to k are below
    r/4, d(x, y) < r.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    for p in samples:
        if p.space != tuple(space):
            raise ValueError("sample point outside the given space")
    dim = len(space)
    pts = np.asarray([p.coords for p in samples], dtype=np.float64)
    ii, jj = np.triu_indices(len(samples), k=1)
    capped = np.minimum(1.0, np.abs(pts[ii] - pts[jj]))  # (pairs, dim)
    weights = coordinate_weights(dim)
    dist = np.zeros(len(ii))
    for n in range(dim):
        dist += capped[:, n] * weights[n]

    k = _truncation_depth(r)
    coord_viol: list[tuple[int, int, int]] = []
    for n in range(dim):
        bad = np.flatnonzero((dist < r / 2.0**n) & ~(capped[:, n] < r))
        coord_viol.extend((int(ii[b]), int(jj[b]), n) for b in bad)

    head = capped[:, : min(k, dim - 1) + 1]
    hypothesis = np.all(head < r / 4.0, axis=1)
    bad = np.flatnonzero(hypothesis & ~(dist < r))
    cyl_viol = [(int(ii[b]), int(jj[b])) for b in bad]

    return InclusionReport(
        r=float(r),
        k=k,
        pairs_checked=len(ii),
        coordinate_violations=coord_viol,
        cylinder_violations=cyl_viol,
    )


def write_point_cloud_csv(path, points: np.ndarray, header: Sequence[str] | None = None) -> None:
    """Write one row per point with 17-significant-digit coordinates."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header is None:
            header = [f"c{n}" for n in range(arr.shape[1])]
        writer.writerow(list(header))
        for row in arr:
            writer.writerow([f"{v:.17g}" for v in row])


def read_point_cloud_csv(path) -> np.ndarray:
    """Read a point cloud written by :func:`write_point_cloud_csv`."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return np.asarray(rows, dtype=np.float64)
