"""Metric observables of sampled trees.

Distances, diameter and height are exact BFS computations; ``lower_mass``
evaluates min_v |B(v, c*sqrt(n))| exactly with an O(n*r) two-pass counting
DP (descendant counts plus re-rooting), which the tests check against
brute-force truncated BFS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rng import RngStream
from .wilson import Tree

__all__ = [
    "DistanceMatrixSample",
    "LowerMassReport",
    "TrajectorySample",
    "distances_from",
    "diameter",
    "height",
    "ball_volume",
    "lower_mass",
    "fdd_sample",
    "srw_on_tree",
    "height_profile",
    "four_point_ok",
]


@dataclass(frozen=True)
class DistanceMatrixSample:
    """Pairwise distances between m sampled points, divided by ``scale``."""

    m: int
    distances: np.ndarray
    scale: float


@dataclass(frozen=True)
class LowerMassReport:
    """max_v n/|B(v, radius)| with radius = floor(c*sqrt(n))."""

    c: float
    radius: int
    min_ball: int
    stat: float


@dataclass(frozen=True)
class TrajectorySample:
    times: np.ndarray
    values: np.ndarray


def _csr(tree: Tree):
    return K.child_csr(tree.parent, tree.root)


def distances_from(tree: Tree, v: int) -> np.ndarray:
    """Exact tree distances from v to every vertex."""
    indptr, children = _csr(tree)
    _, dist = K.bfs_order_and_dist(tree.parent, indptr, children, tree.root, v)
    return dist


def diameter(tree: Tree) -> int:
    """Length of the longest path, by double-sweep BFS (exact on trees)."""
    indptr, children = _csr(tree)
    return int(K.tree_diameter_kernel(tree.parent, indptr, children, tree.root))


def height(tree: Tree, v: int) -> int:
    """Longest simple path starting from v; equals max of distances_from."""
    return int(distances_from(tree, v).max())


def ball_volume(tree: Tree, v: int, r: int) -> int:
    if r < 0:
        raise ValueError("radius must be >= 0")
    indptr, children = _csr(tree)
    return int(K.ball_volume_kernel(tree.parent, indptr, children, tree.root, v, r))


def lower_mass(tree: Tree, c: float) -> LowerMassReport:
    """Exact lower-mass statistic max_v n/|B(v, c*sqrt(n))|."""
    if c <= 0:
        raise ValueError("c must be positive")
    r = int(np.floor(c * np.sqrt(tree.n)))
    indptr, children = _csr(tree)
    min_ball = int(K.min_ball_volume_kernel(tree.parent, indptr, children, tree.root, r))
    return LowerMassReport(c=c, radius=r, min_ball=min_ball, stat=tree.n / min_ball)


def fdd_sample(tree: Tree, m: int, scale: float, rng: RngStream) -> DistanceMatrixSample:
    """Pairwise tree distances between m i.i.d. uniform vertices / scale."""
    if m < 2:
        raise ValueError("m must be >= 2")
    points = [rng.integer(tree.n) for _ in range(m)]
    dists = np.empty(m * (m - 1) // 2, dtype=float)
    dist_rows = [distances_from(tree, p) for p in points[:-1]]
    k = 0
    for a in range(m):
        for b in range(a + 1, m):
            dists[k] = dist_rows[a][points[b]] / scale
            k += 1
    return DistanceMatrixSample(m=m, distances=dists, scale=scale)


def srw_on_tree(
    tree: Tree,
    start: int,
    horizon_T: float,
    time_scale: float,
    space_scale: float,
    rng: RngStream,
    grid_points: int = 129,
) -> TrajectorySample:
    """Simple random walk on the tree, observed on a rescaled time grid.

    Runs ceil(time_scale * horizon_T) steps; at each grid time t the value
    is d_tree(start, X(floor(time_scale * t))) / space_scale.
    """
    if horizon_T <= 0 or time_scale <= 0 or space_scale <= 0:
        raise ValueError("horizon and scales must be positive")
    times = np.linspace(0.0, horizon_T, grid_points)
    total = int(np.ceil(time_scale * horizon_T))
    record = np.minimum(np.floor(time_scale * times), total).astype(np.int64)
    record = np.maximum.accumulate(record)
    indptr, children = _csr(tree)
    raw = K.srw_on_tree_kernel(
        tree.parent, indptr, children, tree.root, start, record, rng.state
    )
    return TrajectorySample(times=times, values=raw / space_scale)


def height_profile(tree: Tree, root: int) -> np.ndarray:
    """H(r) = number of vertices at tree distance exactly r from root."""
    d = distances_from(tree, root)
    return np.bincount(d)


def four_point_ok(sample: DistanceMatrixSample, tol: float = 0.0) -> bool:
    """Check the tree four-point condition on all quadruples (and triangles).

    For any x,y,z,w the two largest of d(x,y)+d(z,w), d(x,z)+d(y,w),
    d(x,w)+d(y,z) must be equal up to tol; triples must satisfy the
    triangle inequality.
    """
    m = sample.m
    d = np.zeros((m, m))
    k = 0
    for a in range(m):
        for b in range(a + 1, m):
            d[a, b] = d[b, a] = sample.distances[k]
            k += 1
    for a in range(m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                if d[a, b] > d[a, c] + d[c, b] + tol:
                    return False
                if d[a, c] > d[a, b] + d[b, c] + tol:
                    return False
                if d[b, c] > d[b, a] + d[a, c] + tol:
                    return False
    for a in range(m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                for e in range(c + 1, m):
                    sums = sorted([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]])
                    if abs(sums[2] - sums[1]) > tol:
                        return False
    return True
