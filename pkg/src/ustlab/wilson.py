"""Uniform spanning tree sampling and branch constructions.

`sample_ust` is the next-pointer cycle-popping form of Wilson's algorithm:
for each start vertex, walk until the current tree is hit while recording
the last exit from every vertex; the recorded pointers are exactly the
loop-erasure of that walk.  `two_point_path` roots the tree at one endpoint
and runs the single branch from the other, which is the loop-erased walk
between the two vertices.  `sunny_branch` samples the coupled two-endpoint
branch on a sun-augmented graph from two geometrically killed walks without
building the whole tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from . import _kernels as K
from .graphs import GraphHandle
from .rng import RngStream
from .walks import ErasedWalk, StopRule, lazy_walk, loop_erase

__all__ = [
    "Tree",
    "BranchSample",
    "sample_ust",
    "two_point_path",
    "sunny_branch",
    "branch_to_set",
    "write_tree",
    "read_tree",
    "tree_edges",
]


@dataclass(frozen=True)
class Tree:
    """Rooted spanning tree as a parent map; parent[root] == root."""

    n: int
    parent: np.ndarray
    root: int

    def validate(self, g: GraphHandle = None) -> None:
        """Assert the tree invariants (and edge containment when g given)."""
        n, parent, root = self.n, self.parent, self.root
        assert parent.shape == (n,)
        assert parent[root] == root
        assert (parent == np.arange(n)).sum() == 1, "exactly one root"
        depth_guard = 0
        reached = np.zeros(n, dtype=bool)
        reached[root] = True
        order = np.argsort(np.arange(n))
        for v in order:
            chain = []
            u = v
            while not reached[u]:
                chain.append(u)
                u = int(parent[u])
                depth_guard += 1
                assert depth_guard <= 2 * n * n, "parent pointers contain a cycle"
            for w in chain:
                reached[w] = True
        assert reached.all(), "all vertices reach the root"
        if g is not None:
            for v in range(n):
                if v != root:
                    p = int(parent[v])
                    if g.sun is not None and (v == g.sun.sun_id or p == g.sun.sun_id):
                        continue
                    assert p in g.neighbors(v), f"edge ({v},{p}) not in graph"


@dataclass(frozen=True)
class BranchSample:
    """A sampled tree branch between two terminals.

    When ``hit_sun`` is set the branch is empty: the connecting walk was
    killed (equivalently, it reached the sun) before closing the path.
    """

    path: np.ndarray
    hit_sun: bool
    raw_steps: int


def sample_ust(
    g: GraphHandle,
    root: int = 0,
    order: Union[str, np.ndarray] = "uniform-random",
    rng: RngStream = None,
) -> Tree:
    """Draw a uniform spanning tree of ``g`` rooted at ``root``.

    The tree law does not depend on ``order`` (any fixed ordering of start
    vertices gives the same distribution); "uniform-random" shuffles the
    starts, which is also a convenient distribution smoke test.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    n_states = g.n_states
    if not 0 <= root < n_states:
        raise ValueError("root out of range")
    if isinstance(order, str):
        if order != "uniform-random":
            raise ValueError(f"unknown ordering {order!r}")
        order_arr = rng.permutation(n_states)
    else:
        order_arr = np.asarray(order, dtype=np.int64)
        if sorted(order_arr.tolist()) != list(range(n_states)):
            raise ValueError("order must enumerate every vertex exactly once")
    parent = K.wilson_kernel(
        g.family_code,
        g.params,
        g.indptr,
        g.nbrs,
        g.n,
        g.degree,
        g.sun_id(),
        g.jump_prob(),
        root,
        order_arr,
        rng.state,
    )
    return Tree(n=n_states, parent=parent, root=root)


def two_point_path(g: GraphHandle, u: int, v: int, rng: RngStream) -> BranchSample:
    """The tree path between u and v: loop-erasure of a walk from u to v."""
    if u == v:
        raise ValueError("endpoints must differ")
    w = lazy_walk(g, u, StopRule.hit_set([v]), rng)
    lerw = loop_erase(w, n_states=g.n_states)
    return BranchSample(path=lerw.erased, hit_sun=False, raw_steps=w.raw_len)


def branch_to_set(g: GraphHandle, x: int, target, rng: RngStream) -> ErasedWalk:
    """Loop-erased walk from x stopped on hitting ``target`` (times kept)."""
    w = lazy_walk(g, x, StopRule.hit_set(target), rng)
    return loop_erase(w, n_states=g.n_states)


def sunny_branch(g: GraphHandle, u: int, v: int, rng: RngStream) -> BranchSample:
    """Two-endpoint branch on a sun-augmented graph via killed walks.

    First walk: from u, killed before each step w.p. jump_prob (runs T-1
    steps for geometric T); its loop erasure is the partial tree.  Second
    walk: from v, stopped on hitting that branch or after an independent
    geometric T' steps, whichever is first (a hit exactly at T' counts).
    If the second walk dies first the branch is empty and hit_sun is set.
    """
    if g.sun is None:
        raise ValueError("sunny_branch needs a sun-augmented graph")
    if u == v:
        raise ValueError("endpoints must differ")
    base = _base_view(g)
    q = g.sun.jump_prob
    walk_x = lazy_walk(base, u, StopRule.geometric(1.0 / q), rng)
    branch = loop_erase(walk_x, n_states=base.n).erased
    t_prime = rng.geometric(q)
    walk_y = lazy_walk(base, v, StopRule.hit_set(branch), rng, max_steps=t_prime)
    steps = walk_x.raw_len + walk_y.raw_len
    if walk_y.stop_reason != "hit_target":
        return BranchSample(path=np.empty(0, dtype=np.int64), hit_sun=True, raw_steps=steps)
    le_y = loop_erase(walk_y, n_states=base.n).erased
    w = le_y[-1]
    (where,) = np.nonzero(branch == w)
    path = np.concatenate([branch[: where[0] + 1], le_y[:-1][::-1]])
    return BranchSample(path=path, hit_sun=False, raw_steps=steps)


def _base_view(g: GraphHandle) -> GraphHandle:
    """The underlying graph without its sun."""
    if g.sun is None:
        return g
    return GraphHandle(
        n=g.n,
        degree=g.degree,
        family_tag=g.family_tag + "!base",
        family_code=g.family_code,
        params=g.params,
        indptr=g.indptr,
        nbrs=g.nbrs,
        non_regular=g.non_regular,
        degrees=g.degrees,
        sun=None,
    )


# ---------------------------------------------------------------------------
# serialization: header "n root", then one "child parent" pair per line
# ---------------------------------------------------------------------------


def write_tree(tree: Tree, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        fh.write(f"{tree.n} {tree.root}\n")
        for v in range(tree.n):
            if v != tree.root:
                fh.write(f"{v} {int(tree.parent[v])}\n")


def read_tree(path: Union[str, Path]) -> Tree:
    with open(path) as fh:
        header = fh.readline().split()
        n, root = int(header[0]), int(header[1])
        parent = np.empty(n, dtype=np.int64)
        parent[root] = root
        count = 0
        for line in fh:
            if not line.strip():
                continue
            c, p = line.split()
            parent[int(c)] = int(p)
            count += 1
    if count != n - 1:
        raise ValueError(f"expected {n - 1} edges, found {count}")
    return Tree(n=n, parent=parent, root=root)


def tree_edges(tree: Tree) -> set:
    """Canonical (min, max) edge set of the tree."""
    return {
        (min(v, int(tree.parent[v])), max(v, int(tree.parent[v])))
        for v in range(tree.n)
        if v != tree.root
    }
