"""Lazy random walk engine, loop erasure, and exact small-graph kernels.

The walk convention everywhere: stay put with probability 1/2, otherwise
move to a uniformly random neighbor (weighted by the sun jump when a sun is
present).  ``loop_erase`` retains the walk times that survive erasure,
which downstream capacity instrumentation consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .graphs import GraphHandle, InvalidZeta
from .rng import RngStream

__all__ = [
    "StopRule",
    "WalkPath",
    "ErasedWalk",
    "HeatKernel",
    "GraphTooLarge",
    "NoConvergence",
    "lazy_walk",
    "loop_erase",
    "transition_matrix",
    "heat_kernel",
    "mixing_time",
    "tv_distance_check",
]

DEFAULT_STEP_BUDGET = 10**9
EXACT_SIZE_CAP = 4096


class GraphTooLarge(ValueError):
    """Graph exceeds the exact-computation size cap."""


class NoConvergence(RuntimeError):
    """Mixing-time search exceeded its ceiling (guards against bugs; a lazy
    walk always mixes)."""


@dataclass(frozen=True)
class StopRule:
    """When a walk terminates: a hit set, a geometric kill, or a step count.

    ``geometric(mean)`` kills with probability 1/mean before every step, so
    the number of steps taken is T - 1 for T geometric with the given mean.
    """

    kind: str
    hit: Optional[frozenset] = None
    mean: Optional[float] = None
    steps: Optional[int] = None

    @staticmethod
    def hit_set(vertices) -> "StopRule":
        vs = frozenset(int(v) for v in vertices)
        if not vs:
            raise ValueError("hit set must be nonempty")
        return StopRule("hit_set", hit=vs)

    @staticmethod
    def geometric(mean: float) -> "StopRule":
        if mean <= 1:
            raise ValueError("geometric stop needs mean > 1")
        return StopRule("geometric", mean=float(mean))

    @staticmethod
    def steps(t: int) -> "StopRule":
        if t < 0:
            raise ValueError("step count must be >= 0")
        return StopRule("steps", steps=int(t))


@dataclass(frozen=True)
class WalkPath:
    vertices: np.ndarray
    stop_reason: str  # hit_target | geometric_kill | step_budget

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def raw_len(self) -> int:
        """Number of steps taken (edges, counting lazy holds)."""
        return len(self.vertices) - 1


@dataclass(frozen=True)
class ErasedWalk:
    """Loop-erasure of a walk with the surviving times.

    erased[i] is the walk's vertex at time lam[i]; lam is strictly
    increasing with lam[0] = 0 and lam[i] <= raw_len.
    """

    erased: np.ndarray
    lam: np.ndarray
    raw_len: int


_STOP_NAMES = {K.STOP_HIT: "hit_target", K.STOP_KILL: "geometric_kill", K.STOP_BUDGET: "step_budget"}


def _check_sun_walkable(g: GraphHandle) -> None:
    if g.sun is not None and g.jump_prob() >= 0.5:
        raise InvalidZeta(
            f"cannot run the lazy kernel with sun jump probability {g.jump_prob():.4f} >= 1/2"
        )


def lazy_walk(
    g: GraphHandle,
    start: int,
    stop: StopRule,
    rng: RngStream,
    max_steps: Optional[int] = None,
) -> WalkPath:
    """Run one lazy walk from ``start`` under the given stop rule.

    For a hit-set rule the returned path ends at the first vertex of the
    walk lying in the set; a start inside the set returns the length-1 path.
    ``max_steps`` (default 10^9) always applies as a safety budget and can
    be combined with a hit-set rule to cap the walk length.
    """
    _check_sun_walkable(g)
    n_states = g.n_states
    if not 0 <= start < n_states:
        raise ValueError(f"start {start} out of range")
    budget = DEFAULT_STEP_BUDGET if max_steps is None else int(max_steps)
    hit_mask = np.zeros(n_states, dtype=np.bool_)
    use_hit = False
    kill_q = 0.0
    if stop.kind == "hit_set":
        use_hit = True
        for v in stop.hit:
            hit_mask[v] = True
    elif stop.kind == "geometric":
        kill_q = 1.0 / stop.mean
    elif stop.kind == "steps":
        budget = min(budget, stop.steps)
    else:  # pragma: no cover
        raise ValueError(f"unknown stop rule {stop.kind}")
    path, code = K.walk_kernel(
        g.family_code,
        g.params,
        g.indptr,
        g.nbrs,
        g.n,
        g.degree,
        g.sun_id(),
        g.jump_prob(),
        start,
        use_hit,
        hit_mask,
        kill_q,
        budget,
        rng.state,
    )
    return WalkPath(vertices=path, stop_reason=_STOP_NAMES[int(code)])


def loop_erase(w, n_states: Optional[int] = None) -> ErasedWalk:
    """Chronological loop erasure of a walk.

    Accepts a WalkPath or a vertex array.  Halts exactly when the next
    surviving time would exceed the walk length; re-applying to an already
    simple path is the identity.
    """
    path = np.asarray(w.vertices if isinstance(w, WalkPath) else w, dtype=np.int64)
    if len(path) == 0:
        raise ValueError("cannot loop-erase an empty walk")
    states = int(path.max()) + 1 if n_states is None else n_states
    erased, lam = K.loop_erase_kernel(path, states)
    return ErasedWalk(erased=erased, lam=lam, raw_len=len(path) - 1)


# ---------------------------------------------------------------------------
# exact kernels (dense, small graphs)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeatKernel:
    t: int
    matrix: np.ndarray


def transition_matrix(g: GraphHandle, cap: int = EXACT_SIZE_CAP) -> np.ndarray:
    """Dense one-step lazy kernel (row-stochastic), sun row included."""
    _check_sun_walkable(g)
    n_states = g.n_states
    if n_states > cap:
        raise GraphTooLarge(f"{n_states} vertices exceeds exact-computation cap {cap}")
    P = np.zeros((n_states, n_states))
    jp = g.jump_prob()
    for v in range(g.n):
        P[v, v] += 0.5
        d = g.degree_of(v)
        move = (0.5 - jp) / d
        for i in range(d):
            P[v, g.neighbor(v, i)] += move
        if g.sun is not None:
            P[v, g.sun.sun_id] += jp
    if g.sun is not None:
        sid = g.sun.sun_id
        P[sid, sid] += 0.5
        P[sid, : g.n] += 0.5 / g.n
    return P


def stationary_distribution(g: GraphHandle) -> np.ndarray:
    """Uniform for regular graphs, degree-proportional otherwise (no sun)."""
    if g.sun is not None:
        raise ValueError("stationary distribution only for base graphs")
    if not g.non_regular:
        return np.full(g.n, 1.0 / g.n)
    deg = g.degrees.astype(float)
    return deg / deg.sum()


def heat_kernel(g: GraphHandle, t: int, cap: int = EXACT_SIZE_CAP) -> HeatKernel:
    """t-step transition probabilities p_t(x, y), exact up to round-off."""
    if t < 0:
        raise ValueError("t must be >= 0")
    P = transition_matrix(g, cap)
    return HeatKernel(t=t, matrix=np.linalg.matrix_power(P, t))


def mixing_time(g: GraphHandle, cap: int = EXACT_SIZE_CAP, ceiling: int = 100000) -> int:
    """Smallest t with max_{x,y} |n p_t(x,y) - 1| <= 1/2 (uniform mixing).

    Defined for regular graphs (uniform stationary law).  Uses the spectral
    decomposition of the symmetric lazy kernel, so the per-t cost is n^2.
    """
    if g.non_regular or g.sun is not None:
        raise ValueError("uniform mixing time is defined for regular base graphs")
    P = transition_matrix(g, cap)
    n = g.n
    lam, U = np.linalg.eigh(P)
    t = 0
    while t <= ceiling:
        Pt = (U * lam**t) @ U.T
        if np.max(np.abs(n * Pt - 1.0)) <= 0.5:
            return t
        t += 1
    raise NoConvergence(f"no t <= {ceiling} satisfies the uniform mixing condition")


def tv_distance_check(g: GraphHandle, x: int, t: int, cap: int = EXACT_SIZE_CAP) -> float:
    """Total variation distance between p_t(x, .) and the uniform law."""
    if g.non_regular or g.sun is not None:
        raise ValueError("tv_distance_check compares against the uniform law")
    P = transition_matrix(g, cap)
    row = np.zeros(g.n)
    row[x] = 1.0
    for _ in range(t):
        row = row @ P
    return 0.5 * float(np.abs(row - 1.0 / g.n).sum())
