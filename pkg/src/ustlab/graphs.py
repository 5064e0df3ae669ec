"""Graph families and the uniform neighbor oracle used by all walkers.

A :class:`GraphHandle` is immutable after construction and safe to share
across threads.  Tori, hypercubes and complete graphs use index arithmetic
for their neighbor oracle (no adjacency storage, so a torus at n = 10^5-10^6
stays cheap); random-regular and composite graphs store CSR adjacency.

The optional "sun" is an extra vertex with id ``n`` reachable from every
base vertex with a fixed per-step probability; see :func:`add_sun`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "FamilySpec",
    "GraphHandle",
    "SunInfo",
    "InvalidFamilyParams",
    "SunAlreadyPresent",
    "InvalidZeta",
    "build",
    "add_sun",
    "composite_star",
]


class InvalidFamilyParams(ValueError):
    """Family parameters violate the constructor's preconditions."""


class SunAlreadyPresent(ValueError):
    """add_sun called on a handle that already carries a sun."""


class InvalidZeta(ValueError):
    """Sun jump probability zeta * n^(-1/2) is not in (0, 1)."""


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of a graph family instance.

    kind is one of ``torus``, ``hypercube``, ``random_regular``, ``complete``,
    ``composite_star``; params hold the family parameters (JSON-friendly,
    matching the CLI config schema).
    """

    kind: str
    params: dict = field(default_factory=dict)

    @staticmethod
    def torus(length: int, dim: int) -> "FamilySpec":
        return FamilySpec("torus", {"length": int(length), "dim": int(dim)})

    @staticmethod
    def hypercube(m: int) -> "FamilySpec":
        return FamilySpec("hypercube", {"m": int(m)})

    @staticmethod
    def random_regular(n: int, deg: int, seed: int) -> "FamilySpec":
        return FamilySpec("random_regular", {"n": int(n), "deg": int(deg), "seed": int(seed)})

    @staticmethod
    def complete(n: int) -> "FamilySpec":
        return FamilySpec("complete", {"n": int(n)})

    @staticmethod
    def composite_star(spec1, spec2, spec3, masses=(1 / 3, 1 / 3, 1 / 3)) -> "FamilySpec":
        return FamilySpec(
            "composite_star",
            {"subs": [spec1, spec2, spec3], "masses": tuple(float(x) for x in masses)},
        )


@dataclass(frozen=True)
class SunInfo:
    sun_id: int
    jump_prob: float
    zeta: float


@dataclass(frozen=True)
class GraphHandle:
    """Immutable graph with a uniform neighbor/weight oracle.

    family_code/params/indptr/nbrs encode the neighbor oracle for the numba
    kernels (see ``_kernels``).  ``degree`` is the common degree for regular
    graphs and the maximum degree otherwise (``non_regular`` set).
    """

    n: int
    degree: int
    family_tag: str
    family_code: int
    params: np.ndarray
    indptr: np.ndarray
    nbrs: np.ndarray
    non_regular: bool = False
    degrees: Optional[np.ndarray] = None
    sun: Optional[SunInfo] = None

    def neighbor(self, v: int, i: int) -> int:
        """i-th neighbor of v (base graph; the sun is not part of the lists)."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range")
        if not 0 <= i < self.degree_of(v):
            raise IndexError(f"neighbor index {i} out of range for vertex {v}")
        code = self.family_code
        if code == 3:
            return i + 1 if i >= v else i
        if code == 2:
            return v ^ (1 << i)
        if code == 1:
            length = int(self.params[0])
            dim = i >> 1
            pw = int(self.params[2 + dim])
            c = (v // pw) % length
            c2 = (c + 1) % length if (i & 1) else (c - 1) % length
            return v + (c2 - c) * pw
        return int(self.nbrs[self.indptr[v] + i])

    def degree_of(self, v: int) -> int:
        if self.family_code == 0:
            return int(self.indptr[v + 1] - self.indptr[v])
        return self.degree

    def neighbors(self, v: int) -> list:
        return [self.neighbor(v, i) for i in range(self.degree_of(v))]

    @property
    def n_states(self) -> int:
        """Vertex count including the sun, if present."""
        return self.n + (1 if self.sun is not None else 0)

    def sun_id(self) -> int:
        return self.sun.sun_id if self.sun is not None else -1

    def jump_prob(self) -> float:
        return self.sun.jump_prob if self.sun is not None else 0.0


_EMPTY = np.zeros(0, dtype=np.int64)


def _handle(n, degree, tag, code, params, indptr=None, nbrs=None, **kw) -> GraphHandle:
    return GraphHandle(
        n=n,
        degree=degree,
        family_tag=tag,
        family_code=code,
        params=np.asarray(params, dtype=np.int64),
        indptr=_EMPTY if indptr is None else indptr,
        nbrs=_EMPTY if nbrs is None else nbrs,
        **kw,
    )


def build(spec: FamilySpec) -> GraphHandle:
    """Construct the graph described by ``spec``.

    Raises InvalidFamilyParams when parameters violate the family
    invariants (torus length >= 3, n*deg even, n >= 2, ...).
    """
    kind, p = spec.kind, spec.params
    if kind == "torus":
        length, dim = int(p["length"]), int(p["dim"])
        if length < 3:
            raise InvalidFamilyParams("torus length must be >= 3 (avoids parallel edges)")
        if dim < 1:
            raise InvalidFamilyParams("torus dimension must be >= 1")
        n = length**dim
        powers = [length**k for k in range(dim)]
        return _handle(n, 2 * dim, f"torus({length},{dim})", 1, [length, dim] + powers)
    if kind == "hypercube":
        m = int(p["m"])
        if m < 1:
            raise InvalidFamilyParams("hypercube order must be >= 1")
        return _handle(2**m, m, f"hypercube({m})", 2, [m])
    if kind == "complete":
        n = int(p["n"])
        if n < 2:
            raise InvalidFamilyParams("complete graph needs n >= 2")
        return _handle(n, n - 1, f"complete({n})", 3, [n])
    if kind == "random_regular":
        return _random_regular(int(p["n"]), int(p["deg"]), int(p["seed"]))
    if kind == "composite_star":
        subs = [s if isinstance(s, FamilySpec) else FamilySpec(**s) for s in p["subs"]]
        return composite_star(subs[0], subs[1], subs[2], p.get("masses", (1 / 3, 1 / 3, 1 / 3)))
    raise InvalidFamilyParams(f"unknown family kind {kind!r}")


def _random_regular(n: int, deg: int, seed: int) -> GraphHandle:
    import networkx as nx

    if n < 2 or deg < 1 or deg >= n:
        raise InvalidFamilyParams("random_regular needs 1 <= deg < n, n >= 2")
    if (n * deg) % 2 != 0:
        raise InvalidFamilyParams("random_regular needs n*deg even")
    # pairing-model generator with local retries; resample until connected
    for attempt in range(64):
        g = nx.random_regular_graph(deg, n, seed=seed + 1000003 * attempt)
        if nx.is_connected(g):
            break
    else:  # pragma: no cover
        raise InvalidFamilyParams("could not draw a connected regular graph")
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg
    nbrs = np.empty(n * deg, dtype=np.int64)
    for v in range(n):
        nbrs[indptr[v] : indptr[v + 1]] = sorted(g.neighbors(v))
    return _handle(
        n, deg, f"random_regular({n},{deg},seed={seed})", 0, [n], indptr=indptr, nbrs=nbrs
    )


def add_sun(g: GraphHandle, zeta: float) -> GraphHandle:
    """Attach a sun vertex (id = n) reachable w.p. zeta/sqrt(n) per step.

    The base edge structure is unchanged; the lazy kernel on the result
    holds w.p. 1/2, jumps to the sun w.p. jump_prob = zeta/sqrt(n) and
    otherwise takes a uniform base edge.
    """
    if g.sun is not None:
        raise SunAlreadyPresent("graph already has a sun vertex")
    if zeta <= 0:
        raise InvalidZeta("zeta must be positive")
    jump_prob = float(zeta) / np.sqrt(g.n)
    if jump_prob >= 1.0:
        raise InvalidZeta(f"jump probability {jump_prob} >= 1")
    return GraphHandle(
        n=g.n,
        degree=g.degree,
        family_tag=f"{g.family_tag}+sun(zeta={zeta})",
        family_code=g.family_code,
        params=g.params,
        indptr=g.indptr,
        nbrs=g.nbrs,
        non_regular=g.non_regular,
        degrees=g.degrees,
        sun=SunInfo(sun_id=g.n, jump_prob=jump_prob, zeta=float(zeta)),
    )


def composite_star(
    spec1: FamilySpec, spec2: FamilySpec, spec3: FamilySpec, masses=(1 / 3, 1 / 3, 1 / 3)
) -> GraphHandle:
    """Disjoint union of three graphs glued to the outer vertices of a 3-star.

    Each outer star vertex is joined by one edge to vertex 0 of one
    sub-graph (any fixed choice works, by symmetry of each family).  The
    result is connected but not regular: ``degree`` reports the maximum
    degree and ``non_regular`` is set, so callers must treat the handle as
    walk-compatible only.
    """
    masses = tuple(float(x) for x in masses)
    if len(masses) != 3 or any(m <= 0 for m in masses) or abs(sum(masses) - 1.0) > 1e-9:
        raise InvalidFamilyParams("masses must be a positive triple summing to 1")
    parts = [build(s) for s in (spec1, spec2, spec3)]
    offs = np.cumsum([0] + [p.n for p in parts])
    n = int(offs[3]) + 4
    center = n - 4
    outer = [n - 3, n - 2, n - 1]
    adj = [[] for _ in range(n)]
    for pi, part in enumerate(parts):
        off = int(offs[pi])
        for v in range(part.n):
            adj[off + v] = [off + w for w in part.neighbors(v)]
        adj[outer[pi]].append(off + 0)
        adj[off + 0].append(outer[pi])
    for o in outer:
        adj[o].append(center)
        adj[center].append(o)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    nbrs = np.empty(indptr[-1], dtype=np.int64)
    for v in range(n):
        nbrs[indptr[v] : indptr[v + 1]] = sorted(adj[v])
    degrees = np.diff(indptr).astype(np.int64)
    tag = f"composite_star({parts[0].family_tag},{parts[1].family_tag},{parts[2].family_tag})"
    return _handle(
        n,
        int(degrees.max()),
        tag,
        0,
        [n],
        indptr=indptr,
        nbrs=nbrs,
        non_regular=True,
        degrees=degrees,
    )


def bfs_reachable_count(g: GraphHandle, start: int = 0) -> int:
    """Vertices reachable from ``start`` over base edges (connectivity check)."""
    seen = np.zeros(g.n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return int(seen.sum())
