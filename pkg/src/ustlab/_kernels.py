"""Numba kernels shared by the walk, tree and excursion machinery.

Everything here is `njit(cache=True, nogil=True)` and operates on plain
arrays so replicas can run on a thread pool.  Randomness comes from a
xoshiro256++ state advanced in place; the pure-Python twin lives in
``rng.py`` and the two are asserted identical in the tests.

Graph families are encoded for the neighbor oracle as:

==== =============== ==========================================
code family          params
==== =============== ==========================================
0    explicit CSR    neighbor lists in (indptr, nbrs)
1    torus           params = [L, d, L^0, L^1, ..., L^(d-1)]
2    hypercube       params = [m]
3    complete        params = [n]
==== =============== ==========================================

A sun vertex, when present, has id ``n`` (one past the base vertices); a
lazy step then holds w.p. 1/2, jumps to the sun w.p. ``jump_prob`` and
otherwise moves to a uniform base neighbor.  From the sun the walk holds
w.p. 1/2 and otherwise jumps to a uniform base vertex.
"""

from __future__ import annotations

import numpy as np
from numba import int64, njit, uint64

# stop codes for walk kernels
STOP_HIT = 0
STOP_KILL = 1
STOP_BUDGET = 2

_JIT = dict(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# xoshiro256++ core (must match rng.py exactly)
# ---------------------------------------------------------------------------


@njit(inline="always", **_JIT)
def _splitmix64(z):
    z = (z + uint64(0x9E3779B97F4A7C15)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)) & uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> uint64(31))


@njit(**_JIT)
def stream_state(master_seed, stream_id):
    s = np.empty(4, np.uint64)
    gamma = (uint64(0xA3EC4E93C0A1B2D5) * (uint64(stream_id) + uint64(1))) & uint64(
        0xFFFFFFFFFFFFFFFF
    )
    z = uint64(master_seed) ^ gamma
    for i in range(4):
        z = _splitmix64(z)
        s[i] = z
    if s[0] | s[1] | s[2] | s[3] == uint64(0):
        s[0] = uint64(0x9E3779B97F4A7C15)
    return s


@njit(inline="always", **_JIT)
def _rotl(x, k):
    return ((x << uint64(k)) | (x >> uint64(64 - k))) & uint64(0xFFFFFFFFFFFFFFFF)


@njit(inline="always", **_JIT)
def next_u64(s):
    r = (_rotl((s[0] + s[3]) & uint64(0xFFFFFFFFFFFFFFFF), 23) + s[0]) & uint64(
        0xFFFFFFFFFFFFFFFF
    )
    t = (s[1] << uint64(17)) & uint64(0xFFFFFFFFFFFFFFFF)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return r


@njit(inline="always", **_JIT)
def next_double(s):
    return (next_u64(s) >> uint64(11)) * (1.0 / 9007199254740992.0)


@njit(inline="always", **_JIT)
def next_below(s, n):
    m = uint64(n - 1)
    m |= m >> uint64(1)
    m |= m >> uint64(2)
    m |= m >> uint64(4)
    m |= m >> uint64(8)
    m |= m >> uint64(16)
    m |= m >> uint64(32)
    while True:
        v = next_u64(s) & m
        if v < uint64(n):
            return int64(v)


# ---------------------------------------------------------------------------
# neighbor oracle
# ---------------------------------------------------------------------------


@njit(inline="always", **_JIT)
def _nbr(family, params, indptr, nbrs, v, i):
    if family == 3:
        w = i
        if w >= v:
            w += 1
        return w
    elif family == 2:
        return v ^ (int64(1) << i)
    elif family == 1:
        dim = i >> 1
        L = params[0]
        pw = params[2 + dim]
        c = (v // pw) % L
        if i & 1:
            c2 = c + 1
            if c2 == L:
                c2 = 0
        else:
            c2 = c - 1
            if c2 < 0:
                c2 = L - 1
        return v + (c2 - c) * pw
    else:
        return int64(nbrs[indptr[v] + i])


@njit(inline="always", **_JIT)
def _degree_of(family, degree, indptr, v):
    if family == 0:
        return int64(indptr[v + 1] - indptr[v])
    return int64(degree)


@njit(inline="always", **_JIT)
def _lazy_step(family, params, indptr, nbrs, n, degree, sun_id, jump_prob, v, s):
    """One lazy transition from v; returns the next vertex (possibly v)."""
    if sun_id >= 0:
        if v == sun_id:
            j = next_below(s, 2 * n)
            if j >= n:
                return v
            return j
        u = next_double(s)
        if u < 0.5:
            return v
        if u < 0.5 + jump_prob:
            return sun_id
        d = _degree_of(family, degree, indptr, v)
        idx = int64((u - 0.5 - jump_prob) / (0.5 - jump_prob) * d)
        if idx >= d:
            idx = d - 1
        return _nbr(family, params, indptr, nbrs, v, idx)
    d = _degree_of(family, degree, indptr, v)
    j = next_below(s, 2 * d)
    if j >= d:
        return v
    return _nbr(family, params, indptr, nbrs, v, j)


# ---------------------------------------------------------------------------
# walk engine
# ---------------------------------------------------------------------------


@njit(**_JIT)
def walk_kernel(
    family,
    params,
    indptr,
    nbrs,
    n,
    degree,
    sun_id,
    jump_prob,
    start,
    use_hit,
    hit_mask,
    kill_q,
    max_steps,
    s,
):
    """Lazy walk from ``start``; returns (path, stop_code).

    Stops at the first vertex in ``hit_mask`` (when ``use_hit``), or when a
    pre-step Bernoulli(kill_q) fires, or after ``max_steps`` steps.  The kill
    draw happens before every step, so the number of steps taken is T-1 for
    a geometric T with mean 1/kill_q.
    """
    cap = 256
    path = np.empty(cap, np.int64)
    path[0] = start
    length = 1
    if use_hit and hit_mask[start]:
        return path[:1], STOP_HIT
    v = start
    taken = 0
    while True:
        if taken >= max_steps:
            return path[:length], STOP_BUDGET
        if kill_q > 0.0 and next_double(s) < kill_q:
            return path[:length], STOP_KILL
        v = _lazy_step(family, params, indptr, nbrs, n, degree, sun_id, jump_prob, v, s)
        taken += 1
        if length == cap:
            cap *= 2
            grown = np.empty(cap, np.int64)
            grown[:length] = path
            path = grown
        path[length] = v
        length += 1
        if use_hit and hit_mask[v]:
            return path[:length], STOP_HIT


@njit(**_JIT)
def loop_erase_kernel(path, n_states):
    """Chronological loop erasure with surviving times.

    Returns (erased, lam): lam[i] is the walk time whose vertex survives as
    erased[i]; lam[i+1] = 1 + (last time the walk visits erased[i]).
    """
    L = path.shape[0] - 1
    last = np.full(n_states, -1, np.int64)
    for t in range(L + 1):
        last[path[t]] = t
    erased = np.empty(L + 1, np.int64)
    lam = np.empty(L + 1, np.int64)
    erased[0] = path[0]
    lam[0] = 0
    count = 1
    cur = int64(0)
    while True:
        nxt = last[path[cur]] + 1
        if nxt > L:
            break
        cur = nxt
        erased[count] = path[cur]
        lam[count] = cur
        count += 1
    return erased[:count].copy(), lam[:count].copy()


# ---------------------------------------------------------------------------
# Wilson's algorithm (next-pointer cycle popping)
# ---------------------------------------------------------------------------


@njit(**_JIT)
def wilson_kernel(family, params, indptr, nbrs, n, degree, sun_id, jump_prob, root, order, s):
    """Spanning-tree parent array rooted at ``root``; parent[root] = root."""
    n_states = n + 1 if sun_id >= 0 else n
    nxt = np.full(n_states, -1, np.int64)
    intree = np.zeros(n_states, np.bool_)
    intree[root] = True
    for k in range(order.shape[0]):
        u = order[k]
        while not intree[u]:
            w = _lazy_step(family, params, indptr, nbrs, n, degree, sun_id, jump_prob, u, s)
            if w != u:
                nxt[u] = w
                u = w
        u = order[k]
        while not intree[u]:
            intree[u] = True
            u = nxt[u]
    parent = nxt
    parent[root] = root
    return parent


# ---------------------------------------------------------------------------
# rooted-tree utilities (trees given as parent arrays)
# ---------------------------------------------------------------------------


@njit(**_JIT)
def child_csr(parent, root):
    n = parent.shape[0]
    indptr = np.zeros(n + 1, np.int64)
    for v in range(n):
        if v != root:
            indptr[parent[v] + 1] += 1
    for i in range(n):
        indptr[i + 1] += indptr[i]
    children = np.empty(n - 1, np.int64)
    fill = indptr[:n].copy()
    for v in range(n):
        if v != root:
            children[fill[parent[v]]] = v
            fill[parent[v]] += 1
    return indptr, children


@njit(**_JIT)
def bfs_order_and_dist(parent, indptr, children, root, src):
    """BFS from src over the tree; returns (visit order, distances)."""
    n = parent.shape[0]
    dist = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    dist[src] = 0
    order[0] = src
    head, tail = 0, 1
    while head < tail:
        u = order[head]
        head += 1
        p = parent[u]
        if p != u and dist[p] < 0:
            dist[p] = dist[u] + 1
            order[tail] = p
            tail += 1
        for e in range(indptr[u], indptr[u + 1]):
            w = children[e]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                order[tail] = w
                tail += 1
    return order, dist


@njit(**_JIT)
def tree_diameter_kernel(parent, indptr, children, root):
    n = parent.shape[0]
    if n == 1:
        return 0
    _, d0 = bfs_order_and_dist(parent, indptr, children, root, root)
    far = 0
    for v in range(n):
        if d0[v] > d0[far]:
            far = v
    _, d1 = bfs_order_and_dist(parent, indptr, children, root, far)
    best = 0
    for v in range(n):
        if d1[v] > best:
            best = d1[v]
    return best


@njit(**_JIT)
def min_ball_volume_kernel(parent, indptr, children, root, r):
    """min_v #{u : d_T(v,u) <= r} by subtree counts plus re-rooting.

    down[v,d] counts descendants of v at distance exactly d; up[v,d] counts
    the rest of the tree at distance exactly d from v.
    """
    n = parent.shape[0]
    if r <= 0:
        return 1
    order, _ = bfs_order_and_dist(parent, indptr, children, root, root)
    down = np.zeros((n, r + 1), np.int64)
    for i in range(n - 1, -1, -1):
        v = order[i]
        down[v, 0] = 1
        for e in range(indptr[v], indptr[v + 1]):
            c = children[e]
            for d in range(1, r + 1):
                down[v, d] += down[c, d - 1]
    up = np.zeros((n, r + 1), np.int64)
    for i in range(n):
        v = order[i]
        for e in range(indptr[v], indptr[v + 1]):
            c = children[e]
            up[c, 1] = up[v, 0] + down[v, 0]  # down[c, -1] contributes nothing
            for d in range(2, r + 1):
                up[c, d] = up[v, d - 1] + down[v, d - 1] - down[c, d - 2]
    best = np.int64(1 << 60)
    for v in range(n):
        tot = np.int64(0)
        for d in range(r + 1):
            tot += down[v, d] + up[v, d]
        if tot < best:
            best = tot
    return best


@njit(**_JIT)
def ball_volume_kernel(parent, indptr, children, root, v, r):
    _, dist = bfs_order_and_dist(parent, indptr, children, root, v)
    n = parent.shape[0]
    count = 0
    for u in range(n):
        if 0 <= dist[u] <= r:
            count += 1
    return count


@njit(**_JIT)
def srw_on_tree_kernel(parent, indptr, children, root, start, record_steps, s):
    """Simple random walk on the tree; distance from start at given step indices.

    ``record_steps`` must be nondecreasing step counts; returns the tree
    distance from ``start`` at each of them.
    """
    _, dist = bfs_order_and_dist(parent, indptr, children, root, start)
    out = np.empty(record_steps.shape[0], np.int64)
    v = start
    step = 0
    k = 0
    while k < record_steps.shape[0] and record_steps[k] == 0:
        out[k] = 0
        k += 1
    total = record_steps[record_steps.shape[0] - 1]
    while step < total:
        nc = indptr[v + 1] - indptr[v]
        deg = nc + (1 if v != root else 0)
        j = next_below(s, deg)
        if j < nc:
            v = children[indptr[v] + j]
        else:
            v = parent[v]
        step += 1
        while k < record_steps.shape[0] and record_steps[k] == step:
            out[k] = dist[v]
            k += 1
    return out


# ---------------------------------------------------------------------------
# lattice excursions (Dyck paths)
# ---------------------------------------------------------------------------


@njit(**_JIT)
def dyck_heights_kernel(N, s):
    """Heights e_0..e_{2N} of a uniform nonnegative lattice excursion.

    Cycle lemma: shuffle N up-steps with N+1 down-steps, rotate to start
    just after the first minimum of the partial sums, drop the final step.
    """
    total = 2 * N + 1
    steps = np.empty(total, np.int8)
    for i in range(N):
        steps[i] = 1
    for i in range(N, total):
        steps[i] = -1
    for i in range(total - 1, 0, -1):
        j = next_below(s, i + 1)
        t = steps[i]
        steps[i] = steps[j]
        steps[j] = t
    h = 0
    minh = 0
    argmin = 0
    for i in range(total):
        h += steps[i]
        if h < minh:
            minh = h
            argmin = i
    e = np.empty(2 * N + 1, np.int64)
    e[0] = 0
    idx = 0
    for i in range(argmin + 1, total):
        e[idx + 1] = e[idx] + steps[i]
        idx += 1
    for i in range(0, argmin):
        e[idx + 1] = e[idx] + steps[i]
        idx += 1
    return e


@njit(**_JIT)
def contour_diameter_kernel(e):
    """max_{i<j} (e_i + e_j - 2 min_{[i,j]} e) via a double sweep.

    Contour positions carry the coded tree's metric, so the classic
    farthest-point double sweep applies: position 0 has min_{[0,t]} e = 0,
    hence argmax_t e is a metric-farthest point from position 0.
    """
    n = e.shape[0]
    t1 = 0
    for i in range(n):
        if e[i] > e[t1]:
            t1 = i
    best = 0
    m = e[t1]
    for j in range(t1, n):
        if e[j] < m:
            m = e[j]
        d = e[t1] + e[j] - 2 * m
        if d > best:
            best = d
    m = e[t1]
    for j in range(t1, -1, -1):
        if e[j] < m:
            m = e[j]
        d = e[t1] + e[j] - 2 * m
        if d > best:
            best = d
    return best


@njit(**_JIT)
def contour_diameter_scan(e):
    """O(len^2) reference scan over all position pairs (test oracle)."""
    n = e.shape[0]
    best = 0
    for i in range(n):
        m = e[i]
        for j in range(i, n):
            if e[j] < m:
                m = e[j]
            d = e[i] + e[j] - 2 * m
            if d > best:
                best = d
    return best


@njit(**_JIT)
def excursion_pair_distances(e, idx):
    """Coded distances e_i + e_j - 2 min between all pairs of positions."""
    m = idx.shape[0]
    out = np.empty(m * (m - 1) // 2, np.int64)
    k = 0
    for a in range(m):
        for b in range(a + 1, m):
            i, j = idx[a], idx[b]
            if i > j:
                i, j = j, i
            mn = e[i]
            for t in range(i, j + 1):
                if e[t] < mn:
                    mn = e[t]
            out[k] = e[i] + e[j] - 2 * mn
            k += 1
    return out


@njit(**_JIT)
def crt_fdd_batch(N, m, count, master_seed, stream_base, out):
    """Fill ``out`` (count x m(m-1)/2) with rescaled coded distances."""
    npairs = m * (m - 1) // 2
    scale = np.sqrt(2.0 * N)
    for r in range(count):
        s = stream_state(master_seed, stream_base + r)
        e = dyck_heights_kernel(N, s)
        idx = np.empty(m, np.int64)
        for a in range(m):
            idx[a] = next_below(s, 2 * N + 1)
        d = excursion_pair_distances(e, idx)
        for k in range(npairs):
            out[r, k] = 2.0 * d[k] / scale


# ---------------------------------------------------------------------------
# Monte Carlo hitting estimators (stationary start)
# ---------------------------------------------------------------------------


@njit(inline="always", **_JIT)
def _stationary_start(family, indptr, n, s):
    if family != 0:
        return next_below(s, n)
    # degree-biased start for irregular graphs: owner of a uniform arc slot
    slot = next_below(s, indptr[n])
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if indptr[mid] <= slot:
            lo = mid
        else:
            hi = mid
    return lo


@njit(**_JIT)
def mc_hit_by_k(family, params, indptr, nbrs, n, degree, target_mask, k, samples, s):
    hits = 0
    for _ in range(samples):
        v = _stationary_start(family, indptr, n, s)
        if target_mask[v]:
            hits += 1
            continue
        for _t in range(k):
            v = _lazy_step(family, params, indptr, nbrs, n, degree, -1, 0.0, v, s)
            if target_mask[v]:
                hits += 1
                break
    return hits


@njit(**_JIT)
def mc_hit_before(family, params, indptr, nbrs, n, degree, w_mask, u_mask, k, samples, s):
    """Count walks that enter W within k steps without having entered U first."""
    hits = 0
    for _ in range(samples):
        v = _stationary_start(family, indptr, n, s)
        if w_mask[v]:
            hits += 1
            continue
        if u_mask[v]:
            continue
        for _t in range(k):
            v = _lazy_step(family, params, indptr, nbrs, n, degree, -1, 0.0, v, s)
            if w_mask[v]:
                hits += 1
                break
            if u_mask[v]:
                break
    return hits


@njit(**_JIT)
def mc_close(family, params, indptr, nbrs, n, degree, u_mask, w_mask, k, samples, s):
    """Count walks hitting both U and W strictly before time k."""
    if k <= 0:
        return 0
    hits = 0
    for _ in range(samples):
        v = _stationary_start(family, indptr, n, s)
        got_u = u_mask[v]
        got_w = w_mask[v]
        for _t in range(k - 1):
            if got_u and got_w:
                break
            v = _lazy_step(family, params, indptr, nbrs, n, degree, -1, 0.0, v, s)
            if u_mask[v]:
                got_u = True
            if w_mask[v]:
                got_w = True
        if got_u and got_w:
            hits += 1
    return hits


@njit(**_JIT)
def mc_green_mass(family, params, indptr, nbrs, n, degree, a_mask, a_list, k, samples, s):
    """Mean over runs of |A| * (visits to A within k steps from uniform x in A)."""
    total = 0.0
    asz = a_list.shape[0]
    for _ in range(samples):
        v = a_list[next_below(s, asz)]
        visits = 1 if a_mask[v] else 0
        for _t in range(k):
            v = _lazy_step(family, params, indptr, nbrs, n, degree, -1, 0.0, v, s)
            if a_mask[v]:
                visits += 1
        total += visits
    return total * asz / samples
