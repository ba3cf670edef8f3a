"""numba kernels behind the hot paths.

Everything works on flat int64 CSR arrays (indptr, indices sorted per row)
and parent-pointer trees (root entry -1). Kernels release the GIL so the
estimator can fan samples out over threads; determinism comes from the
caller handing each sample its own splitmix64 stream state.

DFN convention: entry stamps 1..n, children visited in ascending node id,
tout[v] = largest entry stamp inside v's subtree, so the subtree of v is
exactly the stamp interval [tin[v], tout[v]].
"""

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)


# ---------------------------------------------------------------- RNG

@njit(cache=True, nogil=True, inline="always")
def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def rng_next(state):
    state = state + _GAMMA
    return state, _mix(state)


@njit(cache=True, nogil=True, inline="always")
def rng_randint(state, n):
    # uniform in [0, n) by 32-bit multiply-shift; n < 2**32
    state, x = rng_next(state)
    r = x >> U64(32)
    return state, np.int64((r * U64(n)) >> U64(32))


# ---------------------------------------------------------------- traversal

@njit(cache=True, nogil=True)
def bfs_tree(indptr, indices, root):
    n = indptr.size - 1
    parent = np.full(n, -1, np.int64)
    depth = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    depth[root] = 0
    queue[0] = root
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for j in range(indptr[v], indptr[v + 1]):
            w = indices[j]
            if depth[w] == -1:
                depth[w] = depth[v] + 1
                parent[w] = v
                queue[tail] = w
                tail += 1
    return parent, depth


@njit(cache=True, nogil=True)
def dfs_tree(indptr, indices, root):
    n = indptr.size - 1
    parent = np.full(n, -1, np.int64)
    visited = np.zeros(n, np.bool_)
    ptr = indptr[:-1].copy()
    stack = np.empty(n, np.int64)
    visited[root] = True
    stack[0] = root
    sp = 0
    while sp >= 0:
        v = stack[sp]
        advanced = False
        while ptr[v] < indptr[v + 1]:
            w = indices[ptr[v]]
            ptr[v] += 1
            if not visited[w]:
                visited[w] = True
                parent[w] = v
                sp += 1
                stack[sp] = w
                advanced = True
                break
        if not advanced:
            sp -= 1
    return parent


@njit(cache=True, nogil=True)
def component_labels(indptr, indices):
    n = indptr.size - 1
    label = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    c = 0
    for s in range(n):
        if label[s] != -1:
            continue
        label[s] = c
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if label[w] == -1:
                    label[w] = c
                    queue[tail] = w
                    tail += 1
        c += 1
    return label


@njit(cache=True, nogil=True)
def bridge_mask(indptr, indices):
    """Boolean mask over CSR positions, True where the edge is a bridge."""
    n = indptr.size - 1
    disc = np.zeros(n, np.int64)
    low = np.zeros(n, np.int64)
    out = np.zeros(indices.size, np.bool_)
    stk_v = np.empty(n, np.int64)
    stk_skip = np.empty(n, np.int64)   # CSR position of (v -> parent) to skip
    stk_it = np.empty(n, np.int64)
    timer = 1
    for s in range(n):
        if disc[s] != 0:
            continue
        disc[s] = timer
        low[s] = timer
        timer += 1
        sp = 0
        stk_v[0] = s
        stk_skip[0] = -1
        stk_it[0] = indptr[s]
        while sp >= 0:
            v = stk_v[sp]
            j = stk_it[sp]
            if j < indptr[v + 1]:
                stk_it[sp] = j + 1
                if j == stk_skip[sp]:
                    continue
                w = indices[j]
                if disc[w] == 0:
                    disc[w] = timer
                    low[w] = timer
                    timer += 1
                    lo = indptr[w]
                    hi = indptr[w + 1]
                    while lo < hi:          # position of v inside row w
                        mid = (lo + hi) // 2
                        if indices[mid] < v:
                            lo = mid + 1
                        else:
                            hi = mid
                    sp += 1
                    stk_v[sp] = w
                    stk_skip[sp] = lo
                    stk_it[sp] = indptr[w]
                else:
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                sp -= 1
                if sp >= 0:
                    u = stk_v[sp]
                    if low[v] < low[u]:
                        low[u] = low[v]
                    if low[v] > disc[u]:
                        out[stk_skip[sp + 1]] = True       # (v -> u)
                        lo = indptr[u]
                        hi = indptr[u + 1]
                        while lo < hi:                      # (u -> v)
                            mid = (lo + hi) // 2
                            if indices[mid] < v:
                                lo = mid + 1
                            else:
                                hi = mid
                        out[lo] = True
    return out


# ---------------------------------------------------------------- sampling

@njit(cache=True, nogil=True)
def wilson(indptr, indices, roots, state):
    """Loop-erased random walk spanning tree over the given absorbing set.

    Walk starts scan nodes in ascending id; loop erasure is the classic
    next-pointer overwrite. Returns (parent, total walk steps, state).
    """
    n = indptr.size - 1
    parent = np.full(n, -1, np.int64)
    intree = np.zeros(n, np.bool_)
    nxt = np.full(n, -1, np.int64)
    for k in range(roots.size):
        intree[roots[k]] = True
    steps = 0
    for start in range(n):
        if intree[start]:
            continue
        u = start
        while not intree[u]:
            lo = indptr[u]
            state, j = rng_randint(state, indptr[u + 1] - lo)
            v = indices[lo + j]
            nxt[u] = v
            u = v
            steps += 1
        u = start
        while not intree[u]:
            intree[u] = True
            parent[u] = nxt[u]
            u = nxt[u]
    return parent, steps, state


# ---------------------------------------------------------------- tree structure

@njit(cache=True, nogil=True)
def children_csr(parent):
    n = parent.size
    cptr = np.zeros(n + 1, np.int64)
    for v in range(n):
        p = parent[v]
        if p >= 0:
            cptr[p + 1] += 1
    for v in range(n):
        cptr[v + 1] += cptr[v]
    cidx = np.empty(cptr[n], np.int64)
    pos = cptr[:-1].copy()
    for v in range(n):                 # ascending v => children sorted
        p = parent[v]
        if p >= 0:
            cidx[pos[p]] = v
            pos[p] += 1
    return cptr, cidx


@njit(cache=True, nogil=True)
def dfn_order(parent, cptr, cidx, root):
    """Entry stamps 1..n, interval ends, and the node-by-stamp order."""
    n = parent.size
    tin = np.zeros(n, np.int64)
    tout = np.zeros(n, np.int64)
    order = np.empty(n, np.int64)
    ptr = cptr[:-1].copy()
    stack = np.empty(n, np.int64)
    stack[0] = root
    sp = 0
    t = 1
    tin[root] = 1
    order[0] = root
    while sp >= 0:
        v = stack[sp]
        if ptr[v] < cptr[v + 1]:
            c = cidx[ptr[v]]
            ptr[v] += 1
            t += 1
            tin[c] = t
            order[t - 1] = c
            sp += 1
            stack[sp] = c
        else:
            sp -= 1
    size = np.ones(n, np.int64)
    for i in range(n - 1, 0, -1):
        v = order[i]
        size[parent[v]] += size[v]
    for v in range(n):
        tout[v] = tin[v] + size[v] - 1
    return tin, tout, order


@njit(cache=True, nogil=True)
def subtree_volumes(parent, order, deg):
    n = parent.size
    vol = deg.copy()
    for i in range(n - 1, 0, -1):
        v = order[i]
        vol[parent[v]] += vol[v]
    return vol


@njit(cache=True, nogil=True)
def validate_tree(parent, root, indptr, indices):
    """0 ok, 1 bad root, 2 bad parent id, 3 edge not in graph, 4 not spanning."""
    n = indptr.size - 1
    if parent.size != n or root < 0 or root >= n or parent[root] != -1:
        return 1
    for v in range(n):
        if v == root:
            continue
        p = parent[v]
        if p < 0 or p >= n or p == v:
            return 2
        lo = indptr[v]
        hi = indptr[v + 1]
        found = False
        while lo < hi:
            mid = (lo + hi) // 2
            if indices[mid] == p:
                found = True
                break
            if indices[mid] < p:
                lo = mid + 1
            else:
                hi = mid
        if not found:
            return 3
    cptr, cidx = children_csr(parent)
    stack = np.empty(n, np.int64)
    stack[0] = root
    sp = 0
    seen = 1
    while sp >= 0:
        v = stack[sp]
        sp -= 1
        for j in range(cptr[v], cptr[v + 1]):
            seen += 1
            sp += 1
            stack[sp] = cidx[j]
    if seen != n:
        return 4
    return 0


@njit(cache=True, nogil=True)
def tree_path_meet(parent, a, b):
    """Meet of the root-ward chains of a and b: (alen, blen, lca)."""
    n = parent.size
    pos = np.full(n, -1, np.int64)
    x = a
    i = 0
    while x != -1:
        pos[x] = i
        i += 1
        x = parent[x]
    x = b
    blen = 0
    while pos[x] == -1:
        x = parent[x]
        blen += 1
    return pos[x], blen, x


@njit(cache=True, nogil=True)
def climb(parent, x, k):
    for _ in range(k):
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def reverse_chain(parent, start, stop, new_parent):
    """Reverse parent pointers along start..stop; start hangs off new_parent."""
    prev = new_parent
    x = start
    while True:
        nxt = parent[x]
        parent[x] = prev
        if x == stop:
            break
        prev = x
        x = nxt


@njit(cache=True, nogil=True)
def count_crossings(indptr, indices, tin, order, lo, hi, eu, ev):
    """Graph edges leaving the stamp interval [lo, hi], excluding {eu, ev}."""
    cnt = 0
    for t in range(lo - 1, hi):
        w = order[t]
        for j in range(indptr[w], indptr[w + 1]):
            y = indices[j]
            ty = tin[y]
            if ty < lo or ty > hi:
                if (w == eu and y == ev) or (w == ev and y == eu):
                    continue
                cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def kth_crossing(indptr, indices, tin, order, lo, hi, eu, ev, k):
    """The k-th crossing edge in scan order, as (inside node, outside node)."""
    cnt = 0
    for t in range(lo - 1, hi):
        w = order[t]
        for j in range(indptr[w], indptr[w + 1]):
            y = indices[j]
            ty = tin[y]
            if ty < lo or ty > hi:
                if (w == eu and y == ev) or (w == ev and y == eu):
                    continue
                if cnt == k:
                    return w, y
                cnt += 1
    return np.int64(-1), np.int64(-1)


# ---------------------------------------------------------------- Fenwick

@njit(cache=True, nogil=True, inline="always")
def bit_point_add(bit, i, v):
    n = bit.size - 1
    while i <= n:
        bit[i] += v
        i += i & (-i)


@njit(cache=True, nogil=True, inline="always")
def bit_prefix(bit, i):
    s = 0
    while i > 0:
        s += bit[i]
        i -= i & (-i)
    return s


@njit(cache=True, nogil=True, inline="always")
def bit_range_add(bit, lo, hi, v):
    bit_point_add(bit, lo, v)
    if hi + 1 <= bit.size - 1:
        bit_point_add(bit, hi + 1, -v)


# ---------------------------------------------------------------- contributions

@njit(cache=True, nogil=True)
def contribution_naive(root, parent_t, tin_t, tout_t, vol_t, parent0, deg, two_m):
    """Signed volume contribution of tree t, by walking each reference path.

    For node u the reference path is u -> root inside the reference tree;
    an edge of it that also lies on u's root-ward path in t adds
    (2m - vol_t(child)) with the sign of its orientation match.
    """
    n = parent_t.size
    f = 0
    for u in range(n):
        if u == root:
            continue
        du = deg[u]
        tu = tin_t[u]
        x = u
        while x != root:
            p0 = parent0[x]
            if parent_t[x] == p0 and tin_t[x] <= tu and tu <= tout_t[x]:
                f += du * (two_m - vol_t[x])
            if parent_t[p0] == x and tin_t[p0] <= tu and tu <= tout_t[p0]:
                f -= du * (two_m - vol_t[p0])
            x = p0
    return f


@njit(cache=True, nogil=True)
def contribution_fenwick(root, parent_t, cptr_t, cidx_t, vol_t,
                         parent0, tin0, tout0, deg, two_m, bit):
    """Same value as contribution_naive via DFS over t with interval adds.

    Entering v activates v's tree edge on the reference-tree interval it
    covers (sign by orientation); leaving v undoes it, so `bit` returns to
    all-zero. The point query at v's reference stamp accumulates exactly
    the active matched edges above v.
    """
    n = parent_t.size
    f = 0
    stack = np.empty(2 * n, np.int64)
    stack[0] = root
    sp = 0
    while sp >= 0:
        v = stack[sp]
        sp -= 1
        if v >= n:                       # leave phase
            v -= n
            p = parent_t[v]
            if parent0[v] == p:
                bit_range_add(bit, tin0[v], tout0[v], -(two_m - vol_t[v]))
            elif parent0[p] == v:
                bit_range_add(bit, tin0[p], tout0[p], two_m - vol_t[v])
            continue
        if v != root:
            p = parent_t[v]
            if parent0[v] == p:
                bit_range_add(bit, tin0[v], tout0[v], two_m - vol_t[v])
            elif parent0[p] == v:
                bit_range_add(bit, tin0[p], tout0[p], -(two_m - vol_t[v]))
            sp += 1
            stack[sp] = v + n
        f += deg[v] * bit_prefix(bit, tin0[v])
        for j in range(cptr_t[v + 1] - 1, cptr_t[v] - 1, -1):
            sp += 1
            stack[sp] = cidx_t[j]
    return f


@njit(cache=True, nogil=True)
def sample_f(indptr, indices, deg, root, state, parent0, tin0, tout0,
             two_m, use_fenwick):
    """Draw one spanning tree and evaluate its contribution. (f, walk steps)."""
    roots = np.empty(1, np.int64)
    roots[0] = root
    parent, steps, state = wilson(indptr, indices, roots, state)
    cptr, cidx = children_csr(parent)
    tin, tout, order = dfn_order(parent, cptr, cidx, root)
    vol = subtree_volumes(parent, order, deg)
    if use_fenwick:
        bit = np.zeros(parent.size + 2, np.int64)
        f = contribution_fenwick(root, parent, cptr, cidx, vol,
                                 parent0, tin0, tout0, deg, two_m, bit)
    else:
        f = contribution_naive(root, parent, tin, tout, vol, parent0, deg, two_m)
    return f, steps
