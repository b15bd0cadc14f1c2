"""Compiled shortest-path kernels for vertex-weighted grid searches.

Vertex weights are reduced to edge weights by charging each move u -> v the
weight of v, which realizes the first-vertex-excluded passage time exactly.
Cells with weight +inf are impassable.  Zero-weight relaxations bypass the
heap through a plateau stack; at criticality roughly half of all moves are
free, so this matters.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# neighbor steps (dy, dx): E, W, N, S, SE, NW
_DRS = np.array([0, 0, 1, -1, -1, 1], dtype=np.int64)
_DCS = np.array([1, -1, 0, 0, 1, -1], dtype=np.int64)


@njit(cache=True, nogil=True)
def sssp_rings(tau, H, W, cx, cy, radii):
    """Dijkstra from the center cell; returns the first-settled distance at
    each linf radius in `radii` (sorted ascending). Stops at the last ring."""
    n = H * W
    INF = np.inf
    dist = np.full(n, INF)
    done = np.zeros(n, np.uint8)
    out = np.full(len(radii), INF)
    rmax = radii[-1]
    slot = np.full(rmax + 1, -1, np.int64)
    for i in range(len(radii)):
        slot[radii[i]] = i
    cap = 4 * n + 64
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    hn = 0
    st = np.empty(n + 8, np.int64)
    s = cy * W + cx
    dist[s] = 0.0
    hk[0] = 0.0
    hv[0] = s
    hn = 1
    nleft = len(radii)
    while hn > 0:
        d = hk[0]
        u = hv[0]
        hn -= 1
        hk[0] = hk[hn]
        hv[0] = hv[hn]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= hn:
                break
            r = l + 1
            m = l
            if r < hn and hk[r] < hk[l]:
                m = r
            if hk[m] < hk[i]:
                hk[i], hk[m] = hk[m], hk[i]
                hv[i], hv[m] = hv[m], hv[i]
                i = m
            else:
                break
        if done[u]:
            continue
        sn = 0
        st[0] = u
        sn = 1
        while sn > 0:
            sn -= 1
            v = st[sn]
            if done[v]:
                continue
            done[v] = 1
            vr = v // W
            vc = v % W
            ar = vr - cy
            ac = vc - cx
            if ar < 0:
                ar = -ar
            if ac < 0:
                ac = -ac
            rad = ar if ar > ac else ac
            if rad <= rmax and slot[rad] >= 0:
                k = slot[rad]
                if out[k] == INF:
                    out[k] = d
                    nleft -= 1
                    if nleft == 0:
                        return out
            for e in range(6):
                nr = vr + _DRS[e]
                nc = vc + _DCS[e]
                if nr < 0 or nr >= H or nc < 0 or nc >= W:
                    continue
                w = nr * W + nc
                if done[w]:
                    continue
                t = tau[w]
                nd = d + t
                if nd < dist[w]:
                    dist[w] = nd
                    if t == 0.0:
                        st[sn] = w
                        sn += 1
                    else:
                        if hn >= cap:
                            raise RuntimeError("heap overflow in sssp_rings")
                        hk[hn] = nd
                        hv[hn] = w
                        i = hn
                        hn += 1
                        while i > 0:
                            p = (i - 1) // 2
                            if hk[p] > hk[i]:
                                hk[p], hk[i] = hk[i], hk[p]
                                hv[p], hv[i] = hv[i], hv[p]
                                i = p
                            else:
                                break
    return out


@njit(cache=True, nogil=True)
def sssp(tau, H, W, src, dst_flag, want_pred, charge_source):
    """Multi-source Dijkstra; stops at the first settled destination cell.

    Returns (value, target, pred): value/target are (inf, -1) when no
    destination is reachable.  pred[v] is the predecessor cell (-2 marks a
    source); pred has length 1 when want_pred is false.
    """
    n = H * W
    INF = np.inf
    dist = np.full(n, INF)
    done = np.zeros(n, np.uint8)
    if want_pred:
        pred = np.full(n, -1, np.int64)
    else:
        pred = np.full(1, -1, np.int64)
    cap = 4 * n + 64
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    hn = 0
    st = np.empty(n + 8, np.int64)
    for j in range(len(src)):
        s = src[j]
        if tau[s] == INF:
            continue
        dist[s] = 0.0
        if want_pred:
            pred[s] = -2
        hk[hn] = 0.0
        hv[hn] = s
        hn += 1
        i = hn - 1
        while i > 0:
            p = (i - 1) // 2
            if hk[p] > hk[i]:
                hk[p], hk[i] = hk[i], hk[p]
                hv[p], hv[i] = hv[i], hv[p]
                i = p
            else:
                break
    while hn > 0:
        d = hk[0]
        u = hv[0]
        hn -= 1
        hk[0] = hk[hn]
        hv[0] = hv[hn]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= hn:
                break
            r = l + 1
            m = l
            if r < hn and hk[r] < hk[l]:
                m = r
            if hk[m] < hk[i]:
                hk[i], hk[m] = hk[m], hk[i]
                hv[i], hv[m] = hv[m], hv[i]
                i = m
            else:
                break
        if done[u]:
            continue
        sn = 0
        st[0] = u
        sn = 1
        while sn > 0:
            sn -= 1
            v = st[sn]
            if done[v]:
                continue
            done[v] = 1
            if dst_flag[v] != 0:
                return d, v, pred
            vr = v // W
            vc = v % W
            for e in range(6):
                nr = vr + _DRS[e]
                nc = vc + _DCS[e]
                if nr < 0 or nr >= H or nc < 0 or nc >= W:
                    continue
                w = nr * W + nc
                if done[w]:
                    continue
                if charge_source:
                    t = tau[v]
                    if tau[w] == INF:
                        continue
                else:
                    t = tau[w]
                if t == INF:
                    continue
                nd = d + t
                if nd < dist[w]:
                    dist[w] = nd
                    if want_pred:
                        pred[w] = v
                    if t == 0.0:
                        st[sn] = w
                        sn += 1
                    else:
                        if hn >= cap:
                            raise RuntimeError("heap overflow in sssp")
                        hk[hn] = nd
                        hv[hn] = w
                        i = hn
                        hn += 1
                        while i > 0:
                            p = (i - 1) // 2
                            if hk[p] > hk[i]:
                                hk[p], hk[i] = hk[i], hk[p]
                                hv[p], hv[i] = hv[i], hv[p]
                                i = p
                            else:
                                break
    return INF, np.int64(-1), pred


@njit(cache=True, nogil=True)
def sssp_full(tau, H, W, src, charge_source):
    """Multi-source Dijkstra over the whole grid; returns the distance array."""
    n = H * W
    INF = np.inf
    dist = np.full(n, INF)
    done = np.zeros(n, np.uint8)
    cap = 4 * n + 64
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    hn = 0
    st = np.empty(n + 8, np.int64)
    for j in range(len(src)):
        s = src[j]
        if tau[s] == INF:
            continue
        dist[s] = 0.0
        hk[hn] = 0.0
        hv[hn] = s
        hn += 1
        i = hn - 1
        while i > 0:
            p = (i - 1) // 2
            if hk[p] > hk[i]:
                hk[p], hk[i] = hk[i], hk[p]
                hv[p], hv[i] = hv[i], hv[p]
                i = p
            else:
                break
    while hn > 0:
        d = hk[0]
        u = hv[0]
        hn -= 1
        hk[0] = hk[hn]
        hv[0] = hv[hn]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= hn:
                break
            r = l + 1
            m = l
            if r < hn and hk[r] < hk[l]:
                m = r
            if hk[m] < hk[i]:
                hk[i], hk[m] = hk[m], hk[i]
                hv[i], hv[m] = hv[m], hv[i]
                i = m
            else:
                break
        if done[u]:
            continue
        sn = 0
        st[0] = u
        sn = 1
        while sn > 0:
            sn -= 1
            v = st[sn]
            if done[v]:
                continue
            done[v] = 1
            vr = v // W
            vc = v % W
            for e in range(6):
                nr = vr + _DRS[e]
                nc = vc + _DCS[e]
                if nr < 0 or nr >= H or nc < 0 or nc >= W:
                    continue
                w = nr * W + nc
                if done[w]:
                    continue
                if charge_source:
                    t = tau[v]
                    if tau[w] == INF:
                        continue
                else:
                    t = tau[w]
                if t == INF:
                    continue
                nd = d + t
                if nd < dist[w]:
                    dist[w] = nd
                    if t == 0.0:
                        st[sn] = w
                        sn += 1
                    else:
                        if hn >= cap:
                            raise RuntimeError("heap overflow in sssp_full")
                        hk[hn] = nd
                        hv[hn] = w
                        i = hn
                        hn += 1
                        while i > 0:
                            p = (i - 1) // 2
                            if hk[p] > hk[i]:
                                hk[p], hk[i] = hk[i], hk[p]
                                hv[p], hv[i] = hv[i], hv[p]
                                i = p
                            else:
                                break
    return dist


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return z


@njit(cache=True, nogil=True)
def label_grid(seed, stream, x0, y0, H, W, ordinal):
    """Fused counter-based uniforms over a grid; bit-identical to
    rng.counter_uniform(seed, x, y, ordinal, stream)."""
    out = np.empty(H * W, np.float64)
    h0 = _mix64(np.uint64(seed) ^ np.uint64(stream))
    hx = np.empty(W, np.uint64)
    for c in range(W):
        hx[c] = _mix64(h0 ^ np.uint64(x0 + c))
    mo = np.uint64(ordinal) * np.uint64(0xD1B54A32D192ED03)
    scale = 2.0**-53
    for r in range(H):
        my = np.uint64(y0 + r) * np.uint64(0x9E3779B97F4A7C15)
        base = r * W
        for c in range(W):
            h = _mix64(_mix64(hx[c] ^ my) ^ mo)
            out[base + c] = (np.float64(h >> np.uint64(11)) + 0.5) * scale
    return out


@njit(cache=True, nogil=True)
def weight_grid(seed, stream, x0, y0, H, W, ordinal, cum, vals):
    """label_grid composed with the generalized inverse of an atom-list
    distribution (smallest atom whose cumulative probability reaches the
    label); bit-identical to quantile(label_grid(...))."""
    out = np.empty(H * W, np.float64)
    h0 = _mix64(np.uint64(seed) ^ np.uint64(stream))
    hx = np.empty(W, np.uint64)
    for c in range(W):
        hx[c] = _mix64(h0 ^ np.uint64(x0 + c))
    mo = np.uint64(ordinal) * np.uint64(0xD1B54A32D192ED03)
    scale = 2.0**-53
    m = len(cum)
    for r in range(H):
        my = np.uint64(y0 + r) * np.uint64(0x9E3779B97F4A7C15)
        base = r * W
        for c in range(W):
            h = _mix64(_mix64(hx[c] ^ my) ^ mo)
            u = (np.float64(h >> np.uint64(11)) + 0.5) * scale
            lo = 0
            hi = m - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if cum[mid] >= u:
                    hi = mid
                else:
                    lo = mid + 1
            out[base + c] = vals[lo]
    return out


@njit(cache=True, nogil=True)
def _uf_find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True, nogil=True)
def crossing_threshold(labels, H, W):
    """Smallest p such that the cells with label <= p contain a left-right
    crossing: activate cells in label order, union-find with two virtual
    side nodes, return the label that first connects them."""
    n = H * W
    order = np.argsort(labels)
    parent = np.empty(n + 2, np.int64)
    for i in range(n + 2):
        parent[i] = i
    active = np.zeros(n, np.uint8)
    left, right = n, n + 1
    for oi in range(n):
        v = order[oi]
        active[v] = 1
        vr = v // W
        vc = v % W
        rv = _uf_find(parent, v)
        if vc == 0:
            rl = _uf_find(parent, left)
            parent[rl] = rv
            rv = _uf_find(parent, v)
        if vc == W - 1:
            rr_ = _uf_find(parent, right)
            parent[rr_] = rv
            rv = _uf_find(parent, v)
        for e in range(6):
            nr = vr + _DRS[e]
            nc = vc + _DCS[e]
            if nr < 0 or nr >= H or nc < 0 or nc >= W:
                continue
            w = nr * W + nc
            if active[w] == 0:
                continue
            rw = _uf_find(parent, w)
            rv = _uf_find(parent, v)
            if rw != rv:
                parent[rw] = rv
        if _uf_find(parent, left) == _uf_find(parent, right):
            return labels[v]
    return 2.0


@njit(cache=True, nogil=True)
def reach(passable, H, W, src, dst_flag):
    """BFS on passable cells; True iff any destination is reachable."""
    n = H * W
    seen = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    qn = 0
    for j in range(len(src)):
        s = src[j]
        if passable[s] != 0 and seen[s] == 0:
            if dst_flag[s] != 0:
                return True
            seen[s] = 1
            queue[qn] = s
            qn += 1
    qi = 0
    while qi < qn:
        v = queue[qi]
        qi += 1
        vr = v // W
        vc = v % W
        for e in range(6):
            nr = vr + _DRS[e]
            nc = vc + _DCS[e]
            if nr < 0 or nr >= H or nc < 0 or nc >= W:
                continue
            w = nr * W + nc
            if seen[w] != 0 or passable[w] == 0:
                continue
            if dst_flag[w] != 0:
                return True
            seen[w] = 1
            queue[qn] = w
            qn += 1
    return False
