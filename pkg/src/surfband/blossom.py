"""Minimum-weight perfect matching on small dense graphs.

Primal-dual blossom algorithm over a complete graph with integer
weights. Internally the problem is flipped to maximum-weight perfect
matching (W' = K - W with K = max(W) + 1; every perfect matching has
exactly n/2 edges, so the optima coincide) and all dual variables are
kept doubled so that every dual adjustment is integral:

    slack2(u, v) = y2[u] + y2[v] + sum_{B containing u,v} z2[B] - W2[u, v]

with W2 even and all y2 initialised equal. Vertices acquire labels only
across tight edges, so labelled vertices always share parity and the
outer-outer and blossom adjustments (slack2/2, z2/2) stay integral.

Node ids 0..n-1 are vertices, n..2n-1 are blossom slots. Defect counts
per decoded shot are small, so delta rounds simply rescan all pairs
instead of maintaining best-edge caches.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NONE = -1


@njit(cache=True)
def _find_child(B, v, blp):
    """Immediate child of blossom B containing vertex v."""
    x = v
    while blp[x] != B:
        x = blp[x]
        if x == NONE:
            raise ValueError("vertex not inside blossom")
    return x


@njit(cache=True)
def _make_base(B0, v0, n, blp, base, child, ch_eu, ch_ev, ch_cnt, mate,
               stk_b, stk_v, buf_c, buf_u, buf_v):
    """Re-root blossom B0 (and nested blossoms) so v0 becomes its base."""
    sp = 0
    stk_b[sp] = B0
    stk_v[sp] = v0
    sp += 1
    while sp > 0:
        sp -= 1
        B = stk_b[sp]
        v = stk_v[sp]
        if B < n:
            continue
        k = ch_cnt[B]
        entry = _find_child(B, v, blp)
        r = 0
        for j in range(k):
            if child[B, j] == entry:
                r = j
                break
        if r != 0:
            for j in range(k):
                buf_c[j] = child[B, (r + j) % k]
                buf_u[j] = ch_eu[B, (r + j) % k]
                buf_v[j] = ch_ev[B, (r + j) % k]
            for j in range(k):
                child[B, j] = buf_c[j]
                ch_eu[B, j] = buf_u[j]
                ch_ev[B, j] = buf_v[j]
            # re-pair the cycle: odd edges matched, new base child free
            for j in range(1, k - 1, 2):
                eu = ch_eu[B, j]
                ev = ch_ev[B, j]
                mate[eu] = ev
                mate[ev] = eu
                stk_b[sp] = child[B, j]
                stk_v[sp] = eu
                sp += 1
                stk_b[sp] = child[B, j + 1]
                stk_v[sp] = ev
                sp += 1
        stk_b[sp] = entry
        stk_v[sp] = v
        sp += 1
        base[B] = v


@njit(cache=True)
def _solve(W2):
    n = W2.shape[0]
    cap = 2 * n
    y2 = np.empty(n, np.int64)
    mate = np.full(n, NONE, np.int64)
    top = np.empty(n, np.int64)
    blp = np.full(cap, NONE, np.int64)
    base = np.full(cap, NONE, np.int64)
    z2 = np.zeros(cap, np.int64)
    S = np.full(cap, NONE, np.int64)
    pa_u = np.full(cap, NONE, np.int64)
    pa_v = np.full(cap, NONE, np.int64)
    child = np.full((cap, n + 1), NONE, np.int64)
    ch_eu = np.full((cap, n + 1), NONE, np.int64)
    ch_ev = np.full((cap, n + 1), NONE, np.int64)
    ch_cnt = np.zeros(cap, np.int64)
    memb = np.full((cap, max(n, 1)), NONE, np.int64)
    memb_cnt = np.zeros(cap, np.int64)
    alive = np.zeros(cap, np.uint8)
    free_slots = np.empty(n, np.int64)
    stamp = np.zeros(cap, np.int64)
    # scratch for _make_base
    stk_b = np.empty(8 * (n + 2), np.int64)
    stk_v = np.empty(8 * (n + 2), np.int64)
    buf_c = np.empty(n + 1, np.int64)
    buf_u = np.empty(n + 1, np.int64)
    buf_v = np.empty(n + 1, np.int64)
    px = np.empty(cap, np.int64)
    py = np.empty(cap, np.int64)

    y0 = np.int64(0)
    for u in range(n):
        for v in range(n):
            if W2[u, v] > 2 * y0:
                y0 = W2[u, v] // 2
    for v in range(n):
        y2[v] = y0
        top[v] = v
        base[v] = v
        memb[v, 0] = v
        memb_cnt[v] = 1
        alive[v] = 1
    nfree = 0
    for s in range(n, cap):
        free_slots[nfree] = s
        nfree += 1
    stamp_ctr = np.int64(0)

    for _phase in range(n // 2):
        # build the alternating forest: free bases become outer roots
        for t in range(cap):
            S[t] = NONE
            pa_u[t] = NONE
            pa_v[t] = NONE
        for t in range(cap):
            if alive[t] and blp[t] == NONE and mate[base[t]] == NONE:
                S[t] = 1
        augmented = False
        rounds = 0
        while not augmented:
            # scan all pairs for tight edges out of outer vertices
            progress = True
            while progress and not augmented:
                progress = False
                for u in range(n):
                    U = top[u]
                    if S[U] != 1:
                        continue
                    for v in range(n):
                        V = top[v]
                        if V == U:
                            continue
                        if y2[u] + y2[v] - W2[u, v] != 0:
                            continue
                        if S[V] == NONE:
                            # grow: V inner, its matched partner outer
                            S[V] = 0
                            pa_u[V] = u
                            pa_v[V] = v
                            bv = base[V]
                            m = mate[bv]
                            M = top[m]
                            S[M] = 1
                            pa_u[M] = bv
                            pa_v[M] = m
                            progress = True
                        elif S[V] == 1:
                            # find least common ancestor among outer nodes
                            stamp_ctr += 1
                            cur = U
                            while True:
                                stamp[cur] = stamp_ctr
                                if pa_u[cur] == NONE:
                                    break
                                P = top[pa_u[cur]]
                                cur = top[pa_u[P]]
                            R = NONE
                            cur = V
                            while True:
                                if stamp[cur] == stamp_ctr:
                                    R = cur
                                    break
                                if pa_u[cur] == NONE:
                                    break
                                P = top[pa_u[cur]]
                                cur = top[pa_u[P]]
                            if R == NONE:
                                # augment along both tree paths
                                for xx, yy in ((u, v), (v, u)):
                                    curt = top[xx]
                                    _make_base(curt, xx, n, blp, base, child,
                                               ch_eu, ch_ev, ch_cnt, mate,
                                               stk_b, stk_v, buf_c, buf_u,
                                               buf_v)
                                    mate[xx] = yy
                                    while pa_u[curt] != NONE:
                                        P = top[pa_u[curt]]
                                        a2 = pa_u[P]
                                        b2 = pa_v[P]
                                        _make_base(P, b2, n, blp, base, child,
                                                   ch_eu, ch_ev, ch_cnt, mate,
                                                   stk_b, stk_v, buf_c, buf_u,
                                                   buf_v)
                                        mate[b2] = a2
                                        G = top[a2]
                                        _make_base(G, a2, n, blp, base, child,
                                                   ch_eu, ch_ev, ch_cnt, mate,
                                                   stk_b, stk_v, buf_c, buf_u,
                                                   buf_v)
                                        mate[a2] = b2
                                        curt = G
                                augmented = True
                                break
                            # shrink the odd cycle into a new blossom
                            npx = 0
                            cur = U
                            while cur != R:
                                px[npx] = cur
                                npx += 1
                                cur = top[pa_u[cur]]
                            npy = 0
                            cur = V
                            while cur != R:
                                py[npy] = cur
                                npy += 1
                                cur = top[pa_u[cur]]
                            if nfree == 0:
                                raise ValueError("blossom slots exhausted")
                            nfree -= 1
                            B = free_slots[nfree]
                            kk = 0
                            child[B, 0] = R
                            for i in range(npx - 1, -1, -1):
                                ch_eu[B, kk] = pa_u[px[i]]
                                ch_ev[B, kk] = pa_v[px[i]]
                                kk += 1
                                child[B, kk] = px[i]
                            ch_eu[B, kk] = u
                            ch_ev[B, kk] = v
                            for i in range(npy):
                                kk += 1
                                child[B, kk] = py[i]
                                ch_eu[B, kk] = pa_v[py[i]]
                                ch_ev[B, kk] = pa_u[py[i]]
                            ch_cnt[B] = kk + 1
                            mc = 0
                            for j in range(kk + 1):
                                c = child[B, j]
                                blp[c] = B
                                for i in range(memb_cnt[c]):
                                    w = memb[c, i]
                                    memb[B, mc] = w
                                    mc += 1
                                    top[w] = B
                            memb_cnt[B] = mc
                            alive[B] = 1
                            z2[B] = 0
                            S[B] = 1
                            pa_u[B] = pa_u[R]
                            pa_v[B] = pa_v[R]
                            base[B] = base[R]
                            progress = True
                        break_to_rescan = (progress or augmented)
                        if break_to_rescan:
                            break
                    if progress or augmented:
                        break
            if augmented:
                break
            # dual adjustment
            INF = np.int64(1) << 62
            d2 = INF
            d3 = INF
            d4 = INF
            arg4 = NONE
            for u in range(n):
                if S[top[u]] != 1:
                    continue
                for v in range(n):
                    V = top[v]
                    if V == top[u]:
                        continue
                    sl = y2[u] + y2[v] - W2[u, v]
                    if S[V] == NONE:
                        if sl < d2:
                            d2 = sl
                    elif S[V] == 1:
                        if sl // 2 < d3:
                            if sl % 2 != 0:
                                raise ValueError("odd outer-outer slack")
                            d3 = sl // 2
            for t in range(n, cap):
                if alive[t] and blp[t] == NONE and S[t] == 0:
                    if z2[t] // 2 < d4:
                        if z2[t] % 2 != 0:
                            raise ValueError("odd blossom dual")
                        d4 = z2[t] // 2
                        arg4 = t
            delta = d2
            if d3 < delta:
                delta = d3
            if d4 < delta:
                delta = d4
            if delta >= INF or delta < 0:
                raise ValueError("no feasible dual adjustment")
            for t in range(cap):
                if not alive[t] or blp[t] != NONE or S[t] == NONE:
                    continue
                if S[t] == 1:
                    for i in range(memb_cnt[t]):
                        y2[memb[t, i]] -= delta
                    if t >= n:
                        z2[t] += 2 * delta
                else:
                    for i in range(memb_cnt[t]):
                        y2[memb[t, i]] += delta
                    if t >= n:
                        z2[t] -= 2 * delta
            if delta == d4 and arg4 != NONE and z2[arg4] == 0:
                # expand the inner blossom whose dual hit zero
                B = arg4
                k = ch_cnt[B]
                ev_ = pa_v[B]
                pu_ = pa_u[B]
                entry = _find_child(B, ev_, blp)
                r = 0
                for j in range(k):
                    if child[B, j] == entry:
                        r = j
                        break
                for j in range(k):
                    c = child[B, j]
                    blp[c] = NONE
                    S[c] = NONE
                    pa_u[c] = NONE
                    pa_v[c] = NONE
                    for i in range(memb_cnt[c]):
                        top[memb[c, i]] = c
                # relabel the even-length path entry -> base child
                if r % 2 == 0:
                    m = r  # walk down: positions r, r-1, ..., 0
                else:
                    m = k - r  # walk up: positions r, r+1, ..., k (= 0)
                S[entry] = 0
                pa_u[entry] = pu_
                pa_v[entry] = ev_
                for t in range(1, m + 1):
                    if r % 2 == 0:
                        j = r - t  # edge j connects child[j] -- child[j+1]
                        node = child[B, j]
                        S[node] = 0 if t % 2 == 0 else 1
                        pa_u[node] = ch_ev[B, j]
                        pa_v[node] = ch_eu[B, j]
                    else:
                        j = (r + t - 1) % k
                        node = child[B, (r + t) % k]
                        S[node] = 0 if t % 2 == 0 else 1
                        pa_u[node] = ch_eu[B, j]
                        pa_v[node] = ch_ev[B, j]
                alive[B] = 0
                ch_cnt[B] = 0
                memb_cnt[B] = 0
                S[B] = NONE
                pa_u[B] = NONE
                pa_v[B] = NONE
                base[B] = NONE
                free_slots[nfree] = B
                nfree += 1
            rounds += 1
            if rounds > 16 * n + 64:
                raise ValueError("dual adjustment failed to converge")
    return mate, y2, z2, blp, memb, memb_cnt, alive, top


def min_weight_perfect_matching(weights: np.ndarray) -> np.ndarray:
    """Minimum-weight perfect matching of a complete graph.

    weights: (n, n) symmetric int64 array, n even. Returns mate[v]."""
    mate, _cert = solve_with_certificate(weights)
    return mate


def solve_with_certificate(weights: np.ndarray):
    """As min_weight_perfect_matching, also returning the dual
    certificate (W2, y2, z2, blossom member lists) for the transformed
    maximisation problem."""
    W = np.asarray(weights, np.int64)
    n = W.shape[0]
    if n == 0:
        return np.empty(0, np.int64), (np.empty((0, 0), np.int64),
                                       np.empty(0, np.int64), [])
    if n % 2 != 0:
        raise ValueError("perfect matching needs an even vertex count")
    if (W != W.T).any():
        raise ValueError("weight matrix must be symmetric")
    K = np.int64(W.max()) + 1
    W2 = 2 * (K - W)
    np.fill_diagonal(W2, 0)
    mate, y2, z2, blp, memb, memb_cnt, alive, top = _solve(W2)
    blossoms = []
    for t in range(n, 2 * n):
        if alive[t]:
            blossoms.append((sorted(int(x) for x in memb[t, :memb_cnt[t]]),
                             int(z2[t])))
    return mate, (W2, y2, blossoms)
