"""Minimum-weight matching decoder over a detector matching graph.

The decoder precomputes, once per graph, the all-pairs shortest-path
metric among detectors (boundary excluded) and each detector's shortest
path to the boundary, both with the accumulated observable mask along
the path. Per shot, the fired detectors form a small complete instance
with folded weights

    W[i, j] = min(direct(i, j), to_boundary(i) + to_boundary(j))

plus one dummy node standing for the boundary when the defect count is
odd; a minimum-weight perfect matching of this instance is an exact
minimum-weight correction, because any two defects routed through the
boundary pair independently. Disconnected sectors of the graph are
solved as separate instances for speed; the fold keeps this exact.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse.csgraph import connected_components, dijkstra

from .blossom import _solve, min_weight_perfect_matching
from .dem import BOUNDARY, MatchingGraph
from .frame import CHUNK, ShotBatch

_QUANT_BITS = 40


@njit(cache=True)
def _decode_cluster(mem, m, Dq, bq, P, Pb):
    """Minimum-weight matching mask of one defect cluster (ascending ids)."""
    if m == 1:
        return Pb[mem[0]]
    if m == 2:
        a, b = mem[0], mem[1]
        if bq[a] + bq[b] < Dq[a, b]:
            return Pb[a] ^ Pb[b]
        return P[a, b]
    M = m + (m & 1)
    W = np.zeros((M, M), np.int64)
    via = np.zeros((m, m), np.uint8)
    wmax = np.int64(0)
    for i in range(m):
        a = mem[i]
        for j in range(i + 1, m):
            b = mem[j]
            bsum = bq[a] + bq[b]
            if bsum < Dq[a, b]:
                w = bsum
                via[i, j] = 1
            else:
                w = Dq[a, b]
            W[i, j] = w
            W[j, i] = w
            if w > wmax:
                wmax = w
    if M > m:
        for i in range(m):
            w = bq[mem[i]]
            W[i, m] = w
            W[m, i] = w
            if w > wmax:
                wmax = w
    K = wmax + 1
    W2 = np.empty((M, M), np.int64)
    for i in range(M):
        for j in range(M):
            W2[i, j] = 0 if i == j else 2 * (K - W[i, j])
    mate = _solve(W2)[0]
    mask = np.uint64(0)
    for i in range(m):
        j = mate[i]
        if j < i:
            continue
        if j == m:
            mask ^= Pb[mem[i]]
        elif via[i, j]:
            mask ^= Pb[mem[i]] ^ Pb[mem[j]]
        else:
            mask ^= P[mem[i], mem[j]]
    return mask


@njit(cache=True)
def _batch_decode(det_words, n_det, shots, Dq, bq, P, Pb, comp):
    """Predicted mask per shot; defects split into independent clusters.

    Two defects must be clustered only if pairing them directly can beat
    routing both to the boundary, i.e. Dq < bq + bq within one graph
    component; everything else decomposes exactly. Each cluster then
    decodes like the one-shot path (boundary folds, dummy node for odd
    counts).
    """
    preds = np.zeros(shots, np.uint64)
    dd = np.empty(n_det, np.int64)
    par = np.empty(n_det, np.int64)
    mem = np.empty(n_det, np.int64)
    for s in range(shots):
        w = s >> 6
        b = np.uint64(s & 63)
        k = 0
        for dnum in range(n_det):
            if (det_words[dnum, w] >> b) & np.uint64(1):
                dd[k] = dnum
                k += 1
        if k == 0:
            continue
        for i in range(k):
            par[i] = i
        for i in range(k):
            a = dd[i]
            for j in range(i + 1, k):
                c = dd[j]
                if comp[a] == comp[c] and Dq[a, c] < bq[a] + bq[c]:
                    ri = i
                    while par[ri] != ri:
                        ri = par[ri]
                    rj = j
                    while par[rj] != rj:
                        rj = par[rj]
                    if ri != rj:
                        par[max(ri, rj)] = min(ri, rj)
        mask = np.uint64(0)
        for r in range(k):
            if par[r] != r:
                continue
            m = 0
            for i in range(k):
                ri = i
                while par[ri] != ri:
                    ri = par[ri]
                par[i] = ri
                if ri == r:
                    mem[m] = dd[i]
                    m += 1
            mask ^= _decode_cluster(mem, m, Dq, bq, P, Pb)
        preds[s] = mask
    return preds


@njit(cache=True)
def _pmask(P, x, y):
    """Path mask with canonical (low, high) indexing.

    Under weight ties the shortest-path trees from x and from y may pick
    different equal-length paths, so P is not symmetric; the decoder
    always indexes with sorted defect ids and the scan must match.
    """
    if x < y:
        return P[x, y]
    return P[y, x]


@njit(cache=True)
def _scan_pairs(e0, e1, obs, Dq, bq, P, Pb, bad, amb):
    """Decode the union of every mechanism pair against the folded metric.

    Each mechanism is an edge (e0, e1) with e1 == -1 for boundary edges;
    the pair union has at most 4 defects after cancellation. For 3 or 4
    defects all three pairings (with boundary folds) are enumerated; a
    cost tie between pairings with different observable masks is deferred
    to the caller via `amb`, everything else is settled here. Returns
    (num_bad, num_ambiguous); rows beyond the buffer caps are counted
    but not stored.
    """
    M = e0.shape[0]
    nbad = 0
    namb = 0
    u = np.empty(4, np.int64)
    for i in range(M):
        a0, a1, oi = e0[i], e1[i], obs[i]
        for j in range(i + 1, M):
            b0, b1 = e0[j], e1[j]
            k = 0
            if a0 >= 0 and a0 != b0 and a0 != b1:
                u[k] = a0
                k += 1
            if a1 >= 0 and a1 != b0 and a1 != b1:
                u[k] = a1
                k += 1
            if b0 >= 0 and b0 != a0 and b0 != a1:
                u[k] = b0
                k += 1
            if b1 >= 0 and b1 != a0 and b1 != a1:
                u[k] = b1
                k += 1
            want = oi ^ obs[j]
            if k == 0:
                pred = np.uint64(0)
            elif k == 1:
                pred = Pb[u[0]]
            elif k == 2:
                x, y = u[0], u[1]
                if bq[x] + bq[y] < Dq[x, y]:
                    pred = Pb[x] ^ Pb[y]
                else:
                    pred = _pmask(P, x, y)
            else:
                best = np.int64(1) << np.int64(60)
                bm = np.uint64(0)
                settled = True
                for s in range(3):
                    if s == 0:
                        x, y, z, w = u[0], u[1], u[2], u[3]
                    elif s == 1:
                        x, y, z, w = u[0], u[2], u[1], u[3]
                    elif k == 4:
                        x, y, z, w = u[0], u[3], u[1], u[2]
                    else:
                        x, y, z, w = u[1], u[2], u[0], u[3]
                    c = bq[x] + bq[y]
                    if c < Dq[x, y]:
                        cost = c
                        m = Pb[x] ^ Pb[y]
                    else:
                        cost = Dq[x, y]
                        m = _pmask(P, x, y)
                    if k == 4:
                        c = bq[z] + bq[w]
                        if c < Dq[z, w]:
                            cost += c
                            m ^= Pb[z] ^ Pb[w]
                        else:
                            cost += Dq[z, w]
                            m ^= _pmask(P, z, w)
                    else:
                        cost += bq[z]
                        m ^= Pb[z]
                    if cost < best:
                        best = cost
                        bm = m
                        settled = True
                    elif cost == best and m != bm:
                        settled = False
                if not settled:
                    if namb < amb.shape[0]:
                        amb[namb, 0] = i
                        amb[namb, 1] = j
                    namb += 1
                    continue
                pred = bm
            if pred != want:
                if nbad < bad.shape[0]:
                    bad[nbad, 0] = i
                    bad[nbad, 1] = j
                nbad += 1
    return nbad, namb


def _path_masks(dist_row, pred_row, source, edge_mask):
    """Observable masks along a shortest-path tree, by increasing distance."""
    n = len(dist_row)
    masks = np.zeros(n, np.uint64)
    order = np.argsort(dist_row)
    for j in order:
        p = pred_row[j]
        if j == source or p < 0:
            continue
        masks[j] = masks[p] ^ edge_mask[(min(p, j), max(p, j))]
    return masks


class Matcher:
    """Decodes detection-event sets against a fixed matching graph."""

    def __init__(self, graph: MatchingGraph):
        n = graph.num_detectors
        self.num_detectors = n
        # keep only the lightest edge per endpoint pair: scipy sums
        # duplicate entries, and heavier parallels never win anyway
        best: dict = {}
        for e in graph.edges:
            u, v = e.u, (n if e.v == BOUNDARY else e.v)
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key not in best or e.weight < best[key].weight:
                best[key] = e
        rows, cols, wts = [], [], []
        edge_mask = {}
        for (u, v), e in best.items():
            rows += [u, v]
            cols += [v, u]
            wts += [e.weight, e.weight]
            edge_mask[(u, v)] = np.uint64(e.obs_mask)
        adj = sp.csr_matrix((wts, (rows, cols)), shape=(n + 1, n + 1))
        adj_det = adj[:n, :n]

        D, pred = dijkstra(adj_det, directed=False, return_predecessors=True)
        P = np.zeros((n, n), np.uint64)
        for i in range(n):
            P[i] = _path_masks(D[i], pred[i], i, edge_mask)
        db, predb = dijkstra(adj, directed=False, indices=n,
                             return_predecessors=True)
        Pb = _path_masks(db, predb, n, edge_mask)[:n]
        b = db[:n]

        self.component = connected_components(adj_det,
                                              directed=False)[1].astype(np.int64)
        finite = D[np.isfinite(D)]
        wmax = max(float(finite.max(initial=0.0)),
                   float(b[np.isfinite(b)].max(initial=0.0)), 1e-30)
        scale = float(1 << _QUANT_BITS) / (4.0 * wmax)
        big = np.int64(1) << np.int64(_QUANT_BITS + 2)
        self._Dq = np.where(np.isfinite(D), (D * scale).round(), big
                            ).astype(np.int64)
        self._bq = np.where(np.isfinite(b), (b * scale).round(), big
                            ).astype(np.int64)
        self._P = P
        self._Pb = Pb

    def decode_one(self, defects) -> int:
        """Predicted observable mask for one set of fired detectors."""
        defects = np.asarray(defects, np.int64)
        mask = np.uint64(0)
        if defects.size == 0:
            return 0
        comps = self.component[defects]
        for c in np.unique(comps):
            mask ^= self._decode_group(defects[comps == c])
        return int(mask)

    def _decode_group(self, dd: np.ndarray) -> np.uint64:
        k = len(dd)
        if k == 2:
            i, j = dd
            if self._bq[i] + self._bq[j] < self._Dq[i, j]:
                return self._Pb[i] ^ self._Pb[j]
            return self._P[i, j]
        direct = self._Dq[np.ix_(dd, dd)]
        bsum = self._bq[dd][:, None] + self._bq[dd][None, :]
        via = bsum < direct
        W = np.where(via, bsum, direct)
        if k % 2 == 1:
            Wfull = np.zeros((k + 1, k + 1), np.int64)
            Wfull[:k, :k] = W
            Wfull[:k, k] = self._bq[dd]
            Wfull[k, :k] = self._bq[dd]
            W = Wfull
        mate = min_weight_perfect_matching(W)
        mask = np.uint64(0)
        for i in range(k):
            j = mate[i]
            if j < i:
                continue
            if j == k:
                mask ^= self._Pb[dd[i]]
            elif via[i, j]:
                mask ^= self._Pb[dd[i]] ^ self._Pb[dd[j]]
            else:
                mask ^= self._P[dd[i], dd[j]]
        return mask

    def check_pairs(self, e0, e1, obs):
        """Verify every two-mechanism union decodes to its observable flip.

        Mechanism i is the detector pair (e0[i], e1[i]), e1 == -1 for a
        boundary edge, with observable mask obs[i]. Pairings that tie in
        weight with conflicting masks are re-decoded with decode_one, so
        verdicts match the shot decoder exactly. Returns (total number of
        failing pairs, (n, 2) index array of the first failures).
        """
        e0 = np.ascontiguousarray(e0, np.int64)
        e1 = np.ascontiguousarray(e1, np.int64)
        obs = np.ascontiguousarray(obs, np.uint64)
        bad = np.empty((1 << 16, 2), np.int64)
        amb = np.empty((1 << 16, 2), np.int64)
        nbad, namb = _scan_pairs(e0, e1, obs, self._Dq, self._bq,
                                 self._P, self._Pb, bad, amb)
        if namb > len(amb):
            raise ValueError(f"{namb} tied pairings exceed the resolve buffer")
        rows = [bad[:min(nbad, len(bad))]]
        for i, j in amb[:namb]:
            dd = {int(e0[i]), int(e1[i])} ^ {int(e0[j]), int(e1[j])}
            dd.discard(-1)
            defects = np.array(sorted(dd), np.int64)
            if int(self.decode_one(defects)) != int(obs[i] ^ obs[j]):
                rows.append(np.array([[i, j]], np.int64))
                nbad += 1
        return nbad, np.concatenate(rows, axis=0)

    def decode_batch(self, batch: ShotBatch) -> np.ndarray:
        """Predicted observable mask per shot (uint64).

        Shots decode through the clustered kernel: defect sets split into
        independent proximity clusters (exact in weight; among equal-
        weight corrections the pick can differ from decode_one when a
        direct pairing exactly ties its boundary detour).
        """
        n, shots = self.num_detectors, batch.shots
        if n == 0:
            return np.zeros(shots, np.uint64)
        return _batch_decode(batch.det_words, n, shots, self._Dq, self._bq,
                             self._P, self._Pb, self.component)

    def failures(self, batch: ShotBatch) -> np.ndarray:
        """Per-shot logical failure flags: prediction XOR actual != 0."""
        if batch.num_observables > 64:
            raise ValueError("at most 64 observables supported")
        pred = self.decode_batch(batch)
        n_obs, shots = batch.num_observables, batch.shots
        actual = np.zeros(shots, np.uint64)
        if n_obs:
            as_bytes = batch.obs_words.view(np.uint8).reshape(n_obs, -1)
            for s0 in range(0, shots, CHUNK):
                s1 = min(s0 + CHUNK, shots)
                block = np.unpackbits(as_bytes[:, s0 // 8:(s1 + 7) // 8],
                                      axis=1, bitorder="little")[:, :s1 - s0]
                weights = np.uint64(1) << np.arange(n_obs, dtype=np.uint64)
                actual[s0:s1] = (block.astype(np.uint64)
                                 * weights[:, None]).sum(axis=0)
        return pred != actual
