"""Detector error model: fault symptoms, merging, graph, circuit distance.

Every noise-channel component of a circuit is propagated individually
(one bit column per fault) to its symptom: the set of detectors and
observables it flips. Components with identical symptoms merge into one
mechanism whose probability is the exact XOR-combination

    1 - 2 q_merged = prod_i (1 - 2 q_i),

equivalent to iterating q <- q1 (1-q2) + q2 (1-q1) and independent of
order. Mechanisms with more than two detectors are decomposed into
parts that occur as standalone graph-like symptoms, and the resulting
edge list forms a matching graph with one virtual boundary node.

Text dump format, one mechanism per line, detectors and observables in
increasing order:

    error(0.00132) D4 D17 L0
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frame import FaultBatch, propagate_components
from .program import Program, compile_program

BOUNDARY = -1  # virtual boundary node id in matching graphs


@dataclass(frozen=True)
class Mechanism:
    """A merged error mechanism: symptom plus total probability."""

    detectors: tuple
    observables: tuple
    q: float
    sources: tuple = ()  # contributing channel-component indices


@dataclass(frozen=True)
class Edge:
    """Matching-graph edge; v == BOUNDARY for boundary edges."""

    u: int
    v: int
    q: float
    weight: float
    obs_mask: int
    sources: tuple = ()


@dataclass(frozen=True)
class MatchingGraph:
    num_detectors: int
    edges: tuple

    @property
    def num_nodes(self) -> int:
        return self.num_detectors + 1


@dataclass(frozen=True)
class CircuitDistance:
    value: int
    witness: tuple  # minimal set of mechanisms achieving it


def _merge_q(qs) -> float:
    prod = 1.0
    for q in qs:
        prod *= 1.0 - 2.0 * q
    return (1.0 - prod) / 2.0


def extract_dem(circuit_or_program, batch: FaultBatch | None = None) -> list:
    """Propagate every channel component and merge identical symptoms."""
    prog = (circuit_or_program if isinstance(circuit_or_program, Program)
            else compile_program(circuit_or_program))
    if batch is None:
        batch = propagate_components(prog)
    F = batch.num_faults
    if F == 0:
        return []
    n_det, n_obs = prog.num_detectors, prog.num_observables

    # fault-major packed symptom rows for grouping
    def fault_major(words, n_bits):
        rows = np.zeros((F, max(1, (n_bits + 63) // 64) * 8), np.uint8)
        if n_bits:
            as_bytes = words.view(np.uint8).reshape(n_bits, -1)
            for f0 in range(0, F, 4096):
                f1 = min(f0 + 4096, F)
                blk = np.unpackbits(as_bytes[:, f0 // 8:(f1 + 7) // 8], axis=1,
                                    bitorder="little")[:, :f1 - f0]
                rows[f0:f1, :(n_bits + 7) // 8] = np.packbits(
                    blk.T, axis=1, bitorder="little")
        return rows.view(np.uint64)

    det_rows = fault_major(batch.det_words, n_det)
    obs_rows = fault_major(batch.obs_words, n_obs)
    key = np.concatenate([det_rows, obs_rows], axis=1)
    order = np.lexsort(key.T[::-1])
    sorted_key = key[order]
    new_group = np.empty(F, bool)
    new_group[0] = True
    new_group[1:] = (sorted_key[1:] != sorted_key[:-1]).any(axis=1)
    starts = np.nonzero(new_group)[0]
    ends = np.append(starts[1:], F)

    mechanisms = []
    for s, e in zip(starts, ends):
        members = order[s:e]
        f = int(members[0])
        dets, obs = batch.symptom(f)
        if len(dets) == 0 and len(obs) == 0:
            continue
        q = _merge_q(batch.prob[members])
        if q == 0.0:
            continue
        if q >= 0.5:
            raise ValueError(
                f"merged mechanism probability {q} >= 0.5 is degenerate")
        mechanisms.append(Mechanism(
            detectors=tuple(int(x) for x in dets),
            observables=tuple(int(x) for x in obs),
            q=q,
            sources=tuple(int(batch.comp[m]) for m in members),
        ))
    mechanisms.sort(key=lambda m: (m.detectors, m.observables))
    return mechanisms


class DecompositionError(ValueError):
    """A mechanism's symptom cannot be split into existing graph-like parts."""


def decompose_graphlike(mechanisms) -> list:
    """Split every >2-detector mechanism into parts whose detector sets
    occur as standalone graph-like symptoms, preserving total observable
    parity. Each part keeps the parent's probability."""
    # existing graph-like symptoms: detector set -> (q, obs mask)
    known = {}
    for m in mechanisms:
        if len(m.detectors) <= 2:
            k = m.detectors
            if k not in known or m.q > known[k][0]:
                known[k] = (m.q, m.observables)

    def split(dets, target_obs):
        """Partition dets into known parts, total obs parity == target."""
        if not dets:
            return [] if not target_obs else None
        first = dets[0]
        rest = dets[1:]
        options = []
        for other in rest:
            k = (first, other) if first < other else (other, first)
            if k in known:
                options.append((known[k][0], k))
        options.sort(key=lambda o: (-o[0], o[1]))
        if (first,) in known:
            options.append((known[(first,)][0], (first,)))
        for _, part in options:
            remaining = tuple(x for x in dets if x not in part)
            sub_obs = _xor(target_obs, known[part][1])
            tail = split(remaining, sub_obs)
            if tail is not None:
                return [part] + tail
        return None

    out = []
    for m in mechanisms:
        if len(m.detectors) <= 2:
            out.append(m)
            continue
        parts = split(m.detectors, m.observables)
        if parts is None:
            raise DecompositionError(
                f"mechanism D{list(m.detectors)} L{list(m.observables)} "
                "(q={:.3g}) has no graph-like decomposition".format(m.q))
        for part in parts:
            out.append(Mechanism(part, known[part][1], m.q, m.sources))
    return out


def _xor(a: tuple, b: tuple) -> tuple:
    return tuple(sorted(set(a) ^ set(b)))


def build_matching_graph(mechanisms, num_detectors: int | None = None) -> MatchingGraph:
    """Merge parallel graph-like mechanisms into weighted edges.

    Parallel mechanisms merge probabilities regardless of observable
    mask; the edge takes the observable mask of its most probable
    contributor, so rare conflicting-mask faults become irreducible
    logical errors, as for any matching decoder.
    """
    n_det = num_detectors or 0
    groups: dict = {}
    for m in mechanisms:
        if len(m.detectors) > 2:
            raise ValueError("mechanism with >2 detectors; decompose first")
        if not m.detectors:
            continue  # boundary-boundary mechanisms carry no matching info
        n_det = max(n_det, max(m.detectors) + 1)
        if len(m.detectors) == 2:
            u, v = m.detectors
        else:
            u, v = m.detectors[0], BOUNDARY
        groups.setdefault((u, v), []).append(m)
    edges = []
    for (u, v), ms in sorted(groups.items()):
        q = _merge_q([m.q for m in ms])
        if q >= 0.5:
            raise ValueError(f"edge ({u},{v}) has degenerate probability {q}")
        best = max(ms, key=lambda m: m.q)
        mask = 0
        for o in best.observables:
            mask |= 1 << o
        edges.append(Edge(
            u=u, v=v, q=q, weight=math.log((1.0 - q) / q), obs_mask=mask,
            sources=tuple(s for m in ms for s in m.sources)))
    return MatchingGraph(num_detectors=n_det, edges=tuple(edges))


def circuit_distance(mechanisms) -> CircuitDistance:
    """Minimum number of mechanisms flipping the observable with no net
    detector symptom: shortest closed boundary walk with odd observable
    parity, found by breadth-first search over (node, parity) states."""
    edges = []
    for i, m in enumerate(mechanisms):
        if len(m.detectors) > 2:
            raise ValueError("mechanism with >2 detectors; decompose first")
        parity = len(m.observables) & 1
        if len(m.detectors) == 2:
            edges.append((m.detectors[0], m.detectors[1], parity, i))
        elif len(m.detectors) == 1:
            edges.append((m.detectors[0], BOUNDARY, parity, i))
        elif parity:
            edges.append((BOUNDARY, BOUNDARY, 1, i))

    adj: dict = {}
    for u, v, parity, i in edges:
        adj.setdefault(u, []).append((v, parity, i))
        adj.setdefault(v, []).append((u, parity, i))

    start = (BOUNDARY, 0)
    goal = (BOUNDARY, 1)
    prev: dict = {start: None}
    frontier = [start]
    while frontier and goal not in prev:
        nxt = []
        for state in frontier:
            node, par = state
            for v, parity, i in adj.get(node, ()):
                ns = (v, par ^ parity)
                if ns not in prev:
                    prev[ns] = (state, i)
                    nxt.append(ns)
        frontier = nxt
    if goal not in prev:
        raise ValueError("observable cannot be flipped: malformed model")
    witness_ids = []
    state = goal
    while prev[state] is not None:
        state, i = prev[state]
        witness_ids.append(i)
    witness = tuple(mechanisms[i] for i in reversed(witness_ids))
    dets: set = set()
    obs: set = set()
    for m in witness:
        dets ^= set(m.detectors)
        obs ^= set(m.observables)
    assert not dets and len(obs) % 2 == 1, "witness symptom not logical"
    return CircuitDistance(value=len(witness), witness=witness)


def dump_dem(mechanisms) -> str:
    lines = []
    for m in mechanisms:
        parts = [f"error({m.q:.6g})"]
        parts += [f"D{i}" for i in m.detectors]
        parts += [f"L{i}" for i in m.observables]
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def sample_dem(mechanisms, num_detectors: int, num_observables: int,
               shots: int, seed: int):
    """Sample detection events directly from a mechanism list; returns
    (det_words, obs_words) packed 64 shots per word like frame_sample."""
    rng = np.random.Generator(np.random.Philox(
        key=np.random.SeedSequence((seed, 0xDE)).generate_state(2, np.uint64)))
    W = max(1, (shots + 63) // 64)
    det = np.zeros((num_detectors, W), np.uint64)
    obs = np.zeros((num_observables, W), np.uint64)
    qs = np.array([m.q for m in mechanisms])
    for s0 in range(0, shots, 4096):
        s1 = min(s0 + 4096, shots)
        u = rng.random((len(mechanisms), 4096))
        fired = np.packbits(u < qs[:, None], axis=1,
                            bitorder="little").view(np.uint64)
        w0 = s0 // 64
        span = (s1 - s0 + 63) // 64
        for i, m in enumerate(mechanisms):
            for di in m.detectors:
                det[di, w0:w0 + span] ^= fired[i, :span]
            for oi in m.observables:
                obs[oi, w0:w0 + span] ^= fired[i, :span]
    tail = shots & 63
    if tail:
        mask = (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
        det[:, -1] &= mask
        obs[:, -1] &= mask
    return det, obs
