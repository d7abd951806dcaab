"""Pauli-frame Monte Carlo sampler and deterministic fault propagation.

The sampler tracks only the Pauli error frame relative to the noiseless
reference run, in bit-planes packed 64 shots per word (qubit-major).
This is valid because every detector of a generated circuit is
noiseless-deterministic (checked on first use via the tableau module).

Randomness comes from the counter-based Philox generator, keyed by
(seed, chunk) with a fixed chunk of 4096 shots, so shot s draws a fixed
random stream regardless of total shot count or worker layout.

The same frame walker, with channels replaced by forced single-Pauli
insertions in per-fault bit columns, propagates every channel component
of a circuit in one vectorized pass; this feeds the detector-error-model
extraction and the exhaustive fault injector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .program import (OP_CX, OP_DEP1, OP_DEP2, OP_H, OP_MX, OP_MZ, OP_RX,
                      OP_RZ, OP_XFLIP, OP_ZFLIP, Program, compile_program,
                      xor_refs)
from .tableau import analyze_reference

CHUNK = 4096
_MAGIC = b"SBV1"


@dataclass
class ShotBatch:
    """Packed detection events and observable flips, 64 shots per word."""

    shots: int
    num_detectors: int
    num_observables: int
    det_words: np.ndarray  # uint64 (num_detectors, ceil(shots/64))
    obs_words: np.ndarray  # uint64 (num_observables, ceil(shots/64))

    def detector_bits(self, shot: int) -> np.ndarray:
        w, b = shot >> 6, np.uint64(shot & 63)
        return ((self.det_words[:, w] >> b) & np.uint64(1)).astype(np.uint8)

    def observable_bits(self, shot: int) -> np.ndarray:
        w, b = shot >> 6, np.uint64(shot & 63)
        return ((self.obs_words[:, w] >> b) & np.uint64(1)).astype(np.uint8)

    def to_bytes(self) -> bytes:
        """Shot-major dump: header then per shot the detector bits and the
        observable bits, each padded to whole little-endian bytes."""
        head = _MAGIC + struct.pack("<QII", self.shots, self.num_detectors,
                                    self.num_observables)
        parts = [head]
        for words, n in ((self.det_words, self.num_detectors),
                         (self.obs_words, self.num_observables)):
            rows = _words_to_shot_major(words, self.shots, n)
            parts.append(rows.tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ShotBatch":
        if blob[:4] != _MAGIC:
            raise ValueError("not a shot-batch dump (bad magic)")
        shots, n_det, n_obs = struct.unpack_from("<QII", blob, 4)
        off = 4 + 16
        det_bytes = (n_det + 7) // 8
        obs_bytes = (n_obs + 7) // 8
        det_rows = np.frombuffer(blob, np.uint8, shots * det_bytes, off)
        obs_rows = np.frombuffer(blob, np.uint8, shots * obs_bytes,
                                 off + shots * det_bytes)
        return cls(
            shots=shots, num_detectors=n_det, num_observables=n_obs,
            det_words=_shot_major_to_words(det_rows.reshape(shots, det_bytes),
                                           shots, n_det),
            obs_words=_shot_major_to_words(obs_rows.reshape(shots, obs_bytes),
                                           shots, n_obs),
        )

    def save(self, path):
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ShotBatch":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def _words_to_shot_major(words: np.ndarray, shots: int, n_bits: int) -> np.ndarray:
    """(n_bits, W) uint64 -> (shots, ceil(n_bits/8)) uint8, chunked."""
    out = np.zeros((shots, (n_bits + 7) // 8), np.uint8)
    if n_bits == 0:
        return out
    as_bytes = words.view(np.uint8).reshape(n_bits, -1)
    for s0 in range(0, shots, CHUNK):
        s1 = min(s0 + CHUNK, shots)
        block = np.unpackbits(as_bytes[:, s0 // 8:(s1 + 7) // 8], axis=1,
                              bitorder="little")[:, :s1 - s0]
        out[s0:s1] = np.packbits(block.T, axis=1, bitorder="little")
    return out


def _shot_major_to_words(rows: np.ndarray, shots: int, n_bits: int) -> np.ndarray:
    W = max(1, (shots + 63) // 64)
    out = np.zeros((n_bits, W * 8), np.uint8)
    if n_bits:
        for s0 in range(0, shots, CHUNK):
            s1 = min(s0 + CHUNK, shots)
            block = np.unpackbits(rows[s0:s1], axis=1,
                                  bitorder="little")[:, :n_bits]
            out[:, s0 // 8:s0 // 8 + (s1 - s0 + 7) // 8] = np.packbits(
                block.T, axis=1, bitorder="little")
    return np.ascontiguousarray(out).view(np.uint64)


def _pack(bits: np.ndarray) -> np.ndarray:
    """Boolean (k, CHUNK) -> uint64 (k, CHUNK/64), shot s = word s//64 bit s%64."""
    return np.packbits(bits, axis=-1, bitorder="little").view(np.uint64)


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    key = np.random.SeedSequence((seed, chunk)).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _sample_chunk(prog: Program, seed: int, chunk: int):
    W = CHUNK // 64
    rng = _chunk_rng(seed, chunk)
    x = np.zeros((prog.num_qubits, W), np.uint64)
    z = np.zeros_like(x)
    meas = np.zeros((prog.num_measurements, W), np.uint64)
    kinds, off, targets, probs = (prog.kinds, prog.targ_off, prog.targets,
                                  prog.probs)
    for g in range(len(kinds)):
        k = kinds[g]
        qs = targets[off[g]:off[g + 1]]
        if k == OP_CX:
            cs, ts = qs[0::2], qs[1::2]
            x[ts] ^= x[cs]
            z[cs] ^= z[ts]
        elif k == OP_MZ:
            m = prog.meas_start[g]
            meas[m:m + len(qs)] = x[qs]
        elif k == OP_MX:
            m = prog.meas_start[g]
            meas[m:m + len(qs)] = z[qs]
        elif k == OP_RZ or k == OP_RX:
            x[qs] = 0
            z[qs] = 0
        elif k == OP_H:
            tmp = x[qs].copy()
            x[qs] = z[qs]
            z[qs] = tmp
        elif k == OP_DEP1:
            u = rng.random((len(qs), CHUNK))
            p = probs[g]
            if p > 0:
                x[qs] ^= _pack(u < 2 * p / 3)
                z[qs] ^= _pack((u >= p / 3) & (u < p))
        elif k == OP_DEP2:
            u = rng.random((len(qs) // 2, CHUNK))
            p = probs[g]
            if p > 0:
                c = np.where(u < p, np.minimum((u * (15 / p)).astype(np.int8),
                                               14) + 1, 0)
                p0, p1 = c >> 2, c & 3
                q0s, q1s = qs[0::2], qs[1::2]
                x[q0s] ^= _pack((p0 == 1) | (p0 == 2))
                z[q0s] ^= _pack(p0 >= 2)
                x[q1s] ^= _pack((p1 == 1) | (p1 == 2))
                z[q1s] ^= _pack(p1 >= 2)
        else:
            u = rng.random((len(qs), CHUNK))
            p = probs[g]
            if p > 0:
                flips = _pack(u < p)
                if k == OP_XFLIP:
                    x[qs] ^= flips
                else:
                    z[qs] ^= flips
    det = xor_refs(meas, prog.det_refs, prog.det_off)
    obs = xor_refs(meas, prog.obs_refs, prog.obs_off)
    return det, obs


def check_deterministic(circuit) -> None:
    """Raise unless every detector/observable is deterministic at p = 0."""
    if getattr(circuit, "_deterministic_ok", False):
        return
    ana = analyze_reference(circuit)
    if not ana.all_deterministic:
        bad = int((~ana.det_deterministic).sum())
        raise ValueError(
            f"circuit has {bad} nondeterministic detectors and "
            f"{int((~ana.obs_deterministic).sum())} nondeterministic "
            "observables at p=0; frame sampling is invalid")
    circuit._deterministic_ok = True


def frame_sample(circuit, shots: int, seed: int, check: bool = True,
                 program: Program | None = None) -> ShotBatch:
    """Sample detection events and observable flips for `shots` shots."""
    if check:
        check_deterministic(circuit)
    prog = program if program is not None else compile_program(circuit)
    n_chunks = (shots + CHUNK - 1) // CHUNK
    W = max(1, (shots + 63) // 64)
    det = np.zeros((prog.num_detectors, W), np.uint64)
    obs = np.zeros((prog.num_observables, W), np.uint64)
    for chunk in range(n_chunks):
        dc, oc = _sample_chunk(prog, seed, chunk)
        w0 = chunk * (CHUNK // 64)
        w1 = min(w0 + CHUNK // 64, W)
        det[:, w0:w1] = dc[:, :w1 - w0]
        obs[:, w0:w1] = oc[:, :w1 - w0]
    tail = shots & 63
    if tail:
        mask = (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
        det[:, -1] &= mask
        obs[:, -1] &= mask
    return ShotBatch(shots, prog.num_detectors, prog.num_observables, det, obs)


@dataclass
class FaultBatch:
    """Symptoms of individually injected channel components."""

    num_faults: int
    group: np.ndarray      # int32 [F] program group of each fault
    comp: np.ndarray       # int32 [F] global component index
    prob: np.ndarray       # float64 [F]
    det_words: np.ndarray  # uint64 (num_detectors, ceil(F/64))
    obs_words: np.ndarray  # uint64 (num_observables, ceil(F/64))

    def symptom(self, fault: int):
        w, b = fault >> 6, np.uint64(fault & 63)
        dets = np.nonzero((self.det_words[:, w] >> b) & np.uint64(1))[0]
        obs = np.nonzero((self.obs_words[:, w] >> b) & np.uint64(1))[0]
        return dets, obs


def propagate_components(circuit_or_program, components=None) -> FaultBatch:
    """Walk the circuit once with every selected channel component forced
    on in its own bit column; channels are otherwise disabled."""
    prog = (circuit_or_program if isinstance(circuit_or_program, Program)
            else compile_program(circuit_or_program))
    if components is None:
        components = np.arange(prog.num_fault_components, dtype=np.int64)
    else:
        components = np.asarray(components, dtype=np.int64)
    F = len(components)
    Wf = max(1, (F + 63) // 64)
    # column assignment: fault j (ordinal in `components`) -> word/bit
    col_of = np.full(prog.num_fault_components, -1, np.int64)
    col_of[components] = np.arange(F)
    comp_group = np.repeat(np.arange(len(prog.kinds), dtype=np.int32),
                           np.diff(prog.comp_off))

    x = np.zeros((prog.num_qubits, Wf), np.uint64)
    z = np.zeros_like(x)
    meas = np.zeros((prog.num_measurements, Wf), np.uint64)
    kinds, off, targets = prog.kinds, prog.targ_off, prog.targets
    for g in range(len(kinds)):
        k = kinds[g]
        qs = targets[off[g]:off[g + 1]]
        if k == OP_CX:
            cs, ts = qs[0::2], qs[1::2]
            x[ts] ^= x[cs]
            z[cs] ^= z[ts]
        elif k == OP_MZ:
            m = prog.meas_start[g]
            meas[m:m + len(qs)] = x[qs]
        elif k == OP_MX:
            m = prog.meas_start[g]
            meas[m:m + len(qs)] = z[qs]
        elif k == OP_RZ or k == OP_RX:
            x[qs] = 0
            z[qs] = 0
        elif k == OP_H:
            tmp = x[qs].copy()
            x[qs] = z[qs]
            z[qs] = tmp
        else:
            c0, c1 = prog.comp_off[g], prog.comp_off[g + 1]
            for c in range(c0, c1):
                j = col_of[c]
                if j < 0:
                    continue
                w, bit = j >> 6, np.uint64(1) << np.uint64(j & 63)
                pa, pb = prog.comp_p0[c], prog.comp_p1[c]
                if pa in (1, 2):
                    x[prog.comp_q0[c], w] ^= bit
                if pa in (2, 3):
                    z[prog.comp_q0[c], w] ^= bit
                if pb in (1, 2):
                    x[prog.comp_q1[c], w] ^= bit
                if pb in (2, 3):
                    z[prog.comp_q1[c], w] ^= bit
    det = xor_refs(meas, prog.det_refs, prog.det_off)
    obs = xor_refs(meas, prog.obs_refs, prog.obs_off)
    return FaultBatch(
        num_faults=F,
        group=comp_group[components],
        comp=components.astype(np.int32),
        prob=prog.comp_prob[components],
        det_words=det,
        obs_words=obs,
    )


def propagate_fault(circuit_or_program, component: int):
    """Symptom of one channel component: (flipped detectors, flipped obs)."""
    batch = propagate_components(circuit_or_program, [component])
    return batch.symptom(0)


def bit_columns(words: np.ndarray, n_cols: int) -> np.ndarray:
    """(n_rows, W) packed uint64 -> (n_cols, n_rows) boolean transpose."""
    n_rows = words.shape[0]
    if n_rows == 0:
        return np.zeros((n_cols, 0), bool)
    as_bytes = words.view(np.uint8).reshape(n_rows, -1)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :n_cols]
    return bits.T.astype(bool)
