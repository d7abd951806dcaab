"""Stabilizer-tableau oracle and noiseless-determinism analysis.

Two engines over the compiled program form:

* an exact CHP simulator (destabilizer/stabilizer tableau with sign
  bits, bit-packed rows, numba-compiled) used as the ground-truth
  sampler, and
* a symbols-only reference analyzer that tags every random projection
  outcome with a fresh GF(2) symbol and tracks which linear combination
  of symbols each measurement outcome equals.  A measurement, detector,
  or observable is noiseless-deterministic iff its symbol part vanishes.

Sign constants are irrelevant for determinism, so the analyzer tracks no
phases at all; reference parities come from a single noise-free CHP run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .circuit import Circuit
from .program import (OP_CX, OP_DEP1, OP_DEP2, OP_H, OP_MX, OP_MZ, OP_RX,
                      OP_RZ, OP_XFLIP, OP_ZFLIP, Program, compile_program,
                      xor_refs)

ONE = np.uint64(1)
M1 = np.uint64(0x5555555555555555)
M2 = np.uint64(0x3333333333333333)
M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def _popcount(v):
    v = v - ((v >> ONE) & M1)
    v = (v & M2) + ((v >> np.uint64(2)) & M2)
    v = (v + (v >> np.uint64(4))) & M4
    return (v * H01) >> np.uint64(56)


@njit(cache=True, inline="always")
def _phase_sum(xs, zs, h, i, W):
    """Sum of Aaronson-Gottesman g terms for row_i (left) times row_h."""
    tot = 0
    for w in range(W):
        x1, z1 = xs[i, w], zs[i, w]
        x2, z2 = xs[h, w], zs[h, w]
        y1 = x1 & z1
        xo = x1 & ~z1
        zo = ~x1 & z1
        plus = (y1 & z2 & ~x2) | (xo & x2 & z2) | (zo & x2 & ~z2)
        minus = (y1 & x2 & ~z2) | (xo & ~x2 & z2) | (zo & x2 & z2)
        tot += int(_popcount(plus)) - int(_popcount(minus))
    return tot


@njit(cache=True)
def _rowsum(xs, zs, r, h, i, W):
    t = 2 * (int(r[h]) + int(r[i])) + _phase_sum(xs, zs, h, i, W)
    for w in range(W):
        xs[h, w] ^= xs[i, w]
        zs[h, w] ^= zs[i, w]
    r[h] = (t % 4) // 2


@njit(cache=True)
def _apply_h(xs, zs, r, n2, a):
    wa = a >> 6
    ba = ONE << np.uint64(a & 63)
    for q in range(n2):
        xb = xs[q, wa] & ba
        zb = zs[q, wa] & ba
        if xb and zb:
            r[q] ^= 1
        if (xb != 0) != (zb != 0):
            xs[q, wa] ^= ba
            zs[q, wa] ^= ba


@njit(cache=True)
def _apply_cx(xs, zs, r, n2, c, t):
    wc, bc = c >> 6, ONE << np.uint64(c & 63)
    wt, bt = t >> 6, ONE << np.uint64(t & 63)
    for q in range(n2):
        xc = (xs[q, wc] & bc) != 0
        zt = (zs[q, wt] & bt) != 0
        xt = (xs[q, wt] & bt) != 0
        zc = (zs[q, wc] & bc) != 0
        if xc and zt and (xt == zc):
            r[q] ^= 1
        if xc:
            xs[q, wt] ^= bt
        if zt:
            zs[q, wc] ^= bc


@njit(cache=True)
def _apply_pauli(xs, zs, r, n2, a, code):
    # code: 1 = X, 2 = Y, 3 = Z; flips the sign of anticommuting rows.
    wa = a >> 6
    ba = ONE << np.uint64(a & 63)
    for q in range(n2):
        xb = (xs[q, wa] & ba) != 0
        zb = (zs[q, wa] & ba) != 0
        if code == 1:
            hit = zb
        elif code == 3:
            hit = xb
        else:
            hit = xb != zb
        if hit:
            r[q] ^= 1


@njit(cache=True)
def _measure_z(xs, zs, r, n, W, a):
    wa = a >> 6
    ba = ONE << np.uint64(a & 63)
    p = -1
    for k in range(n, 2 * n):
        if xs[k, wa] & ba:
            p = k
            break
    if p >= 0:
        for q in range(2 * n):
            if q != p and (xs[q, wa] & ba):
                _rowsum(xs, zs, r, q, p, W)
        for w in range(W):
            xs[p - n, w] = xs[p, w]
            zs[p - n, w] = zs[p, w]
            xs[p, w] = np.uint64(0)
            zs[p, w] = np.uint64(0)
        r[p - n] = r[p]
        zs[p, wa] = ba
        out = 1 if np.random.random() < 0.5 else 0
        r[p] = out
        return out
    s = 2 * n
    for w in range(W):
        xs[s, w] = np.uint64(0)
        zs[s, w] = np.uint64(0)
    r[s] = 0
    for j in range(n):
        if xs[j, wa] & ba:
            _rowsum(xs, zs, r, s, j + n, W)
    return int(r[s])


@njit(cache=True)
def _run_shot(kinds, targ_off, targets, probs, meas_start,
              n, W, apply_noise, seed, meas_out):
    rows = 2 * n + 1
    xs = np.zeros((rows, W), np.uint64)
    zs = np.zeros((rows, W), np.uint64)
    r = np.zeros(rows, np.uint8)
    for j in range(n):
        xs[j, j >> 6] = ONE << np.uint64(j & 63)
        zs[j + n, j >> 6] = ONE << np.uint64(j & 63)
    np.random.seed(seed)
    n2 = 2 * n
    for g in range(len(kinds)):
        k = kinds[g]
        s, e = targ_off[g], targ_off[g + 1]
        if k == OP_CX:
            for i in range(s, e, 2):
                _apply_cx(xs, zs, r, n2, targets[i], targets[i + 1])
        elif k == OP_MZ or k == OP_MX:
            m = meas_start[g]
            for i in range(s, e):
                a = targets[i]
                if k == OP_MX:
                    _apply_h(xs, zs, r, n2, a)
                out = _measure_z(xs, zs, r, n, W, a)
                if k == OP_MX:
                    _apply_h(xs, zs, r, n2, a)
                meas_out[m + i - s] = out
        elif k == OP_RZ or k == OP_RX:
            for i in range(s, e):
                a = targets[i]
                if k == OP_RX:
                    _apply_h(xs, zs, r, n2, a)
                out = _measure_z(xs, zs, r, n, W, a)
                if out:
                    _apply_pauli(xs, zs, r, n2, a, 1)
                if k == OP_RX:
                    _apply_h(xs, zs, r, n2, a)
        elif k == OP_H:
            for i in range(s, e):
                _apply_h(xs, zs, r, n2, targets[i])
        elif apply_noise:
            p = probs[g]
            if k == OP_DEP1:
                for i in range(s, e):
                    u = np.random.random()
                    if u < p:
                        v = int(u * 3.0 / p)
                        if v > 2:
                            v = 2
                        _apply_pauli(xs, zs, r, n2, targets[i], v + 1)
            elif k == OP_DEP2:
                for i in range(s, e, 2):
                    u = np.random.random()
                    if u < p:
                        c = 1 + int(u * 15.0 / p)
                        if c > 15:
                            c = 15
                        if c >> 2:
                            _apply_pauli(xs, zs, r, n2, targets[i], c >> 2)
                        if c & 3:
                            _apply_pauli(xs, zs, r, n2, targets[i + 1], c & 3)
            else:
                code = 1 if k == OP_XFLIP else 3
                for i in range(s, e):
                    if np.random.random() < p:
                        _apply_pauli(xs, zs, r, n2, targets[i], code)


@njit(cache=True)
def _chp_sample(kinds, targ_off, targets, probs, meas_start,
                n, W, apply_noise, seeds, out):
    for s in range(len(seeds)):
        _run_shot(kinds, targ_off, targets, probs, meas_start,
                  n, W, apply_noise, seeds[s], out[s])


def _shot_seeds(seed: int, shots: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(shots).astype(np.int64)


def tableau_sample(circuit_or_program, shots: int, seed: int,
                   apply_noise: bool = True) -> np.ndarray:
    """Exact per-shot sampling; returns raw measurement bits (shots, n_meas)."""
    prog = _as_program(circuit_or_program)
    W = max(1, (prog.num_qubits + 63) // 64)
    out = np.zeros((shots, prog.num_measurements), np.uint8)
    _chp_sample(prog.kinds, prog.targ_off, prog.targets, prog.probs,
                prog.meas_start, prog.num_qubits, W, apply_noise,
                _shot_seeds(seed, shots), out)
    return out


def tableau_run(circuit_or_program, seed: int):
    """One exact shot: (measurements, detector parities, observable values)."""
    prog = _as_program(circuit_or_program)
    meas = tableau_sample(prog, 1, seed)[0]
    det = xor_refs(meas, prog.det_refs, prog.det_off)
    obs = xor_refs(meas, prog.obs_refs, prog.obs_off)
    return meas, det, obs


def reference_parities(circuit_or_program, seed: int = 0):
    """Detector parities and observable values of one noise-free run."""
    prog = _as_program(circuit_or_program)
    meas = tableau_sample(prog, 1, seed, apply_noise=False)[0]
    det = xor_refs(meas, prog.det_refs, prog.det_off)
    obs = xor_refs(meas, prog.obs_refs, prog.obs_off)
    return det, obs


def _as_program(circuit_or_program) -> Program:
    if isinstance(circuit_or_program, Program):
        return circuit_or_program
    return compile_program(circuit_or_program)


@dataclass
class ReferenceAnalysis:
    """Symbol content of every measurement at p = 0."""

    num_symbols: int
    meas_symbols: np.ndarray       # uint64 (n_meas, S words)
    det_deterministic: np.ndarray  # bool (n_det,)
    obs_deterministic: np.ndarray  # bool (n_obs,)

    @property
    def all_deterministic(self) -> bool:
        return bool(self.det_deterministic.all() and
                    self.obs_deterministic.all())


class _SymbolicState:
    """Sign-free tableau whose projection outcomes are GF(2) symbol vectors."""

    def __init__(self, n: int, max_symbols: int):
        self.n = n
        self.W = max(1, (n + 63) // 64)
        self.S = max(1, (max_symbols + 63) // 64)
        rows = 2 * n
        self.xs = np.zeros((rows, self.W), np.uint64)
        self.zs = np.zeros((rows, self.W), np.uint64)
        self.sym = np.zeros((rows, self.S), np.uint64)
        self.num_symbols = 0
        for j in range(n):
            self.xs[j, j >> 6] = ONE << np.uint64(j & 63)
            self.zs[j + n, j >> 6] = ONE << np.uint64(j & 63)

    def _bits(self, mat, a):
        return (mat[:, a >> 6] & (ONE << np.uint64(a & 63))) != 0

    def h(self, a):
        wa, ba = a >> 6, ONE << np.uint64(a & 63)
        xb = self._bits(self.xs, a)
        zb = self._bits(self.zs, a)
        flip = xb != zb
        self.xs[flip, wa] ^= ba
        self.zs[flip, wa] ^= ba

    def cx(self, c, t):
        wc, bc = c >> 6, ONE << np.uint64(c & 63)
        wt, bt = t >> 6, ONE << np.uint64(t & 63)
        xc = self._bits(self.xs, c)
        zt = self._bits(self.zs, t)
        self.xs[xc, wt] ^= bt
        self.zs[zt, wc] ^= bc

    def measure_z(self, a) -> np.ndarray:
        n = self.n
        xb = self._bits(self.xs, a)
        pivots = np.nonzero(xb[n:])[0]
        if len(pivots):
            p = n + pivots[0]
            rows = np.nonzero(xb)[0]
            rows = rows[rows != p]
            self.xs[rows] ^= self.xs[p]
            self.zs[rows] ^= self.zs[p]
            self.sym[rows] ^= self.sym[p]
            self.xs[p - n] = self.xs[p]
            self.zs[p - n] = self.zs[p]
            self.sym[p - n] = self.sym[p]
            self.xs[p] = 0
            self.zs[p] = 0
            self.zs[p, a >> 6] = ONE << np.uint64(a & 63)
            k = self.num_symbols
            self.num_symbols = k + 1
            vec = np.zeros(self.S, np.uint64)
            vec[k >> 6] = ONE << np.uint64(k & 63)
            self.sym[p] = vec
            return vec.copy()
        js = np.nonzero(xb[:n])[0]
        if len(js) == 0:
            return np.zeros(self.S, np.uint64)
        return np.bitwise_xor.reduce(self.sym[js + n], axis=0)

    def measure_x(self, a) -> np.ndarray:
        self.h(a)
        out = self.measure_z(a)
        self.h(a)
        return out

    def reset_z(self, a):
        out = self.measure_z(a)
        if out.any():
            # conditional X(a) correction mixes the outcome symbols into
            # the signs of rows containing Z or Y at a
            zb = self._bits(self.zs, a)
            self.sym[zb] ^= out

    def reset_x(self, a):
        self.h(a)
        self.reset_z(a)
        self.h(a)


def analyze_reference(circuit_or_program) -> ReferenceAnalysis:
    """Identify which detectors/observables are deterministic at p = 0."""
    prog = _as_program(circuit_or_program)
    max_symbols = prog.num_measurements + 1
    for g in range(len(prog.kinds)):
        if prog.kinds[g] in (OP_RZ, OP_RX):
            max_symbols += prog.targ_off[g + 1] - prog.targ_off[g]
    st = _SymbolicState(prog.num_qubits, max_symbols)
    meas_sym = np.zeros((prog.num_measurements, st.S), np.uint64)
    for g in range(len(prog.kinds)):
        k = prog.kinds[g]
        s, e = prog.targ_off[g], prog.targ_off[g + 1]
        if k == OP_CX:
            for i in range(s, e, 2):
                st.cx(prog.targets[i], prog.targets[i + 1])
        elif k == OP_MZ:
            for i in range(s, e):
                meas_sym[prog.meas_start[g] + i - s] = st.measure_z(prog.targets[i])
        elif k == OP_MX:
            for i in range(s, e):
                meas_sym[prog.meas_start[g] + i - s] = st.measure_x(prog.targets[i])
        elif k == OP_RZ:
            for i in range(s, e):
                st.reset_z(prog.targets[i])
        elif k == OP_RX:
            for i in range(s, e):
                st.reset_x(prog.targets[i])
        elif k == OP_H:
            for i in range(s, e):
                st.h(prog.targets[i])
    det_sym = xor_refs(meas_sym, prog.det_refs, prog.det_off)
    obs_sym = xor_refs(meas_sym, prog.obs_refs, prog.obs_off)
    return ReferenceAnalysis(
        num_symbols=st.num_symbols,
        meas_symbols=meas_sym,
        det_deterministic=~det_sym.any(axis=1) if len(det_sym) else
        np.zeros(0, bool),
        obs_deterministic=~obs_sym.any(axis=1) if len(obs_sym) else
        np.zeros(0, bool),
    )
