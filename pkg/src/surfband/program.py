"""Flat numpy form of a circuit for the simulation engines.

Gate and channel instructions become parallel arrays indexed by group
(one group per source instruction, TICKs dropped).  Detector and
observable annotations are resolved from relative look-backs to absolute
measurement indices.  Channel components (individual Paulis inside
DEP1/DEP2/XFLIP/ZFLIP) are enumerated as fault sites for the fault
injector and the detector-error-model extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit

OP_RZ, OP_RX, OP_H, OP_CX, OP_MZ, OP_MX = 0, 1, 2, 3, 4, 5
OP_DEP1, OP_DEP2, OP_XFLIP, OP_ZFLIP = 6, 7, 8, 9

_OPCODES = {"RZ": OP_RZ, "RX": OP_RX, "H": OP_H, "CX": OP_CX,
            "MZ": OP_MZ, "MX": OP_MX, "DEP1": OP_DEP1, "DEP2": OP_DEP2,
            "XFLIP": OP_XFLIP, "ZFLIP": OP_ZFLIP}

# Pauli codes for fault components: 1 = X, 2 = Y, 3 = Z per qubit.
PAULI_X, PAULI_Y, PAULI_Z = 1, 2, 3


@dataclass
class Program:
    num_qubits: int
    num_measurements: int
    num_detectors: int
    num_observables: int
    kinds: np.ndarray          # int8 [G]
    targ_off: np.ndarray       # int32 [G+1] into targets
    targets: np.ndarray        # int32 [T]
    probs: np.ndarray          # float64 [G]
    meas_start: np.ndarray     # int32 [G]; first measurement index, -1 if none
    det_off: np.ndarray        # int32 [D+1] into det_refs
    det_refs: np.ndarray       # int32, absolute measurement indices
    det_labels: list
    obs_off: np.ndarray        # int32 [n_obs+1] into obs_refs
    obs_refs: np.ndarray
    comp_off: np.ndarray       # int32 [G+1] into component arrays
    comp_q0: np.ndarray        # int32 [C]
    comp_q1: np.ndarray        # int32 [C]; -1 for single-qubit components
    comp_p0: np.ndarray        # int8  [C]; Pauli code on q0 (0 = none)
    comp_p1: np.ndarray        # int8  [C]; Pauli code on q1
    comp_prob: np.ndarray      # float64 [C]

    @property
    def num_fault_components(self) -> int:
        return len(self.comp_prob)


def compile_program(circuit: Circuit) -> Program:
    kinds, targ_off, targets, probs, meas_start = [], [0], [], [], []
    det_off, det_refs, det_labels = [0], [], []
    obs_refs = {}
    comp_off = [0]
    comp_q0, comp_q1, comp_p0, comp_p1, comp_prob = [], [], [], [], []
    n_meas = 0

    for ins in circuit.instructions:
        if ins.kind == "TICK":
            continue
        if ins.kind == "DET":
            det_refs.extend(n_meas + r for r in ins.refs)
            det_off.append(len(det_refs))
            det_labels.append(ins.label)
            continue
        if ins.kind == "OBS":
            obs_refs.setdefault(ins.obs_id, []).extend(n_meas + r for r in ins.refs)
            continue
        op = _OPCODES[ins.kind]
        kinds.append(op)
        targets.extend(ins.targets)
        targ_off.append(len(targets))
        probs.append(ins.p)
        if op in (OP_MZ, OP_MX):
            meas_start.append(n_meas)
            n_meas += len(ins.targets)
        else:
            meas_start.append(-1)
        if op == OP_DEP1:
            for q in ins.targets:
                for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
                    comp_q0.append(q)
                    comp_q1.append(-1)
                    comp_p0.append(pauli)
                    comp_p1.append(0)
                    comp_prob.append(ins.p / 3.0)
        elif op == OP_DEP2:
            for a, b in zip(ins.targets[::2], ins.targets[1::2]):
                for k in range(1, 16):
                    comp_q0.append(a)
                    comp_q1.append(b)
                    comp_p0.append(k >> 2)
                    comp_p1.append(k & 3)
                    comp_prob.append(ins.p / 15.0)
        elif op in (OP_XFLIP, OP_ZFLIP):
            pauli = PAULI_X if op == OP_XFLIP else PAULI_Z
            for q in ins.targets:
                comp_q0.append(q)
                comp_q1.append(-1)
                comp_p0.append(pauli)
                comp_p1.append(0)
                comp_prob.append(ins.p)
        comp_off.append(len(comp_prob))

    n_obs = max(obs_refs) + 1 if obs_refs else 0
    obs_off, flat_obs = [0], []
    for k in range(n_obs):
        flat_obs.extend(obs_refs.get(k, []))
        obs_off.append(len(flat_obs))

    return Program(
        num_qubits=circuit.num_qubits,
        num_measurements=n_meas,
        num_detectors=len(det_labels),
        num_observables=n_obs,
        kinds=np.array(kinds, dtype=np.int8),
        targ_off=np.array(targ_off, dtype=np.int32),
        targets=np.array(targets, dtype=np.int32),
        probs=np.array(probs, dtype=np.float64),
        meas_start=np.array(meas_start, dtype=np.int32),
        det_off=np.array(det_off, dtype=np.int32),
        det_refs=np.array(det_refs, dtype=np.int32),
        det_labels=det_labels,
        obs_off=np.array(obs_off, dtype=np.int32),
        obs_refs=np.array(flat_obs, dtype=np.int32),
        comp_off=np.array(comp_off, dtype=np.int32),
        comp_q0=np.array(comp_q0, dtype=np.int32),
        comp_q1=np.array(comp_q1, dtype=np.int32),
        comp_p0=np.array(comp_p0, dtype=np.int8),
        comp_p1=np.array(comp_p1, dtype=np.int8),
        comp_prob=np.array(comp_prob, dtype=np.float64),
    )


def xor_refs(values: np.ndarray, refs: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-segment XOR of `values[refs]`; segments given by `offsets`.

    values may be 1-D (bits) or 2-D (bit words per measurement); the
    reduction runs over the gathered first axis of each segment.
    """
    n_seg = len(offsets) - 1
    out_shape = (n_seg,) + values.shape[1:]
    out = np.zeros(out_shape, dtype=values.dtype)
    if len(refs) == 0:
        return out
    gathered = values[refs]
    # reduceat cannot express empty trailing segments; guard explicitly.
    lengths = np.diff(offsets)
    nonempty = lengths > 0
    idx = offsets[:-1][nonempty]
    red = np.bitwise_xor.reduceat(gathered, idx, axis=0)
    out[nonempty] = red
    return out
