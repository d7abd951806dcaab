"""Circuit-to-program compilation and segment-XOR helpers."""

import numpy as np
import pytest

from surfband.circuit import parse
from surfband.program import (OP_CX, OP_DEP2, OP_MX, OP_MZ, OP_RZ, PAULI_X,
                              PAULI_Y, PAULI_Z, compile_program, xor_refs)


def small_circuit():
    return parse("""
        QUBITS 3
        RZ 0 1 2
        XFLIP(0.25) 0
        TICK
        CX 0 1
        DEP2(0.15) 0 1
        MZ 0 1
        DEP1(0.3) 2
        MX 2
        DET[a] -3 -2
        DET[b] -1
        OBS[0] -3
        OBS[2] -1
    """)


def test_counts_and_opcodes():
    prog = compile_program(small_circuit())
    assert prog.num_qubits == 3
    assert prog.num_measurements == 3
    assert prog.num_detectors == 2
    # OBS ids 0 and 2 present, so 3 observable slots with 1 empty
    assert prog.num_observables == 3
    # TICK dropped, DET/OBS not operations
    assert list(prog.kinds) == [OP_RZ, 8, OP_CX, OP_DEP2, OP_MZ, 6, OP_MX]


def test_measurement_starts():
    prog = compile_program(small_circuit())
    starts = {k: s for k, s in zip(prog.kinds, prog.meas_start)}
    assert starts[OP_MZ] == 0
    assert starts[OP_MX] == 2
    assert all(s == -1 for k, s in zip(prog.kinds, prog.meas_start)
               if k not in (OP_MZ, OP_MX))


def test_det_and_obs_refs_absolute():
    prog = compile_program(small_circuit())
    # DET[a] rec[-3] rec[-2] issued when 3 measurements existed
    assert list(prog.det_refs[prog.det_off[0]:prog.det_off[1]]) == [0, 1]
    assert list(prog.det_refs[prog.det_off[1]:prog.det_off[2]]) == [2]
    assert prog.det_labels == ["a", "b"]
    segs = [list(prog.obs_refs[prog.obs_off[k]:prog.obs_off[k + 1]])
            for k in range(prog.num_observables)]
    assert segs == [[0], [], [2]]


def test_component_enumeration():
    prog = compile_program(small_circuit())
    # XFLIP: 1 component; DEP2: 15; DEP1: 3
    assert prog.num_fault_components == 1 + 15 + 3
    g_xflip = int(np.nonzero(prog.kinds == 8)[0][0])
    lo, hi = prog.comp_off[g_xflip], prog.comp_off[g_xflip + 1]
    assert hi - lo == 1
    assert prog.comp_q0[lo] == 0 and prog.comp_q1[lo] == -1
    assert prog.comp_p0[lo] == PAULI_X
    assert prog.comp_prob[lo] == 0.25
    g_dep2 = int(np.nonzero(prog.kinds == OP_DEP2)[0][0])
    lo, hi = prog.comp_off[g_dep2], prog.comp_off[g_dep2 + 1]
    assert hi - lo == 15
    pairs = {(int(a), int(b)) for a, b in
             zip(prog.comp_p0[lo:hi], prog.comp_p1[lo:hi])}
    assert pairs == {(a, b) for a in range(4) for b in range(4)} - {(0, 0)}
    assert np.allclose(prog.comp_prob[lo:hi], 0.15 / 15)
    g_dep1 = int(np.nonzero(prog.kinds == 6)[0][0])
    lo, hi = prog.comp_off[g_dep1], prog.comp_off[g_dep1 + 1]
    assert [int(p) for p in prog.comp_p0[lo:hi]] == [PAULI_X, PAULI_Y, PAULI_Z]
    assert np.allclose(prog.comp_prob[lo:hi], 0.1)


def test_gate_groups_have_no_components():
    prog = compile_program(small_circuit())
    for g, k in enumerate(prog.kinds):
        if k < 6:
            assert prog.comp_off[g] == prog.comp_off[g + 1]


def test_no_annotations():
    prog = compile_program(parse("QUBITS 1\nMZ 0"))
    assert prog.num_detectors == 0
    assert prog.num_observables == 0
    assert len(prog.det_off) == 1 and len(prog.obs_off) == 1


def test_xor_refs_1d():
    values = np.array([1, 0, 1, 1], dtype=np.uint8)
    refs = np.array([0, 1, 2, 0, 3], dtype=np.int32)
    offsets = np.array([0, 3, 3, 5], dtype=np.int32)
    out = xor_refs(values, refs, offsets)
    assert list(out) == [1 ^ 0 ^ 1, 0, 1 ^ 1]


def test_xor_refs_2d_words():
    values = np.array([[0b01], [0b10], [0b11]], dtype=np.uint64)
    refs = np.array([0, 1, 1, 2], dtype=np.int32)
    offsets = np.array([0, 2, 4], dtype=np.int32)
    out = xor_refs(values, refs, offsets)
    assert out.shape == (2, 1)
    assert out[0, 0] == 0b11 and out[1, 0] == 0b01


def test_xor_refs_empty_refs():
    values = np.zeros(4, dtype=np.uint8)
    out = xor_refs(values, np.array([], dtype=np.int32),
                   np.array([0, 0, 0], dtype=np.int32))
    assert out.shape == (2,) and not out.any()


def test_xor_refs_trailing_empty_segment():
    values = np.array([1, 1], dtype=np.uint8)
    refs = np.array([0], dtype=np.int32)
    offsets = np.array([0, 1, 1], dtype=np.int32)
    out = xor_refs(values, refs, offsets)
    assert list(out) == [1, 0]
