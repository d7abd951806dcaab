"""Standard syndrome-extraction circuit and its detector schemes."""

import numpy as np
import pytest

from surfband.builders import (ExperimentSpec, build_memory_experiment,
                               build_standard_round)
from surfband.circuit import validate
from surfband.dem import (build_matching_graph, circuit_distance,
                          decompose_graphlike, extract_dem)
from surfband.frame import frame_sample, propagate_fault
from surfband.lattice import build_lattice
from surfband.program import compile_program
from surfband.tableau import analyze_reference, tableau_run


def memory(d=3, kind="standard", scheme="areal", basis="z", p=0.0, rounds=2):
    spec = ExperimentSpec(d=d, circuit_kind=kind, scheme=scheme, basis=basis,
                          p=p, noisy_rounds=rounds)
    return build_memory_experiment(spec)


def test_round_structure():
    lat = build_lattice(3)
    ins = build_standard_round(lat, noisy=False)
    kinds = [i.kind for i in ins]
    assert kinds.count("CX") == 4
    assert kinds.count("MX") == 1 and kinds.count("MZ") == 1
    # resets precede the CX layers, measurements follow them
    assert kinds.index("RX") < kinds.index("CX")
    assert kinds.index("MX") > len(kinds) - 1 - kinds[::-1].index("CX")
    n_cx = sum(len(i.targets) // 2 for i in ins if i.kind == "CX")
    # every stabilizer contributes one CNOT per corner
    assert n_cx == sum(len(s.support) for s in lat.stabilizers)
    assert not any(i.kind in ("DEP1", "DEP2", "XFLIP", "ZFLIP") for i in ins)


def test_noisy_round_channel_sites():
    lat = build_lattice(3)
    ins = build_standard_round(lat, noisy=True, p=0.01)
    n_cx = sum(len(i.targets) // 2 for i in ins if i.kind == "CX")
    n_dep2 = sum(1 for i in ins if i.kind == "DEP2")
    assert n_dep2 == n_cx
    n_flip = sum(1 for i in ins if i.kind in ("XFLIP", "ZFLIP"))
    # one flip per ancilla at reset and again at measurement
    assert n_flip == 2 * len(lat.ancillas)
    assert all(i.p == 0.01 for i in ins
               if i.kind in ("DEP2", "XFLIP", "ZFLIP"))


@pytest.mark.parametrize("basis", ["z", "x"])
@pytest.mark.parametrize("scheme", ["areal", "rowcol"])
def test_validates_and_deterministic(scheme, basis):
    circ = memory(scheme=scheme, basis=basis, p=0.001)
    assert validate(circ) == []
    ref = analyze_reference(circ)
    assert ref.det_deterministic.all()
    assert ref.obs_deterministic.all()


@pytest.mark.parametrize("scheme", ["areal", "rowcol"])
def test_noiseless_samples_all_zero(scheme):
    circ = memory(scheme=scheme, p=0.0, rounds=3)
    batch = frame_sample(circ, shots=64, seed=5)
    assert not batch.det_words.any()
    assert not batch.obs_words.any()


def test_areal_detector_count():
    d, rounds = 3, 4
    circ = memory(d=d, rounds=rounds, p=0.001)
    prog = compile_program(circ)
    n_anc = d * d - 1
    # total rounds = 1 reference + noisy + 1 closing; consecutive pairs
    # skip the reference-internal ones, finals cover the memory basis half
    total_rounds = rounds + 2
    assert prog.num_detectors == n_anc * (total_rounds - 1) + n_anc // 2
    assert prog.num_observables == 1


def test_rowcol_detector_count():
    d, rounds = 5, 3
    circ = memory(d=d, scheme="rowcol", rounds=rounds, p=0.001)
    prog = compile_program(circ)
    groups = 2 * (d - 1)
    total_rounds = rounds + 2
    assert prog.num_detectors == groups * (total_rounds - 1) + (d - 1)


def test_data_error_flips_adjacent_row_detectors():
    # an X flip on a data qubit between rounds flips the aggregated
    # detectors of the z-ancilla rows above and below it, at the flip
    # round and nowhere else (interior row: two rows; top row: one)
    d = 3
    circ = memory(d=d, scheme="rowcol", rounds=3, p=0.001)
    lat = build_lattice(d)
    prog = compile_program(circ)
    labels = prog.det_labels

    def flipped(q, round_index):
        # inject by hand: X on data qubit q just before that round's CXs
        from surfband.circuit import Circuit, Instruction
        ins = list(circ.instructions)
        seen = 0
        for i, item in enumerate(ins):
            if item.kind == "RX" and seen == round_index:
                ins.insert(i, Instruction("XFLIP", (q,), p=1.0))
                break
            if item.kind == "RX":
                seen += 1
        mod = Circuit(circ.num_qubits, tuple(ins))
        _, det, _ = tableau_run(mod, seed=0)
        return {labels[j] for j in np.nonzero(det)[0]}

    mid = lat.qubit_id((2, 2))      # interior data qubit
    top = lat.qubit_id((2, 0))      # top-row data qubit
    f_mid = flipped(mid, 2)
    rows_hit = {l for l in f_mid if l.startswith("rowcol:r")}
    assert len(rows_hit) == 2 and all(l.endswith(":2") for l in rows_hit)
    f_top = flipped(top, 2)
    rows_hit = {l for l in f_top if l.startswith("rowcol:r")}
    assert len(rows_hit) == 1


def test_circuit_distance_d3():
    circ = memory(d=3, p=0.001, rounds=3)
    mechs = decompose_graphlike(extract_dem(circ))
    assert circuit_distance(mechs).value == 3
    circ = memory(d=3, basis="x", p=0.001, rounds=3)
    mechs = decompose_graphlike(extract_dem(circ))
    assert circuit_distance(mechs).value == 3


def test_rowcol_distance_d3():
    circ = memory(d=3, scheme="rowcol", p=0.001, rounds=3)
    mechs = decompose_graphlike(extract_dem(circ))
    assert circuit_distance(mechs).value == 3


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(d=4, circuit_kind="standard", scheme="areal")
    with pytest.raises(ValueError):
        ExperimentSpec(d=3, circuit_kind="standard", scheme="boundary")
    with pytest.raises(ValueError):
        ExperimentSpec(d=3, circuit_kind="3cx", scheme="rowcol")
    with pytest.raises(ValueError):
        ExperimentSpec(d=3, circuit_kind="standard", scheme="areal", p=1.5)
    spec = ExperimentSpec(d=5, circuit_kind="standard", scheme="areal")
    assert spec.noisy_rounds == 100
    assert spec.flush_rounds == 0


def test_matching_graph_wellformed():
    circ = memory(d=3, p=0.001, rounds=2)
    mechs = decompose_graphlike(extract_dem(circ))
    prog = compile_program(circ)
    graph = build_matching_graph(mechs, num_detectors=prog.num_detectors)
    assert graph.num_detectors == prog.num_detectors
    assert all(e.weight > 0 for e in graph.edges)
