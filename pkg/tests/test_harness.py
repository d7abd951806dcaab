"""Memory-experiment harness: stats, bandwidth, verification, sweep."""

import numpy as np
import pytest

from surfband.builders import ExperimentSpec
from surfband.dem import MatchingGraph, build_matching_graph, extract_dem, \
    decompose_graphlike
from surfband.harness import (CSV_HEADER, BandwidthReport, ExperimentStats,
                              bandwidth, check_fault_sets, run_memory, sweep,
                              verify_distance, verify_faults)
from surfband.matcher import Matcher
from surfband.program import compile_program


def spec_std(d=3, scheme="areal", p=2e-3, rounds=4):
    return ExperimentSpec(d=d, circuit_kind="standard", scheme=scheme, p=p,
                          noisy_rounds=rounds)


def test_run_memory_stats_invariants():
    stats = run_memory(spec_std(), shots=1500, seed=4)
    assert stats.shots == 1500
    assert stats.p_lz == stats.logical_failures_z / 1500
    assert stats.p_lx == stats.logical_failures_x / 1500
    expect = stats.p_lz + stats.p_lx - stats.p_lz * stats.p_lx
    assert stats.p_l == pytest.approx(expect)
    assert 0 <= stats.p_l <= 1
    assert stats.stderr >= 0


def test_run_memory_noise_free_is_silent():
    stats = run_memory(spec_std(p=0.0, rounds=2), shots=200, seed=1)
    # Wilson interval stays positive at zero observed failures
    assert stats.p_l == 0.0 and 0 < stats.stderr < 0.02


def test_run_memory_deterministic():
    a = run_memory(spec_std(), shots=800, seed=9)
    b = run_memory(spec_std(), shots=800, seed=9)
    assert (a.logical_failures_z, a.logical_failures_x) == \
        (b.logical_failures_z, b.logical_failures_x)


def test_run_memory_seed_sensitivity():
    # different seeds should give different failure patterns at this p
    outcomes = {run_memory(spec_std(p=8e-3), shots=400, seed=s
                           ).logical_failures_z for s in range(4)}
    assert len(outcomes) > 1


def test_bandwidth_values():
    assert bandwidth(spec_std(d=11)).bits_per_round == 120
    assert bandwidth(spec_std(d=11, scheme="rowcol")).bits_per_round == 20
    for d in (3, 5, 7, 9, 11):
        b = bandwidth(ExperimentSpec(d=d, circuit_kind="3cx",
                                     scheme="boundary"))
        assert b.bits_per_round == 3 * d - 3
        assert b.bits_per_round <= 4 * d
        assert b.ratio_vs_areal >= (d * d - 1) / (4 * d)
        r = bandwidth(spec_std(d=d, scheme="rowcol"))
        assert r.ratio_vs_areal >= (d * d - 1) / (4 * d)


def test_verify_distance_standard():
    res = verify_distance(spec_std())
    assert res.ok and res.value == 3
    res = verify_distance(spec_std(scheme="rowcol"))
    assert res.ok and res.value == 3


def test_verify_faults_weight1():
    res = verify_faults(spec_std(), 1)
    assert res.ok, res.counterexamples[:3]
    res = verify_faults(spec_std(scheme="rowcol"), 1)
    assert res.ok, res.counterexamples[:3]


def test_verify_faults_rejects_bad_weight():
    with pytest.raises(ValueError):
        verify_faults(spec_std(), 3)


def test_weakened_graph_yields_counterexample():
    # removing one edge from the matching graph must surface decoding
    # failures in the exhaustive fault check
    from surfband.builders import build_memory_experiment
    circ = build_memory_experiment(spec_std(rounds=3))
    prog = compile_program(circ)
    mechs = decompose_graphlike(extract_dem(prog))
    graph = build_matching_graph(mechs, num_detectors=prog.num_detectors)
    full = check_fault_sets(Matcher(graph), mechs, 1)
    assert full.ok
    # removals that break decoding reroute a defect onto an obs-flipping
    # path, so zero-obs boundary edges are the productive candidates
    candidates = [i for i, e in enumerate(graph.edges)
                  if not e.obs_mask and (e.v is None or e.v < 0)][:12]
    broke = None
    for drop in candidates:
        weak = MatchingGraph(graph.num_detectors,
                             graph.edges[:drop] + graph.edges[drop + 1:])
        res = check_fault_sets(Matcher(weak), mechs, 1)
        if not res.ok:
            broke = res
            break
    assert broke is not None and len(broke.counterexamples) >= 1


def test_sweep_csv_shape_and_determinism(tmp_path):
    specs = [spec_std(rounds=2), spec_std(rounds=2, scheme="rowcol")]
    out = tmp_path / "sweep.csv"
    text = sweep(specs, shots=300, seed=21, out_path=str(out))
    assert out.read_text() == text
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    row = lines[1].split(",")
    assert row[0] == "standard" and row[1] == "areal"
    assert row[2] == "3" and row[3] == "2" and row[5] == "300"
    text2 = sweep(specs, shots=300, seed=21)
    strip = lambda t: [r.rsplit(",", 1)[0] for r in t.splitlines()]
    assert strip(text) == strip(text2)


def test_sweep_unwritable_path_raises():
    with pytest.raises(OSError, match="no/such/dir"):
        sweep([spec_std(rounds=2)], shots=10, seed=0,
              out_path="/no/such/dir/x.csv")
