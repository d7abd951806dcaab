"""End-to-end memory experiments and verification suites.

Builds circuits, samples Pauli-frame shots, decodes with the matching
decoder, and aggregates logical error statistics; also hosts the
verification entry points (circuit distance, exhaustive small-fault
injection) and syndrome-bandwidth accounting. The sweep writes one CSV
row per grid cell; the schema is the interface consumed by the plots
package.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .builders import ExperimentSpec, build_memory_experiment
from .dem import (build_matching_graph, circuit_distance, decompose_graphlike,
                  extract_dem)
from .frame import frame_sample, propagate_components
from .lattice import build_lattice
from .matcher import Matcher
from .program import compile_program

CSV_HEADER = ("circuit,scheme,d,rounds,p,shots,fail_z,fail_x,"
              "p_lz,p_lx,p_l,stderr,bits_per_round,wall_s")


@dataclass(frozen=True)
class ExperimentStats:
    """Logical error estimates of one memory experiment (both bases)."""

    shots: int
    logical_failures_z: int
    logical_failures_x: int
    p_lz: float
    p_lx: float
    p_l: float
    stderr: float
    wall_time: float


@dataclass(frozen=True)
class BandwidthReport:
    """Syndrome bits transmitted per bulk round under one scheme."""

    scheme: str
    d: int
    bits_per_round: int
    ratio_vs_areal: float


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    value: int | None = None
    witness: tuple = ()
    counterexamples: tuple = ()


def _wilson_halfwidth(k: int, n: int, z: float = 1.0) -> float:
    if n == 0:
        return 0.0
    phat = k / n
    denom = 1.0 + z * z / n
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return half


def _subseed(seed: int, *branch: int) -> int:
    ss = np.random.SeedSequence((int(seed),) + tuple(int(b) for b in branch))
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)


def _decoder_for(spec: ExperimentSpec):
    circ = build_memory_experiment(spec)
    prog = compile_program(circ)
    mechs = decompose_graphlike(extract_dem(prog))
    graph = build_matching_graph(mechs, num_detectors=prog.num_detectors)
    return circ, prog, Matcher(graph)


def _one_basis(spec: ExperimentSpec, shots: int, seed: int) -> int:
    circ, prog, matcher = _decoder_for(spec)
    batch = frame_sample(circ, shots, seed, check=False, program=prog)
    return int(matcher.failures(batch).sum())


def run_memory(spec: ExperimentSpec, shots: int, seed: int) -> ExperimentStats:
    """Both-bases memory run; failure = predicted flip != actual flip."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    t0 = time.perf_counter()
    fz = _one_basis(replace(spec, basis="z"), shots, _subseed(seed, 0))
    fx = _one_basis(replace(spec, basis="x"), shots, _subseed(seed, 1))
    p_lz, p_lx = fz / shots, fx / shots
    p_l = p_lz + p_lx - p_lz * p_lx
    sz = _wilson_halfwidth(fz, shots)
    sx = _wilson_halfwidth(fx, shots)
    stderr = math.sqrt(((1 - p_lx) * sz) ** 2 + ((1 - p_lz) * sx) ** 2)
    return ExperimentStats(shots=shots, logical_failures_z=fz,
                           logical_failures_x=fx, p_lz=p_lz, p_lx=p_lx,
                           p_l=p_l, stderr=stderr,
                           wall_time=time.perf_counter() - t0)


def bandwidth(spec: ExperimentSpec) -> BandwidthReport:
    """Detector-feeding bits transmitted per bulk SE round."""
    lat = build_lattice(spec.d)
    areal_bits = spec.d * spec.d - 1
    if spec.scheme == "areal":
        bits = areal_bits
    elif spec.scheme == "rowcol":
        bits = 2 * (spec.d - 1)
    else:
        bits = len(set(lat.right_boundary_ancillas)
                   | set(lat.bottom_boundary_ancillas))
    return BandwidthReport(scheme=spec.scheme, d=spec.d, bits_per_round=bits,
                           ratio_vs_areal=areal_bits / bits)


def verify_distance(spec: ExperimentSpec) -> VerifyResult:
    """Check the fault-distance of the annotated memory experiment is d."""
    probe = replace(spec, p=spec.p or 1e-3, noisy_rounds=spec.d)
    circ = build_memory_experiment(probe)
    mechs = decompose_graphlike(extract_dem(circ))
    dist = circuit_distance(mechs)
    ok = dist.value == spec.d
    return VerifyResult(ok=ok, value=dist.value, witness=dist.witness)


def verify_faults(spec: ExperimentSpec, max_weight: int) -> VerifyResult:
    """Exhaustively decode all 1-fault (and 2-fault) mechanism sets."""
    if max_weight not in (1, 2):
        raise ValueError("max_weight must be 1 or 2")
    probe = replace(spec, p=spec.p or 1e-3, noisy_rounds=4 * spec.d)
    circ = build_memory_experiment(probe)
    prog = compile_program(circ)
    mechs = decompose_graphlike(extract_dem(prog))
    graph = build_matching_graph(mechs, num_detectors=prog.num_detectors)
    matcher = Matcher(graph)
    return check_fault_sets(matcher, mechs, max_weight)


def check_fault_sets(matcher: Matcher, mechs, max_weight: int) -> VerifyResult:
    """Decode every single mechanism, then every pair, against a matcher.

    The pair stage runs through the folded-metric kernel (see
    Matcher.check_pairs) so hundred-million-pair scans stay in seconds.
    value carries the total violation count; stored counterexamples are
    capped at 64.
    """
    dets = [np.array(m.detectors, np.int64) for m in mechs]
    obs = [sum(1 << o for o in m.observables) for m in mechs]
    bad = []
    for i, m in enumerate(mechs):
        if matcher.decode_one(dets[i]) != obs[i]:
            bad.append(((i,), tuple(m.detectors), obs[i]))
    total = len(bad)
    if max_weight >= 2 and mechs:
        e0 = np.array([d[0] for d in dets], np.int64)
        e1 = np.array([d[1] if len(d) > 1 else -1 for d in dets], np.int64)
        npairs, rows = matcher.check_pairs(e0, e1, obs)
        total += npairs
        for i, j in rows[:max(0, 64 - len(bad))]:
            sym = frozenset(mechs[i].detectors) ^ frozenset(mechs[j].detectors)
            bad.append(((int(i), int(j)), tuple(sorted(sym)),
                        obs[i] ^ obs[j]))
    return VerifyResult(ok=total == 0, value=total,
                        counterexamples=tuple(bad[:64]))


def csv_row(spec: ExperimentSpec, stats: ExperimentStats) -> str:
    """One CSV data row; every column except wall_s is deterministic."""
    bw = bandwidth(spec)
    return ",".join(str(v) for v in (
        spec.circuit_kind, spec.scheme, spec.d, spec.noisy_rounds,
        repr(spec.p), stats.shots, stats.logical_failures_z,
        stats.logical_failures_x, repr(stats.p_lz), repr(stats.p_lx),
        repr(stats.p_l), repr(stats.stderr), bw.bits_per_round,
        f"{stats.wall_time:.3f}"))


def _sweep_cell(args):
    spec, shots, seed, idx = args
    return csv_row(spec, run_memory(spec, shots, _subseed(seed, 2, idx)))


def sweep(specs, shots: int, seed: int, out_path=None, workers: int = 1) -> str:
    """Run a grid of experiments; returns (and optionally writes) CSV."""
    tasks = [(spec, shots, seed, i) for i, spec in enumerate(specs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, tasks))
    else:
        rows = [_sweep_cell(t) for t in tasks]
    text = "\n".join([CSV_HEADER] + rows) + "\n"
    if out_path is not None:
        try:
            with open(out_path, "w") as f:
                f.write(text)
        except OSError as e:
            raise OSError(f"cannot write sweep CSV to {out_path}: {e}") from e
    return text
