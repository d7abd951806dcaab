"""Geometry invariants of the rotated planar patch."""
from itertools import combinations

import pytest

from surfband.lattice import (CORNER_OFFSETS, ascii_dump, build_lattice,
                              commutes, is_x_square)

DS = (3, 5, 7)


@pytest.mark.parametrize("d", (2, 1, 4, 0))
def test_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        build_lattice(d)


@pytest.mark.parametrize("d", DS)
def test_counts(d):
    lat = build_lattice(d)
    assert len(lat.data) == d * d
    assert len(lat.stabilizers) == d * d - 1
    kinds = [s.kind for s in lat.stabilizers]
    assert kinds.count("X") == kinds.count("Z") == (d * d - 1) // 2
    weights = sorted(len(s.support) for s in lat.stabilizers)
    assert weights.count(2) == 2 * (d - 1)
    assert weights.count(4) == (d - 1) ** 2
    assert lat.num_qubits == 2 * d * d - 1
    assert lat.t == (d - 1) // 2


@pytest.mark.parametrize("d", DS)
def test_corner_geometry(d):
    lat = build_lattice(d)
    for s in lat.stabilizers:
        assert is_x_square(s.ancilla) == (s.kind == "X")
        for k, c in enumerate(s.corners, start=1):
            if c is None:
                continue
            dx, dy = CORNER_OFFSETS[k]
            assert c == (s.ancilla[0] + dx, s.ancilla[1] + dy)
            assert s.local_index(c) == k


@pytest.mark.parametrize("d", DS)
def test_all_stabilizer_pairs_commute(d):
    lat = build_lattice(d)
    for a, b in combinations(lat.stabilizers, 2):
        assert commutes(a.support, a.kind, b.support, b.kind)


@pytest.mark.parametrize("d", DS)
def test_logicals(d):
    lat = build_lattice(d)
    lx, lz = lat.logical_x_support, lat.logical_z_support
    assert len(lx) == len(lz) == d
    assert lx & lz == {(0, 0)}  # anticommuting pair
    assert not commutes(lx, "X", lz, "Z")
    for s in lat.stabilizers:
        assert commutes(lx, "X", s.support, s.kind)
        assert commutes(lz, "Z", s.support, s.kind)


@pytest.mark.parametrize("d", DS)
def test_row_and_column_groupings(d):
    lat = build_lattice(d)
    assert len(lat.z_rows) == len(lat.x_cols) == d - 1
    z_all = {s.ancilla for s in lat.stabilizers if s.kind == "Z"}
    x_all = {s.ancilla for s in lat.stabilizers if s.kind == "X"}
    assert frozenset().union(*lat.z_rows) == z_all
    assert frozenset().union(*lat.x_cols) == x_all
    for g, row in enumerate(lat.z_rows):
        assert row and all(a[1] == 2 * g + 1 for a in row)
    for g, col in enumerate(lat.x_cols):
        assert col and all(a[0] == 2 * g + 1 for a in col)


@pytest.mark.parametrize("d", DS)
def test_boundary_ancilla_sets(d):
    lat = build_lattice(d)
    right, bottom = lat.right_boundary_ancillas, lat.bottom_boundary_ancillas
    edge = 2 * d - 2
    assert all(any(c[0] == edge for c in lat.stabilizer_at(a).support)
               for a in right)
    assert all(any(c[1] == edge for c in lat.stabilizer_at(a).support)
               for a in bottom)
    # (3d-1)/2 per edge, sharing the two corner-most plaquettes.
    assert len(right) == len(bottom) == (3 * d - 1) // 2
    assert len(right | bottom) == 3 * d - 3


@pytest.mark.parametrize("d", DS)
def test_qubit_ids_are_a_dense_bijection(d):
    lat = build_lattice(d)
    ids = [lat.qubit_id(c) for c in lat.data]
    ids += [lat.qubit_id(a) for a in lat.ancillas]
    assert sorted(ids) == list(range(lat.num_qubits))
    assert ids[: len(lat.data)] == list(range(len(lat.data)))  # data first


def _coset_min_weight(d, kind):
    """Exhaustive minimum weight of logical * <same-kind stabilizers>."""
    lat = build_lattice(d)
    gens = [frozenset(s.support) for s in lat.stabilizers if s.kind == kind]
    logical = (lat.logical_x_support if kind == "X"
               else lat.logical_z_support)
    best = len(logical)
    for r in range(len(gens) + 1):
        for combo in combinations(gens, r):
            cur = set(logical)
            for g in combo:
                cur ^= g
            best = min(best, len(cur))
    return best


@pytest.mark.parametrize("kind", ("X", "Z"))
def test_code_distance_is_d_by_exhaustion(kind):
    assert _coset_min_weight(3, kind) == 3


def test_ascii_dump_round_trip_of_markers():
    lat = build_lattice(3)
    art = ascii_dump(lat)
    assert art.count(".") == 9
    assert art.count("x") == 4
    assert art.count("z") == 4
