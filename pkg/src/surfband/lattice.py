"""Rotated planar surface-code geometry in doubled integer coordinates.

Data qubits sit at even-even coordinates (2i, 2j) for 0 <= i, j < d.
Plaquette ancillas sit at odd-odd coordinates (2a+1, 2b+1) with
a, b in {-1, ..., d-1}; the plaquette is X-type iff a+b is even.  Bulk
plaquettes have four data corners, labeled by local index

    1 = (-1,-1)   2 = (+1,-1)
    3 = (-1,+1)   4 = (+1,+1)

relative to the ancilla, so X errors moving local 1->2 (or 3->4) travel
rightwards and Z errors moving 1->3 (or 2->4) travel downwards.  The
top/bottom edges host weight-2 X halves and the left/right edges host
weight-2 Z halves, placed on alternating gaps so every stabilizer
commutes with every other.  The logical X support is the leftmost data
column (vertical) and the logical Z support the topmost data row
(horizontal); they intersect in the single corner qubit (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

CORNER_OFFSETS = {1: (-1, -1), 2: (1, -1), 3: (-1, 1), 4: (1, 1)}


@dataclass(frozen=True)
class Stabilizer:
    """One plaquette: static kind, ancilla coordinate, corner map.

    corners[k] is the data coordinate with local index k+1, or None when
    that corner falls outside the patch (boundary halves).
    """

    kind: str
    ancilla: tuple
    corners: tuple

    @property
    def support(self) -> tuple:
        return tuple(c for c in self.corners if c is not None)

    def local_index(self, data: tuple) -> int:
        return self.corners.index(data) + 1


@dataclass(frozen=True)
class Lattice:
    d: int
    data: tuple
    stabilizers: tuple
    logical_x_support: frozenset
    logical_z_support: frozenset
    z_rows: tuple
    x_cols: tuple
    right_boundary_ancillas: frozenset
    bottom_boundary_ancillas: frozenset

    @property
    def t(self) -> int:
        return (self.d - 1) // 2

    @property
    def ancillas(self) -> tuple:
        return tuple(s.ancilla for s in self.stabilizers)

    @property
    def num_qubits(self) -> int:
        return len(self.data) + len(self.stabilizers)

    def qubit_id(self, coord: tuple) -> int:
        return self._ids[coord]

    def stabilizer_at(self, ancilla: tuple) -> Stabilizer:
        return self._by_ancilla[ancilla]

    def __post_init__(self):
        ids = {c: i for i, c in enumerate(self.data)}
        for s in self.stabilizers:
            ids[s.ancilla] = len(ids)
        object.__setattr__(self, "_ids", ids)
        object.__setattr__(
            self, "_by_ancilla", {s.ancilla: s for s in self.stabilizers})


def is_x_square(center: tuple) -> bool:
    a, b = (center[0] - 1) // 2, (center[1] - 1) // 2
    return (a + b) % 2 == 0


def build_lattice(d: int) -> Lattice:
    """Construct the distance-d rotated surface code; d odd, d >= 3."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be odd and >= 3, got {d}")
    data = tuple((2 * i, 2 * j) for j in range(d) for i in range(d))
    in_patch = set(data)

    stabilizers = []
    for b in range(-1, d):
        for a in range(-1, d):
            center = (2 * a + 1, 2 * b + 1)
            corners = tuple(
                (center[0] + dx, center[1] + dy)
                if (center[0] + dx, center[1] + dy) in in_patch else None
                for dx, dy in (CORNER_OFFSETS[k] for k in (1, 2, 3, 4)))
            present = [c for c in corners if c is not None]
            if len(present) == 4:
                keep = True
            elif len(present) == 2:
                # Alternating boundary halves: X on top/bottom, Z on left/right.
                if b == -1:
                    keep = a % 2 == 1
                elif b == d - 1:
                    keep = a % 2 == 0
                elif a == -1:
                    keep = b % 2 == 0
                else:
                    keep = b % 2 == 1
            else:
                keep = False
            if keep:
                kind = "X" if is_x_square(center) else "Z"
                stabilizers.append(Stabilizer(kind, center, corners))

    z_rows = tuple(
        frozenset(s.ancilla for s in stabilizers
                  if s.kind == "Z" and s.ancilla[1] == 2 * g + 1)
        for g in range(d - 1))
    x_cols = tuple(
        frozenset(s.ancilla for s in stabilizers
                  if s.kind == "X" and s.ancilla[0] == 2 * g + 1)
        for g in range(d - 1))

    right_edge, bottom_edge = 2 * d - 2, 2 * d - 2
    right = frozenset(s.ancilla for s in stabilizers
                      if any(c[0] == right_edge for c in s.support))
    bottom = frozenset(s.ancilla for s in stabilizers
                       if any(c[1] == bottom_edge for c in s.support))

    return Lattice(
        d=d,
        data=data,
        stabilizers=tuple(stabilizers),
        logical_x_support=frozenset((0, 2 * j) for j in range(d)),
        logical_z_support=frozenset((2 * i, 0) for i in range(d)),
        z_rows=z_rows,
        x_cols=x_cols,
        right_boundary_ancillas=right,
        bottom_boundary_ancillas=bottom,
    )


def commutes(support_a, kind_a: str, support_b, kind_b: str) -> bool:
    """Symplectic product of two single-kind Pauli products."""
    if kind_a == kind_b:
        return True
    return len(set(support_a) & set(support_b)) % 2 == 0


def ascii_dump(lattice: Lattice) -> str:
    """Plain-text grid: data `.`, X ancillas `x`, Z ancillas `z`."""
    kinds = {s.ancilla: s.kind.lower() for s in lattice.stabilizers}
    data = set(lattice.data)
    span = range(-1, 2 * lattice.d)
    rows = []
    for y in span:
        row = []
        for x in span:
            if (x, y) in kinds:
                row.append(kinds[(x, y)])
            elif (x, y) in data:
                row.append(".")
            else:
                row.append(" ")
        rows.append("".join(row).rstrip())
    return "\n".join(rows) + "\n"
