"""Memory-experiment circuit generation.

Two syndrome-extraction schedules are generated for the rotated planar
code: the standard one-ancilla-per-stabilizer circuit (four CNOT layers
in a hook-benign zigzag order) and a three-CNOT dynamic schedule in
which every plaquette alternates between measuring its X and Z
stabilizer each half-round, pumping X errors rightward and Z errors
downward toward the patch boundary.

Detector annotation supports three schemes:

- areal: one detector per ancilla measurement pair (same ancilla, same
  basis, consecutive), plus final detectors reconstructed from the data
  measurements; the full syndrome record.
- rowcol: row/column-aggregated parities, 2(d-1) detectors per round
  (standard schedule only).
- boundary: detectors only at plaquettes touching the right or bottom
  patch edge, one basis per plaquette (three-CNOT schedule only).

Noise model: Depolarize1(p) after 1-qubit gates, Depolarize2(p) after
each CNOT, X-flip(p) after ResetZ / before MeasureZ, Z-flip(p) after
ResetX / before MeasureX, no idle noise. One channel instruction is
emitted per noisy operation site.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .circuit import Circuit, Instruction
from .lattice import Lattice, build_lattice

CIRCUIT_KINDS = ("standard", "3cx")
SCHEMES = ("areal", "rowcol", "boundary")
BASES = ("z", "x")

# Standard-schedule CNOT corner orders: X ancillas pump left-to-right,
# Z ancillas top-to-bottom; the pair is conflict-free on the checkerboard
# and keeps hook errors along the benign directions.
X_ORDER = (1, 2, 3, 4)
Z_ORDER = (1, 3, 2, 4)


@dataclass(frozen=True)
class NoiseModel:
    """Uniform circuit-level depolarizing noise of strength p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must be in [0, 1), got {self.p}")


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters of one memory experiment."""

    d: int
    circuit_kind: str
    scheme: str
    basis: str = "z"
    p: float = 0.0
    noisy_rounds: int | None = None
    flush_rounds: int | None = None

    def __post_init__(self):
        if self.circuit_kind not in CIRCUIT_KINDS:
            raise ValueError(f"unknown circuit kind {self.circuit_kind!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.scheme == "boundary" and self.circuit_kind != "3cx":
            raise ValueError("boundary scheme requires the 3cx circuit")
        if self.scheme == "rowcol" and self.circuit_kind != "standard":
            raise ValueError("rowcol scheme requires the standard circuit")
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"d must be odd and >= 3, got {self.d}")
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must be in [0, 1), got {self.p}")
        if self.noisy_rounds is None:
            object.__setattr__(self, "noisy_rounds", 20 * self.d)
        if self.noisy_rounds < 1:
            raise ValueError("noisy_rounds must be >= 1")
        if self.flush_rounds is None:
            object.__setattr__(
                self, "flush_rounds",
                self.d if self.scheme == "boundary" else 0)


# --------------------------------------------------------------------------
# standard schedule


def _ancillas_by_type(lat: Lattice):
    xa = [s.ancilla for s in lat.stabilizers if s.kind == "X"]
    za = [s.ancilla for s in lat.stabilizers if s.kind == "Z"]
    return sorted(xa), sorted(za)


def build_standard_round(lat: Lattice, noisy: bool, p: float = 0.0) -> list[Instruction]:
    """One round: ancilla resets, four CNOT layers, ancilla measurements."""
    xa, za = _ancillas_by_type(lat)
    out = []
    out.append(Instruction("RX", tuple(lat.qubit_id(a) for a in xa)))
    out.append(Instruction("RZ", tuple(lat.qubit_id(a) for a in za)))
    if noisy:
        for a in xa:
            out.append(Instruction("ZFLIP", (lat.qubit_id(a),), p=p))
        for a in za:
            out.append(Instruction("XFLIP", (lat.qubit_id(a),), p=p))
    out.append(Instruction("TICK"))
    for layer in range(4):
        pairs = []
        for s in lat.stabilizers:
            order = X_ORDER if s.kind == "X" else Z_ORDER
            data = s.corners[order[layer] - 1]
            if data is None:
                continue
            a, q = lat.qubit_id(s.ancilla), lat.qubit_id(data)
            pairs.append((a, q) if s.kind == "X" else (q, a))
        pairs.sort()
        flat = tuple(q for pair in pairs for q in pair)
        out.append(Instruction("CX", flat))
        if noisy:
            for pair in pairs:
                out.append(Instruction("DEP2", pair, p=p))
        out.append(Instruction("TICK"))
    if noisy:
        for a in xa:
            out.append(Instruction("ZFLIP", (lat.qubit_id(a),), p=p))
        for a in za:
            out.append(Instruction("XFLIP", (lat.qubit_id(a),), p=p))
    out.append(Instruction("MX", tuple(lat.qubit_id(a) for a in xa)))
    out.append(Instruction("MZ", tuple(lat.qubit_id(a) for a in za)))
    out.append(Instruction("TICK"))
    return out


# --------------------------------------------------------------------------
# three-CNOT dynamic schedule
#
# Each half-round, every plaquette runs a three-layer CNOT template, then
# all ancillas are measured in the basis of the stabilizer they currently
# hold and reset in the opposite basis. Plaquettes whose current
# stabilizer is X-type run the A template (ancilla-controlled CNOTs,
# completing the X detecting region); Z-type plaquettes simultaneously
# run the B template (data-controlled CNOTs). The current type of every
# plaquette swaps each half-round.
#
# The A template couples corners ORDER_A[layer]; the B template couples
# the 2<->3 swap of that order, which is the unique choice that tiles
# (every data qubit is touched at most once per layer, including at the
# patch edges). Two-corner edge plaquettes couple their in-template
# corners at the template layer and, where corner 4 is present, couple it
# in the one remaining conflict-free layer.


@dataclass(frozen=True)
class ThreeCXSchedule:
    """Pinned parameters of the dynamic schedule (see module docstring)."""

    order_a: tuple[int, int, int]       # corner coupled per layer, A template
    a_to_data: tuple[bool, bool, bool]  # per layer: ancilla controls (A)
    b_to_data: tuple[bool, bool, bool]  # per layer: ancilla controls (B)
    corner4_to_data: dict = field(default_factory=dict)
    # keys ("top"|"left", "a"|"b") -> bool, direction of the corner-4 CNOT
    meas_post_a: bool = False  # A measures in the post-half (Z) basis
    meas_post_b: bool = False  # B measures in the post-half (X) basis
    reset_same_a: bool = False  # reset back in the A-measured basis
    reset_same_b: bool = False  # reset back in the B-measured basis
    init_flip: bool = False   # first resets opposite each plaquette's basis
    order_b_same: bool = False  # B keeps A's layer order outright
    role_static: bool = False  # key A/B on static colour, not current kind

    @property
    def order_b(self) -> tuple[int, int, int]:
        # the two conflict-free meshings: B shares A's corner-1 layer and
        # either mirrors corners 2/3 or keeps A's order unchanged
        if self.order_b_same:
            return self.order_a
        return tuple({1: 1, 2: 3, 3: 2}[c] for c in self.order_a)


# Pinned after an exhaustive scan of the template space gated on:
# noiseless determinism, the four error-motion cases, pump/stick/
# neutralize behavior at the boundaries, and circuit distance d.
THREECX = ThreeCXSchedule(
    order_a=(2, 1, 3),
    a_to_data=(True, True, True),
    b_to_data=(False, False, False),
    corner4_to_data={("top", "a"): True, ("top", "b"): False,
                     ("left", "a"): True, ("left", "b"): False},
)


def _edge_type(lat: Lattice, anc) -> str | None:
    x, y = anc
    if y == -1:
        return "top"
    if y == 2 * lat.d - 1:
        return "bottom"
    if x == -1:
        return "left"
    if x == 2 * lat.d - 1:
        return "right"
    return None


def current_kind(static_kind: str, half_index: int) -> str:
    """Stabilizer type held by a plaquette entering half-round `half_index`."""
    if half_index % 2 == 0:
        return static_kind
    return "Z" if static_kind == "X" else "X"


def build_3cx_halfround(lat: Lattice, half_index: int, noisy: bool,
                        p: float = 0.0,
                        sched: ThreeCXSchedule = THREECX) -> list[Instruction]:
    """One half-round: every plaquette runs A while it holds an X
    stabilizer and B while it holds a Z one, so the two templates
    interleave on the checkerboard and swap colours each half-round."""
    inv_a = {c: i for i, c in enumerate(sched.order_a)}
    inv_b = {c: i for i, c in enumerate(sched.order_b)}
    # the single remaining conflict-free layer for corner 4 of top/left
    # edge plaquettes (own ancilla busy in one layer, the shared data
    # qubit claimed by a neighbour's CNOT in another)
    c4_layer = {("top", "a"): inv_a[2], ("top", "b"): inv_a[3],
                ("left", "a"): inv_a[3], ("left", "b"): inv_a[2]}

    out = []
    layers: list[list[tuple[int, int]]] = [[], [], []]
    meas_x, meas_z = [], []
    reset_x, reset_z = [], []
    for s in lat.stabilizers:
        kind_now = current_kind(s.kind, half_index)
        role_kind = s.kind if sched.role_static else kind_now
        role = "a" if role_kind == "X" else "b"
        inv = inv_a if role == "a" else inv_b
        to_data = sched.a_to_data if role == "a" else sched.b_to_data
        a = lat.qubit_id(s.ancilla)
        for corner, data in enumerate(s.corners, start=1):
            if data is None:
                continue
            q = lat.qubit_id(data)
            if corner != 4:
                layer = inv[corner]
                pair = (a, q) if to_data[layer] else (q, a)
            else:
                edge = _edge_type(lat, s.ancilla)
                if edge is None or (edge, role) not in sched.corner4_to_data:
                    continue  # bulk plaquettes never couple corner 4
                layer = c4_layer[(edge, role)]
                pair = ((a, q) if sched.corner4_to_data[(edge, role)]
                        else (q, a))
            layers[layer].append(pair)
        meas_post = sched.meas_post_a if role == "a" else sched.meas_post_b
        reset_same = (sched.reset_same_a if role == "a"
                      else sched.reset_same_b)
        meas_kind = kind_now
        if meas_post:
            meas_kind = "Z" if kind_now == "X" else "X"
        (meas_x if meas_kind == "X" else meas_z).append(s.ancilla)
        reset_kind = meas_kind
        if not reset_same:
            reset_kind = "Z" if meas_kind == "X" else "X"
        (reset_x if reset_kind == "X" else reset_z).append(s.ancilla)
    for layer_pairs in layers:
        layer_pairs.sort()
        flat = tuple(q for pair in layer_pairs for q in pair)
        out.append(Instruction("CX", flat))
        if noisy:
            for pair in layer_pairs:
                out.append(Instruction("DEP2", pair, p=p))
        out.append(Instruction("TICK"))
    meas_x.sort()
    meas_z.sort()
    reset_x.sort()
    reset_z.sort()
    if noisy:
        for a in meas_x:
            out.append(Instruction("ZFLIP", (lat.qubit_id(a),), p=p))
        for a in meas_z:
            out.append(Instruction("XFLIP", (lat.qubit_id(a),), p=p))
    out.append(Instruction("MX", tuple(lat.qubit_id(a) for a in meas_x)))
    out.append(Instruction("MZ", tuple(lat.qubit_id(a) for a in meas_z)))
    out.append(Instruction("TICK"))
    out.append(Instruction("RZ", tuple(lat.qubit_id(a) for a in reset_z)))
    out.append(Instruction("RX", tuple(lat.qubit_id(a) for a in reset_x)))
    if noisy:
        for a in reset_z:
            out.append(Instruction("XFLIP", (lat.qubit_id(a),), p=p))
        for a in reset_x:
            out.append(Instruction("ZFLIP", (lat.qubit_id(a),), p=p))
    out.append(Instruction("TICK"))
    return out


# --------------------------------------------------------------------------
# detectors


def _boundary_roles(lat: Lattice):
    """Map boundary ancilla -> watched measurement basis.

    Right-edge plaquettes watch their Z-stabilizer outcomes (X errors
    pumped rightward), bottom-edge ones their X outcomes (Z errors pumped
    down). The two plaquettes touching both edges take one role each:
    the one on the right edge column watches Z, the other X.
    """
    right = set(lat.right_boundary_ancillas)
    bottom = set(lat.bottom_boundary_ancillas)
    roles = {}
    for a in right | bottom:
        if a in right and a in bottom:
            roles[a] = "z" if a[0] > a[1] else "x"
        elif a in right:
            roles[a] = "z"
        else:
            roles[a] = "x"
    return roles


def attach_detectors(circuit: Circuit, lat: Lattice, scheme: str, basis: str,
                     prefix_measurements: int | None = None) -> Circuit:
    """Append detector and observable annotations to a measured circuit.

    The circuit must contain the per-round ancilla measurements followed
    by one measurement of every data qubit in `basis`. Detector pairs
    lying entirely before `prefix_measurements` (default: the number of
    measurements preceding the first noise channel) are omitted as
    trivially zero.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    data_set = set(lat.data)
    anc_set = set(lat.ancillas)
    coord_of = {lat.qubit_id(c): c for c in lat.data + lat.ancillas}

    streams: dict[tuple, list[int]] = {}   # (ancilla, basis) -> ordinals
    feeds: dict[tuple, set] = {}           # (ancilla, basis) -> data coords
    supports: dict[int, frozenset] = {}    # ordinal -> measured data support
    data_meas: dict[tuple, int] = {}
    prefix_auto = None
    m = 0
    for ins in circuit.instructions:
        if ins.kind == "CX":
            for c, t in zip(ins.targets[0::2], ins.targets[1::2]):
                cc, tc = coord_of[c], coord_of[t]
                if tc in anc_set and cc in data_set:
                    feeds.setdefault((tc, "z"), set()).symmetric_difference_update({cc})
                elif cc in anc_set and tc in data_set:
                    feeds.setdefault((cc, "x"), set()).symmetric_difference_update({tc})
        elif ins.kind in ("RZ", "RX"):
            for q in ins.targets:
                qc = coord_of[q]
                if qc in anc_set:
                    feeds[(qc, "z")] = set()
                    feeds[(qc, "x")] = set()
        elif ins.kind in ("MZ", "MX"):
            b = "z" if ins.kind == "MZ" else "x"
            for q in ins.targets:
                qc = coord_of[q]
                if qc in anc_set:
                    streams.setdefault((qc, b), []).append(m)
                    supports[m] = frozenset(feeds.get((qc, b), ()))
                    feeds[(qc, "z")] = set()
                    feeds[(qc, "x")] = set()
                else:
                    if b != basis:
                        raise ValueError(
                            f"data qubit {qc} measured in basis {b!r}, "
                            f"memory basis is {basis!r}")
                    data_meas[qc] = m
                m += 1
        elif ins.kind in ("DEP1", "DEP2", "XFLIP", "ZFLIP"):
            if prefix_auto is None:
                prefix_auto = m
    total = m
    if len(data_meas) != len(lat.data):
        raise ValueError("circuit lacks a final measurement of every data qubit")
    prefix = (prefix_measurements if prefix_measurements is not None
              else (prefix_auto or 0))

    def ref(ordinal):
        return ordinal - total

    dets = []

    def det(label, ordinals):
        dets.append(Instruction("DET", refs=tuple(ref(o) for o in ordinals),
                                label=label))

    if scheme == "areal":
        for (anc, b), ms in sorted(streams.items()):
            for i in range(1, len(ms)):
                if ms[i] < prefix:
                    continue
                det(f"areal:{anc[0]},{anc[1]}{b}:{i}", (ms[i - 1], ms[i]))
        for (anc, b), ms in sorted(streams.items()):
            if b != basis or not ms:
                continue
            last = ms[-1]
            det(f"areal:{anc[0]},{anc[1]}{b}:f",
                (last, *sorted(data_meas[q] for q in supports[last])))
    elif scheme == "rowcol":
        groups = [("r", g, row) for g, row in enumerate(lat.z_rows)] + \
                 [("c", g, col) for g, col in enumerate(lat.x_cols)]
        for tag, g, ancs in groups:
            b = "z" if tag == "r" else "x"
            per = [streams[(a, b)] for a in sorted(ancs)]
            rounds = min(len(ms) for ms in per)
            for i in range(1, rounds):
                if max(ms[i] for ms in per) < prefix:
                    continue
                det(f"rowcol:{tag}{g}:{i}",
                    [ms[j] for ms in per for j in (i - 1, i)])
            if (b == "z") == (basis == "z"):
                refs = []
                for ms in per:
                    refs.append(ms[-1])
                    refs.extend(sorted(data_meas[q] for q in supports[ms[-1]]))
                det(f"rowcol:{tag}{g}:f", refs)
    else:  # boundary
        roles = _boundary_roles(lat)
        for anc, b in sorted(roles.items()):
            ms = streams[(anc, b)]
            for i in range(1, len(ms)):
                if ms[i] < prefix:
                    continue
                det(f"boundary:{anc[0]},{anc[1]}{b}:{i}", (ms[i - 1], ms[i]))
        for anc, b in sorted(roles.items()):
            if b != basis:
                continue
            ms = streams[(anc, b)]
            last = ms[-1]
            det(f"boundary:{anc[0]},{anc[1]}{b}:f",
                (last, *sorted(data_meas[q] for q in supports[last])))

    support = lat.logical_z_support if basis == "z" else lat.logical_x_support
    obs = Instruction("OBS", refs=tuple(ref(data_meas[q]) for q in support),
                      obs_id=0)
    return Circuit(circuit.num_qubits, tuple(circuit.instructions) + tuple(dets) + (obs,))


# --------------------------------------------------------------------------
# memory experiment


def build_memory_experiment(spec: ExperimentSpec,
                            sched: ThreeCXSchedule = THREECX) -> Circuit:
    """Full memory experiment: reset, noise-free flush and reference
    rounds, noisy rounds, one noise-free round, data readout, detectors."""
    lat = build_lattice(spec.d)
    ins: list[Instruction] = []
    data_ids = tuple(lat.qubit_id(q) for q in lat.data)
    reset_kind = "RZ" if spec.basis == "z" else "RX"
    ins.append(Instruction(reset_kind, data_ids))
    if spec.circuit_kind == "3cx":
        # seed each plaquette's first detecting region in its static basis
        xa, za = _ancillas_by_type(lat)
        if sched.init_flip:
            xa, za = za, xa
        ins.append(Instruction("RX", tuple(lat.qubit_id(a) for a in xa)))
        ins.append(Instruction("RZ", tuple(lat.qubit_id(a) for a in za)))
    else:
        ins.append(Instruction(reset_kind,
                               tuple(lat.qubit_id(a) for a in lat.ancillas)))
    ins.append(Instruction("TICK"))

    def add_round(noisy: bool, half_index: int) -> int:
        if spec.circuit_kind == "standard":
            ins.extend(build_standard_round(lat, noisy, spec.p))
            return half_index
        for k in (half_index, half_index + 1):
            ins.extend(build_3cx_halfround(lat, k, noisy, spec.p, sched))
        return half_index + 2

    h = 0
    for _ in range(spec.flush_rounds + 1):
        h = add_round(False, h)
    prefix_measurements = sum(i.num_measurements() for i in ins)
    for _ in range(spec.noisy_rounds):
        h = add_round(True, h)
    h = add_round(False, h)
    ins.append(Instruction("MZ" if spec.basis == "z" else "MX", data_ids))
    circ = Circuit(lat.num_qubits, tuple(ins))
    return attach_detectors(circ, lat, spec.scheme, spec.basis,
                            prefix_measurements)
