"""Annotated stabilizer-circuit IR and its plain-text format.

A circuit is an ordered list of instructions over qubits 0..num_qubits-1:
gates (RZ, RX, H, CX, MZ, MX), probabilistic Pauli channels (DEP1, DEP2,
XFLIP, ZFLIP), TICK layer separators, and annotations (DET, OBS) whose
measurement references are relative look-backs into the measurement
stream.  Instruction order is the single source of temporal order.

Text format (one instruction per line, `#` starts a comment):

    circuit   ::= header line*
    header    ::= "QUBITS" int
    line      ::= gate | channel | "TICK" | detector | observable
    gate      ::= ("RZ"|"RX"|"H"|"MZ"|"MX") qubit+ | "CX" (qubit qubit)+
    channel   ::= ("DEP1"|"XFLIP"|"ZFLIP") "(" prob ")" qubit+
                | "DEP2" "(" prob ")" (qubit qubit)+
    detector  ::= "DET" "[" label "]" ref+
    observable::= "OBS" "[" int "]" ref+
    ref       ::= negative int (look-back; -1 is the latest measurement)

Labels are opaque non-whitespace strings used for diagnostics only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

GATES = ("RZ", "RX", "H", "CX", "MZ", "MX")
CHANNELS = ("DEP1", "DEP2", "XFLIP", "ZFLIP")
MARKERS = ("TICK", "DET", "OBS")
KINDS = GATES + CHANNELS + MARKERS

TWO_QUBIT = ("CX", "DEP2")
MEASUREMENTS = ("MZ", "MX")


@dataclass(frozen=True)
class Instruction:
    """One circuit instruction.

    targets: flat qubit ids (pairs flattened for CX / DEP2).
    p:       channel probability (channels only).
    refs:    negative measurement look-backs (DET / OBS only).
    label:   diagnostic label (DET only).
    obs_id:  logical observable index (OBS only).
    """

    kind: str
    targets: tuple = ()
    p: float = 0.0
    refs: tuple = ()
    label: str = ""
    obs_id: int = 0

    def num_measurements(self) -> int:
        return len(self.targets) if self.kind in MEASUREMENTS else 0


@dataclass
class Circuit:
    """Immutable-by-convention instruction list with qubit count."""

    num_qubits: int
    instructions: list = field(default_factory=list)

    @property
    def num_measurements(self) -> int:
        return sum(i.num_measurements() for i in self.instructions)

    @property
    def num_detectors(self) -> int:
        return sum(1 for i in self.instructions if i.kind == "DET")

    @property
    def num_observables(self) -> int:
        ids = {i.obs_id for i in self.instructions if i.kind == "OBS"}
        return max(ids) + 1 if ids else 0

    @property
    def detector_labels(self) -> list:
        return [i.label for i in self.instructions if i.kind == "DET"]


class CircuitParseError(ValueError):
    pass


def validate(circuit: Circuit) -> list:
    """Return every invariant violation as `instr <idx>: <message>` strings."""
    errors = []
    n = circuit.num_qubits
    meas_seen = 0
    layer_used = set()
    for idx, ins in enumerate(circuit.instructions):
        if ins.kind not in KINDS:
            errors.append(f"instr {idx}: unknown kind {ins.kind!r}")
            continue
        if ins.kind == "TICK":
            layer_used.clear()
            continue
        for q in ins.targets:
            if not (0 <= q < n):
                errors.append(f"instr {idx}: qubit {q} out of range 0..{n - 1}")
        if ins.kind in TWO_QUBIT:
            if len(ins.targets) % 2:
                errors.append(f"instr {idx}: {ins.kind} needs an even target count")
            for a, b in zip(ins.targets[::2], ins.targets[1::2]):
                if a == b:
                    errors.append(f"instr {idx}: {ins.kind} pair ({a},{a}) repeats a qubit")
        if ins.kind in CHANNELS:
            if not 0.0 <= ins.p <= 1.0:
                errors.append(f"instr {idx}: probability {ins.p} outside [0, 1]")
        elif ins.kind in GATES:
            for q in ins.targets:
                if q in layer_used:
                    errors.append(f"instr {idx}: qubit {q} reused within a layer")
                layer_used.add(q)
        if ins.kind in ("DET", "OBS"):
            if not ins.refs:
                errors.append(f"instr {idx}: {ins.kind} with no measurement refs")
            for r in ins.refs:
                if r >= 0:
                    errors.append(f"instr {idx}: ref {r} is not a negative look-back")
                elif -r > meas_seen:
                    errors.append(
                        f"instr {idx}: ref {r} reaches before the first measurement"
                        f" ({meas_seen} seen)")
        if ins.kind == "OBS" and ins.obs_id < 0:
            errors.append(f"instr {idx}: negative observable id {ins.obs_id}")
        meas_seen += ins.num_measurements()
    return errors


def serialize(circuit: Circuit) -> str:
    lines = [f"QUBITS {circuit.num_qubits}"]
    for ins in circuit.instructions:
        lines.append(_format_instruction(ins))
    return "\n".join(lines) + "\n"


def _format_instruction(ins: Instruction) -> str:
    if ins.kind == "TICK":
        return "TICK"
    if ins.kind == "DET":
        return f"DET[{ins.label}] " + " ".join(map(str, ins.refs))
    if ins.kind == "OBS":
        return f"OBS[{ins.obs_id}] " + " ".join(map(str, ins.refs))
    head = ins.kind
    if ins.kind in CHANNELS:
        head += f"({ins.p!r})"
    return head + " " + " ".join(map(str, ins.targets))


def parse(text: str) -> Circuit:
    """Inverse of serialize; raises CircuitParseError with line numbers."""
    num_qubits = None
    instructions = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if num_qubits is None:
            if head != "QUBITS":
                raise CircuitParseError(f"line {ln}: expected QUBITS header, got '{head}'")
            num_qubits = _parse_int(ln, tokens, 1)
            if len(tokens) != 2:
                raise CircuitParseError(f"line {ln}: trailing tokens after QUBITS")
            continue
        instructions.append(_parse_instruction(ln, head, tokens))
    if num_qubits is None:
        raise CircuitParseError("line 1: missing QUBITS header")
    return Circuit(num_qubits, instructions)


def _parse_instruction(ln: int, head: str, tokens: list) -> Instruction:
    if head == "TICK":
        if len(tokens) != 1:
            raise CircuitParseError(f"line {ln}: TICK takes no arguments")
        return Instruction("TICK")
    if head.startswith("DET[") or head.startswith("OBS["):
        kind = head[:3]
        if not head.endswith("]"):
            raise CircuitParseError(f"line {ln}: unterminated bracket in '{head}'")
        inner = head[4:-1]
        refs = tuple(_parse_int(ln, tokens, i) for i in range(1, len(tokens)))
        if kind == "DET":
            return Instruction("DET", refs=refs, label=inner)
        try:
            obs_id = int(inner)
        except ValueError:
            raise CircuitParseError(f"line {ln}: observable id '{inner}' is not an integer")
        return Instruction("OBS", refs=refs, obs_id=obs_id)
    name, _, paren = head.partition("(")
    if name in CHANNELS:
        if not paren.endswith(")"):
            raise CircuitParseError(f"line {ln}: malformed probability in '{head}'")
        try:
            p = float(paren[:-1])
        except ValueError:
            raise CircuitParseError(f"line {ln}: bad probability '{paren[:-1]}'")
        targets = tuple(_parse_int(ln, tokens, i) for i in range(1, len(tokens)))
        return Instruction(name, targets, p=p)
    if name in GATES and not paren:
        targets = tuple(_parse_int(ln, tokens, i) for i in range(1, len(tokens)))
        return Instruction(name, targets)
    raise CircuitParseError(f"line {ln}: unknown opcode '{head}'")


def _parse_int(ln: int, tokens: list, i: int) -> int:
    try:
        return int(tokens[i])
    except (ValueError, IndexError):
        got = tokens[i] if i < len(tokens) else "<missing>"
        raise CircuitParseError(f"line {ln}: expected integer, got '{got}'")
