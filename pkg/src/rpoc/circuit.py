"""Circuit IR: gate kinds, instructions, and a QASM-flavored text format.

The in-memory form is a flat, ordered instruction list over indexed qubits
and classical bits.  Program order defines dataflow order.  Passes treat
circuits as immutable: they build new ones instead of editing in place.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

TWO_PI = 2.0 * math.pi

# Angle equality tolerance (radians).  Angles accumulate float error through
# gate merging; 1e-8 is far above double-precision drift at desk scale and
# far below any pi/2-spaced decision boundary.
EPS_ANGLE = 1e-8


def canonical_angle(x: float) -> float:
    """Map an angle into [0, 2*pi).  Idempotent."""
    v = x % TWO_PI
    # Float wraparound: (-1e-20) % 2pi rounds to 2pi itself.
    if v >= TWO_PI or v < 0.0:
        v = 0.0
    return v


def angles_equal(a: float, b: float, eps: float = EPS_ANGLE) -> bool:
    """Circular comparison: true iff angular distance < eps, wrapping at 0/2pi."""
    d = abs(canonical_angle(a) - canonical_angle(b))
    return d < eps or TWO_PI - d < eps


class ParseError(ValueError):
    """Syntax or validation error in circuit text, with source location."""

    def __init__(self, msg: str, line: int, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col
        self.msg = msg


class GateKind(Enum):
    ID = "id"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    U1 = "u1"
    U2 = "u2"
    U3 = "u3"
    CX = "cx"
    CZ = "cz"
    CU3 = "cu3"
    SWAP = "swap"
    SWAPZ = "swapz"
    CCX = "ccx"
    MCX = "mcx"
    CSWAP = "cswap"
    RESET = "reset"
    ANNOT = "annot"
    MEASURE = "measure"
    BARRIER = "barrier"


# Single-qubit unitary gates (everything a 1q run can absorb).
GATES_1Q = frozenset({
    GateKind.ID, GateKind.X, GateKind.Y, GateKind.Z, GateKind.H,
    GateKind.S, GateKind.SDG, GateKind.T, GateKind.TDG,
    GateKind.U1, GateKind.U2, GateKind.U3,
})

# Fixed operand arity; MCX and BARRIER are variadic (None).
_ARITY: dict[GateKind, int | None] = {
    **{k: 1 for k in GATES_1Q},
    GateKind.RESET: 1, GateKind.ANNOT: 1, GateKind.MEASURE: 1,
    GateKind.CX: 2, GateKind.CZ: 2, GateKind.CU3: 2,
    GateKind.SWAP: 2, GateKind.SWAPZ: 2,
    GateKind.CCX: 3, GateKind.CSWAP: 3,
    GateKind.MCX: None, GateKind.BARRIER: None,
}

_N_PARAMS: dict[GateKind, int] = {
    GateKind.U1: 1, GateKind.U2: 2, GateKind.U3: 3,
    GateKind.CU3: 3, GateKind.ANNOT: 2,
}

# Kinds that may carry an open-control polarity mask (one flag per control).
_MASKABLE = frozenset({GateKind.CX, GateKind.CCX, GateKind.MCX})


def n_controls(kind: GateKind, n_qubits: int) -> int:
    if kind is GateKind.CX or kind is GateKind.CU3 or kind is GateKind.CSWAP:
        return 1
    if kind is GateKind.CCX:
        return 2
    if kind is GateKind.MCX:
        return n_qubits - 1
    return 0


@dataclass(frozen=True)
class Instruction:
    """One gate/instruction: kind, qubit operands, angle params, clbits.

    Control-carrying kinds (cx, ccx, mcx) may have an open-control mask,
    one flag per control position (all-closed is stored as the empty tuple).
    SWAPZ's zero-designated operand is always qubits[1].
    MEASURE is the only kind with clbits.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbits: tuple[int, ...] = ()
    open_mask: tuple[bool, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params",
                           tuple(canonical_angle(float(p)) for p in self.params))
        object.__setattr__(self, "clbits", tuple(int(b) for b in self.clbits))
        object.__setattr__(self, "open_mask", tuple(bool(m) for m in self.open_mask))

        arity = _ARITY[self.kind]
        if arity is None:
            minimum = 2 if self.kind is GateKind.MCX else 1
            if len(self.qubits) < minimum:
                raise ValueError(f"{self.kind.value} needs >= {minimum} operands")
        elif len(self.qubits) != arity:
            raise ValueError(
                f"{self.kind.value} takes {arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit operand in {self.kind.value}")
        if len(self.params) != _N_PARAMS.get(self.kind, 0):
            raise ValueError(
                f"{self.kind.value} takes {_N_PARAMS.get(self.kind, 0)} parameter(s),"
                f" got {len(self.params)}")
        if self.kind is GateKind.MEASURE:
            if len(self.clbits) != 1:
                raise ValueError("measure takes exactly one classical bit")
        elif self.clbits:
            raise ValueError(f"{self.kind.value} takes no classical bits")

        if self.open_mask:
            nc = n_controls(self.kind, len(self.qubits))
            if self.kind not in _MASKABLE:
                raise ValueError(f"{self.kind.value} does not support open controls")
            if len(self.open_mask) != nc:
                raise ValueError(f"open-control mask length must be {nc}")
            if not any(self.open_mask):
                object.__setattr__(self, "open_mask", ())
            elif self.kind is GateKind.CCX:
                # Controls are symmetric: canonicalize open controls first so
                # the o-prefixed text form round-trips.
                pairs = sorted(zip(self.open_mask, self.qubits[:2]),
                               key=lambda p: not p[0])
                object.__setattr__(
                    self, "qubits", (pairs[0][1], pairs[1][1], self.qubits[2]))
                object.__setattr__(
                    self, "open_mask", (pairs[0][0], pairs[1][0]))

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:n_controls(self.kind, len(self.qubits))]

    @property
    def is_1q(self) -> bool:
        return self.kind in GATES_1Q


class Circuit:
    """Ordered instruction list over n_qubits qubits and n_clbits classical bits."""

    def __init__(self, n_qubits: int, n_clbits: int = 0):
        if n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        self.n_qubits = n_qubits
        self.n_clbits = n_clbits
        self.instructions: list[Instruction] = []
        # Final logical->physical permutation, set by routing.  Not part of
        # circuit identity.
        self.layout: list[int] | None = None

    def append(self, inst: Instruction) -> "Circuit":
        for q in inst.qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit index {q} out of range for width {self.n_qubits}")
        for b in inst.clbits:
            if not 0 <= b < self.n_clbits:
                raise ValueError(f"clbit index {b} out of range for width {self.n_clbits}")
        self.instructions.append(inst)
        return self

    def extend(self, insts: Iterable[Instruction]) -> "Circuit":
        for inst in insts:
            self.append(inst)
        return self

    def copy_empty(self) -> "Circuit":
        return Circuit(self.n_qubits, self.n_clbits)

    def replace(self, insts: Iterable[Instruction]) -> "Circuit":
        """New circuit with the same widths and the given instructions."""
        return self.copy_empty().extend(insts)

    # Builder shorthands.
    def _add(self, kind, qubits, params=(), clbits=(), open_mask=()):
        return self.append(Instruction(kind, qubits, params, clbits, open_mask))

    def id(self, q): return self._add(GateKind.ID, (q,))
    def x(self, q): return self._add(GateKind.X, (q,))
    def y(self, q): return self._add(GateKind.Y, (q,))
    def z(self, q): return self._add(GateKind.Z, (q,))
    def h(self, q): return self._add(GateKind.H, (q,))
    def s(self, q): return self._add(GateKind.S, (q,))
    def sdg(self, q): return self._add(GateKind.SDG, (q,))
    def t(self, q): return self._add(GateKind.T, (q,))
    def tdg(self, q): return self._add(GateKind.TDG, (q,))
    def u1(self, lam, q): return self._add(GateKind.U1, (q,), (lam,))
    def u2(self, phi, lam, q): return self._add(GateKind.U2, (q,), (phi, lam))
    def u3(self, theta, phi, lam, q): return self._add(GateKind.U3, (q,), (theta, phi, lam))
    def cx(self, c, t): return self._add(GateKind.CX, (c, t))
    def cz(self, a, b): return self._add(GateKind.CZ, (a, b))
    def cu3(self, theta, phi, lam, c, t):
        return self._add(GateKind.CU3, (c, t), (theta, phi, lam))
    def swap(self, a, b): return self._add(GateKind.SWAP, (a, b))

    def swapz(self, a, z):
        """Swap-with-zero gate; z is the zero-designated operand."""
        return self._add(GateKind.SWAPZ, (a, z))

    def ccx(self, c1, c2, t): return self._add(GateKind.CCX, (c1, c2, t))
    def mcx(self, *qubits): return self._add(GateKind.MCX, tuple(qubits))
    def cswap(self, c, t1, t2): return self._add(GateKind.CSWAP, (c, t1, t2))
    def reset(self, q): return self._add(GateKind.RESET, (q,))
    def annot(self, theta, phi, q): return self._add(GateKind.ANNOT, (q,), (theta, phi))
    def measure(self, q, c): return self._add(GateKind.MEASURE, (q,), clbits=(c,))
    def barrier(self, *qubits): return self._add(GateKind.BARRIER, tuple(qubits))

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Circuit)
                and self.n_qubits == other.n_qubits
                and self.n_clbits == other.n_clbits
                and self.instructions == other.instructions)

    def __repr__(self) -> str:
        return (f"Circuit(n_qubits={self.n_qubits}, n_clbits={self.n_clbits}, "
                f"{len(self.instructions)} instructions)")


def count_gates(c: Circuit, kinds: GateKind | Iterable[GateKind] | None = None) -> int:
    """Count instructions whose kind matches the filter (None counts all)."""
    if kinds is None:
        return len(c.instructions)
    if isinstance(kinds, GateKind):
        kinds = {kinds}
    else:
        kinds = set(kinds)
    return sum(1 for inst in c.instructions if inst.kind in kinds)


def cx_count(c: Circuit) -> int:
    return count_gates(c, GateKind.CX)


def count_1q(c: Circuit) -> int:
    return sum(1 for inst in c.instructions if inst.is_1q)


def depth(c: Circuit) -> int:
    """Longest dependency chain; instructions conflict iff they share a qubit
    or classical bit.  BARRIER occupies all its listed qubits."""
    levels: dict[tuple[str, int], int] = {}
    best = 0
    for inst in c.instructions:
        keys = [("q", q) for q in inst.qubits] + [("c", b) for b in inst.clbits]
        lvl = 1 + max((levels.get(k, 0) for k in keys), default=0)
        for k in keys:
            levels[k] = lvl
        best = max(best, lvl)
    return best


# ---------------------------------------------------------------------------
# Text format
#
# One statement per line, `;`-terminated.  Angles are decimal literals or
# pi expressions (`pi`, `pi/2`, `-pi/4`, `k*pi/m`).  Open controls use a
# leading-`o` prefix, one `o` per open control counted left to right
# (`ocx`, `occx`, `ooccx`); mcx takes a per-position list `mcx[oc...c]`.
# ---------------------------------------------------------------------------

_OPERAND_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]")
_STMT_RE = re.compile(
    r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*([a-zA-Z]*)\s*\])?"
    r"\s*(?:\(([^)]*)\))?\s*(.*)$", re.DOTALL)
_PI_RE = re.compile(r"^([+-]?)\s*(?:(\d+)\s*\*\s*)?pi\s*(?:/\s*(\d+))?$")


def _parse_angle(tok: str, line: int, col: int) -> float:
    tok = tok.strip()
    m = _PI_RE.match(tok)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        k = int(m.group(2)) if m.group(2) else 1
        d = int(m.group(3)) if m.group(3) else 1
        if d == 0:
            raise ParseError("division by zero in angle", line, col)
        return sign * k * math.pi / d
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"bad angle expression {tok!r}", line, col) from None


_NAME_TO_KIND = {k.value: k for k in GateKind}


def parse_program(text: str) -> Circuit:
    """Parse circuit text.  Raises ParseError with line/column on bad input."""
    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    pending: list[tuple[int, int, str]] = []  # (line, col, statement)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("//", 1)[0]
        if not code.strip():
            continue
        if not code.rstrip().endswith(";"):
            raise ParseError("missing ';'", lineno, len(code.rstrip()))
        pos = 0
        for piece in code.split(";"):
            if piece.strip():
                col = pos + (len(piece) - len(piece.lstrip())) + 1
                pending.append((lineno, col, piece.strip()))
            pos += len(piece) + 1

    insts: list[tuple[int, int, Instruction]] = []

    def operands(rest: str, line: int, col: int) -> list[tuple[str, int]]:
        out = []
        rest = rest.strip()
        if not rest:
            return out
        for part in rest.split(","):
            m = _OPERAND_RE.fullmatch(part.strip())
            if not m:
                raise ParseError(f"bad operand {part.strip()!r}", line, col)
            out.append((m.group(1), int(m.group(2))))
        return out

    for line, col, stmt in pending:
        m = _STMT_RE.match(stmt)
        if not m:
            raise ParseError(f"cannot parse statement {stmt!r}", line, col)
        name, bracket, paramstr, rest = m.groups()
        name = name.lower()

        if name in ("openqasm", "include"):  # tolerated headers
            continue
        if name in ("qreg", "creg"):
            parts = stmt.split(None, 1)
            decl = _OPERAND_RE.fullmatch(parts[1].strip()) if len(parts) == 2 else None
            if not decl:
                raise ParseError(f"bad register declaration {stmt!r}", line, col)
            reg = (decl.group(1), int(decl.group(2)))
            if reg[1] < 1:
                raise ParseError("register size must be >= 1", line, col)
            if name == "qreg":
                if qreg is not None:
                    raise ParseError("duplicate qreg declaration", line, col)
                qreg = reg
            else:
                if creg is not None:
                    raise ParseError("duplicate creg declaration", line, col)
                creg = reg
            continue

        if qreg is None:
            raise ParseError("statement before qreg declaration", line, col)

        if name == "measure":
            mm = re.fullmatch(r"(.+?)\s*->\s*(.+)", rest.strip())
            if paramstr is not None or not mm:
                raise ParseError("measure syntax is 'measure q[i] -> c[j];'", line, col)
            qops = operands(mm.group(1), line, col)
            cops = operands(mm.group(2), line, col)
            if len(qops) != 1 or len(cops) != 1:
                raise ParseError("measure takes one qubit and one clbit", line, col)
            if creg is None:
                raise ParseError("measure before creg declaration", line, col)
            if qops[0][0] != qreg[0] or cops[0][0] != creg[0]:
                raise ParseError("unknown register name", line, col)
            insts.append((line, col, Instruction(
                GateKind.MEASURE, (qops[0][1],), clbits=(cops[0][1],))))
            continue

        # Open-control prefix: strip leading o's until a known name remains.
        n_open_prefix = 0
        base = name
        while base not in _NAME_TO_KIND and base.startswith("o"):
            base = base[1:]
            n_open_prefix += 1
        if base not in _NAME_TO_KIND:
            raise ParseError(f"unknown statement {name!r}", line, col)
        kind = _NAME_TO_KIND[base]
        if n_open_prefix and kind not in _MASKABLE:
            raise ParseError(f"{base} does not take open controls", line, col)
        if bracket and kind is not GateKind.MCX:
            raise ParseError("polarity brackets are only valid on mcx", line, col)

        params = ()
        if paramstr is not None:
            params = tuple(_parse_angle(p, line, col) for p in paramstr.split(","))
        qops = operands(rest, line, col)
        for regname, idx in qops:
            if regname != qreg[0]:
                raise ParseError(f"unknown register {regname!r}", line, col)
            if idx >= qreg[1]:
                raise ParseError(f"qubit index {idx} out of range", line, col)
        qubits = tuple(idx for _, idx in qops)

        nc = n_controls(kind, len(qubits))
        mask: tuple[bool, ...] = ()
        if bracket:
            if len(bracket) != nc or set(bracket) - {"o", "c"}:
                raise ParseError("mcx polarity list must be one o/c per control",
                                 line, col)
            mask = tuple(ch == "o" for ch in bracket)
        elif n_open_prefix:
            if n_open_prefix > nc:
                raise ParseError("more open-control prefixes than controls", line, col)
            mask = tuple(i < n_open_prefix for i in range(nc))

        try:
            insts.append((line, col, Instruction(kind, qubits, params, open_mask=mask)))
        except ValueError as e:
            raise ParseError(str(e), line, col) from None

    if qreg is None:
        raise ParseError("no qreg declaration", 1, 0)
    circuit = Circuit(qreg[1], creg[1] if creg else 0)
    for line, col, inst in insts:
        try:
            circuit.append(inst)
        except ValueError as e:
            raise ParseError(str(e), line, col) from None
    return circuit


def _fmt_angle(v: float) -> str:
    return repr(v)


def emit_program(c: Circuit) -> str:
    """Serialize to canonical text.  parse_program(emit_program(c)) == c."""
    lines = [f"qreg q[{c.n_qubits}];"]
    if c.n_clbits:
        lines.append(f"creg c[{c.n_clbits}];")
    for inst in c.instructions:
        if inst.kind is GateKind.MEASURE:
            lines.append(f"measure q[{inst.qubits[0]}] -> c[{inst.clbits[0]}];")
            continue
        name = inst.kind.value
        if inst.open_mask:
            if inst.kind is GateKind.MCX:
                name += "[" + "".join("o" if o else "c" for o in inst.open_mask) + "]"
            else:
                name = "o" * sum(inst.open_mask) + name
        params = ""
        if inst.params:
            params = "(" + ",".join(_fmt_angle(p) for p in inst.params) + ")"
        ops = ",".join(f"q[{q}]" for q in inst.qubits)
        lines.append(f"{name}{params} {ops};")
    return "\n".join(lines) + "\n"
