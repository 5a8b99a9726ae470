"""Per-qubit static state tracking.

Two abstract domains, both initialized to the ground state on every wire:

- BasisState: the six octahedron states |0>, |1>, |+>, |->, |+i>, |-i> plus
  the unknown state TOP.  Single-qubit gates move a tracked state by direct
  matrix action followed by ray classification, which reproduces the named
  half/quarter-turn transitions and widens everything else to TOP.
- Pure state: a (theta, phi) pair with |psi> = cos(theta/2)|0> +
  e^{i phi} sin(theta/2)|1>, or None for unknown.  Single-qubit gates advance
  it by u3 merging; the leftover lambda never moves |0> and is dropped.

Multi-qubit gates conservatively send their operands to unknown, except
SWAP (states exchange) and SWAPZ when its designated operand is tracked as
the zero state.
"""
from __future__ import annotations

import cmath
import math
from enum import Enum

import numpy as np

from .circuit import EPS_ANGLE, GateKind, Instruction, angles_equal, canonical_angle
from .synth import U3Params, as_u3params, compose_u3, matrix_1q, pure_state_vector

PI = math.pi


class BasisState(Enum):
    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"
    PLUS_I = "+i"
    MINUS_I = "-i"
    TOP = "top"


# (theta, phi) of each tracked ray.
_BASIS_ANGLES: dict[BasisState, tuple[float, float]] = {
    BasisState.ZERO: (0.0, 0.0),
    BasisState.ONE: (PI, 0.0),
    BasisState.PLUS: (PI / 2, 0.0),
    BasisState.MINUS: (PI / 2, PI),
    BasisState.PLUS_I: (PI / 2, PI / 2),
    BasisState.MINUS_I: (PI / 2, 3 * PI / 2),
}

BASIS_VECTORS: dict[BasisState, np.ndarray] = {
    s: pure_state_vector(*ang) for s, ang in _BASIS_ANGLES.items()
}


def basis_state_angles(s: BasisState) -> tuple[float, float]:
    return _BASIS_ANGLES[s]


def canonical_pure(theta: float, phi: float) -> tuple[float, float]:
    """Normalize a pure-state parameter pair: theta in [0, pi], phi in
    [0, 2pi), phi = 0 at the poles (where it is physically irrelevant)."""
    theta = canonical_angle(theta)
    phi = canonical_angle(phi)
    if theta > PI:
        theta = 2 * PI - theta
        phi = canonical_angle(phi + PI)
    if theta < EPS_ANGLE or PI - theta < EPS_ANGLE:
        phi = 0.0
    return theta, phi


def vector_to_pure(v: np.ndarray) -> tuple[float, float]:
    """(theta, phi) of a single-qubit statevector, dropping global phase."""
    theta = 2.0 * math.atan2(abs(v[1]), abs(v[0]))
    if abs(v[1]) < 1e-12 or abs(v[0]) < 1e-12:
        phi = 0.0
    else:
        phi = cmath.phase(v[1]) - cmath.phase(v[0])
    return canonical_pure(theta, phi)


def classify_pure_as_basis(theta: float, phi: float) -> BasisState:
    """Snap a pure state onto one of the six tracked rays, else TOP."""
    theta, phi = canonical_pure(theta, phi)
    if angles_equal(theta, 0.0):
        return BasisState.ZERO
    if angles_equal(theta, PI):
        return BasisState.ONE
    if angles_equal(theta, PI / 2):
        for s in (BasisState.PLUS, BasisState.MINUS,
                  BasisState.PLUS_I, BasisState.MINUS_I):
            if angles_equal(phi, _BASIS_ANGLES[s][1]):
                return s
    return BasisState.TOP


def basis_transition(s: BasisState, kind: GateKind,
                     params: tuple[float, ...] = ()) -> BasisState:
    """Post-state of a tracked basis state under one single-qubit instruction."""
    if kind is GateKind.RESET:
        return BasisState.ZERO
    if kind is GateKind.ANNOT:
        return classify_pure_as_basis(*params)
    if kind is GateKind.MEASURE:
        return BasisState.TOP
    if kind is GateKind.BARRIER:
        return s
    if s is BasisState.TOP:
        return BasisState.TOP
    m = matrix_1q(kind, params)  # raises for multi-qubit kinds
    return classify_pure_as_basis(*vector_to_pure(m @ BASIS_VECTORS[s]))


def pure_transition(s: tuple[float, float] | None,
                    g: U3Params) -> tuple[float, float] | None:
    """Advance a tracked pure state through a single-qubit gate."""
    if s is None:
        return None
    merged = compose_u3(U3Params(s[0], s[1], 0.0), g)
    return canonical_pure(merged.theta, merged.phi)


def _is_tracked_zero_pure(s: tuple[float, float] | None) -> bool:
    return s is not None and angles_equal(s[0], 0.0)


class BasisTracker:
    """Per-qubit basis-state map driven by kept-gate semantics."""

    def __init__(self, n_qubits: int):
        self.states: list[BasisState] = [BasisState.ZERO] * n_qubits

    def set_top(self, qubits) -> None:
        for q in qubits:
            self.states[q] = BasisState.TOP

    def swap(self, a: int, b: int) -> None:
        self.states[a], self.states[b] = self.states[b], self.states[a]

    def step(self, inst: Instruction) -> None:
        k = inst.kind
        if k is GateKind.BARRIER:
            return
        if inst.is_1q or k in (GateKind.RESET, GateKind.ANNOT, GateKind.MEASURE):
            q = inst.qubits[0]
            self.states[q] = basis_transition(self.states[q], k, inst.params)
            return
        if k is GateKind.SWAP:
            self.swap(*inst.qubits)
            return
        if k is GateKind.SWAPZ:
            a, z = inst.qubits
            if self.states[z] is BasisState.ZERO:
                self.swap(a, z)
            else:
                self.set_top(inst.qubits)
            return
        self.set_top(inst.qubits)

    def apply_multiqubit(self, inst: Instruction,
                         replacement: list[Instruction] | None) -> None:
        """Update for a rewritten multi-qubit gate: None means the gate was
        kept; otherwise the replacement instructions are stepped in order
        (an empty list leaves every state untouched)."""
        if replacement is None:
            self.step(inst)
        else:
            for r in replacement:
                self.step(r)


class PureTracker:
    """Per-qubit pure-state map; entries are (theta, phi) or None for unknown."""

    def __init__(self, n_qubits: int):
        self.states: list[tuple[float, float] | None] = [(0.0, 0.0)] * n_qubits

    def set_top(self, qubits) -> None:
        for q in qubits:
            self.states[q] = None

    def swap(self, a: int, b: int) -> None:
        self.states[a], self.states[b] = self.states[b], self.states[a]

    def step(self, inst: Instruction) -> None:
        k = inst.kind
        if k is GateKind.BARRIER:
            return
        if k is GateKind.RESET:
            self.states[inst.qubits[0]] = (0.0, 0.0)
            return
        if k is GateKind.ANNOT:
            self.states[inst.qubits[0]] = canonical_pure(*inst.params)
            return
        if k is GateKind.MEASURE:
            self.states[inst.qubits[0]] = None
            return
        if inst.is_1q:
            q = inst.qubits[0]
            self.states[q] = pure_transition(self.states[q], as_u3params(inst))
            return
        if k is GateKind.SWAP:
            self.swap(*inst.qubits)
            return
        if k is GateKind.SWAPZ:
            a, z = inst.qubits
            if _is_tracked_zero_pure(self.states[z]):
                self.swap(a, z)
            else:
                self.set_top(inst.qubits)
            return
        self.set_top(inst.qubits)

    def apply_multiqubit(self, inst: Instruction,
                         replacement: list[Instruction] | None) -> None:
        if replacement is None:
            self.step(inst)
        else:
            for r in replacement:
                self.step(r)
