"""Shared test utilities: random circuit generation, independent oracles."""
from __future__ import annotations

import math
import random

import numpy as np

from rpoc import Circuit, GateKind, Instruction
from rpoc.analysis import BasisState

TWO_PI = 2.0 * math.pi


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def random_statevector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def random_circuit(rng: random.Random, n: int, length: int,
                   allow_reset: bool = False) -> Circuit:
    """Random circuit over the kinds the state trackers understand.

    RESET is placed only on wires that have never been entangled, so the
    simulator accepts every generated circuit.
    """
    c = Circuit(n)
    entangled = [False] * n
    named_1q = [GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S,
                GateKind.SDG, GateKind.T, GateKind.TDG, GateKind.ID]
    for _ in range(length):
        r = rng.random()
        if r < 0.40:
            c.append(Instruction(rng.choice(named_1q), (rng.randrange(n),)))
        elif r < 0.55:
            c.u3(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI),
                 rng.uniform(0, TWO_PI), rng.randrange(n))
        elif r < 0.62:
            c.u1(rng.choice([0.0, math.pi / 2, math.pi, 3 * math.pi / 2,
                             rng.uniform(0, TWO_PI)]), rng.randrange(n))
        elif r < 0.75:
            a, b = rng.sample(range(n), 2)
            c.cx(a, b)
            entangled[a] = entangled[b] = True
        elif r < 0.81:
            a, b = rng.sample(range(n), 2)
            c.cz(a, b)
            entangled[a] = entangled[b] = True
        elif r < 0.89:
            a, b = rng.sample(range(n), 2)
            c.swap(a, b)
            entangled[a], entangled[b] = entangled[b], entangled[a]
        elif r < 0.93 and n >= 3:
            a, b, t = rng.sample(range(n), 3)
            c.ccx(a, b, t)
            entangled[a] = entangled[b] = entangled[t] = True
        elif r < 0.97:
            a, b = rng.sample(range(n), 2)
            c.swapz(a, b)
            entangled[a] = entangled[b] = True  # conservative
        elif allow_reset:
            q = rng.randrange(n)
            if not entangled[q]:
                c.reset(q)
    return c


# Gates preparing each tracked basis state from |0>.
BASIS_PREP: dict[BasisState, list[GateKind]] = {
    BasisState.ZERO: [],
    BasisState.ONE: [GateKind.X],
    BasisState.PLUS: [GateKind.H],
    BasisState.MINUS: [GateKind.X, GateKind.H],
    BasisState.PLUS_I: [GateKind.H, GateKind.S],
    BasisState.MINUS_I: [GateKind.H, GateKind.SDG],
}

# Spanning inputs for an unconstrained table wire: the Z basis plus two
# coherence witnesses.  Fidelity 1 on all four pins the replacement to the
# original up to one global phase on the whole subspace.
TOP_SPAN: list[list[GateKind]] = [
    [],                        # |0>
    [GateKind.X],              # |1>
    [GateKind.H],              # |+>
    [GateKind.H, GateKind.S],  # |+i>
]


def depth_oracle(c: Circuit) -> int:
    """Independent longest-path depth over the pairwise conflict relation."""
    insts = c.instructions
    if not insts:
        return 0
    def wires(inst):
        return {("q", q) for q in inst.qubits} | {("c", b) for b in inst.clbits}
    dp = [1] * len(insts)
    for j in range(len(insts)):
        wj = wires(insts[j])
        for i in range(j):
            if wires(insts[i]) & wj:
                dp[j] = max(dp[j], dp[i] + 1)
    return max(dp)


def partial_trace_oracle(sv: np.ndarray, q: int) -> np.ndarray:
    """Independent reduced density matrix via explicit index summation."""
    n = int(round(np.log2(sv.size)))
    rho = np.zeros((2, 2), dtype=complex)
    for i in range(sv.size):
        bi = (i >> (n - 1 - q)) & 1
        for bj in range(2):
            j = (i & ~(1 << (n - 1 - q))) | (bj << (n - 1 - q))
            rho[bi, bj] += sv[i] * np.conj(sv[j])
    return rho
