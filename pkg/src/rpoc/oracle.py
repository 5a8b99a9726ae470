"""Dense statevector simulation and functional-equivalence checking.

This is the ground truth every rewrite is judged against.  Gates are applied
natively (multi-qubit kinds are not routed through their decompositions), so
decomposition identities and table rewrites get an independent check.

Conventions: qubit 0 is the high-order bit of the amplitude index; measured
circuits yield an exact outcome distribution keyed by classical-bit strings
(character i of the key is clbit i).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, GateKind
from .synth import matrix_1q, pure_state_vector

MAX_QUBITS = 16
DEFAULT_TOL = 1e-9


class AnnotationError(ValueError):
    """A state annotation did not hold under simulation."""

    def __init__(self, qubit: int, position: int, trace_distance: float):
        super().__init__(
            f"annotation on qubit {qubit} at instruction {position} does not hold "
            f"(trace distance {trace_distance:.3e})")
        self.qubit = qubit
        self.position = position
        self.trace_distance = trace_distance


class ResetError(ValueError):
    """RESET applied to a qubit that is entangled or mixed."""


@dataclass
class EquivalenceReport:
    equivalent: bool
    fidelity: float
    phase: float
    detail: str = ""


def _as_tensor(state: np.ndarray, n: int) -> np.ndarray:
    return state.reshape([2] * n)


def _apply_1q(state: np.ndarray, m: np.ndarray, q: int, n: int) -> np.ndarray:
    t = np.moveaxis(_as_tensor(state, n), q, 0).reshape(2, -1)
    t = m @ t
    return np.moveaxis(t.reshape([2] * n), 0, q).reshape(-1)


def _apply_controlled_x(state, controls, polarities, target, n):
    t = _as_tensor(state, n).copy()
    idx: list = [slice(None)] * n
    for c, open_ in zip(controls, polarities):
        idx[c] = 0 if open_ else 1
    i0, i1 = list(idx), list(idx)
    i0[target] = 0
    i1[target] = 1
    i0, i1 = tuple(i0), tuple(i1)
    tmp = t[i0].copy()
    t[i0] = t[i1]
    t[i1] = tmp
    return t.reshape(-1)


def _apply_cu3(state, params, c, tgt, n):
    t = _as_tensor(state, n).copy()
    idx: list = [slice(None)] * n
    idx[c] = 1
    sub = t[tuple(idx)]
    # Fixing the control axis removed it; the target axis shifts down by one.
    tpos = tgt if tgt < c else tgt - 1
    m = matrix_1q(GateKind.U3, params)
    moved = np.moveaxis(sub, tpos, 0)
    shape = moved.shape
    moved = m @ moved.reshape(2, -1)
    t[tuple(idx)] = np.moveaxis(moved.reshape(shape), 0, tpos)
    return t.reshape(-1)


def _apply_swap(state, a, b, n):
    t = _as_tensor(state, n)
    return np.swapaxes(t, a, b).reshape(-1).copy()


def _apply_cz(state, a, b, n):
    t = _as_tensor(state, n).copy()
    idx: list = [slice(None)] * n
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1.0
    return t.reshape(-1)


def _apply_cswap(state, c, t1, t2, n):
    t = _as_tensor(state, n).copy()
    ia: list = [slice(None)] * n
    ia[c] = 1
    ia[t1] = 0
    ia[t2] = 1
    ib: list = [slice(None)] * n
    ib[c] = 1
    ib[t1] = 1
    ib[t2] = 0
    tmp = t[tuple(ia)].copy()
    t[tuple(ia)] = t[tuple(ib)]
    t[tuple(ib)] = tmp
    return t.reshape(-1)


def reduced_qubit_state(sv: np.ndarray, q: int) -> np.ndarray:
    """2x2 density matrix of qubit q: partial trace over all other qubits."""
    n = int(round(np.log2(sv.size)))
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    m = np.moveaxis(_as_tensor(sv, n), q, 0).reshape(2, -1)
    return m @ m.conj().T


def trace_distance_to_pure(rho: np.ndarray, vec: np.ndarray) -> float:
    proj = np.outer(vec, vec.conj())
    eig = np.linalg.eigvalsh(rho - proj)
    return 0.5 * float(np.sum(np.abs(eig)))


def _do_reset(state: np.ndarray, q: int, n: int, position: int) -> np.ndarray:
    rho = reduced_qubit_state(state, q)
    vals, vecs = np.linalg.eigh(rho)
    top = vecs[:, -1]
    td = trace_distance_to_pure(rho, top)
    if td > 1e-8:
        raise ResetError(
            f"reset on entangled/mixed qubit {q} at instruction {position} "
            f"(trace distance to nearest pure state {td:.3e})")
    # Rotate the qubit's pure state onto |0>.
    m = np.array([[top[0].conjugate(), top[1].conjugate()],
                  [-top[1], top[0]]])
    out = _apply_1q(state, m, q, n)
    return out / np.linalg.norm(out)


def simulate(c: Circuit, initial_state: np.ndarray | None = None
             ) -> np.ndarray | dict[str, float]:
    """Exact evolution from |0...0> (or `initial_state`).

    Returns the final statevector, or the exact outcome distribution over
    classical bits when the circuit ends in measurements.  MEASURE must be
    terminal; ANNOT instructions are checked as assertions; RESET requires
    the qubit to be unentangled at that point.
    """
    n = c.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"simulation limited to {MAX_QUBITS} qubits, got {n}")
    if initial_state is not None:
        state = np.asarray(initial_state, dtype=complex).reshape(-1).copy()
        if state.size != 2 ** n:
            raise ValueError("initial state has the wrong dimension")
    else:
        state = np.zeros(2 ** n, dtype=complex)
        state[0] = 1.0

    measured: dict[int, int] = {}  # qubit -> clbit
    used_clbits: set[int] = set()

    for pos, inst in enumerate(c.instructions):
        k = inst.kind
        if k is not GateKind.BARRIER:
            for q in inst.qubits:
                if q in measured:
                    raise ValueError(
                        f"instruction {pos} touches qubit {q} after measurement "
                        "(mid-circuit measurement is not supported)")
        if k is GateKind.BARRIER:
            continue
        if k is GateKind.MEASURE:
            b = inst.clbits[0]
            if b in used_clbits:
                raise ValueError(f"classical bit {b} measured twice")
            used_clbits.add(b)
            measured[inst.qubits[0]] = b
            continue
        if k is GateKind.ANNOT:
            q = inst.qubits[0]
            rho = reduced_qubit_state(state, q)
            td = trace_distance_to_pure(rho, pure_state_vector(*inst.params))
            if td > 1e-8:
                raise AnnotationError(q, pos, td)
            continue
        if k is GateKind.RESET:
            state = _do_reset(state, inst.qubits[0], n, pos)
            continue
        if inst.is_1q:
            state = _apply_1q(state, matrix_1q(k, inst.params), inst.qubits[0], n)
            continue
        if k is GateKind.CX:
            pol = inst.open_mask or (False,)
            state = _apply_controlled_x(state, (inst.qubits[0],), pol,
                                        inst.qubits[1], n)
        elif k is GateKind.CZ:
            state = _apply_cz(state, *inst.qubits, n)
        elif k is GateKind.SWAP:
            state = _apply_swap(state, *inst.qubits, n)
        elif k is GateKind.SWAPZ:
            a, z = inst.qubits
            state = _apply_controlled_x(state, (a,), (False,), z, n)
            state = _apply_controlled_x(state, (z,), (False,), a, n)
        elif k is GateKind.CU3:
            state = _apply_cu3(state, inst.params, inst.qubits[0], inst.qubits[1], n)
        elif k is GateKind.CCX or k is GateKind.MCX:
            controls = inst.qubits[:-1]
            pol = inst.open_mask or (False,) * len(controls)
            state = _apply_controlled_x(state, controls, pol, inst.qubits[-1], n)
        elif k is GateKind.CSWAP:
            state = _apply_cswap(state, *inst.qubits, n)
        else:  # pragma: no cover - all kinds handled above
            raise ValueError(f"cannot simulate {k.value}")

    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"statevector norm drifted to {norm}")

    if not measured:
        return state
    return _distribution(state, measured, c.n_clbits, n)


def _distribution(state: np.ndarray, measured: dict[int, int], n_clbits: int,
                  n: int) -> dict[str, float]:
    probs = np.abs(_as_tensor(state, n)) ** 2
    keep = sorted(measured)
    drop = tuple(q for q in range(n) if q not in measured)
    if drop:
        probs = probs.sum(axis=drop)
    dist: dict[str, float] = {}
    for bits in np.ndindex(*([2] * len(keep))):
        p = float(probs[bits])
        if p <= 1e-15:
            continue
        key = ["0"] * n_clbits
        for q, bit in zip(keep, bits):
            key[measured[q]] = str(bit)
        dist["".join(key)] = dist.get("".join(key), 0.0) + p
    return dist


def total_variation_distance(a: dict[str, float], b: dict[str, float]) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def expand_statevector(sv: np.ndarray, n_out: int, wire_map: list[int]) -> np.ndarray:
    """Embed an n-qubit state into n_out wires: input wire i lands on output
    wire wire_map[i]; unmapped wires are |0>."""
    n_in = int(round(np.log2(sv.size)))
    if len(wire_map) != n_in or len(set(wire_map)) != n_in:
        raise ValueError("wire_map must be a 1-1 map of the input wires")
    out = np.zeros([2] * n_out, dtype=complex)
    idx: list = [0] * n_out
    for w in wire_map:
        idx[w] = slice(None)
    order = np.argsort(wire_map)  # input axes ordered by destination wire
    out[tuple(idx)] = _as_tensor(sv, n_in).transpose(tuple(order))
    return out.reshape(-1)


def equivalent_up_to_global_phase(a: Circuit, b: Circuit,
                                  tol: float = DEFAULT_TOL,
                                  perm: list[int] | None = None
                                  ) -> EquivalenceReport:
    """Compare the action of two circuits from the all-zero start.

    Unmeasured circuits are compared by statevector fidelity; measured ones
    by exact outcome distributions.  `perm` maps a's wires onto b's wires
    (identity-padded widths), as produced by routing.
    """
    ra = simulate(a)
    rb = simulate(b)
    if isinstance(ra, dict) != isinstance(rb, dict):
        raise ValueError("circuits differ in terminal measurement structure")
    if isinstance(ra, dict):
        tv = total_variation_distance(ra, rb)
        return EquivalenceReport(tv <= tol, 1.0 - tv, 0.0,
                                 f"total variation distance {tv:.3e}")
    if perm is None:
        if a.n_qubits != b.n_qubits:
            raise ValueError("width mismatch (no wire permutation given)")
        va = ra
    else:
        va = expand_statevector(ra, b.n_qubits, perm)
    ip = np.vdot(va, rb)
    fid = float(abs(ip) ** 2)
    return EquivalenceReport(fid >= 1.0 - tol, fid, float(cmath.phase(ip)),
                             f"fidelity {fid:.12f}")
