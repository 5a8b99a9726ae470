"""Single-qubit algebra and gate decomposition.

Covers ZYZ re-synthesis of 2x2 unitaries, u3 composition, unrolling of
compound gates into a {u1,u2,u3,id,cx} basis, adjacent-gate cleanup, and
two-qubit state preparation from known product inputs.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuit import (Circuit, EPS_ANGLE, GateKind, Instruction,
                      angles_equal, canonical_angle)

PI = math.pi
UNITARY_TOL = 1e-10


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    ct, st = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([
        [ct, -cmath.exp(1j * lam) * st],
        [cmath.exp(1j * phi) * st, cmath.exp(1j * (phi + lam)) * ct],
    ])


_SQ2 = 1.0 / math.sqrt(2.0)
_GATE_1Q_MATS = {
    GateKind.ID: np.eye(2, dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, cmath.exp(1j * PI / 4)]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, cmath.exp(-1j * PI / 4)]], dtype=complex),
}

# Exact u3 parameters of the named single-qubit gates.
_NAMED_U3 = {
    GateKind.ID: (0.0, 0.0, 0.0),
    GateKind.X: (PI, 0.0, PI),
    GateKind.Y: (PI, PI / 2, PI / 2),
    GateKind.Z: (0.0, 0.0, PI),
    GateKind.H: (PI / 2, 0.0, PI),
    GateKind.S: (0.0, 0.0, PI / 2),
    GateKind.SDG: (0.0, 0.0, 3 * PI / 2),
    GateKind.T: (0.0, 0.0, PI / 4),
    GateKind.TDG: (0.0, 0.0, 7 * PI / 4),
}


def matrix_1q(kind: GateKind, params: tuple[float, ...] = ()) -> np.ndarray:
    """2x2 matrix of a single-qubit gate kind."""
    if kind in _GATE_1Q_MATS:
        return _GATE_1Q_MATS[kind]
    if kind is GateKind.U1:
        return u3_matrix(0.0, 0.0, params[0])
    if kind is GateKind.U2:
        return u3_matrix(PI / 2, params[0], params[1])
    if kind is GateKind.U3:
        return u3_matrix(*params)
    raise ValueError(f"{kind.value} is not a single-qubit unitary gate")


def check_unitary2(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if np.max(np.abs(u @ u.conj().T - np.eye(2))) > tol:
        raise ValueError("matrix is not unitary")
    return u


@dataclass(frozen=True)
class U3Params:
    """u3(theta, phi, lam) angles plus the global phase of the source matrix."""

    theta: float
    phi: float
    lam: float
    global_phase: float = 0.0

    def matrix(self) -> np.ndarray:
        return cmath.exp(1j * self.global_phase) * u3_matrix(self.theta, self.phi, self.lam)

    def is_identity(self, eps: float = EPS_ANGLE) -> bool:
        return (angles_equal(self.theta, 0.0, eps)
                and angles_equal(self.phi + self.lam, 0.0, eps))

    def inverse(self) -> "U3Params":
        # u3(t,p,l)^dag == u3(t, pi-l, pi-p) exactly (no phase slack).
        return U3Params(self.theta, canonical_angle(PI - self.lam),
                        canonical_angle(PI - self.phi),
                        canonical_angle(-self.global_phase))


IDENTITY_U3 = U3Params(0.0, 0.0, 0.0, 0.0)


def zyz_decompose(u: np.ndarray) -> U3Params:
    """Euler angles of a 2x2 unitary: u == e^{i*phase} * u3(theta, phi, lam).

    theta lands in [0, pi]; at the degenerate poles (theta ~ 0 or pi) the
    undetermined Euler angle is folded into lam and phi is set to 0.
    """
    u = check_unitary2(u)
    a, b = abs(u[0, 0]), abs(u[1, 0])
    theta = 2.0 * math.atan2(b, a)
    if b < 1e-12:       # diagonal: rotation about Z only
        phase = cmath.phase(u[0, 0])
        phi, lam = 0.0, cmath.phase(u[1, 1]) - phase
    elif a < 1e-12:     # anti-diagonal
        phase = cmath.phase(u[1, 0])
        phi, lam = 0.0, cmath.phase(-u[0, 1]) - phase
    else:
        phase = cmath.phase(u[0, 0])
        phi = cmath.phase(u[1, 0]) - phase
        lam = cmath.phase(u[1, 1]) - phase - phi
    theta = min(max(theta, 0.0), PI)
    return U3Params(theta, canonical_angle(phi), canonical_angle(lam),
                    canonical_angle(phase))


def compose_u3(first: U3Params, second: U3Params) -> U3Params:
    """Parameters of the fused gate applying `first` then `second`."""
    return zyz_decompose(second.matrix() @ first.matrix())


def as_u3params(inst: Instruction) -> U3Params:
    """u3 view of any single-qubit unitary instruction."""
    k = inst.kind
    if k is GateKind.U3:
        return U3Params(*inst.params)
    if k is GateKind.U2:
        return U3Params(PI / 2, inst.params[0], inst.params[1])
    if k is GateKind.U1:
        return U3Params(0.0, 0.0, inst.params[0])
    if k in _NAMED_U3:
        return U3Params(*_NAMED_U3[k])
    raise ValueError(f"{k.value} is not a single-qubit unitary gate")


def u3params_instruction(p: U3Params, q: int,
                         eps: float = EPS_ANGLE) -> Instruction | None:
    """Cheapest u-gate realizing p on qubit q; None if p is the identity."""
    if p.is_identity(eps):
        return None
    if angles_equal(p.theta, 0.0, eps):
        return Instruction(GateKind.U1, (q,), (canonical_angle(p.phi + p.lam),))
    if angles_equal(p.theta, PI / 2, eps):
        return Instruction(GateKind.U2, (q,), (p.phi, p.lam))
    return Instruction(GateKind.U3, (q,), (p.theta, p.phi, p.lam))


def pure_state_vector(theta: float, phi: float) -> np.ndarray:
    """Statevector cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    return np.array([math.cos(theta / 2.0),
                     cmath.exp(1j * phi) * math.sin(theta / 2.0)])


def pure_to_zero_gate(theta: float, phi: float) -> U3Params:
    """Gate sending the pure state (theta, phi) back to |0>, up to phase."""
    return zyz_decompose(u3_matrix(theta, phi, 0.0).conj().T)


def pure_to_pure_gate(src: tuple[float, float], dst: tuple[float, float]) -> U3Params:
    """Gate sending pure state src to pure state dst, up to phase."""
    m = u3_matrix(dst[0], dst[1], 0.0) @ u3_matrix(src[0], src[1], 0.0).conj().T
    return zyz_decompose(m)


# ---------------------------------------------------------------------------
# Decomposition identities
# ---------------------------------------------------------------------------

DEFAULT_BASIS = frozenset({GateKind.U1, GateKind.U2, GateKind.U3,
                           GateKind.ID, GateKind.CX})
_KEEP_ALWAYS = frozenset({GateKind.RESET, GateKind.ANNOT,
                          GateKind.MEASURE, GateKind.BARRIER})


def _i(kind, qubits, params=(), mask=()):
    return Instruction(kind, tuple(qubits), tuple(params), open_mask=tuple(mask))


def swap_to_cx(a: int, b: int) -> list[Instruction]:
    return [_i(GateKind.CX, (a, b)), _i(GateKind.CX, (b, a)),
            _i(GateKind.CX, (a, b))]


def swapz_to_cx(a: int, z: int) -> list[Instruction]:
    """Definition of the swap-with-zero gate: two alternating CNOTs."""
    return [_i(GateKind.CX, (a, z)), _i(GateKind.CX, (z, a))]


def ccx_to_cx(a: int, b: int, t: int) -> list[Instruction]:
    """Standard Toffoli construction: 6 CNOTs plus T/H gates."""
    K = GateKind
    return [
        _i(K.H, (t,)),
        _i(K.CX, (b, t)), _i(K.TDG, (t,)),
        _i(K.CX, (a, t)), _i(K.T, (t,)),
        _i(K.CX, (b, t)), _i(K.TDG, (t,)),
        _i(K.CX, (a, t)), _i(K.T, (b,)), _i(K.T, (t,)),
        _i(K.H, (t,)),
        _i(K.CX, (a, b)), _i(K.T, (a,)), _i(K.TDG, (b,)),
        _i(K.CX, (a, b)),
    ]


def cswap_to_ccx(c: int, t1: int, t2: int) -> list[Instruction]:
    return [_i(GateKind.CX, (t2, t1)), _i(GateKind.CCX, (c, t1, t2)),
            _i(GateKind.CX, (t2, t1))]


def cu3_to_cx(theta: float, phi: float, lam: float, c: int, t: int) -> list[Instruction]:
    """Controlled-u3 via the two-CNOT ABC construction."""
    K = GateKind
    return [
        _i(K.U1, (c,), (canonical_angle((lam + phi) / 2.0),)),
        _i(K.U1, (t,), (canonical_angle((lam - phi) / 2.0),)),
        _i(K.CX, (c, t)),
        _i(K.U3, (t,), (canonical_angle(-theta / 2.0), 0.0,
                        canonical_angle(-(phi + lam) / 2.0))),
        _i(K.CX, (c, t)),
        _i(K.U3, (t,), (canonical_angle(theta / 2.0), phi, 0.0)),
    ]


def _cxpow(alpha: float, c: int, t: int) -> list[Instruction]:
    """Controlled X^alpha, phase-exact: cu3 plus a u1 correction on the
    control carrying the root's global phase (u3 alone would leak a relative
    phase into the control-1 branch)."""
    half = PI * alpha / 2.0
    root = cmath.exp(1j * half) * np.array(
        [[math.cos(half), -1j * math.sin(half)],
         [-1j * math.sin(half), math.cos(half)]])
    p = zyz_decompose(root)
    out = []
    if not angles_equal(p.global_phase, 0.0):
        out.append(_i(GateKind.U1, (c,), (p.global_phase,)))
    out.append(_i(GateKind.CU3, (c, t), (p.theta, p.phi, p.lam)))
    return out


def _make_mcx(controls: tuple[int, ...], target: int) -> Instruction:
    if len(controls) == 0:
        return _i(GateKind.X, (target,))
    if len(controls) == 1:
        return _i(GateKind.CX, (controls[0], target))
    if len(controls) == 2:
        return _i(GateKind.CCX, (controls[0], controls[1], target))
    return _i(GateKind.MCX, controls + (target,))


def _mcxpow(alpha: float, controls: tuple[int, ...], target: int) -> list[Instruction]:
    """Multi-controlled X^alpha via the controlled-root recursion."""
    if len(controls) == 1:
        return _cxpow(alpha, controls[0], target)
    last, rest = controls[-1], controls[:-1]
    return (_cxpow(alpha / 2.0, last, target)
            + [_make_mcx(rest, last)]
            + _cxpow(-alpha / 2.0, last, target)
            + [_make_mcx(rest, last)]
            + _mcxpow(alpha / 2.0, rest, target))


def mcx_recursive(controls: tuple[int, ...], target: int) -> list[Instruction]:
    """Ancilla-free multi-controlled X (k >= 3 controls)."""
    last, rest = controls[-1], controls[:-1]
    return (_cxpow(0.5, last, target)
            + [_make_mcx(rest, last)]
            + _cxpow(-0.5, last, target)
            + [_make_mcx(rest, last)]
            + _mcxpow(0.5, rest, target))


def mcx_vchain(controls: tuple[int, ...], target: int, ancillas: tuple[int, ...],
               open_mask: tuple[bool, ...] = ()) -> list[Instruction]:
    """Multi-controlled X using k-2 clean ancillas (restored to |0> at the end)."""
    k = len(controls)
    if len(ancillas) < k - 2:
        raise ValueError("mcx with ancillas needs k-2 clean ancilla qubits")
    if not open_mask:
        open_mask = (False,) * k
    if k == 1:
        return [_i(GateKind.CX, (controls[0], target), mask=(open_mask[0],))]
    if k == 2:
        return [_i(GateKind.CCX, (controls[0], controls[1], target), mask=open_mask)]
    compute = [_i(GateKind.CCX, (controls[0], controls[1], ancillas[0]),
                  mask=(open_mask[0], open_mask[1]))]
    for j in range(2, k - 1):
        compute.append(_i(GateKind.CCX, (controls[j], ancillas[j - 2], ancillas[j - 1]),
                          mask=(open_mask[j], False)))
    apply_t = _i(GateKind.CCX, (controls[k - 1], ancillas[k - 3], target),
                 mask=(open_mask[k - 1], False))
    return compute + [apply_t] + list(reversed(compute))


def _open_control_wrap(inst: Instruction) -> list[Instruction]:
    """Rewrite open controls as X-conjugated closed controls."""
    xs = [_i(GateKind.X, (q,)) for q, o in zip(inst.controls, inst.open_mask) if o]
    closed = Instruction(inst.kind, inst.qubits, inst.params)
    return xs + [closed] + xs


def _decompose_step(inst: Instruction, basis: frozenset[GateKind],
                    ancilla: tuple[int, ...]) -> list[Instruction]:
    K = GateKind
    kind = inst.kind
    if inst.open_mask:
        return _open_control_wrap(inst)
    if kind in _NAMED_U3 and kind is not K.ID:
        p = U3Params(*_NAMED_U3[kind])
        out = u3params_instruction(p, inst.qubits[0])
        return [out] if out else []
    if kind is K.ID:
        return []
    if kind is K.U2:
        return [_i(K.U3, inst.qubits, (PI / 2,) + inst.params)]
    if kind is K.U1:
        return [_i(K.U3, inst.qubits, (0.0, 0.0) + inst.params)]
    if kind is K.CZ:
        a, b = inst.qubits
        return [_i(K.H, (b,)), _i(K.CX, (a, b)), _i(K.H, (b,))]
    if kind is K.SWAP:
        return swap_to_cx(*inst.qubits)
    if kind is K.SWAPZ:
        return swapz_to_cx(*inst.qubits)
    if kind is K.CCX:
        return ccx_to_cx(*inst.qubits)
    if kind is K.CSWAP:
        return cswap_to_ccx(*inst.qubits)
    if kind is K.CU3:
        return cu3_to_cx(*inst.params, *inst.qubits)
    if kind is K.MCX:
        controls, target = inst.qubits[:-1], inst.qubits[-1]
        if len(controls) <= 2:
            return [_make_mcx(controls, target)]
        avail = tuple(a for a in ancilla if a not in inst.qubits)
        if ancilla:
            if len(avail) < len(controls) - 2:
                raise ValueError("mcx ancilla mode requested without enough "
                                 "clean ancilla qubits")
            return mcx_vchain(controls, target, avail)
        return mcx_recursive(controls, target)
    raise ValueError(f"cannot decompose {kind.value} into the requested basis")


def unroll(c: Circuit, basis: frozenset[GateKind] = DEFAULT_BASIS,
           ancilla: tuple[int, ...] = ()) -> Circuit:
    """Decompose every gate into `basis` kinds (RESET/ANNOT/MEASURE/BARRIER pass
    through).  MCX uses a clean-ancilla chain when `ancilla` wires are given,
    otherwise an ancilla-free recursion."""
    basis = frozenset(basis)
    if not {GateKind.U1, GateKind.U2, GateKind.U3, GateKind.CX} <= basis:
        raise ValueError("basis must include u1, u2, u3 and cx")
    out: list[Instruction] = []
    stack = list(reversed(c.instructions))
    while stack:
        inst = stack.pop()
        if inst.kind in _KEEP_ALWAYS or (inst.kind in basis and not inst.open_mask):
            out.append(inst)
            continue
        stack.extend(reversed(_decompose_step(inst, basis, ancilla)))
    return c.replace(out)


# ---------------------------------------------------------------------------
# Adjacent-gate cleanup
# ---------------------------------------------------------------------------

def merge_1q_runs(c: Circuit) -> Circuit:
    """Fuse each maximal run of single-qubit gates on a wire into one u-gate.

    BARRIER/MEASURE/RESET/ANNOT and multi-qubit gates break runs; a merged
    gate within EPS_ANGLE of the identity is dropped.
    """
    out: list[Instruction] = []
    pending: dict[int, U3Params] = {}

    def flush(q: int):
        p = pending.pop(q, None)
        if p is not None:
            inst = u3params_instruction(p, q)
            if inst is not None:
                out.append(inst)

    for inst in c.instructions:
        if inst.is_1q:
            q = inst.qubits[0]
            p = as_u3params(inst)
            pending[q] = compose_u3(pending[q], p) if q in pending else p
        else:
            for q in inst.qubits:
                flush(q)
            out.append(inst)
    for q in sorted(pending):
        flush(q)
    return c.replace(out)


def cancel_adjacent_cx(c: Circuit) -> Circuit:
    """Drop adjacent identical CX pairs (same control/target, nothing between
    them on either wire)."""
    out: list[Instruction] = []
    alive: list[bool] = []
    last_on_wire: dict[int, list[int]] = {}

    for inst in c.instructions:
        if inst.kind is GateKind.CX and not inst.open_mask:
            a, b = inst.qubits
            sa = last_on_wire.get(a)
            sb = last_on_wire.get(b)
            ia = sa[-1] if sa else None
            ib = sb[-1] if sb else None
            if ia is not None and ia == ib and out[ia] == inst:
                alive[ia] = False
                sa.pop()
                sb.pop()
                continue
        idx = len(out)
        out.append(inst)
        alive.append(True)
        for q in inst.qubits:
            last_on_wire.setdefault(q, []).append(idx)
    return c.replace(inst for inst, keep in zip(out, alive) if keep)


# ---------------------------------------------------------------------------
# Two-qubit state preparation
# ---------------------------------------------------------------------------

def prepare_two_qubit_state(target: np.ndarray,
                            input0: tuple[float, float],
                            input1: tuple[float, float]) -> Circuit:
    """Circuit of at most one CX and four u-gates mapping the product state
    (input0, input1) to `target` (4 amplitudes, qubit 0 is the high bit),
    up to global phase.

    Built from the Schmidt form of the target: local singular bases on each
    wire around a single entangler when the Schmidt rank is 2.
    """
    for name, st in (("input0", input0), ("input1", input1)):
        if st is None or len(st) != 2:
            raise ValueError(f"{name} must be a known pure state (theta, phi)")
    target = np.asarray(target, dtype=complex).reshape(-1)
    if target.shape != (4,):
        raise ValueError("target must have 4 amplitudes")
    if abs(np.linalg.norm(target) - 1.0) > 1e-9:
        raise ValueError("target state is not normalized")

    m = target.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    entangled = s[1] > 1e-7

    pre0 = pure_to_zero_gate(*input0)
    if entangled:
        weights = U3Params(2.0 * math.atan2(s[1], s[0]), 0.0, 0.0)
        pre0 = compose_u3(pre0, weights)
    pre1 = pure_to_zero_gate(*input1)
    post0 = zyz_decompose(u)
    post1 = zyz_decompose(vh.T.copy())

    out = Circuit(2)
    for params, wire in ((pre0, 0), (pre1, 1)):
        inst = u3params_instruction(params, wire)
        if inst is not None:
            out.append(inst)
    if entangled:
        out.cx(0, 1)
    for params, wire in ((post0, 0), (post1, 1)):
        inst = u3params_instruction(params, wire)
        if inst is not None:
            out.append(inst)
    return out
