"""Dense statevector simulation of the layered RZ-RY-RZ / cyclic-CNOT ansatz.

Conventions: ``RY(t) = exp(-i t Y / 2)``, ``RZ(t) = exp(-i t Z / 2)``; qubit 0 is
the least-significant bit of the amplitude index.  States are plain complex
numpy arrays of length ``2**n``; batched runs carry a leading batch axis.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Gate:
    kind: str  # "RY", "RZ" or "CNOT"
    target: int
    control: int | None = None
    param_slot: int | None = None
    fixed_angle: float | None = None

    def __post_init__(self):
        if self.kind not in ("RY", "RZ", "CNOT"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CNOT":
            if self.control is None or self.control == self.target:
                raise ValueError("CNOT needs a control distinct from its target")
        elif (self.param_slot is None) == (self.fixed_angle is None):
            raise ValueError("a rotation needs exactly one of param_slot / fixed_angle")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_params: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        for g in self.gates:
            qubits = [g.target] + ([g.control] if g.control is not None else [])
            if any(not 0 <= q < self.n_qubits for q in qubits):
                raise ValueError(f"gate {g} addresses a qubit outside the register")
            if g.param_slot is not None and not 0 <= g.param_slot < self.n_params:
                raise ValueError(f"gate {g} uses a slot outside [0, {self.n_params})")

    @property
    def n_cnots(self) -> int:
        return sum(g.kind == "CNOT" for g in self.gates)


@dataclass(frozen=True)
class AnsatzLayout:
    n_qubits: int
    n_layers: int
    offsets: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 1:
            raise ValueError("need at least one qubit and one layer")
        if not self.offsets:
            # layer l connects q -> q + l + 1, cycling once every offset is used
            offs = tuple((l % (self.n_qubits - 1)) + 1 for l in range(self.n_layers)) if self.n_qubits > 1 else ()
            object.__setattr__(self, "offsets", offs)
        elif self.n_qubits > 1:
            if len(self.offsets) != self.n_layers:
                raise ValueError("one CNOT offset per layer is required")
            if any(not 1 <= o < self.n_qubits for o in self.offsets):
                raise ValueError("offsets must lie in [1, n_qubits)")

    @property
    def n_params(self) -> int:
        return 3 * self.n_qubits * self.n_layers


def build_ansatz(layout: AnsatzLayout) -> Circuit:
    """Build the layered QNN circuit.

    Each layer applies RZ, RY, RZ on every qubit and then the ring
    ``CNOT(q, (q + offset) % n)`` for ``q = 0..n-1``.  Parameter slot of the
    ``pos``-th rotation on ``qubit`` in ``layer`` is
    ``(layer * n + qubit) * 3 + pos``, i.e. a ``(layers, qubits, 3)`` tensor
    flattened in C order.
    """
    n = layout.n_qubits
    gates = []
    for layer in range(layout.n_layers):
        for q in range(n):
            base = (layer * n + q) * 3
            gates += [Gate("RZ", q, param_slot=base), Gate("RY", q, param_slot=base + 1), Gate("RZ", q, param_slot=base + 2)]
        if n > 1:
            off = layout.offsets[layer]
            gates += [Gate("CNOT", (q + off) % n, control=q) for q in range(n)]
    return Circuit(n, tuple(gates), layout.n_params)


def zero_state(n_qubits: int, batch: int | None = None) -> np.ndarray:
    shape = (1 << n_qubits,) if batch is None else (batch, 1 << n_qubits)
    psi = np.zeros(shape, dtype=complex)
    psi[..., 0] = 1.0
    return psi


def _rotation(kind: str, theta: np.ndarray) -> np.ndarray:
    """Stack of 2x2 rotation matrices, shape ``theta.shape + (2, 2)``."""
    half = 0.5 * np.asarray(theta, dtype=float)
    out = np.zeros(half.shape + (2, 2), dtype=complex)
    if kind == "RY":
        c, s = np.cos(half), np.sin(half)
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    else:
        out[..., 0, 0] = np.exp(-1j * half)
        out[..., 1, 1] = np.exp(1j * half)
    return out


def apply_single(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a one-qubit matrix (or a batch of them) to qubit ``q``."""
    batch = psi.shape[:-1]
    view = psi.reshape(batch + (1 << (n - 1 - q), 2, 1 << q))
    if u.ndim == 2:
        out = u @ view
    else:
        out = u[:, None] @ view
    return out.reshape(psi.shape)


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    perm = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    return psi[..., perm]


def apply_gate(psi: np.ndarray, gate: Gate, params: np.ndarray, n: int) -> np.ndarray:
    if gate.kind == "CNOT":
        return apply_cnot(psi, gate.control, gate.target, n)
    if gate.param_slot is not None:
        theta = params[..., gate.param_slot]
    else:
        theta = gate.fixed_angle
    return apply_single(psi, _rotation(gate.kind, theta), gate.target, n)


def _check_params(c: Circuit, params) -> np.ndarray:
    p = np.asarray(params, dtype=float)
    if p.shape[-1:] != (c.n_params,) and not (c.n_params == 0 and p.size == 0):
        raise ValueError(f"expected {c.n_params} parameters, got shape {p.shape}")
    return p


def run_circuit(c: Circuit, params=()) -> np.ndarray:
    """Exact output state ``U(params)|0...0>``."""
    p = _check_params(c, params)
    if p.ndim != 1 and c.n_params:
        raise ValueError("use run_circuit_batch for stacked parameter sets")
    psi = zero_state(c.n_qubits)
    for g in c.gates:
        psi = apply_gate(psi, g, p, c.n_qubits)
    return psi


def run_circuit_batch(c: Circuit, params) -> np.ndarray:
    """Run a ``(batch, n_params)`` stack of parameter sets at once."""
    p = np.atleast_2d(_check_params(c, params))
    psi = zero_state(c.n_qubits, batch=p.shape[0])
    for g in c.gates:
        if g.kind != "CNOT" and g.param_slot is None:
            psi = apply_single(psi, _rotation(g.kind, g.fixed_angle), g.target, c.n_qubits)
        else:
            psi = apply_gate(psi, g, p, c.n_qubits)
    return psi


def wrap_parameters(params) -> np.ndarray:
    """Map angles into ``[0, 2*pi)``."""
    p = np.mod(np.asarray(params, dtype=float), TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    return np.where(p >= TWO_PI, 0.0, p)


def _as_matrix(op, dim: int) -> np.ndarray:
    if hasattr(op, "to_matrix"):
        op = op.to_matrix()
    m = np.asarray(op, dtype=complex)
    if m.shape != (dim, dim):
        raise ValueError(f"operator of shape {m.shape} does not act on a {dim}-dim state")
    return m


def expectation(state, op) -> complex:
    """``<s|O|s>`` with the bra conjugated; ``op`` is a matrix or a PauliSum."""
    s = np.asarray(state, dtype=complex)
    m = _as_matrix(op, s.shape[-1])
    return complex(np.vdot(s, m @ s))


def batch_expectation(states: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.einsum("bi,ij,bj->b", states.conj(), op, states)


def rayleigh_quotient(state, H, N=None, floor: float = 1e-12) -> complex:
    """``<s|H|s> / <s|N|s>``; ``N=None`` means the identity metric."""
    num = expectation(state, H)
    den = expectation(state, N) if N is not None else complex(np.vdot(state, state))
    if abs(den) < floor:
        raise ZeroDivisionError(f"degenerate metric: |<s|N|s>| = {abs(den):.3e}")
    return num / den


def canonical_phase(state) -> np.ndarray:
    """Remove the global phase so the first nonzero amplitude is real-positive."""
    s = np.asarray(state, dtype=complex)
    nz = np.flatnonzero(np.abs(s) > 1e-12)
    if nz.size == 0:
        return s.copy()
    a = s[nz[0]]
    return s * (abs(a) / a)


def state_to_json(state) -> str:
    s = np.asarray(state, dtype=complex)
    return json.dumps([[float(a.real), float(a.imag)] for a in s])


def state_from_json(text: str) -> np.ndarray:
    return np.array([complex(re, im) for re, im in json.loads(text)])
