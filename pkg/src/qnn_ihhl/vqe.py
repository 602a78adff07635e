"""QNN training: energy loss, parameter-shift gradients, plain SGD, deflation."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    AnsatzLayout,
    Circuit,
    batch_expectation,
    build_ansatz,
    rayleigh_quotient,
    run_circuit,
    run_circuit_batch,
    wrap_parameters,
)

logger = logging.getLogger(__name__)

SHIFT = np.pi / 2


@dataclass
class TrainingConfig:
    learning_rate: float = 0.1
    max_iterations: int = 200
    energy_tolerance: float = 1e-8
    seed: int = 0
    schedule: tuple[float, ...] = ()
    relaxed: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        self.schedule = tuple(float(s) for s in self.schedule)

    def eta(self, t: int) -> float:
        if not self.schedule:
            return self.learning_rate
        return self.learning_rate * self.schedule[min(t, len(self.schedule) - 1)]

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass
class TraceRecord:
    iteration: int
    energy: float
    grad_norm: float
    eta: float


@dataclass
class TrainingTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "energy", "grad_norm", "eta"])
        for r in self.records:
            w.writerow([r.iteration, repr(float(r.energy)), repr(float(r.grad_norm)), repr(float(r.eta))])
        return buf.getvalue()


@dataclass
class TrainingResult:
    energy: float
    params: np.ndarray
    state: np.ndarray
    trace: TrainingTrace
    converged: bool

    @property
    def status(self) -> str:
        return "converged" if self.converged else "unconverged"

    def __iter__(self):
        return iter((self.energy, self.params, self.state, self.trace))


def _check_hermitian(H, name="H", atol=1e-10):
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be square")
    scale = max(1.0, np.abs(H).max())
    if np.abs(H - H.conj().T).max() > atol * scale:
        raise ValueError(f"{name} is not Hermitian")
    return H


def _energy(value: complex) -> float:
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}; operator not Hermitian?")
    return value.real


def loss(params, H, N, ansatz: Circuit) -> float:
    """Energy ``<H>/<N>`` of the ansatz state (``N=None`` for an orthonormal basis)."""
    H = _check_hermitian(H)
    if N is not None:
        N = _check_hermitian(N, "N")
    return _energy(rayleigh_quotient(run_circuit(ansatz, params), H, N))


def _shifted_stack(params: np.ndarray) -> np.ndarray:
    P = params.size
    eye = np.eye(P) * SHIFT
    return np.vstack([params[None, :], params + eye, params - eye])


def _energy_and_grad(params, H, N, ansatz):
    params = np.asarray(params, dtype=float)
    P = params.size
    states = run_circuit_batch(ansatz, _shifted_stack(params))
    h = batch_expectation(states, H)
    n = batch_expectation(states, N) if N is not None else np.einsum("bi,bi->b", states.conj(), states)
    h0, n0 = h[0], n[0]
    dh = 0.5 * (h[1 : P + 1] - h[P + 1 :])
    if N is None:
        grad = dh.real
    else:
        dn = 0.5 * (n[1 : P + 1] - n[P + 1 :])
        grad = ((dh * n0 - h0 * dn) / n0**2).real
    if abs(n0) < 1e-12:
        raise ZeroDivisionError("degenerate metric at the current parameters")
    return _energy(h0 / n0), grad


def parameter_shift_grad(params, H, N, ansatz: Circuit) -> np.ndarray:
    """Exact gradient of :func:`loss` by the pi/2 shift rule.

    With a non-identity metric the numerator and denominator expectations are
    shift-differentiated separately and combined with the quotient rule.
    """
    H = _check_hermitian(H)
    if N is not None:
        N = _check_hermitian(N, "N")
    return _energy_and_grad(params, H, N, ansatz)[1]


def sgd_step(params, grad, eta: float) -> np.ndarray:
    return wrap_parameters(np.asarray(params, dtype=float) - eta * np.asarray(grad, dtype=float))


def initial_parameters(n_params: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 2 * np.pi, n_params)


def train(H, N, layout: AnsatzLayout, cfg: TrainingConfig, init=None) -> TrainingResult:
    """Minimize the ansatz energy with SGD on parameter-shift gradients.

    The returned energy is the lowest seen over all iterations, paired with
    its parameters and state.  Hitting ``max_iterations`` without meeting the
    energy tolerance flags the result unconverged; with ``cfg.relaxed`` this
    is expected and only logged at debug level.
    """
    H = _check_hermitian(H)
    if N is not None:
        N = _check_hermitian(N, "N")
    if H.shape[0] != 1 << layout.n_qubits:
        raise ValueError(f"H has dimension {H.shape[0]}, ansatz acts on {1 << layout.n_qubits}")
    ansatz = build_ansatz(layout)
    params = initial_parameters(ansatz.n_params, cfg.seed) if init is None else wrap_parameters(init)
    trace = TrainingTrace()
    best_e, best_p = np.inf, params
    prev = None
    converged = False
    for t in range(cfg.max_iterations):
        e, g = _energy_and_grad(params, H, N, ansatz)
        eta = cfg.eta(t)
        trace.records.append(TraceRecord(t, e, float(np.linalg.norm(g)), eta))
        if e < best_e:
            best_e, best_p = e, params
        if prev is not None and abs(e - prev) < cfg.energy_tolerance:
            converged = True
            break
        prev = e
        params = sgd_step(params, g, eta)
    if not converged:
        log = logger.debug if cfg.relaxed else logger.warning
        log("training stopped at the iteration cap (best energy %.10g)", best_e)
    return TrainingResult(best_e, best_p, run_circuit(ansatz, best_p), trace, converged)


def default_penalty(H, N=None) -> float:
    """Twice an upper bound on the spectral range of ``(H, N)``.

    Anything above the range lifts a deflated state clear of the rest; a much
    larger constant only stiffens the landscape and slows plain SGD.
    """
    H = np.asarray(H, dtype=complex)
    bound = 2.0 * np.linalg.norm(H, 2)
    if N is not None:
        bound /= np.linalg.eigvalsh(np.asarray(N, dtype=complex))[0]
    return 2.0 * bound


def project_hamiltonian(H, N, lower_states: Sequence[np.ndarray], c: float | None = None) -> np.ndarray:
    """Add the pseudo-potential ``c sum_i N|phi_i><phi_i|N`` to ``H``.

    With ``N=None`` this is the plain projector penalty ``c sum |phi><phi|``.
    Lower states are normalized in the N metric before use.
    """
    H = np.asarray(H, dtype=complex)
    if c is None:
        c = default_penalty(H, N)
    if c <= 0:
        raise ValueError("penalty constant must be positive")
    out = H.copy()
    for phi in lower_states:
        phi = np.asarray(phi, dtype=complex)
        v = phi if N is None else np.asarray(N, dtype=complex) @ phi
        norm = np.vdot(phi, v).real
        v = v / np.sqrt(norm)
        out += c * np.outer(v, v.conj())
    return out


def config_dict(cfg: TrainingConfig) -> dict:
    d = asdict(cfg)
    d["schedule"] = list(cfg.schedule)
    return d
