"""HHL linear solver with an ideal spectral backend and a QPE circuit emulation.

The ``qpe`` backend emulates the three-register circuit (ancilla, clock,
system) as a dense array of shape ``(2, 2**m, dim)``: Hadamards on the clock,
controlled ``exp(i A t 2^k)``, inverse QFT, the eigenvalue-inversion rotation
on the ancilla, and the uncomputation of everything but the ancilla.
Post-selection (ancilla = 1, clock returned to zero) is an exact projection.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla


class SingularSystemError(np.linalg.LinAlgError):
    pass


class ConfigurationError(ValueError):
    pass


@dataclass
class HhlBackendConfig:
    backend: str = "ideal"
    clock_qubits: int = 10
    evolution_time: float | None = None  # default pi / (2 lambda_max)
    rotation_constant: float | None = None  # default 0.5 lambda_min
    signed_spectrum: bool = True
    singular_floor: float = 1e-12  # relative to the spectral radius

    def __post_init__(self):
        if self.backend not in ("ideal", "qpe"):
            raise ConfigurationError(f"unknown HHL backend {self.backend!r}")
        if self.clock_qubits < 1:
            raise ConfigurationError("clock_qubits must be positive")
        if self.evolution_time is not None and self.evolution_time <= 0:
            raise ConfigurationError("evolution_time must be positive")
        if self.rotation_constant is not None and self.rotation_constant <= 0:
            raise ConfigurationError("rotation_constant must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "HhlBackendConfig":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class HhlSolution:
    x: np.ndarray
    post_selection_probability: float | None = None
    fidelity_estimate: float | None = None
    clock_histogram: np.ndarray | None = None
    evolution_time: float | None = None
    rotation_constant: float | None = None

    def diagnostics(self) -> dict:
        return {
            "post_selection_probability": self.post_selection_probability,
            "fidelity_estimate": self.fidelity_estimate,
            "evolution_time": self.evolution_time,
            "rotation_constant": self.rotation_constant,
            "clock_histogram": None if self.clock_histogram is None else self.clock_histogram.tolist(),
        }

    def diagnostics_json(self, **kwargs) -> str:
        return json.dumps(self.diagnostics(), **kwargs)


def hermitian_embed(C) -> np.ndarray:
    """``[[0, C], [C^dagger, 0]]``; its eigenvalues are +/- the singular values of C."""
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("C must be square")
    n = C.shape[0]
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, n:] = C
    A[n:, :n] = C.conj().T
    return A


def power_estimate(A, iters: int = 200, seed: int = 0) -> float:
    """Largest |eigenvalue| of a Hermitian matrix by power iteration."""
    A = np.asarray(A, dtype=complex)
    v = np.random.default_rng(seed).normal(size=A.shape[0]) + 0j
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = A @ (A @ v)  # A^2 avoids sign flapping between +/- lambda
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        new = np.sqrt(nrm)
        if abs(new - lam) <= 1e-12 * new:
            lam = new
            break
        lam = new
    return float(lam)


def inverse_power_estimate(A, iters: int = 200, seed: int = 1) -> float:
    """Smallest |eigenvalue| of a Hermitian matrix by inverse power iteration."""
    A = np.asarray(A, dtype=complex)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(A @ A, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystemError("matrix is singular") from exc
    if np.any(np.abs(np.diag(lu[0])) == 0):
        raise SingularSystemError("matrix is singular")
    v = np.random.default_rng(seed).normal(size=A.shape[0]) + 0j
    v /= np.linalg.norm(v)
    mu = 0.0
    for _ in range(iters):
        w = sla.lu_solve(lu, v)
        nrm = np.linalg.norm(w)
        v = w / nrm
        new = 1.0 / np.sqrt(nrm)
        if abs(new - mu) <= 1e-12 * new:
            mu = new
            break
        mu = new
    return float(mu)


def _pad(A: np.ndarray, b: np.ndarray):
    n = A.shape[0]
    dim = 1 << max(1, (n - 1).bit_length())
    if dim == n:
        return A, b
    Ap = np.eye(dim, dtype=complex)
    Ap[:n, :n] = A
    bp = np.zeros(dim, dtype=complex)
    bp[:n] = b
    return Ap, bp


def _validate(A, b):
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    scale = max(1.0, np.abs(A).max())
    if np.abs(A - A.conj().T).max() > 1e-10 * scale:
        raise ValueError("A must be Hermitian")
    if np.iscomplexobj(b) and np.abs(np.imag(b)).max() > 0:
        raise ValueError("the HHL interface takes a real right-hand side")
    b = np.real(b).astype(float)
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    if not np.linalg.norm(b) > 0:
        raise ValueError("b must be nonzero")
    return A, b


def _ideal(A, b, cfg):
    w, V = np.linalg.eigh(A)
    top = np.abs(w).max()
    if top == 0 or np.abs(w).min() <= cfg.singular_floor * top:
        raise SingularSystemError(f"A is singular to working precision (min |lambda| = {np.abs(w).min():.3e})")
    x = V @ ((V.conj().T @ b) / w)
    return HhlSolution(x=x, fidelity_estimate=1.0)


def _qpe(A, b, cfg):
    lam_max = power_estimate(A)
    lam_min = inverse_power_estimate(A)
    if lam_min <= cfg.singular_floor * lam_max:
        raise SingularSystemError(f"A is singular to working precision (min |lambda| ~ {lam_min:.3e})")
    t = cfg.evolution_time if cfg.evolution_time is not None else np.pi / (2 * lam_max)
    if cfg.signed_spectrum and t * lam_max >= np.pi:
        raise ConfigurationError(f"phase aliasing: t * |lambda_max| = {t * lam_max:.4f} >= pi")
    if not cfg.signed_spectrum and np.linalg.eigvalsh(A)[0] < 0:
        raise ConfigurationError("negative eigenvalues need signed_spectrum=True")
    C = cfg.rotation_constant if cfg.rotation_constant is not None else 0.5 * lam_min

    m = cfg.clock_qubits
    T = 1 << m
    Ap, bp = _pad(A, b.astype(complex))
    dim = Ap.shape[0]
    b_norm = np.linalg.norm(bp)

    # clock in uniform superposition after the Hadamards
    reg = np.zeros((T, dim), dtype=complex)
    reg[:] = bp / b_norm / np.sqrt(T)
    # controlled-U^(2^k): clock row j carries U^j, built from repeated squaring
    U = sla.expm(1j * t * Ap)
    powers = U
    clock = np.arange(T)
    for k in range(m):
        rows = ((clock >> k) & 1).astype(bool)
        reg[rows] = reg[rows] @ powers.T
        powers = powers @ powers
    # inverse QFT on the clock (rows): |j> -> sum_k e^{-2 pi i jk/T} |k> / sqrt(T)
    reg = np.fft.fft(reg, axis=0) / np.sqrt(T)
    histogram = np.sum(np.abs(reg) ** 2, axis=1)

    signed = np.where(clock >= T // 2, clock - T, clock) if cfg.signed_spectrum else clock
    lam_est = 2 * np.pi * signed / (t * T)
    with np.errstate(divide="ignore"):
        ratio = np.where(signed != 0, C / np.where(lam_est == 0, 1.0, lam_est), 0.0)
    ratio = np.clip(ratio, -1.0, 1.0)
    # RY(2 arcsin(C/lam)) on the ancilla: |0> -> sqrt(1 - r^2)|0> + r|1>;
    # only the |1> branch survives post-selection
    anc1 = reg * ratio[:, None]
    p_success = float(np.sum(np.abs(anc1) ** 2))

    def uncompute(r):
        r = np.fft.ifft(r, axis=0) * np.sqrt(T)  # forward QFT
        p = U.conj().T
        for k in range(m):
            rows = ((clock >> k) & 1).astype(bool)
            r[rows] = r[rows] @ p.T
            p = p @ p
        return r

    anc1 = uncompute(anc1)
    # Hadamards on the clock: amplitude of clock |0> is the row average * sqrt(T)
    sys_branch = anc1.sum(axis=0) / np.sqrt(T)
    if not np.any(sys_branch):
        raise SingularSystemError("post-selected branch vanished")
    # anc1 amplitudes carry C / lambda, so rescale by |b| / C to recover A^{-1} b
    x = sys_branch * b_norm / C
    x = x[: A.shape[0]]
    exact = np.linalg.solve(A, b)
    fid = abs(np.vdot(exact, x)) ** 2 / (np.vdot(exact, exact).real * np.vdot(x, x).real)
    return HhlSolution(
        x=x,
        post_selection_probability=p_success,
        fidelity_estimate=float(fid),
        clock_histogram=histogram,
        evolution_time=float(t),
        rotation_constant=float(C),
    )


def hhl_solve(A, b, cfg: HhlBackendConfig | None = None) -> HhlSolution:
    """Solve ``A x = b`` for Hermitian ``A`` and real ``b``."""
    cfg = cfg or HhlBackendConfig()
    A, b = _validate(A, b)
    if cfg.backend == "ideal":
        Ap, bp = _pad(A, b.astype(complex))
        sol = _ideal(Ap, bp, cfg)
        sol.x = sol.x[: A.shape[0]]
        return sol
    return _qpe(A, b, cfg)


def solve_complex_linear(C, b, cfg: HhlBackendConfig | None = None, return_details: bool = False):
    """Solve ``C x = b`` for general complex ``C`` through the Hermitian embedding.

    The right-hand side ``(b, 0)`` is split into real and imaginary parts, each
    a real-vector HHL solve; the answer sits in the second block.
    """
    C = np.asarray(C, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = C.shape[0]
    if b.shape != (n,):
        raise ValueError(f"b has shape {b.shape}, expected ({n},)")
    A = hermitian_embed(C)
    x = np.zeros(n, dtype=complex)
    details = []
    for part, unit in ((b.real, 1.0), (b.imag, 1j)):
        if not np.any(part):
            continue
        rhs = np.concatenate([part, np.zeros(n)])
        sol = hhl_solve(A, rhs, cfg)
        details.append(sol)
        x += unit * sol.x[n:]
    if not details:
        raise ValueError("b must be nonzero")
    return (x, details) if return_details else x
