"""Iterative HHL eigensolver for complex-symmetric / non-Hermitian problems.

The eigenpair of ``M = N^-1 H`` is the fixed point of ``C(E, beta) phi = phi``
with ``C = (M - (E - beta)) / beta``.  Every iteration solves that linear
system through :func:`qnn_ihhl.hhl.solve_complex_linear` and refreshes the
energy from c-products (bilinear, no conjugation).
"""
from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hhl import HhlBackendConfig, SingularSystemError, solve_complex_linear

logger = logging.getLogger(__name__)

BETA_RETRY_FACTOR = 1.37
MAX_BETA_RETRIES = 3


class MetricError(np.linalg.LinAlgError):
    """The overlap matrix is singular or too ill-conditioned to invert."""


class DegenerateCNormError(ValueError):
    pass


def c_product(u, v) -> complex:
    """Bilinear pairing ``sum_i u_i v_i`` (no complex conjugation)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    # spelled out in real arithmetic so that c(u, v) == c(v, u) bit for bit
    re = np.sum(u.real * v.real - u.imag * v.imag)
    im = np.sum(u.real * v.imag + u.imag * v.real)
    return complex(re, im)


def c_normalize(phi, floor: float = 1e-14) -> np.ndarray:
    """Scale ``phi`` to unit c-norm.

    Of the two square roots, the one leaving the largest-magnitude component
    with a positive real part is used, so iterates do not flip sign.
    """
    phi = np.asarray(phi, dtype=complex)
    cn = c_product(phi, phi)
    if abs(cn) <= floor * max(np.vdot(phi, phi).real, 1e-300):
        raise DegenerateCNormError(f"c-norm (phi|phi) = {cn:.3e} is degenerate")
    out = phi / np.sqrt(cn)
    k = np.argmax(np.abs(out))
    if out[k].real < 0 or (out[k].real == 0 and out[k].imag < 0):
        out = -out
    return out


@dataclass
class GeneralizedEigenProblem:
    H: np.ndarray
    N: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.ndim != 2 or self.H.shape[0] != self.H.shape[1]:
            raise ValueError("H must be square")
        if self.N is None:
            self.N = np.eye(self.H.shape[0], dtype=complex)
        self.N = np.asarray(self.N, dtype=complex)
        if self.N.shape != self.H.shape:
            raise ValueError(f"H {self.H.shape} and N {self.N.shape} differ in shape")

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.N))

    def to_dict(self) -> dict:
        pairs = lambda m: [[[float(z.real), float(z.imag)] for z in row] for row in m]
        return {"label": self.label, "H": pairs(self.H), "N": pairs(self.N)}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneralizedEigenProblem":
        unpack = lambda m: np.array([[complex(re, im) for re, im in row] for row in m])
        N = unpack(d["N"]) if d.get("N") is not None else None
        return cls(unpack(d["H"]), N, d.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "GeneralizedEigenProblem":
        return cls.from_dict(json.loads(text))


@dataclass
class IhhlConfig:
    beta: complex = 1.0
    tolerance: float | None = None  # 1e-8 ideal, 1e-4 qpe
    max_iterations: int = 100
    hhl: HhlBackendConfig = field(default_factory=HhlBackendConfig)
    deflation_constant: float = 100.0
    energy_update: str = "rayleigh"  # or "shift"
    residual_tolerance: float = 1e-4  # relative; guards against stagnation only

    def __post_init__(self):
        if self.beta == 0:
            raise ValueError("beta must be nonzero")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.energy_update not in ("rayleigh", "shift"):
            raise ValueError(f"unknown energy update {self.energy_update!r}")
        if self.tolerance is None:
            self.tolerance = 1e-8 if self.hhl.backend == "ideal" else 1e-4
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "IhhlConfig":
        d = dict(d)
        if "hhl" in d:
            d["hhl"] = HhlBackendConfig.from_dict(d["hhl"])
        if isinstance(d.get("beta"), (list, tuple)):
            d["beta"] = complex(*d["beta"])
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class IhhlStep:
    iteration: int
    energy: complex
    residual: float
    c_norm: complex
    post_selection_probability: float | None = None


@dataclass
class IhhlTrace:
    steps: list[IhhlStep] = field(default_factory=list)
    beta_used: complex | None = None

    def __len__(self):
        return len(self.steps)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.steps])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["iter", "re_E_MeV", "im_E_MeV", "residual"]
        with_p = any(s.post_selection_probability is not None for s in self.steps)
        if with_p:
            header.append("post_selection_probability")
        w.writerow(header)
        for s in self.steps:
            row = [s.iteration, repr(float(s.energy.real)), repr(float(s.energy.imag)), repr(float(s.residual))]
            if with_p:
                row.append("" if s.post_selection_probability is None else repr(float(s.post_selection_probability)))
            w.writerow(row)
        return buf.getvalue()


@dataclass
class IhhlResult:
    energy: complex
    vector: np.ndarray
    trace: IhhlTrace
    converged: bool

    def __iter__(self):
        return iter((self.energy, self.vector, self.trace))


def reduce_generalized(p: GeneralizedEigenProblem, cond_cap: float = 1e12) -> np.ndarray:
    """Return ``M = N^-1 H`` (computed classically by an LU solve)."""
    cond = p.condition
    if not np.isfinite(cond) or cond > cond_cap:
        raise MetricError(f"overlap matrix condition number {cond:.3e} exceeds cap {cond_cap:.1e}")
    return np.linalg.solve(p.N, p.H)


def build_c_matrix(M, E: complex, beta: complex) -> np.ndarray:
    """``C(E, beta) = (M - (E - beta) I) / beta``."""
    if beta == 0:
        raise ValueError("beta must be nonzero")
    M = np.asarray(M, dtype=complex)
    return (M - (E - beta) * np.eye(M.shape[0])) / beta


def c_rayleigh(M, phi) -> complex:
    return c_product(phi, M @ phi) / c_product(phi, phi)


def _as_matrix(problem) -> np.ndarray:
    if isinstance(problem, GeneralizedEigenProblem):
        return reduce_generalized(problem)
    return np.asarray(problem, dtype=complex)


def _run(M, phi, E, beta, cfg: IhhlConfig) -> IhhlResult:
    trace = IhhlTrace(beta_used=beta)
    scale = max(1.0, np.abs(M).max())
    converged = False
    prev_dE = None
    for k in range(1, cfg.max_iterations + 1):
        C = build_c_matrix(M, E, beta)
        raw, sols = solve_complex_linear(C, phi, cfg.hhl, return_details=True)
        new = c_normalize(raw)
        if cfg.energy_update == "rayleigh":
            E_new = c_rayleigh(M, new)
        else:
            # C phi' = phi with phi' ~ phi / mu, mu the eigenvalue of C
            E_new = (E - beta) + beta * c_product(phi, phi) / c_product(phi, raw)
        Mphi = M @ new
        residual = float(np.linalg.norm(Mphi - E_new * new) / np.linalg.norm(new))
        probs = [s.post_selection_probability for s in sols if s.post_selection_probability is not None]
        trace.steps.append(
            IhhlStep(k, E_new, residual, c_product(new, new), float(np.mean(probs)) if probs else None)
        )
        dE = abs(E_new - E)
        phi, E = new, E_new
        # linear convergence: the remaining error is about dE * rho / (1 - rho)
        rho = dE / prev_dE if prev_dE else 0.0
        tail = dE * rho / (1.0 - rho) if rho < 1.0 else np.inf
        prev_dE = dE
        if dE <= cfg.tolerance and tail <= cfg.tolerance:
            converged = cfg.hhl.backend != "ideal" or residual <= cfg.residual_tolerance * scale
            if converged:
                break
    return IhhlResult(E, phi, trace, converged)


def ihhl_iterate(problem, phi0, E0: complex | None = None, cfg: IhhlConfig | None = None) -> IhhlResult:
    """Find one eigenpair of ``N^-1 H`` (or of a plain matrix) by IHHL.

    ``problem`` is a :class:`GeneralizedEigenProblem` or an already reduced
    square matrix.  ``E0`` defaults to the c-Rayleigh quotient of ``phi0``.
    A singular ``C`` along the way triggers a retry with beta scaled by
    1.37 (at most three times); a degenerate c-norm restarts from a slightly
    perturbed ``phi0``.
    """
    cfg = cfg or IhhlConfig()
    M = _as_matrix(problem)
    phi0 = np.asarray(phi0, dtype=complex)
    if phi0.shape != (M.shape[0],) or not np.any(phi0):
        raise ValueError("phi0 must be a nonzero vector matching the problem dimension")
    start = c_normalize(phi0)  # rejects a degenerate starting c-norm
    E_start = c_rayleigh(M, start) if E0 is None else complex(E0)

    beta = complex(cfg.beta)
    rng = np.random.default_rng(0)
    restarts = 0
    for attempt in range(MAX_BETA_RETRIES + 1):
        try:
            return _run(M, start, E_start, beta, cfg)
        except SingularSystemError:
            if attempt == MAX_BETA_RETRIES:
                raise
            logger.info("C(E, beta) singular; retrying with beta *= %.2f", BETA_RETRY_FACTOR)
            beta *= BETA_RETRY_FACTOR
        except DegenerateCNormError:
            if restarts >= MAX_BETA_RETRIES:
                raise
            restarts += 1
            noise = 1e-3 * np.linalg.norm(phi0) * (rng.normal(size=phi0.size) + 1j * rng.normal(size=phi0.size))
            start = c_normalize(phi0 + noise)
    raise AssertionError("unreachable")


def deflate(M, found, c: float = 100.0) -> np.ndarray:
    """Shift already-found eigenvalues by ``c`` with c-product projectors.

    ``M + c sum_i phi_i phi_i^T``: for a c-normalized right eigenvector the
    rank-one update moves its eigenvalue to ``E + c`` and leaves every other
    eigenvalue in place.
    """
    M = np.array(M, dtype=complex)
    for item in found:
        phi = np.asarray(item[1] if isinstance(item, tuple) else item.vector, dtype=complex)
        cn = c_product(phi, phi)
        if abs(cn - 1) > 1e-6:
            try:
                phi = c_normalize(phi)
            except DegenerateCNormError:
                warnings.warn("near-degenerate c-norm; projector skipped for this state", RuntimeWarning)
                continue
        M += c * np.outer(phi, phi)
    return M


def ihhl_spectrum(problem, phi0, n_states: int, cfg: IhhlConfig | None = None) -> list[IhhlResult]:
    """Collect several eigenpairs, deflating each one before the next run."""
    cfg = cfg or IhhlConfig()
    M0 = _as_matrix(problem)
    # start every run from the undeflated estimate, away from the shifted roots
    E0 = c_rayleigh(M0, c_normalize(phi0))
    found: list[IhhlResult] = []
    for _ in range(n_states):
        M = deflate(M0, [(r.energy, r.vector) for r in found], cfg.deflation_constant)
        res = ihhl_iterate(M, phi0, E0, cfg)
        if any(abs(res.energy - (r.energy + cfg.deflation_constant)) < 1e-6 * cfg.deflation_constant for r in found):
            warnings.warn("run converged onto a deflated (shifted) eigenvalue", RuntimeWarning)
        found.append(res)
    return found


def dense_eigenpairs(problem) -> tuple[np.ndarray, np.ndarray]:
    """Reference generalized eigenpairs from LAPACK (testing oracle)."""
    import scipy.linalg as sla

    if isinstance(problem, GeneralizedEigenProblem):
        return sla.eig(problem.H, problem.N)
    return np.linalg.eig(np.asarray(problem, dtype=complex))
