"""Eigenvector continuation with complex scaling.

Training vectors are real bound ground states (or QNN approximations of
them); the target Hamiltonian is complex scaled and projected with
c-products, ``H^EC_ij = phi_i^T H(gamma) phi_j`` and ``N^EC_ij = phi_i^T N phi_j``.
"""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla

from .circuit import AnsatzLayout, canonical_phase
from .csm import CsmSweep, GaussianBasis, ResonanceResult, barrier_system, build_hamiltonian, find_stabilization
from .ihhl import GeneralizedEigenProblem, IhhlConfig, ihhl_iterate

logger = logging.getLogger(__name__)

COND_CAP = 1e10


class UnboundTrainingPoint(ValueError):
    pass


@dataclass(frozen=True)
class EcParameterPoint:
    couplings: tuple[tuple[str, float], ...]

    def __init__(self, couplings: Mapping[str, float] | Sequence[tuple[str, float]]):
        items = couplings.items() if isinstance(couplings, Mapping) else couplings
        vals = tuple((str(k), float(v)) for k, v in items)
        if not all(np.isfinite(v) for _, v in vals):
            raise ValueError("parameter values must be finite")
        object.__setattr__(self, "couplings", vals)

    def __getitem__(self, key: str) -> float:
        return dict(self.couplings)[key]

    def as_dict(self) -> dict[str, float]:
        return dict(self.couplings)


@dataclass
class EcTrainingSet:
    points: list[EcParameterPoint]
    vectors: np.ndarray  # (k, n), one training vector per row
    source: str = "dense"
    basis_metric: np.ndarray | None = None
    energies: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors))
        if len(self.points) != self.vectors.shape[0]:
            raise ValueError("one vector per parameter point is required")
        n = self.vectors.shape[1]
        if self.basis_metric is None:
            self.basis_metric = np.eye(n)
        tol = 1e-8 if self.source == "dense" else 1e-2
        norms = np.einsum("ki,ij,kj->k", self.vectors.conj(), self.basis_metric, self.vectors).real
        if np.any(np.abs(norms - 1) > tol):
            raise ValueError(f"training vectors not normalized in the basis metric: {norms}")

    def subset(self, keep: Sequence[int]) -> "EcTrainingSet":
        keep = list(keep)
        return EcTrainingSet(
            [self.points[i] for i in keep],
            self.vectors[keep],
            self.source,
            self.basis_metric,
            [self.energies[i] for i in keep] if self.energies else [],
        )

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "points": [p.as_dict() for p in self.points],
            "energies_MeV": list(self.energies),
            "vectors": [[[float(z.real), float(z.imag)] for z in v] for v in self.vectors.astype(complex)],
            "basis_metric": [[float(x) for x in row] for row in np.real(self.basis_metric)],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "EcTrainingSet":
        vecs = np.array([[complex(re, im) for re, im in v] for v in d["vectors"]])
        if not np.any(vecs.imag):
            vecs = vecs.real
        return cls(
            [EcParameterPoint(p) for p in d["points"]],
            vecs,
            d.get("source", "dense"),
            np.array(d["basis_metric"]) if d.get("basis_metric") is not None else None,
            list(d.get("energies_MeV", [])),
        )


def _dense_ground(problem: GeneralizedEigenProblem):
    H, N = problem.H, problem.N
    if np.abs(H.imag).max() == 0 and np.abs(N.imag).max() == 0:
        w, v = sla.eigh(H.real, N.real)
    else:
        w, v = sla.eigh(H, N)
    phi = v[:, 0]
    phi = phi / np.sqrt(np.vdot(phi, N @ phi).real)
    if np.iscomplexobj(phi):
        phi = canonical_phase(phi)
    elif phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return float(w[0]), phi


def _pad_for_qubits(problem: GeneralizedEigenProblem, penalty: float):
    n = problem.dim
    m = max(1, (n - 1).bit_length())
    dim = 1 << m
    H = np.zeros((dim, dim), dtype=complex)
    N = np.eye(dim, dtype=complex)
    H[:n, :n] = problem.H
    N[:n, :n] = problem.N
    H[n:, n:] = penalty * np.eye(dim - n)
    return H, N, m


def train_vectors(
    family: Callable[[EcParameterPoint], GeneralizedEigenProblem],
    points: Sequence[EcParameterPoint],
    source: str = "dense",
    threshold: float = 0.0,
    layout: AnsatzLayout | None = None,
    training_config=None,
) -> EcTrainingSet:
    """Ground-state vectors of ``family(point)`` at every training point.

    Each point must be bound (dense ground energy below ``threshold``).  With
    ``source="qnn"`` the vectors come from :func:`qnn_ihhl.vqe.train` in
    relaxed mode and need not be converged.
    """
    from .vqe import TrainingConfig, train

    if source not in ("dense", "qnn"):
        raise ValueError(f"unknown source {source!r}")
    vectors, energies, metric = [], [], None
    for pt in points:
        prob = family(pt)
        e0, phi = _dense_ground(prob)
        if e0 >= threshold:
            raise UnboundTrainingPoint(f"point {pt.as_dict()} is not bound: E0 = {e0:.6g} >= {threshold}")
        metric = prob.N.real if np.abs(prob.N.imag).max() == 0 else prob.N
        if source == "qnn":
            H, N, m = _pad_for_qubits(prob, penalty=abs(e0) + np.abs(prob.H).max() + 1.0)
            lay = layout or AnsatzLayout(m, 3)
            cfg = training_config or TrainingConfig(relaxed=True)
            res = train(H, N, lay, cfg)
            phi = canonical_phase(res.state[: prob.dim])
            phi = phi / np.sqrt(np.vdot(phi, prob.N @ phi).real)
            e0 = res.energy
        vectors.append(phi)
        energies.append(e0)
    return EcTrainingSet(list(points), np.array(vectors), source, metric, energies)


@dataclass
class EcProjection:
    problem: GeneralizedEigenProblem
    kept: list[int]
    trimmed: list[int]
    condition: float


def project_ec(train: EcTrainingSet, target: GeneralizedEigenProblem, cond_cap: float = COND_CAP) -> EcProjection:
    """Project the target onto the training vectors with c-products.

    When ``N^EC`` is conditioned worse than ``cond_cap`` the training vector
    whose removal helps most is dropped, repeatedly, and reported.
    """
    V = np.asarray(train.vectors)
    if V.shape[1] != target.dim:
        raise ValueError(f"training vectors have length {V.shape[1]}, target dimension is {target.dim}")
    N_full = train.basis_metric if train.basis_metric is not None else target.N
    Nfull = np.asarray(N_full, dtype=complex)
    H_ec = V @ target.H @ V.T
    N_ec = V @ Nfull @ V.T
    kept = list(range(V.shape[0]))
    trimmed = []
    cond = np.linalg.cond(N_ec)
    while cond > cond_cap and len(kept) > 1:
        best = None
        for j in range(len(kept)):
            idx = [i for t, i in enumerate(range(len(kept))) if t != j]
            c = np.linalg.cond(N_ec[np.ix_(idx, idx)])
            if best is None or c < best[0]:
                best = (c, j)
        cond, j = best
        sel = [i for i in range(len(kept)) if i != j]
        H_ec = H_ec[np.ix_(sel, sel)]
        N_ec = N_ec[np.ix_(sel, sel)]
        trimmed.append(kept.pop(j))
    if trimmed:
        warnings.warn(f"EC overlap ill-conditioned; trimmed training vectors {trimmed}", RuntimeWarning)
    label = f"EC[{len(kept)}] {target.label}".strip()
    return EcProjection(GeneralizedEigenProblem(H_ec, N_ec, label), kept, trimmed, float(cond))


def ec_resonance(
    small,
    gammas: Sequence[float] | None = None,
    cfg: IhhlConfig | None = None,
    phi0=None,
    E0: complex | None = None,
    snap_deg: float | None = None,
) -> ResonanceResult:
    """Run IHHL on small EC problems.

    ``small`` is either one :class:`GeneralizedEigenProblem` (solved directly
    at its own angle, passed as a single entry of ``gammas``) or a callable
    ``gamma -> GeneralizedEigenProblem``; in the latter case every angle in
    ``gammas`` is solved, each seeded with the previous eigenpair, and the
    stabilization point of the resulting trajectory is returned.
    """
    cfg = cfg or IhhlConfig()
    if isinstance(small, GeneralizedEigenProblem):
        g = float(gammas[0]) if gammas is not None and len(gammas) else float("nan")
        start = np.arange(1, small.dim + 1, dtype=complex) if phi0 is None else phi0
        res = ihhl_iterate(small, start, E0, cfg)
        if not res.converged:
            logger.warning("IHHL did not converge (last |dE| trace length %d)", len(res.trace))
        return ResonanceResult(res.energy, g, float("nan"), "direct")
    if gammas is None or len(gammas) < 3:
        raise ValueError("a stabilization sweep needs at least three angles")
    energies = []
    phi, E = phi0, E0
    for g in gammas:
        prob = small(g)
        start = np.arange(1, prob.dim + 1, dtype=complex) if phi is None else phi
        res = ihhl_iterate(prob, start, E, cfg)
        energies.append(res.energy)
        phi, E = res.vector, res.energy
    sweep = CsmSweep(np.asarray(gammas, dtype=float), np.array([energies]))
    return find_stabilization(sweep, 0, snap_deg=snap_deg)


def dense_ec_spectrum(problem: GeneralizedEigenProblem) -> np.ndarray:
    """Reference eigenvalues of a small EC problem (testing oracle)."""
    return sla.eigvals(problem.H, problem.N)


# training grid for the barrier benchmark: every point is bound
BARRIER_TRAINING = (
    {"coupling": 2.5, "barrier_scale": 1.0},
    {"coupling": 2.5, "barrier_scale": 0.8},
    {"coupling": 3.0, "barrier_scale": 1.0},
    {"coupling": 3.0, "barrier_scale": 0.8},
)


def barrier_family(basis: GaussianBasis, gamma: float = 0.0) -> Callable[[EcParameterPoint], GeneralizedEigenProblem]:
    """``point -> H(gamma)`` for the barrier benchmark.

    Points carry ``coupling`` and optionally ``barrier_scale`` (default 1).
    """

    def family(pt: EcParameterPoint) -> GeneralizedEigenProblem:
        d = pt.as_dict()
        return build_hamiltonian(barrier_system(d["coupling"], d.get("barrier_scale", 1.0)), basis, gamma)

    return family
