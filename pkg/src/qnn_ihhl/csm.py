"""Two-body complex-scaling laboratory in a geometric Gaussian basis.

Radial basis functions are ``u_i(r) = r^(l+1) exp(-r^2 / (2 b_i^2))``,
normalized to unit overlap.  With ``a_i = 1 / (2 b_i^2)`` every matrix element
reduces to the moment ``int_0^inf r^(2p-1) exp(-q r^2) dr = Gamma(p) / (2 q^p)``,
which stays valid for complex ``q`` with positive real part; this is what
makes complex-scaled Gaussian potentials closed-form.

Under ``r -> r e^{i gamma}`` the Hamiltonian becomes
``e^{-2 i gamma} T + V_N(r e^{i gamma}) + e^{-i gamma} V_C``: the continuum
turns to ``arg E = -2 gamma`` and resonances with ``Im E < 0`` are exposed
for positive angles.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.special import gamma as gamma_fn

from .ihhl import GeneralizedEigenProblem, IhhlConfig, ihhl_iterate

logger = logging.getLogger(__name__)

MAX_ANGLE = np.pi / 4
TIE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GaussianBasis:
    widths: tuple[float, ...]
    l: int = 0

    def __post_init__(self):
        w = tuple(float(b) for b in self.widths)
        object.__setattr__(self, "widths", w)
        if self.l not in (0, 1, 2):
            raise ValueError("orbital momentum limited to l = 0, 1, 2")
        if any(b <= 0 for b in w):
            raise ValueError("widths must be positive")
        if any(b2 <= b1 for b1, b2 in zip(w, w[1:])):
            raise ValueError("widths must be strictly increasing")

    @classmethod
    def geometric(cls, b1: float = 0.5, ratio: float = 1.6, n: int = 12, l: int = 0) -> "GaussianBasis":
        if n < 1 or ratio <= 1:
            raise ValueError("need n >= 1 and ratio > 1")
        return cls(tuple(b1 * ratio ** np.arange(n)), l)

    @property
    def n(self) -> int:
        return len(self.widths)

    @property
    def exponents(self) -> np.ndarray:
        return 1.0 / (2.0 * np.asarray(self.widths) ** 2)


@dataclass(frozen=True)
class TwoBodySystem:
    """Radial two-body problem.

    ``potential`` is a sequence of ``(depth [MeV], range [fm])`` pairs for
    ``sum_k V_k exp(-(r / a_k)^2)``; ``coupling`` multiplies every nuclear term.
    """

    potential: tuple[tuple[float, float], ...]
    kinetic_scale: float = 1.0  # hbar^2 / 2 mu  [MeV fm^2]
    coulomb_strength: float = 0.0  # Z1 Z2 e^2  [MeV fm]
    coupling: float = 1.0

    def __post_init__(self):
        pot = tuple((float(v), float(a)) for v, a in self.potential)
        object.__setattr__(self, "potential", pot)
        if not pot:
            raise ValueError("at least one potential component is required")
        if any(a <= 0 for _, a in pot):
            raise ValueError("potential ranges must be positive")
        if self.kinetic_scale <= 0:
            raise ValueError("kinetic_scale must be positive")
        if self.coulomb_strength < 0:
            raise ValueError("coulomb_strength must be non-negative")

    def with_coupling(self, coupling: float) -> "TwoBodySystem":
        return TwoBodySystem(self.potential, self.kinetic_scale, self.coulomb_strength, coupling)

    def potential_at(self, r, gamma: float = 0.0):
        z = np.asarray(r) * np.exp(1j * gamma)
        return self.coupling * sum(v * np.exp(-((z / a) ** 2)) for v, a in self.potential)

    @classmethod
    def from_dict(cls, d: dict) -> "TwoBodySystem":
        pot = [(c["depth_MeV"], c["range_fm"]) if isinstance(c, dict) else tuple(c) for c in d["potential"]]
        return cls(
            tuple(pot),
            d.get("kinetic_scale_MeV_fm2", d.get("kinetic_scale", 1.0)),
            d.get("coulomb_strength_MeV_fm", d.get("coulomb_strength", 0.0)),
            d.get("coupling", 1.0),
        )


def barrier_system(coupling: float = 1.0, barrier_scale: float = 1.0) -> TwoBodySystem:
    """Benchmark: attractive core plus repulsive barrier, hbar^2/2mu = 1.

    ``V(r) = coupling * (-8 exp(-(r/2)^2) + 4 barrier_scale exp(-(r/4)^2))``.
    In the p wave (l = 1) it carries a narrow resonance near
    ``1.164 - 0.019i`` at unit coupling and binds for coupling >= 2.5.
    """
    return TwoBodySystem(((-8.0, 2.0), (4.0 * barrier_scale, 4.0)), 1.0, 0.0, coupling)


BARRIER_L = 1


def _moment(p: float, q) -> np.ndarray:
    """``int_0^inf r^(2p - 1) exp(-q r^2) dr`` for Re q > 0."""
    return gamma_fn(p) / (2.0 * np.power(q, p))


def _raw_overlap(basis: GaussianBasis) -> np.ndarray:
    a = basis.exponents
    return _moment(basis.l + 1.5, a[:, None] + a[None, :])


def _normalizer(basis: GaussianBasis) -> np.ndarray:
    d = 1.0 / np.sqrt(np.diag(_raw_overlap(basis)))
    return np.outer(d, d)


def overlap_matrix(basis: GaussianBasis) -> np.ndarray:
    """Unit-diagonal overlap ``N_ij`` of the radial Gaussians."""
    return _raw_overlap(basis) * _normalizer(basis)


def kinetic_matrix(basis: GaussianBasis, kinetic_scale: float = 1.0) -> np.ndarray:
    """``<u_i| -d^2/dr^2 + l(l+1)/r^2 |u_j>`` times ``hbar^2/2mu``."""
    a = basis.exponents
    A = a[:, None] + a[None, :]
    raw = (2 * basis.l + 3) * 2.0 * np.outer(a, a) / A * _moment(basis.l + 1.5, A)
    return kinetic_scale * raw * _normalizer(basis)


def gaussian_potential_matrix(basis: GaussianBasis, depth: float, rng: float, gamma: float = 0.0) -> np.ndarray:
    """``depth * exp(-(r e^{i gamma} / rng)^2)`` between basis functions."""
    a = basis.exponents
    q = a[:, None] + a[None, :] + np.exp(2j * gamma) / rng**2
    return depth * _moment(basis.l + 1.5, q) * _normalizer(basis)


def coulomb_matrix(basis: GaussianBasis, strength: float) -> np.ndarray:
    """``strength / r`` between basis functions (unscaled)."""
    a = basis.exponents
    return strength * _moment(basis.l + 1.0, a[:, None] + a[None, :]) * _normalizer(basis)


def build_hamiltonian(sys: TwoBodySystem, basis: GaussianBasis, gamma: float = 0.0) -> GeneralizedEigenProblem:
    """Complex-scaled ``H(gamma)`` and the real overlap, angle in radians."""
    if not abs(gamma) < MAX_ANGLE:
        raise ValueError(f"|gamma| must stay below pi/4, got {gamma}")
    H = np.exp(-2j * gamma) * kinetic_matrix(basis, sys.kinetic_scale).astype(complex)
    for depth, rng in sys.potential:
        H = H + sys.coupling * gaussian_potential_matrix(basis, depth, rng, gamma)
    if sys.coulomb_strength:
        H = H + np.exp(-1j * gamma) * coulomb_matrix(basis, sys.coulomb_strength)
    return GeneralizedEigenProblem(H, overlap_matrix(basis).astype(complex), f"gamma={np.degrees(gamma):.4g}deg")


def dense_spectrum(problem: GeneralizedEigenProblem, vectors: bool = False):
    """Generalized eigenvalues sorted by real part (testing / sweep oracle)."""
    w, v = sla.eig(problem.H, problem.N)
    order = np.argsort(w.real)
    return (w[order], v[:, order]) if vectors else w[order]


@dataclass
class CsmSweep:
    angles: np.ndarray  # radians
    trajectories: np.ndarray  # (n_traj, n_angles) complex, nan where undefined
    flagged: set[int] = field(default_factory=set)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        d = np.diff(self.angles)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("angles must be strictly monotone")

    @property
    def n_trajectories(self) -> int:
        return self.trajectories.shape[0]

    def rate(self, trajectory_id: int) -> np.ndarray:
        """``|dE/dgamma|`` (per radian) by finite differences on the grid."""
        return np.abs(np.gradient(self.trajectories[trajectory_id], self.angles))

    def nearest(self, energy: complex, angle: float | None = None) -> int:
        """Id of the trajectory closest to ``energy`` at ``angle`` (default: last)."""
        k = -1 if angle is None else int(np.argmin(np.abs(self.angles - angle)))
        col = self.trajectories[:, k]
        return int(np.nanargmin(np.abs(col - energy)))

    def to_csv(self, trajectory_ids: Sequence[int] | None = None) -> str:
        ids = range(self.n_trajectories) if trajectory_ids is None else trajectory_ids
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma_deg", "trajectory_id", "re_E_MeV", "im_E_MeV", "rate_MeV_per_rad"])
        for t in ids:
            rate = self.rate(t)
            for k, g in enumerate(self.angles):
                e = self.trajectories[t, k]
                w.writerow([repr(float(np.degrees(g))), t, repr(float(e.real)), repr(float(e.imag)), repr(float(rate[k]))])
        return buf.getvalue()


def _track(columns: list[np.ndarray], tie: float):
    """Link eigenvalues across adjacent angles by nearest neighbour."""
    n = len(columns[0])
    traj = np.full((n, len(columns)), np.nan + 0j)
    traj[:, 0] = columns[0]
    flagged: set[int] = set()
    for k in range(1, len(columns)):
        prev = traj[:, k - 1]
        cand = columns[k]
        dist = np.abs(prev[:, None] - cand[None, :])
        taken = np.zeros(len(cand), dtype=bool)
        # greedy global matching: closest pairs first
        for flat in np.argsort(dist, axis=None):
            i, j = divmod(int(flat), len(cand))
            if not np.isnan(traj[i, k]) or taken[j]:
                continue
            row = np.sort(dist[i])
            if len(row) > 1 and row[1] - row[0] < tie:
                flagged.add(i)
            traj[i, k] = cand[j]
            taken[j] = True
    return traj, flagged


def sweep_angles(
    sys: TwoBodySystem,
    basis: GaussianBasis,
    angles: Sequence[float],
    solver: str = "dense",
    target: complex | None = None,
    ihhl_cfg: IhhlConfig | None = None,
    tie_tolerance: float = TIE_TOLERANCE,
) -> CsmSweep:
    """Diagonalize ``H(gamma)`` over an angle grid and link eigenvalue trajectories.

    ``solver="ihhl"`` follows a single eigenvalue instead: the first angle is
    seeded with ``target`` and every further angle restarts from the previous
    eigenpair.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.size < 3:
        raise ValueError("a sweep needs at least three angles")
    problems = [build_hamiltonian(sys, basis, g) for g in angles]
    if solver == "dense":
        traj, flagged = _track([dense_spectrum(p) for p in problems], tie_tolerance)
        if flagged:
            logger.warning("ambiguous trajectory tracking for ids %s", sorted(flagged))
        return CsmSweep(angles, traj, flagged)
    if solver != "ihhl":
        raise ValueError(f"unknown solver {solver!r}")
    if target is None:
        raise ValueError("the ihhl sweep needs a target energy for the first angle")
    cfg = ihhl_cfg or IhhlConfig(beta=0.05, max_iterations=500)
    energies = []
    phi = np.ones(basis.n, dtype=complex)
    E = complex(target)
    for p in problems:
        res = ihhl_iterate(p, phi, E, cfg)
        if not res.converged:
            logger.warning("ihhl did not converge at %s", p.label)
        energies.append(res.energy)
        phi, E = res.vector, res.energy
    return CsmSweep(angles, np.array([energies]))


@dataclass
class ResonanceResult:
    energy: complex
    gamma_opt: float  # radians
    rate: float
    method: str = "stabilization"
    snapped: bool = False

    def to_dict(self) -> dict:
        return {
            "energy_MeV": [self.energy.real, self.energy.imag],
            "gamma_opt_rad": self.gamma_opt,
            "gamma_opt_deg": float(np.degrees(self.gamma_opt)),
            "rate_MeV_per_rad": self.rate,
            "method": self.method,
            "snapped": self.snapped,
        }


class NoResonanceError(RuntimeError):
    """The rate |dE/dgamma| has no interior minimum on the swept grid."""


def find_stabilization(
    sweep: CsmSweep, trajectory_id: int = 0, interpolate: bool = True, snap_deg: float | None = None
) -> ResonanceResult:
    """Pick the angle of minimal ``|dE/dgamma|`` along one trajectory.

    ``interpolate`` fits a quadratic through the three energies around the
    grid minimum and takes the real angle minimizing ``|dE/dgamma|`` of that
    fit.  ``snap_deg``
    instead rounds the interpolated optimum to the nearest multiple of that
    many degrees present on the grid and reports the energy there.
    """
    E = sweep.trajectories[trajectory_id]
    g = sweep.angles
    ok = ~np.isnan(E)
    if ok.sum() < 3:
        raise ValueError("trajectory spans fewer than three angles")
    E, g = E[ok], g[ok]
    rate = np.abs(np.gradient(E, g))
    k = int(np.argmin(rate[1:-1])) + 1 if len(rate) > 2 else 0
    # a relative margin keeps round-off on a flat rate from passing as a minimum
    if len(rate) < 3 or not rate[k] < (1 - 1e-9) * min(rate[0], rate[-1]):
        raise NoResonanceError("rate of change has no interior minimum")
    gopt, Eopt, ropt = g[k], E[k], rate[k]
    if interpolate:
        # quadratic through the three neighbouring energies; |E'(x)| = |2 c2 x + c1|
        # is minimized in closed form over real x
        x = g[k - 1 : k + 2] - g[k]
        c2, c1, c0 = np.polyfit(x, E[k - 1 : k + 2], 2)
        if abs(c2) > 0:
            shift = float(-np.real(c1 * np.conj(2 * c2)) / abs(2 * c2) ** 2)
            shift = float(np.clip(shift, x.min(), x.max()))
            gopt = g[k] + shift
            Eopt = complex(c2 * shift**2 + c1 * shift + c0)
            ropt = float(abs(2 * c2 * shift + c1))
    snapped = False
    if snap_deg is not None:
        target = np.radians(snap_deg * np.round(np.degrees(gopt) / snap_deg))
        j = int(np.argmin(np.abs(g - target)))
        gopt, Eopt, ropt = g[j], E[j], rate[j]
        snapped = True
    return ResonanceResult(complex(Eopt), float(gopt), float(ropt), "stabilization", snapped)


def resonance_from_sweep(sweep: CsmSweep, guess: complex, **kwargs) -> ResonanceResult:
    """Stabilization on the trajectory passing closest to ``guess`` at the last angle."""
    return find_stabilization(sweep, sweep.nearest(guess), **kwargs)


def default_angles_deg() -> np.ndarray:
    return np.arange(0.0, 21.0)
