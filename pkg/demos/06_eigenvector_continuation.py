"""
Eigenvector continuation into the resonance region
==================================================

Ground states are computed where the system is bound (strong well), then the
Hamiltonian at the physical, unbound coupling is projected onto their span.
The 4x4 projected problem is solved with iterative HHL and compared with
the full-space complex-scaling result.
"""

import numpy as np

from qnn_ihhl.csm import GaussianBasis, default_angles_deg, find_stabilization, sweep_angles, barrier_system
from qnn_ihhl.ec import BARRIER_TRAINING, EcParameterPoint, barrier_family, dense_ec_spectrum, project_ec, train_vectors
from qnn_ihhl.ihhl import IhhlConfig, ihhl_iterate

basis = GaussianBasis.geometric(l=1)
points = [EcParameterPoint(p) for p in BARRIER_TRAINING]
train = train_vectors(barrier_family(basis), points)
for pt, E in zip(points, train.energies):
    print(f"training {pt.as_dict()}  E = {E:.4f} MeV")

gamma = np.radians(11.27)
proj = project_ec(train, barrier_family(basis, gamma)(EcParameterPoint({"coupling": 1.0})))
print(f"\ncond(N_EC) = {proj.condition:.2e}, kept {len(proj.kept)} vectors")

res = ihhl_iterate(proj.problem, np.arange(1, 5, dtype=complex), 0.0, IhhlConfig(tolerance=1e-10))
sub = dense_ec_spectrum(proj.problem)
print("IHHL on the EC space:", np.round(res.energy, 8), f"in {len(res.trace)} iterations")
print("dense EC spectrum:   ", np.round(sub, 6))

sw = sweep_angles(barrier_system(), basis, np.radians(default_angles_deg()))
full = find_stabilization(sw, sw.nearest(1.17 - 0.025j)).energy
print("full-space CSM:      ", np.round(full, 6), " truncation gap", round(abs(full - res.energy), 4))
