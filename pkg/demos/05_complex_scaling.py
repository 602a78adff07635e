"""
Finding a resonance by complex scaling
======================================

A particle in an attractive well behind a Gaussian barrier has a p-wave
resonance.  Rotating r -> r exp(i gamma) leaves the bound state where it is,
swings the discretized continuum down by 2 gamma, and uncovers the resonance
as a point that barely moves once gamma is large enough.  The stabilization
angle is where |dE/dgamma| is smallest.
"""

import numpy as np

from qnn_ihhl.csm import (
    GaussianBasis,
    barrier_system,
    build_hamiltonian,
    default_angles_deg,
    dense_spectrum,
    find_stabilization,
    sweep_angles,
)

system = barrier_system()
basis = GaussianBasis.geometric(l=1)  # 12 ranges, b1 = 0.5 fm, ratio 1.6

w0 = dense_spectrum(build_hamiltonian(system, basis, 0.0))
print("gamma=0: real spectrum, lowest levels", np.round(w0[:3].real, 4))
for gd in (10, 20):
    w = dense_spectrum(build_hamiltonian(system, basis, np.radians(gd)))
    low = w[np.argsort(np.abs(w))[:3]]
    print(f"gamma={gd} deg: arg(E)/(-2 gamma) of the lowest continuum states", np.round(np.angle(low) / (-2 * np.radians(gd)), 3))

sweep = sweep_angles(system, basis, np.radians(default_angles_deg()))
tid = sweep.nearest(1.17 - 0.025j)
res = find_stabilization(sweep, tid)
print(f"\nresonance: {res.energy:.6f} MeV at gamma = {np.degrees(res.gamma_opt):.2f} deg"
      f"  (width {-2 * res.energy.imag:.4f} MeV)")

# a bigger basis should hardly move it
sweep16 = sweep_angles(system, GaussianBasis.geometric(n=16, l=1), np.radians(default_angles_deg()))
print("n=16 basis:", np.round(find_stabilization(sweep16, sweep16.nearest(res.energy)).energy, 6))
