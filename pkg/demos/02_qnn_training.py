"""
Training the layered QNN ansatz
===============================

The ansatz stacks RZ-RY-RZ rotations on each qubit and a ring of CNOTs with
a layer-dependent offset.  Gradients come from the parameter-shift rule, and
plain SGD drives the Rayleigh quotient down to the lowest eigenvalue.
A penalty term then deflates the ground state to reach the next one.
"""

import numpy as np

from qnn_ihhl.circuit import AnsatzLayout, build_ansatz
from qnn_ihhl.vqe import TrainingConfig, loss, parameter_shift_grad, project_hamiltonian, train

rng = np.random.default_rng(7)
a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
H = (a + a.conj().T) / 2
w = np.linalg.eigvalsh(H)
layout = AnsatzLayout(n_qubits=3, n_layers=4)

# parameter-shift vs central differences on a random point; slot 1 is the
# first RY (the leading RZ only adds a phase to |0> and has zero gradient)
c = build_ansatz(layout)
p = rng.uniform(0, 2 * np.pi, c.n_params)
g = parameter_shift_grad(p, H, None, c)
for k in (0, 1, 4):
    e = np.zeros_like(p)
    e[k] = 1e-5
    fd = (loss(p + e, H, None, c) - loss(p - e, H, None, c)) / 2e-5
    print(f"d/dtheta_{k}: shift rule {g[k]:+.8f}  finite diff {fd:+.8f}")

cfg = TrainingConfig(learning_rate=1 / np.ptp(w), max_iterations=3000, seed=3)
ground = train(H, None, layout, cfg)
print(f"\nground: {ground.energy:.6f} (exact {w[0]:.6f}) after {len(ground.trace)} steps, {ground.status}")

# push the found state up and train again
P = project_hamiltonian(H, None, [ground.state])
cfg2 = TrainingConfig(learning_rate=1 / np.ptp(np.linalg.eigvalsh(P)), max_iterations=3000, seed=3)
second = train(P, None, layout, cfg2)
print(f"second: {second.energy:.6f} (exact {w[1]:.6f})")
