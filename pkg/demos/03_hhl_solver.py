"""
Solving linear systems with emulated HHL
========================================

The ideal backend inverts the eigenvalues exactly.  The qpe backend goes
through a finite clock register, so the answer carries a discretization
error that shrinks as clock qubits are added.  Non-Hermitian systems are
handled through the Hermitian embedding [[0, C], [C^dagger, 0]].
"""

import numpy as np

from qnn_ihhl.hhl import HhlBackendConfig, hhl_solve, solve_complex_linear

rng = np.random.default_rng(11)
q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
A = (q * np.array([1.13, -2.71, 4.37, -7.94])) @ q.conj().T
b = rng.normal(size=4)
exact = np.linalg.solve(A, b)


def fidelity(x, y):
    return abs(np.vdot(x, y)) ** 2 / (np.vdot(x, x).real * np.vdot(y, y).real)


print("ideal residual:", np.linalg.norm(A @ hhl_solve(A, b).x - b))
for n_clock in (6, 8, 10, 12):
    sol = hhl_solve(A, b, HhlBackendConfig(backend="qpe", clock_qubits=n_clock))
    print(f"qpe, {n_clock:2d} clock qubits: fidelity {fidelity(sol.x, exact):.6f}"
          f"  post-selection p = {sol.post_selection_probability:.3f}")

# a complex-symmetric system, as met inside the eigensolver
C = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
C = C + C.T
x = solve_complex_linear(C, np.array([1.0, 2.0, 3.0]))
print("\nembedded solve residual:", np.linalg.norm(C @ x - [1, 2, 3]))
