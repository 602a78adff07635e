"""
Encoding matrices as Pauli sums
===============================

A 2^m x 2^m matrix is a linear combination of the 4^m Pauli strings.  Here we
expand a small Hermitian matrix, a padded 3x3 one, and a Jordan-Wigner
creation operator.
"""

import numpy as np

from qnn_ihhl.pauli import jw_creation, pad_to_power_of_two, pauli_decompose, pauli_reconstruct

# a 2-qubit Hermitian matrix: every coefficient comes out real
rng = np.random.default_rng(1)
a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
H = (a + a.conj().T) / 2
s = pauli_decompose(H)
for coeff, string in s.terms[:6]:
    print(f"{string.label}  {coeff.real:+.4f}{coeff.imag:+.1e}j")
print("terms:", len(s), " round-trip error:", np.abs(pauli_reconstruct(s) - H).max())

# odd sizes are zero-padded to the next power of two first
M3 = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
P = pad_to_power_of_two(M3)
print("\npadded shape:", P.shape, " terms:", len(pauli_decompose(P)))

# a_0^dagger on 2 qubits: (X - iY)/2 on qubit 0
print("\nJW a_0^dagger:", jw_creation(0, 2))
