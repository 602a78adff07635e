"""Classical simulation of the QNN + iterative-HHL resonance workflow.

Modules
-------
pauli     Pauli-string algebra, trace decomposition, Jordan-Wigner operators
circuit   statevector simulator for the layered RZ-RY-RZ / CNOT-ring ansatz
vqe       parameter-shift gradients and SGD training (with overlap metric)
hhl       HHL linear solver: ideal spectral backend and QPE emulation
ihhl      iterative HHL eigensolver for complex-symmetric problems
csm       complex scaling lab for two-body Gaussian-basis problems
ec        eigenvector continuation onto small c-product subspaces
fixtures  shipped appendix matrices, gate angles and interaction tables
"""
from .circuit import AnsatzLayout, Circuit, Gate, build_ansatz, expectation, rayleigh_quotient, run_circuit
from .csm import GaussianBasis, TwoBodySystem, barrier_system, build_hamiltonian, find_stabilization, sweep_angles
from .ec import EcParameterPoint, EcTrainingSet, ec_resonance, project_ec, train_vectors
from .fixtures import load_appendix, load_tables, reference_values, yng_depths
from .hhl import HhlBackendConfig, hhl_solve, solve_complex_linear
from .ihhl import GeneralizedEigenProblem, IhhlConfig, c_normalize, c_product, ihhl_iterate, ihhl_spectrum
from .pauli import PauliString, PauliSum, jw_annihilation, jw_creation, pauli_decompose, pauli_reconstruct
from .vqe import TrainingConfig, parameter_shift_grad, project_hamiltonian, train

__version__ = "0.1.0"
