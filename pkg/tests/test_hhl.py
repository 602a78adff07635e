import numpy as np
import pytest

from qnn_ihhl.hhl import (
    ConfigurationError,
    HhlBackendConfig,
    SingularSystemError,
    hermitian_embed,
    hhl_solve,
    inverse_power_estimate,
    power_estimate,
    solve_complex_linear,
)

from conftest import random_hermitian

QPE8 = HhlBackendConfig(backend="qpe", clock_qubits=8)


def well_conditioned(rng, n, cond=10.0, signed=True):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    w = np.geomspace(1.0, cond, n)
    if signed:
        w *= rng.choice([-1.0, 1.0], n)
    return (q * w) @ q.conj().T


def fidelity(x, y):
    return abs(np.vdot(x, y)) ** 2 / (np.vdot(x, x).real * np.vdot(y, y).real)


def test_embed_scalar_and_unitary():
    np.testing.assert_array_equal(hermitian_embed([[1]]), [[0, 1], [1, 0]])
    w = np.linalg.eigvalsh(hermitian_embed(1j * np.eye(2)))
    np.testing.assert_allclose(w, [-1, -1, 1, 1], atol=1e-14)


def test_embed_spectrum_is_singular_values(rng):
    C = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    s = np.linalg.svd(C, compute_uv=False)
    np.testing.assert_allclose(np.linalg.eigvalsh(hermitian_embed(C)), np.sort(np.r_[-s, s]), atol=1e-10)


def test_spectral_estimates(rng):
    A = well_conditioned(rng, 6, 8.0)
    w = np.abs(np.linalg.eigvalsh(A))
    assert abs(power_estimate(A) - w.max()) < 1e-8
    assert abs(inverse_power_estimate(A) - w.min()) < 1e-8


def test_identity_and_diagonal():
    sol = hhl_solve(np.eye(2), [1.0, 0.0])
    np.testing.assert_allclose(sol.x, [1, 0])
    np.testing.assert_allclose(hhl_solve(np.diag([1.0, 2.0]), [1.0, 1.0]).x, [1, 0.5], atol=1e-15)
    q = hhl_solve(np.eye(2), [1.0, 0.0], QPE8)
    # every eigenvalue is 1, so the success probability is (C / 1)^2 with C = 0.5
    assert abs(q.post_selection_probability - 0.25) < 1e-2
    np.testing.assert_allclose(q.x, [1, 0], atol=2e-2)


@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_ideal_residual(rng, n):
    A = random_hermitian(rng, n) + 3 * np.eye(n)
    b = rng.normal(size=n)
    x = hhl_solve(A, b).x
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_qpe_8_clock_qubits(seed):
    rng = np.random.default_rng(seed)
    A = well_conditioned(rng, 4)
    b = rng.normal(size=4)
    sol = hhl_solve(A, b, QPE8)
    exact = np.linalg.solve(A, b)
    assert fidelity(sol.x, exact) >= 0.99
    assert abs(sol.fidelity_estimate - fidelity(sol.x, exact)) < 1e-12
    assert np.linalg.norm(A @ sol.x - b) / np.linalg.norm(b) <= 5e-2
    assert 0 < sol.post_selection_probability <= 1
    assert abs(sol.clock_histogram.sum() - 1) < 1e-12


def test_non_power_of_two_is_padded(rng):
    A = well_conditioned(rng, 3)
    b = rng.normal(size=3)
    sol = hhl_solve(A, b, QPE8)
    assert sol.x.shape == (3,)
    assert fidelity(sol.x, np.linalg.solve(A, b)) >= 0.99


def test_complex_trivial_cases():
    np.testing.assert_allclose(solve_complex_linear(np.eye(2), [1j, 0]), [1j, 0], atol=1e-15)
    # C^-1 = [[0, -1], [1, 0]], so C^-1 (1, 0) = (0, 1)
    C = np.array([[0, 1], [-1, 0]])
    x = solve_complex_linear(C, [1, 0])
    np.testing.assert_allclose(x, [0, 1], atol=1e-15)
    np.testing.assert_allclose(C @ x, [1, 0], atol=1e-15)


def test_complex_random_vs_dense(rng):
    C = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.abs(solve_complex_linear(C, b) - np.linalg.solve(C, b)).max() <= 1e-10


def test_complex_linearity(rng):
    C = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b1 = rng.normal(size=4) + 1j * rng.normal(size=4)
    b2 = rng.normal(size=4) + 1j * rng.normal(size=4)
    a = 0.3 - 1.2j
    lhs = solve_complex_linear(C, a * b1 + b2)
    rhs = a * solve_complex_linear(C, b1) + solve_complex_linear(C, b2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_complex_qpe_reports_probabilities(rng):
    C = well_conditioned(rng, 2, 3.0)
    x, details = solve_complex_linear(C, np.array([1.0, 1j]), QPE8, return_details=True)
    assert len(details) == 2
    assert all(d.post_selection_probability is not None for d in details)


def test_errors():
    with pytest.raises(ValueError):
        hhl_solve(np.array([[0, 1], [0, 0]]), [1.0, 0.0])
    with pytest.raises(ValueError):
        hhl_solve(np.eye(2), [1j, 0])
    with pytest.raises(SingularSystemError):
        hhl_solve(np.diag([1.0, 0.0]), [1.0, 1.0])
    with pytest.raises(SingularSystemError):
        hhl_solve(np.diag([1.0, 0.0]), [1.0, 1.0], QPE8)
    with pytest.raises(ConfigurationError):
        hhl_solve(np.eye(2), [1.0, 0.0], HhlBackendConfig(backend="qpe", evolution_time=10.0))
    with pytest.raises(ConfigurationError):
        HhlBackendConfig(backend="analog")
    with pytest.raises(ConfigurationError):
        hhl_solve(np.diag([-1.0, 1.0]), [1.0, 0.0], HhlBackendConfig(backend="qpe", signed_spectrum=False))


def test_diagnostics_serializable(rng):
    import json

    sol = hhl_solve(well_conditioned(rng, 2), [1.0, 0.5], QPE8)
    d = json.loads(sol.diagnostics_json())
    assert set(d) >= {"post_selection_probability", "fidelity_estimate", "clock_histogram"}
