import numpy as np
import pytest

from qnn_ihhl.fixtures import load_appendix
from qnn_ihhl.hhl import HhlBackendConfig
from qnn_ihhl.ihhl import (
    DegenerateCNormError,
    GeneralizedEigenProblem,
    IhhlConfig,
    MetricError,
    build_c_matrix,
    c_normalize,
    c_product,
    c_rayleigh,
    deflate,
    dense_eigenpairs,
    ihhl_iterate,
    ihhl_spectrum,
    reduce_generalized,
)


def random_complex(rng, n, scale=10.0):
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def nearest_gap(w, E):
    return np.abs(np.asarray(w) - E).min()


def test_c_product():
    assert c_product([1j], [1j]) == -1
    assert c_product([1, 2], [3, 4]) == 11
    with pytest.raises(ValueError):
        c_product([1, 2], [1, 2, 3])


def test_c_product_symmetric(rng):
    for _ in range(10):
        u = rng.normal(size=5) + 1j * rng.normal(size=5)
        v = rng.normal(size=5) + 1j * rng.normal(size=5)
        assert c_product(u, v) == c_product(v, u)


def test_c_normalize_branch(rng):
    phi = c_normalize(rng.normal(size=4) + 1j * rng.normal(size=4))
    assert abs(c_product(phi, phi) - 1) < 1e-14
    assert phi[np.argmax(np.abs(phi))].real > 0
    with pytest.raises(DegenerateCNormError):
        c_normalize([1, 1j])


def test_reduce_generalized(rng):
    H = random_complex(rng, 4)
    np.testing.assert_allclose(reduce_generalized(GeneralizedEigenProblem(H)), H)
    np.testing.assert_allclose(reduce_generalized(GeneralizedEigenProblem(H, 2 * np.eye(4))), H / 2)
    with pytest.raises(MetricError):
        reduce_generalized(GeneralizedEigenProblem(H, np.diag([1, 1, 1, 0.0])))


def test_reduce_appendix_matches_generalized_oracle():
    p = load_appendix().problem
    M = reduce_generalized(p)
    assert np.linalg.norm(p.N @ M - p.H) <= 1e-8 * np.linalg.norm(p.H)
    w_gen = dense_eigenpairs(p)[0]
    for lam in np.linalg.eigvals(M):
        assert nearest_gap(w_gen, lam) < 1e-8


def test_build_c_matrix():
    E = np.array([1.5 - 2j, 3.0, -1j])
    np.testing.assert_allclose(build_c_matrix(np.diag(E), 1.5 - 2j, 0.7)[0, 0], 1)
    np.testing.assert_allclose(build_c_matrix(np.diag([2.0, 5.0]), 2.0, 1.0), np.diag([1.0, 4.0]))
    with pytest.raises(ValueError):
        build_c_matrix(np.eye(2), 0, 0)


def test_c_matrix_at_published_energy_well_conditioned():
    M = reduce_generalized(load_appendix().problem)
    s = np.linalg.svd(build_c_matrix(M, 4.08 - 0.051j, 1.0), compute_uv=False)
    assert s.min() > 1e-6


def test_fixed_point_equivalence(rng):
    M = random_complex(rng, 6, 1.0)
    w, v = np.linalg.eig(M)
    for beta in (0.5, 1.0, 2.0 - 1j):
        C = build_c_matrix(M, w[2], beta)
        np.testing.assert_allclose(C @ v[:, 2], v[:, 2], atol=1e-12)
        # a non-eigenvalue energy has no fixed point
        assert np.linalg.svd(build_c_matrix(M, w[2] + 0.3, beta) - np.eye(6), compute_uv=False).min() > 1e-6


def test_diagonal_dominant_target():
    r = ihhl_iterate(np.diag([1.0, 3.0]), [1, 0.1], 0.5, IhhlConfig(beta=1.0, tolerance=1e-10))
    assert abs(r.energy - 1) < 1e-10
    assert len(r.trace) <= 10
    assert r.converged


def test_appendix_converges_to_oracle():
    fx = load_appendix()
    r = ihhl_iterate(fx.problem, fx.phi0, None, IhhlConfig(beta=fx.beta))
    w, _ = dense_eigenpairs(fx.problem)
    assert r.converged and len(r.trace) <= 20
    assert nearest_gap(w, r.energy) <= 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_random_8x8(seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, 8)
    r = ihhl_iterate(M, rng.normal(size=8) + 1j * rng.normal(size=8))
    assert r.converged
    assert nearest_gap(np.linalg.eigvals(M), r.energy) < 1e-8


def test_trace_contract(rng):
    M = random_complex(rng, 6)
    cfg = IhhlConfig()
    r = ihhl_iterate(M, np.ones(6))
    E = r.trace.energies
    assert r.converged
    assert abs(E[-1] - E[-2]) <= cfg.tolerance
    assert r.trace.to_csv().splitlines()[0] == "iter,re_E_MeV,im_E_MeV,residual"


def test_shift_energy_update(rng):
    M = random_complex(rng, 5)
    r = ihhl_iterate(M, np.ones(5), cfg=IhhlConfig(energy_update="shift", max_iterations=300))
    assert nearest_gap(np.linalg.eigvals(M), r.energy) < 1e-7


def test_singular_c_triggers_beta_retry():
    # E0 - beta = 1 is an eigenvalue, so the very first C is singular
    r = ihhl_iterate(np.diag([1.0, 3.0]), [1.0, 0.5], 2.0, IhhlConfig(beta=1.0))
    assert r.trace.beta_used == pytest.approx(1.37)
    assert min(abs(r.energy - 1), abs(r.energy - 3)) < 1e-8


def test_degenerate_start_rejected():
    with pytest.raises(DegenerateCNormError):
        ihhl_iterate(np.diag([1.0, 2.0]), [1.0, 1j])
    with pytest.raises(ValueError):
        ihhl_iterate(np.diag([1.0, 2.0]), [0.0, 0.0])
    with pytest.raises(ValueError):
        IhhlConfig(beta=0)


def test_deflate_basics():
    M = np.diag([1.0, 2.0])
    np.testing.assert_array_equal(deflate(M, []), M)
    D = deflate(M, [(1.0, np.array([1.0, 0.0]))], c=100)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(D).real), [2, 101])


def test_deflate_preserves_rest(rng):
    M = random_complex(rng, 6, 1.0)
    M = M + M.T  # complex symmetric, as in the scaled problems
    w, v = np.linalg.eig(M)
    phi = c_normalize(v[:, 0])
    D = deflate(M, [(w[0], phi)], c=50)
    wd = np.linalg.eigvals(D)
    assert nearest_gap(wd, w[0] + 50) < 1e-8
    for lam in w[1:]:
        assert nearest_gap(wd, lam) < 1e-8


def test_appendix_second_state_after_deflation():
    fx = load_appendix()
    found = ihhl_spectrum(fx.problem, fx.phi0, 2)
    w, _ = dense_eigenpairs(fx.problem)
    assert abs(found[0].energy - found[1].energy) > 1.0
    for r in found:
        assert nearest_gap(w, r.energy) < 1e-7


def test_qpe_backend_records_probabilities(rng):
    M = np.diag([1.0, 2.5]) + 0.1 * rng.normal(size=(2, 2))
    cfg = IhhlConfig(hhl=HhlBackendConfig(backend="qpe"), max_iterations=30)
    r = ihhl_iterate(M, [1.0, 0.2], 0.8, cfg)
    assert all(s.post_selection_probability is not None for s in r.trace.steps)
    assert "post_selection_probability" in r.trace.to_csv().splitlines()[0]
    assert nearest_gap(np.linalg.eigvals(M), r.energy) < 1e-2


def test_problem_json_round_trip(rng):
    p = GeneralizedEigenProblem(random_complex(rng, 3), np.eye(3) + 0.1j, "x")
    q = GeneralizedEigenProblem.from_json(p.to_json())
    assert np.array_equal(p.H, q.H) and np.array_equal(p.N, q.N) and q.label == "x"


def test_c_rayleigh_exact_on_eigvec(rng):
    M = random_complex(rng, 4)
    w, v = np.linalg.eig(M)
    assert abs(c_rayleigh(M, v[:, 1]) - w[1]) < 1e-10
