import hashlib
from decimal import Decimal

import numpy as np
import pytest

from qnn_ihhl import fixtures
from qnn_ihhl.fixtures import (
    FixtureCorruptionError,
    fixture_state,
    load_appendix,
    load_tables,
    parse_complex,
    parse_real,
    reference_values,
    transpose_asymmetry,
    yng_depths,
    yng_rows_decimal,
)


def test_published_entries():
    fx = load_appendix()
    assert fx.h_res[0, 0] == 89.55105672 + 29.96865528j
    assert fx.n_res[3, 3] == -1.09854298 + 1.42115795j
    first = fx.points[0]
    assert first.as_dict() == {"lambda_LambdaN": 1.2, "M": 0.5}
    assert tuple(fx.gate_params[first][0, 0]) == (6.2777443, 2.9623668, 4.1739912)
    assert fx.gamma_snap_deg == -2.0 and fx.beta == 1.0
    assert list(fx.phi0) == [1, 2, 3, 4]


def test_gate_tensor_shapes_and_range():
    fx = load_appendix()
    assert len(fx.gate_params) == 4
    for v in fx.gate_params.values():
        assert v.shape == (3, 6, 3)
        assert np.all((v >= 0) & (v < 2 * np.pi))


def test_short_exponent_notation():
    assert parse_real("3.3965152(-5)") == 3.3965152e-5
    assert parse_real("6.8465449(-2)") == 6.8465449e-2
    assert parse_real(" 1.5 ") == 1.5
    fx = load_appendix()
    assert fx.gate_params[fx.points[0]][0, 2, 0] == 3.3965152e-5


def test_complex_parsing_accepts_j_suffix():
    # one N_res entry is published with a 'j' instead of an 'i'
    assert parse_complex("1.45656633 + 1.0973103j") == parse_complex("1.45656633 + 1.0973103i")
    assert parse_complex("-1.44743132 - 1.10790096i") == -1.44743132 - 1.10790096j


def test_matrices_transpose_symmetric():
    fx = load_appendix()
    assert transpose_asymmetry(fx.h_res) <= 1e-6
    assert transpose_asymmetry(fx.n_res) <= 1e-6


def test_checksum_detects_corruption(monkeypatch):
    monkeypatch.setitem(fixtures.CHECKSUMS, "appendix.json", "0" * 64)
    with pytest.raises(FixtureCorruptionError):
        load_appendix()


def test_loaded_values_identical_across_loads():
    a, b = load_appendix(), load_appendix()
    assert a.h_res.tobytes() == b.h_res.tobytes()
    assert a.n_res.tobytes() == b.n_res.tobytes()
    for p in a.points:
        assert a.gate_params[p].tobytes() == b.gate_params[p].tobytes()


def test_fixture_states_bit_deterministic():
    fx = load_appendix()
    for p in fx.points:
        s1 = fixture_state(fx.gate_params[p])
        s2 = fixture_state(fx.gate_params[p].copy())
        assert hashlib.sha256(s1.tobytes()).digest() == hashlib.sha256(s2.tobytes()).digest()
        assert abs(np.linalg.norm(s1) - 1) <= 1e-10


def test_yng_depths():
    assert yng_depths(Decimal("-9.93"), Decimal("-7.66")) == (Decimal("-8.795"), Decimal("-1.135"))
    assert yng_depths(Decimal("-227.73"), Decimal("-82.55")) == (Decimal("-155.140"), Decimal("-72.590"))
    assert yng_depths(2.5, 2.5) == (2.5, 0.0)


def test_yng_table_self_consistent():
    for beta, vE, vO, vD, vEX in yng_rows_decimal():
        assert yng_depths(vE, vO) == (vD, vEX)
    t = load_tables()
    for row in t.yng:
        d, ex = yng_depths(row[1], row[2])
        assert d == pytest.approx(row[3], abs=1e-12) and ex == pytest.approx(row[4], abs=1e-12)


def test_tables_shape_and_metadata():
    t = load_tables()
    assert t.yng.shape == (3, 5) and t.lambda_lambda.shape == (3, 3)
    assert t.k_F == 0.9
    np.testing.assert_array_equal(t.lambda_lambda[:, 0], [1.342, 0.777, 0.35])
    np.testing.assert_array_equal(t.lambda_lambda[:, 1], [-21.34, -187.0, 10850])


def test_reference_values():
    ref = reference_values()
    assert ref["resonance_4plus_MeV"] == 4.08 - 0.051j
    assert ref["qnn_converged_MeV"] == -55.89
    assert ref["b_N_fm"] == 1.36
    assert ref["binding_5LHe_MeV"] == 3.10
