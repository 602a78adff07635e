import hashlib
import json

import numpy as np
import pytest

from qnn_ihhl.cli import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK, main
from qnn_ihhl.fixtures import load_appendix


def run(tmp_path, *argv, out="out"):
    code = main(["--out", str(tmp_path / out), *argv])
    return code, tmp_path / out


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def check_artifacts(out):
    m = manifest(out)
    for name, digest in m["artifacts"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    return m


def test_reproduce_appendix(tmp_path, capsys):
    code, out = run(tmp_path, "reproduce-appendix")
    assert code == EXIT_OK
    m = check_artifacts(out)
    s = m["summary"]
    assert s["abs_error_MeV"] <= 1e-8
    assert s["iterations"] <= 20
    assert "published_check" in s
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "iter,re_E_MeV,im_E_MeV,residual"


def test_decompose_identity(tmp_path):
    (tmp_path / "m.json").write_text("[[1, 0], [0, 1]]")
    code, out = run(tmp_path, "decompose", str(tmp_path / "m.json"))
    assert code == EXIT_OK
    terms = json.loads((out / "pauli.json").read_text())
    assert terms == [{"coeff": [1.0, 0.0], "string": "I"}]


def test_decompose_padded_appendix_metric(tmp_path):
    N = load_appendix().n_res
    rows = [[[z.real, z.imag] for z in r] for r in np.pad(N, ((0, 1), (0, 1)))]
    (tmp_path / "n.json").write_text(json.dumps({"matrix": rows}))
    code, out = run(tmp_path, "decompose", str(tmp_path / "n.json"))
    s = manifest(out)["summary"]
    assert code == EXIT_OK
    assert s["padded"] and s["strings_scanned"] == 64 and s["n_qubits"] == 3
    assert s["reconstruction_max_error"] <= 1e-12


def test_malformed_json(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{nope")
    code, out = run(tmp_path, "decompose", str(tmp_path / "bad.json"))
    assert code == EXIT_INVALID
    assert "malformed JSON" in capsys.readouterr().err
    assert manifest(out)["artifacts"] == {}


def test_qnn_train_and_determinism(tmp_path):
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4))
    H = a + a.T
    cfg = {"H": H.tolist(), "n_layers": 3, "training": {"learning_rate": 0.1, "max_iterations": 2000}}
    (tmp_path / "t.json").write_text(json.dumps(cfg))
    code, out1 = run(tmp_path, "--seed", "4", "qnn-train", str(tmp_path / "t.json"), out="a")
    _, out2 = run(tmp_path, "--seed", "4", "qnn-train", str(tmp_path / "t.json"), out="b")
    assert code == EXIT_OK
    assert manifest(out1)["summary"]["abs_error_MeV"] <= 1e-3
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    for name in ("energy.json", "params.json", "state.json"):
        assert (out1 / name).exists()


def test_qnn_two_qubit_toy_json_format(tmp_path):
    (tmp_path / "t.json").write_text(json.dumps({"H": np.diag([-1.0, 0.0, 0.5, 2.0]).tolist(), "n_layers": 2}))
    code, out = run(tmp_path, "--format", "json", "qnn-train", str(tmp_path / "t.json"))
    assert code == EXIT_OK
    rows = json.loads((out / "trace.json").read_text())
    assert set(rows[0]) == {"iteration", "energy", "grad_norm", "eta"}


def test_qnn_state_fixtures(tmp_path):
    code, out = run(tmp_path, "qnn-state")
    assert code == EXIT_OK
    states = json.loads((out / "states.json").read_text())
    assert len(states) == 4
    assert all(abs(s["norm"] - 1) <= 1e-10 and len(s["amplitudes"]) == 64 for s in states)


def test_ihhl_beta_zero_rejected(tmp_path):
    (tmp_path / "p.json").write_text(json.dumps({"H": [[1, 0], [0, 2]], "ihhl": {"beta": 0}}))
    code, out = run(tmp_path, "ihhl", str(tmp_path / "p.json"))
    assert code == EXIT_INVALID
    assert not (out / "trace.csv").exists()
    assert "beta" in manifest(out)["summary"]["failure"]


def test_ihhl_qpe_trace_has_probabilities(tmp_path):
    cfg = {"H": [[1.0, 0.1], [0.1, 2.5]], "phi0": [1, 0.2], "E0": [0.8, 0], "ihhl": {"hhl": {"backend": "qpe"}}}
    (tmp_path / "p.json").write_text(json.dumps(cfg))
    code, out = run(tmp_path, "ihhl", str(tmp_path / "p.json"))
    assert code in (EXIT_OK, EXIT_NUMERIC)
    assert "post_selection_probability" in (out / "trace.csv").read_text().splitlines()[0]


def test_ihhl_complex_problem_file(tmp_path):
    fx = load_appendix()
    enc = lambda m: [[[z.real, z.imag] for z in r] for r in m]
    (tmp_path / "prob.json").write_text(json.dumps({"H": enc(fx.h_res), "N": enc(fx.n_res)}))
    (tmp_path / "run.json").write_text(json.dumps({"problem": str(tmp_path / "prob.json"), "phi0": [1, 2, 3, 4]}))
    code, out = run(tmp_path, "ihhl", str(tmp_path / "run.json"))
    assert code == EXIT_OK
    assert manifest(out)["summary"]["abs_error_MeV"] <= 1e-8


def test_non_convergence_exit_code(tmp_path):
    M = [[0, 1], [-1, 0]]  # eigenvalues +-i equidistant from the real start
    (tmp_path / "p.json").write_text(json.dumps({"H": M, "phi0": [1, 0], "E0": 0, "ihhl": {"max_iterations": 3}}))
    code, out = run(tmp_path, "ihhl", str(tmp_path / "p.json"))
    assert code == EXIT_NUMERIC
    assert "failure" in manifest(out)["summary"]


def test_csm_sweep(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"guess_MeV": [1.17, -0.025]}))
    code, out = run(tmp_path, "csm-sweep", str(tmp_path / "s.json"))
    assert code == EXIT_OK
    res = json.loads((out / "resonance.json").read_text())
    assert abs(complex(*res["energy_MeV"]) - (1.174 - 0.0249j)) < 1e-3
    assert (out / "sweep.csv").read_text().startswith("gamma_deg,trajectory_id,re_E_MeV")


def test_csm_bound_row_invariant(tmp_path):
    cfg = {
        "system": {"barrier": {"coupling": 3.0}},
        "basis": {"b1_fm": 0.2, "ratio": 1.15, "n": 50},
        "angles_deg": [0, 5, 10],
    }
    (tmp_path / "s.json").write_text(json.dumps(cfg))
    code, out = run(tmp_path, "csm-sweep", str(tmp_path / "s.json"))
    assert code == EXIT_OK
    rows = [r.split(",") for r in (out / "sweep.csv").read_text().splitlines()[1:]]
    bound = [complex(float(r[2]), float(r[3])) for r in rows if r[1] == "0"]
    assert max(abs(e - bound[0]) for e in bound) <= 1e-6


def test_csm_empty_angles(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"angles_deg": []}))
    code, _ = run(tmp_path, "csm-sweep", str(tmp_path / "s.json"))
    assert code == EXIT_INVALID


def test_ec_run(tmp_path):
    (tmp_path / "e.json").write_text(json.dumps({"gamma_deg": 4, "ihhl": {"tolerance": 1e-10}}))
    code, out = run(tmp_path, "ec-run", str(tmp_path / "e.json"))
    assert code == EXIT_OK
    res = json.loads((out / "resonance.json").read_text())
    assert res["subspace_error_MeV"] <= 1e-8
    assert res["trimmed"] == []


def test_ec_run_rank_deficient_trims(tmp_path):
    pts = [{"coupling": 2.5}, {"coupling": 2.5}, {"coupling": 3.0}]
    (tmp_path / "e.json").write_text(json.dumps({"training_points": pts}))
    with pytest.warns(RuntimeWarning):
        code, out = run(tmp_path, "ec-run", str(tmp_path / "e.json"))
    res = json.loads((out / "resonance.json").read_text())
    assert len(res["trimmed"]) == 1 and code in (EXIT_OK, EXIT_NUMERIC)
