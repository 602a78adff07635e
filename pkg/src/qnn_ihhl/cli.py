"""Command-line driver: ``qnn-ihhl <command> [options]``.

Every command writes its artifacts plus a ``manifest.json`` (command, config,
seed, timestamp, SHA-256 of each artifact) into ``--out``.  Complex numbers
travel as ``[re, im]`` pairs; angles are given in degrees.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import csm, ec, fixtures, hhl, ihhl, pauli, vqe
from .circuit import AnsatzLayout, build_ansatz, run_circuit

logger = logging.getLogger("qnn_ihhl")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------- wire format


def decode_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return fixtures.parse_complex(x)
    return complex(float(x))


def decode_matrix(rows) -> np.ndarray:
    m = np.array([[decode_complex(x) for x in row] for row in rows])
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def decode_vector(items) -> np.ndarray:
    return np.array([decode_complex(x) for x in items])


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_array(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return encode_complex(a)
    return [encode_array(x) for x in a]


def _json_default(o):
    if isinstance(o, np.generic):
        o = o.item()
    if isinstance(o, complex):
        return encode_complex(o)
    if isinstance(o, np.ndarray):
        return encode_array(o) if np.iscomplexobj(o) else o.tolist()
    if isinstance(o, (bool, int, float)):
        return o
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc})") from exc


def load_problem(cfg: dict) -> ihhl.GeneralizedEigenProblem:
    """``{"H": ..., "N": ...}`` inline, or ``{"problem": "file.json"}``."""
    if "problem" in cfg:
        cfg = load_json(cfg["problem"])
    if "H" not in cfg:
        raise ValueError("problem needs an 'H' matrix")
    N = decode_matrix(cfg["N"]) if cfg.get("N") is not None else None
    return ihhl.GeneralizedEigenProblem(decode_matrix(cfg["H"]), N, cfg.get("label", ""))


# ---------------------------------------------------------------- run output


class Run:
    """Collects artifacts for one command and writes the manifest."""

    def __init__(self, command: str, args):
        self.command = command
        self.config = getattr(args, "config", None)
        self.out = Path(args.out)
        self.seed = args.seed
        self.format = args.format
        self.artifacts: dict[str, str] = {}
        self.summary: dict = {}
        self.out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str):
        path = self.out / name
        path.write_text(text)
        self.artifacts[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def write_json(self, name: str, obj):
        return self.write(name, dumps(obj))

    def write_table(self, stem: str, csv_text: str):
        """A CSV table, or the same rows as a JSON list under ``--format json``."""
        if self.format == "csv":
            return self.write(f"{stem}.csv", csv_text)
        lines = csv_text.strip().splitlines()
        header = lines[0].split(",")
        rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
        return self.write_json(f"{stem}.json", rows)

    def finish(self):
        manifest = {
            "command": self.command,
            "config": None if self.config is None else str(self.config),
            "out": str(self.out),
            "seed": self.seed,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "artifacts": self.artifacts,
            "summary": self.summary,
        }
        (self.out / "manifest.json").write_text(dumps(manifest))
        return manifest


def _ihhl_config(d: dict) -> ihhl.IhhlConfig:
    d = dict(d)
    if isinstance(d.get("beta"), (list, tuple)):
        d["beta"] = decode_complex(d["beta"])
    return ihhl.IhhlConfig.from_dict(d)


def _basis(d: dict | None) -> csm.GaussianBasis:
    d = d or {}
    if "widths_fm" in d:
        return csm.GaussianBasis(tuple(d["widths_fm"]), d.get("l", csm.BARRIER_L))
    return csm.GaussianBasis.geometric(d.get("b1_fm", 0.5), d.get("ratio", 1.6), d.get("n", 12), d.get("l", csm.BARRIER_L))


def _system(d: dict | None) -> csm.TwoBodySystem:
    d = d or {"barrier": {}}
    if "barrier" in d:
        b = d["barrier"]
        return csm.barrier_system(b.get("coupling", 1.0), b.get("barrier_scale", 1.0))
    return csm.TwoBodySystem.from_dict(d)


# ---------------------------------------------------------------- commands


def cmd_decompose(args, run: Run):
    cfg = load_json(args.config)
    rows = cfg if isinstance(cfg, list) else cfg.get("matrix", cfg.get("H"))
    if rows is None:
        raise ValueError("expected a matrix (list of rows) or an object with a 'matrix' key")
    m = decode_matrix(rows)
    padded = pauli.pad_to_power_of_two(m)
    terms = pauli.pauli_decompose(padded, drop=args.drop)
    err = float(np.abs(pauli.pauli_reconstruct(terms) - padded).max()) if len(terms) else float(np.abs(padded).max())
    run.write("pauli.json", terms.to_json(indent=1) + "\n")
    run.summary.update(
        n_qubits=int(padded.shape[0]).bit_length() - 1,
        n_terms=len(terms),
        strings_scanned=int(padded.shape[0] ** 2),
        drop_threshold=args.drop,
        reconstruction_max_error=err,
        padded=padded.shape != m.shape,
    )


def cmd_qnn_train(args, run: Run):
    cfg = load_json(args.config)
    prob = load_problem(cfg)
    n = prob.dim
    if n & (n - 1):
        raise ValueError(f"QNN training needs a power-of-two dimension, got {n}")
    layout = AnsatzLayout(n.bit_length() - 1, cfg.get("n_layers", 4))
    tcfg = vqe.TrainingConfig.from_dict({"seed": args.seed, **cfg.get("training", {})})
    N = None if np.allclose(prob.N, np.eye(n)) else prob.N
    res = vqe.train(prob.H, N, layout, tcfg)
    oracle = float(np.min(csm.dense_spectrum(prob).real))
    run.write_json("energy.json", {"energy_MeV": res.energy, "status": res.status})
    run.write_json("params.json", {"layout": {"n_qubits": layout.n_qubits, "n_layers": layout.n_layers}, "params_rad": res.params.tolist()})
    run.write_json("state.json", encode_array(res.state))
    run.write_table("trace", res.trace.to_csv())
    run.summary.update(
        energy_MeV=res.energy,
        oracle_MeV=oracle,
        abs_error_MeV=abs(res.energy - oracle),
        converged=res.converged,
        iterations=len(res.trace),
    )


def cmd_qnn_state(args, run: Run):
    if args.config:
        cfg = load_json(args.config)
        layout = AnsatzLayout(cfg["layout"]["n_qubits"], cfg["layout"]["n_layers"])
        sets = {"custom": np.asarray(cfg["params_rad"], dtype=float).reshape(-1)}
    else:
        layout = fixtures.APPENDIX_LAYOUT
        fx = fixtures.load_appendix()
        sets = {json.dumps(p.as_dict()): v.reshape(-1) for p, v in fx.gate_params.items()}
    circ = build_ansatz(layout)
    out = []
    for key, p in sets.items():
        s = run_circuit(circ, p)
        norm = float(np.vdot(s, s).real)
        out.append({"point": json.loads(key) if key != "custom" else None, "norm": norm, "amplitudes": encode_array(s)})
        run.summary.setdefault("norms", []).append(norm)
    run.write_json("states.json", out)


def _oracle_match(problem, energy):
    w, v = ihhl.dense_eigenpairs(problem)
    k = int(np.argmin(np.abs(w - energy)))
    return complex(w[k]), v[:, k]


def ratio_spread(x, ref) -> float:
    """Relative spread of the componentwise ratios ``x / ref``."""
    r = np.asarray(x) / np.asarray(ref)
    mean = r.mean()
    return float(np.abs(r - mean).max() / abs(mean))


def _ihhl_run(problem, phi0, E0, icfg, run: Run):
    res = ihhl.ihhl_iterate(problem, phi0, E0, icfg)
    oracle_E, oracle_v = _oracle_match(problem, res.energy)
    run.write_table("trace", res.trace.to_csv())
    run.write_json(
        "eigenpair.json",
        {
            "energy_MeV": encode_complex(res.energy),
            "vector": encode_array(res.vector),
            "converged": res.converged,
            "iterations": len(res.trace),
            "beta_used": encode_complex(res.trace.beta_used),
        },
    )
    run.summary.update(
        energy_MeV=encode_complex(res.energy),
        oracle_MeV=encode_complex(oracle_E),
        abs_error_MeV=abs(res.energy - oracle_E),
        iterations=len(res.trace),
        converged=res.converged,
        eigenvector_ratio_spread=ratio_spread(res.vector, oracle_v),
    )
    if not res.converged:
        raise NumericalFailure(f"IHHL did not converge in {len(res.trace)} iterations")
    return res


def cmd_ihhl(args, run: Run):
    cfg = load_json(args.config)
    prob = load_problem(cfg)
    icfg = _ihhl_config(cfg.get("ihhl", {}))
    phi0 = decode_vector(cfg["phi0"]) if "phi0" in cfg else np.arange(1, prob.dim + 1, dtype=complex)
    E0 = decode_complex(cfg["E0"]) if cfg.get("E0") is not None else None
    _ihhl_run(prob, phi0, E0, icfg, run)


def cmd_reproduce_appendix(args, run: Run):
    fx = fixtures.load_appendix()
    backend = hhl.HhlBackendConfig(backend=args.backend, clock_qubits=args.clock_qubits)
    icfg = ihhl.IhhlConfig(beta=fx.beta, hhl=backend)
    res = _ihhl_run(fx.problem, fx.phi0, None, icfg, run)
    ref = fixtures.reference_values()["resonance_4plus_MeV"]
    run.summary.update(
        gamma_deg=fx.gamma_snap_deg,
        published_resonance_MeV=encode_complex(ref),
        published_check={
            "re_within_1MeV": bool(abs(res.energy.real - ref.real) <= 1.0),
            "im_in_[-1,0]": bool(-1.0 <= res.energy.imag <= 0.0),
            "note": "informational; the 4-vector EC space is a truncation",
        },
        h_res_transpose_asymmetry=fixtures.transpose_asymmetry(fx.h_res),
        n_res_transpose_asymmetry=fixtures.transpose_asymmetry(fx.n_res),
    )


def cmd_csm_sweep(args, run: Run):
    cfg = load_json(args.config) if args.config else {}
    angles = cfg.get("angles_deg", csm.default_angles_deg().tolist())
    if len(angles) == 0:
        raise ValueError("the angle list is empty")
    system, basis = _system(cfg.get("system")), _basis(cfg.get("basis"))
    sweep = csm.sweep_angles(system, basis, np.radians(angles))
    guess = cfg.get("guess_MeV")
    ids = None
    if guess is not None:
        tid = sweep.nearest(decode_complex(guess))
        ids = [tid] if cfg.get("only_guess", False) else None
        res = csm.find_stabilization(sweep, tid, snap_deg=cfg.get("snap_deg"))
        run.write_json("resonance.json", {"trajectory_id": tid, **res.to_dict()})
        run.summary.update(resonance=res.to_dict())
    run.write_table("sweep", sweep.to_csv(ids))
    run.summary.update(n_angles=len(angles), n_trajectories=sweep.n_trajectories, ambiguous=sorted(sweep.flagged))


def cmd_ec_run(args, run: Run):
    cfg = load_json(args.config) if args.config else {}
    basis = _basis(cfg.get("basis"))
    points = [ec.EcParameterPoint(p) for p in cfg.get("training_points", ec.BARRIER_TRAINING)]
    tcfg = vqe.TrainingConfig.from_dict({"seed": args.seed, "relaxed": True, **cfg.get("training", {})})
    train = ec.train_vectors(ec.barrier_family(basis), points, cfg.get("source", "dense"), training_config=tcfg)
    target = ec.EcParameterPoint(cfg.get("target", {"coupling": 1.0, "barrier_scale": 1.0}))
    icfg = _ihhl_config(cfg.get("ihhl", {}))
    E0 = decode_complex(cfg.get("E0_MeV", 0.0))
    run.write_json("training.json", train.to_dict())

    gammas = cfg.get("gammas_deg")
    if gammas:
        fam = lambda g: ec.project_ec(train, ec.barrier_family(basis, g)(target)).problem
        res = ec.ec_resonance(fam, np.radians(gammas), icfg, E0=E0)
        run.write_json("resonance.json", res.to_dict())
        run.summary.update(resonance=res.to_dict())
        return
    gamma = np.radians(cfg.get("gamma_deg", 4.0))
    full = ec.barrier_family(basis, gamma)(target)
    proj = ec.project_ec(train, full)
    small = proj.problem
    phi0 = np.arange(1, small.dim + 1, dtype=complex)
    res = ihhl.ihhl_iterate(small, phi0, E0, icfg)
    dense = ec.dense_ec_spectrum(small)
    sub = complex(dense[np.argmin(np.abs(dense - res.energy))])
    full_spec = csm.dense_spectrum(full)
    nearest_full = complex(full_spec[np.argmin(np.abs(full_spec - res.energy))])
    out = {
        "gamma_deg": float(np.degrees(gamma)),
        "energy_MeV": encode_complex(res.energy),
        "subspace_oracle_MeV": encode_complex(sub),
        "subspace_error_MeV": abs(res.energy - sub),
        "nearest_full_space_MeV": encode_complex(nearest_full),
        "truncation_gap_MeV": abs(res.energy - nearest_full),
        "kept": proj.kept,
        "trimmed": proj.trimmed,
        "overlap_condition": proj.condition,
        "iterations": len(res.trace),
        "converged": res.converged,
    }
    run.write_json("resonance.json", out)
    run.write_table("trace", res.trace.to_csv())
    run.summary.update(out)
    if not res.converged:
        raise NumericalFailure("IHHL did not converge on the EC problem")


COMMANDS = {
    "decompose": cmd_decompose,
    "qnn-train": cmd_qnn_train,
    "qnn-state": cmd_qnn_state,
    "ihhl": cmd_ihhl,
    "csm-sweep": cmd_csm_sweep,
    "ec-run": cmd_ec_run,
    "reproduce-appendix": cmd_reproduce_appendix,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qnn-ihhl", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="qnn_ihhl_out", help="output directory")
    ap.add_argument("--format", choices=("json", "csv"), default="csv", help="format for tabular artifacts")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Pauli decomposition of a matrix file")
    p.add_argument("config", help="JSON matrix (rows of numbers or [re, im] pairs)")
    p.add_argument("--drop", type=float, default=pauli.DROP_THRESHOLD)
    p = sub.add_parser("qnn-train", help="train the QNN ansatz on an (H, N) problem")
    p.add_argument("config")
    p = sub.add_parser("qnn-state", help="states from gate parameters (default: the shipped fixtures)")
    p.add_argument("config", nargs="?")
    p = sub.add_parser("ihhl", help="IHHL eigenpair of an (H, N) problem")
    p.add_argument("config")
    p = sub.add_parser("csm-sweep", help="complex-scaling angle sweep of a two-body system")
    p.add_argument("config", nargs="?")
    p = sub.add_parser("ec-run", help="eigenvector continuation + IHHL on the barrier benchmark")
    p.add_argument("config", nargs="?")
    p = sub.add_parser("reproduce-appendix", help="IHHL on the shipped 4x4 EC matrices")
    p.add_argument("--backend", choices=("ideal", "qpe"), default="ideal")
    p.add_argument("--clock-qubits", type=int, default=10, help="QPE clock register size (qpe backend)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    run = Run(args.command, args)
    try:
        COMMANDS[args.command](args, run)
    except (ValueError, KeyError, TypeError, FileNotFoundError) as exc:
        # LinAlgError subclasses are numerical, not input, problems
        numeric = isinstance(exc, np.linalg.LinAlgError)
        run.summary["failure"] = f"{exc.__class__.__name__}: {exc}"
        run.finish()
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if numeric else EXIT_INVALID
    except (np.linalg.LinAlgError, NumericalFailure, csm.NoResonanceError, ZeroDivisionError) as exc:
        run.summary["failure"] = str(exc)
        run.finish()
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    run.finish()
    print(dumps(run.summary), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
