"""Published data shipped with the package: EC appendix matrices, QNN gate
angles for the four EC basis states, and the YNG / Lambda-Lambda tables.

All numbers are kept as the decimal strings they were published with and
parsed at load time.  Each data file is checked against a SHA-256 digest so
an edited or truncated copy is caught immediately.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from decimal import Decimal
from importlib import resources

import numpy as np

from .circuit import AnsatzLayout, build_ansatz, run_circuit, wrap_parameters
from .ec import EcParameterPoint
from .ihhl import GeneralizedEigenProblem

CHECKSUMS = {
    "appendix.json": "46f7cc8629b57f47a94fe397d210ac908dea7d8e06ecbc75426fb485fa167522",
    "tables.json": "6e70e52383818a2678d3ed55f580105f5d78c584b32b8be7b827888aab0fcc91",
}

# "3.3965152(-5)" is the published shorthand for 3.3965152e-5
_SHORT_EXP = re.compile(r"^([+-]?\d+(?:\.\d*)?)\(([+-]?\d+)\)$")


class FixtureCorruptionError(RuntimeError):
    pass


def _read(name: str) -> dict:
    raw = resources.files("qnn_ihhl").joinpath("data", name).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != CHECKSUMS[name]:
        raise FixtureCorruptionError(f"{name}: checksum {digest[:12]}... does not match the shipped data")
    return json.loads(raw)


def parse_real(text: str) -> float:
    """Parse a published real number, including the ``a(-k)`` shorthand."""
    t = text.strip()
    m = _SHORT_EXP.match(t)
    if m:
        return float(f"{m.group(1)}e{m.group(2)}")
    return float(t)


def parse_complex(text: str) -> complex:
    """Parse ``"a + bi"`` (an ``i`` or ``j`` suffix are both accepted)."""
    t = text.replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    return complex(t)


@dataclass(frozen=True)
class InteractionTables:
    yng: np.ndarray  # (3, 5): beta fm, V0(E), V0(O), V0_D, V0_EX MeV
    k_F: float
    lambda_lambda: np.ndarray  # (3, 3): beta fm, v0, v_sigma_sigma MeV
    volkov_label: str

    def __post_init__(self):
        if self.yng.shape != (3, 5) or self.lambda_lambda.shape != (3, 3):
            raise FixtureCorruptionError("interaction tables have the wrong shape")


@dataclass(frozen=True)
class AppendixFixture:
    h_res: np.ndarray
    n_res: np.ndarray
    gate_params: dict  # EcParameterPoint -> (3, 6, 3) angles
    phi0: np.ndarray
    gamma_snap_deg: float
    beta: float

    @property
    def problem(self) -> GeneralizedEigenProblem:
        return GeneralizedEigenProblem(self.h_res, self.n_res, "appendix EC[4] 4+")

    @property
    def points(self) -> list[EcParameterPoint]:
        return list(self.gate_params)


def yng_depths(vE, vO):
    """Direct and exchange depths from the even/odd channel depths.

    Works on floats or :class:`decimal.Decimal`; with decimals the published
    table rows come out digit-for-digit (floats can be one ulp off).
    """
    return (vE + vO) / 2, (vE - vO) / 2


def yng_rows_decimal() -> list[tuple[Decimal, ...]]:
    """YNG table rows as exact decimals (beta, V0(E), V0(O), V0_D, V0_EX)."""
    return [tuple(Decimal(x) for x in row) for row in _read("tables.json")["yng"]["rows"]]


def load_tables() -> InteractionTables:
    d = _read("tables.json")
    yng = np.array([[parse_real(x) for x in row] for row in d["yng"]["rows"]])
    ll = d["lambda_lambda"]
    lam = np.array(
        [[parse_real(b), parse_real(v), parse_real(s)] for b, v, s in zip(ll["beta_fm"], ll["v0_MeV"], ll["v_sigma_sigma_MeV"])]
    )
    return InteractionTables(yng, parse_real(d["yng"]["k_F_per_fm"]), lam, d["volkov_label"])


def load_appendix() -> AppendixFixture:
    d = _read("appendix.json")
    H = np.array([[parse_complex(x) for x in row] for row in d["h_res"]])
    N = np.array([[parse_complex(x) for x in row] for row in d["n_res"]])
    gates = {}
    for block in d["gate_params"]:
        pt = EcParameterPoint({"lambda_LambdaN": block["point"]["lambda_LambdaN"], "M": block["point"]["M"]})
        gates[pt] = wrap_parameters([[[parse_real(x) for x in q] for q in layer] for layer in block["layers"]])
    return AppendixFixture(H, N, gates, np.array(d["phi0"], dtype=float), float(d["gamma_deg"]), float(d["beta"]))


def reference_values() -> dict:
    """Published numbers that cannot be recomputed here (metadata only).

    Values are floats in MeV (fm for ``b_N``); the resonance is complex.
    """
    out = {}
    for key, rec in _read("tables.json")["reference_values"].items():
        v = rec["value"]
        out[key] = complex(parse_real(v[0]), parse_real(v[1])) if isinstance(v, list) else parse_real(v)
    return out


APPENDIX_LAYOUT = AnsatzLayout(6, 3)


def fixture_state(params) -> np.ndarray:
    """64-amplitude QNN state for one appendix gate-parameter tensor."""
    p = np.asarray(params, dtype=float).reshape(-1)
    return run_circuit(build_ansatz(APPENDIX_LAYOUT), p)


def transpose_asymmetry(m) -> float:
    """Largest ``|m - m^T|`` entry; the EC matrices should be symmetric."""
    m = np.asarray(m)
    return float(np.abs(m - m.T).max())
