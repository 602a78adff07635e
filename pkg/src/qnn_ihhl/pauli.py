"""Pauli strings, Pauli sums and the matrix <-> Pauli-sum conversion.

Qubit 0 is the least-significant bit of a state index.  ``PauliString.letters``
is indexed by qubit (``letters[0]`` acts on qubit 0), while the text label of a
string is written qubit-0-last, so ``"XZIY"`` puts ``Y`` on qubit 0 and ``X`` on
qubit 3.  This is the same order in which ``np.kron`` factors appear.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DROP_THRESHOLD = 1e-14
MAX_DECOMPOSE_QUBITS = 8

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# (flip bit, phase bit) of each letter: P|b> = i^{x z} (-1)^{z b} |b xor x>
_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_FROM_XZ = {v: k for k, v in _XZ.items()}


@dataclass(frozen=True)
class PauliString:
    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        if not letters:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = [c for c in letters if c not in _SINGLE]
        if bad:
            raise ValueError(f"invalid Pauli letters {bad!r}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a qubit-0-last label such as ``"XZIY"``."""
        return cls(tuple(reversed(label.strip().upper())))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(("I",) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def label(self) -> str:
        return "".join(reversed(self.letters))

    def masks(self) -> tuple[int, int]:
        """Return the (flip, phase) bit masks of the string."""
        x = z = 0
        for q, c in enumerate(self.letters):
            xb, zb = _XZ[c]
            x |= xb << q
            z |= zb << q
        return x, z

    def to_matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for c in reversed(self.letters):
            out = np.kron(out, _SINGLE[c])
        return out

    def __str__(self) -> str:
        return self.label


class PauliSum:
    """Weighted sum of Pauli strings on a common register.

    Terms sharing a string are merged and coefficients with modulus below
    ``drop`` are removed on construction.
    """

    def __init__(self, terms: Iterable[tuple[complex, PauliString]] = (), drop: float = DROP_THRESHOLD):
        merged: dict[PauliString, complex] = {}
        n = None
        for coeff, string in terms:
            if not isinstance(string, PauliString):
                string = PauliString.from_label(string)
            if n is None:
                n = string.n_qubits
            elif string.n_qubits != n:
                raise ValueError(f"inconsistent qubit counts: {n} and {string.n_qubits}")
            merged[string] = merged.get(string, 0j) + complex(coeff)
        self.drop = drop
        self.terms: tuple[tuple[complex, PauliString], ...] = tuple(
            (c, s) for s, c in merged.items() if abs(c) >= drop
        )
        self._n_qubits = n

    @property
    def n_qubits(self) -> int | None:
        return self._n_qubits

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def as_dict(self) -> dict[str, complex]:
        return {s.label: c for c, s in self.terms}

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(list(self.terms) + list(other.terms), drop=self.drop)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1) * other

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum([(scalar * c, s) for c, s in self.terms], drop=self.drop)

    __rmul__ = __mul__

    def dagger(self) -> "PauliSum":
        # Pauli strings are Hermitian, so only coefficients conjugate
        return PauliSum([(np.conj(c), s) for c, s in self.terms], drop=self.drop)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= atol for c, _ in self.terms)

    def to_matrix(self) -> np.ndarray:
        return pauli_reconstruct(self)

    def to_records(self) -> list[dict]:
        return [{"coeff": [c.real, c.imag], "string": s.label} for c, s in self.terms]

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_records(), **kwargs)

    @classmethod
    def from_records(cls, records: Sequence[dict], drop: float = DROP_THRESHOLD) -> "PauliSum":
        return cls(
            [(complex(r["coeff"][0], r["coeff"][1]), PauliString.from_label(r["string"])) for r in records],
            drop=drop,
        )

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        return cls.from_records(json.loads(text))

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*{s.label}" for c, s in self.terms[:8])
        more = "" if len(self.terms) <= 8 else f" + ... ({len(self.terms)} terms)"
        return f"PauliSum({body}{more})"


def _single_qubit(letter: str, j: int, n: int) -> PauliString:
    letters = ["I"] * n
    letters[j] = letter
    return PauliString(tuple(letters))


def jw_creation(j: int, n: int) -> PauliSum:
    """Jordan-Wigner image of the fermionic creation operator on mode ``j``.

    Returns ``1/2 (X_j - i Y_j) Z_{j-1} ... Z_0`` on ``n`` qubits.
    """
    if not 0 <= j < n:
        raise IndexError(f"mode {j} out of range for {n} qubits")
    chain = ["I"] * n
    for q in range(j):
        chain[q] = "Z"
    x = list(chain)
    y = list(chain)
    x[j] = "X"
    y[j] = "Y"
    return PauliSum([(0.5, PauliString(tuple(x))), (-0.5j, PauliString(tuple(y)))])


def jw_annihilation(j: int, n: int) -> PauliSum:
    return jw_creation(j, n).dagger()


def _popcount_parity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    parity = np.zeros_like(a)
    while np.any(a):
        parity ^= a & 1
        a >>= 1
    return parity


def _sign_table(dim: int) -> np.ndarray:
    """``signs[z, b] = (-1)^{|z & b|}``."""
    k = np.arange(dim)
    return 1.0 - 2.0 * _popcount_parity(k[:, None] & k[None, :])


def _n_qubits_of(dim: int) -> int:
    m = int(dim).bit_length() - 1
    if dim < 1 or 1 << m != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return m


def pauli_decompose(matrix, drop: float = DROP_THRESHOLD) -> PauliSum:
    """Expand a ``2^m x 2^m`` matrix in the Pauli basis.

    Every one of the ``4^m`` strings is visited; the coefficient of string P is
    ``Tr(P M) / 2^m``, evaluated from the single nonzero entry per column of P.
    """
    M = np.asarray(matrix, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    m = _n_qubits_of(M.shape[0])
    if m == 0:
        raise ValueError("a 1x1 matrix has no qubit encoding")
    if m > MAX_DECOMPOSE_QUBITS:
        raise ValueError(f"decomposition limited to {MAX_DECOMPOSE_QUBITS} qubits")
    dim = 1 << m
    k = np.arange(dim)
    signs = _sign_table(dim)
    terms = []
    for x in range(dim):
        # column b of P has its entry in row b^x, so Tr(PM) pairs it with M[b, b^x]
        gathered = M[k, k ^ x]
        sums = signs @ gathered
        for z in range(dim):
            coeff = (1j ** bin(x & z).count("1")) * sums[z] / dim
            if abs(coeff) < drop:
                continue
            letters = tuple(_FROM_XZ[((x >> q) & 1, (z >> q) & 1)] for q in range(m))
            terms.append((coeff, PauliString(letters)))
    out = PauliSum(terms, drop=drop)
    out._n_qubits = m
    return out


def pauli_reconstruct(s: PauliSum) -> np.ndarray:
    """Dense matrix ``sum_k c_k P_k``; each string is a signed permutation."""
    if len(s) == 0:
        if s.n_qubits is None:
            raise ValueError("cannot reconstruct an empty sum of unknown size")
        return np.zeros((1 << s.n_qubits,) * 2, dtype=complex)
    n = s.terms[0][1].n_qubits
    dim = 1 << n
    # coefficients on the (flip mask x, phase mask z) grid, phase i^{|x & z|} folded in
    grid = np.zeros((dim, dim), dtype=complex)
    for coeff, string in s.terms:
        if string.n_qubits != n:
            raise ValueError(f"inconsistent qubit counts: {n} and {string.n_qubits}")
        x = z = 0
        for q, letter in enumerate(string.letters):
            fx, fz = _XZ[letter]
            x |= fx << q
            z |= fz << q
        grid[x, z] += coeff * 1j ** bin(x & z).count("1")
    # sum_z grid[x, z] (-1)^{|z & b|} is the entry that lands at (b ^ x, b)
    cols = grid @ _sign_table(dim)
    k = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        out[k ^ x, k] = cols[x]
    return out


def all_pauli_strings(m: int):
    """All ``4^m`` strings in label order (``I..I`` first)."""
    for label in itertools.product("IXYZ", repeat=m):
        yield PauliString.from_label("".join(label))


def pad_to_power_of_two(matrix) -> np.ndarray:
    """Zero-pad a square matrix up to the next power-of-two dimension."""
    M = np.asarray(matrix, dtype=complex)
    n = M.shape[0]
    dim = 1 << max(1, (n - 1).bit_length())
    out = np.zeros((dim, dim), dtype=complex)
    out[:n, :n] = M
    return out
