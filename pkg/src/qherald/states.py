"""Two-qubit density matrices and their Bloch-coordinate representation.

Basis ordering is |ee>, |eg>, |ge>, |gg> with sigma_z|e> = +|e>.  The 15
nontrivial Bloch coordinates <sigma_a^1 sigma_b^2> are indexed by the pair
labels in :data:`BLOCH_LABELS`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_SM = np.array([[0, 0], [1, 0]], dtype=complex)

PAULI = {"i": _I2, "x": _SX, "y": _SY, "z": _SZ}

BLOCH_LABELS = (
    "xi", "yi", "zi",
    "ix", "iy", "iz",
    "xx", "xy", "xz",
    "yx", "yy", "yz",
    "zx", "zy", "zz",
)

# kron(P_a, P_b) for each label, stacked (15, 4, 4)
BLOCH_OPS = np.stack(
    [np.kron(PAULI[a], PAULI[b]) for a, b in BLOCH_LABELS]
)

SIGMA_Z1 = np.kron(_SZ, _I2)
SIGMA_Z2 = np.kron(_I2, _SZ)
SIGMA_M1 = np.kron(_SM, _I2)
SIGMA_M2 = np.kron(_I2, _SM)

# diagonals of sigma_z^1, sigma_z^2 in the computational basis
Z1_DIAG = np.array([1.0, 1.0, -1.0, -1.0])
Z2_DIAG = np.array([1.0, -1.0, 1.0, -1.0])

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-8


@dataclass
class TwoQubitState:
    """A validated 4x4 density matrix."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("rho must be 4x4")
        scale = max(1.0, np.abs(rho).max())
        if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
            raise ValueError("rho does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < EIG_FLOOR:
            raise ValueError("rho has a negative eigenvalue beyond tolerance")
        self.rho = rho

    @classmethod
    def plus_plus(cls) -> "TwoQubitState":
        """|++><++| with sigma_x|+> = |+>."""
        v = 0.5 * np.ones(4, dtype=complex)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_bloch(cls, coords) -> "TwoQubitState":
        return cls(rho_from_bloch(np.asarray(coords, dtype=float)))

    def expect(self, label: str) -> float:
        """<sigma_a^1 sigma_b^2> for a two-letter label like 'zz' or 'xi'."""
        op = np.kron(PAULI[label[0]], PAULI[label[1]])
        return float(np.einsum("ab,ba->", op, self.rho).real)

    def bloch_vector(self) -> np.ndarray:
        return bloch_vector(self.rho)

    def purity(self) -> float:
        return float(np.einsum("ab,ba->", self.rho, self.rho).real)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """All 15 coordinates of one density matrix, ordered as BLOCH_LABELS."""
    return np.einsum("kab,ba->k", BLOCH_OPS, rho).real


def bloch_series(rhos: np.ndarray) -> np.ndarray:
    """Coordinates of a stack of density matrices, shape (n, 15)."""
    return np.einsum("kab,tba->tk", BLOCH_OPS, rhos).real


def rho_from_bloch(coords: np.ndarray) -> np.ndarray:
    """Assemble rho = (1/4)(I + sum_k c_k P_k); broadcasts over leading axes."""
    coords = np.asarray(coords)
    rho = np.tensordot(coords, BLOCH_OPS, axes=([-1], [0]))
    return 0.25 * (rho + np.eye(4))


def purity_series(rhos: np.ndarray) -> np.ndarray:
    return np.einsum("tab,tba->t", rhos, rhos).real


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) tr|rho - sigma|."""
    diff = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.linalg.svd(diff, compute_uv=False).sum())
