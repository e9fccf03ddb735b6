"""Two-qubit space: Bell structure, directions, SU(2) rotations, input states.

Computational basis order is |00>, |01>, |10>, |11>. The Bell basis is ordered
(psi-, psi+, phi+, phi-) so that the singlet block H0 comes first and the
triplet block H1 is the remaining three.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError

SQ2 = np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)


class Bell(Enum):
    PSI_MINUS = 0
    PSI_PLUS = 1
    PHI_PLUS = 2
    PHI_MINUS = 3


# columns are the Bell states written in the computational basis
BELL_MATRIX = np.array(
    [
        [0, 0, 1, 1],
        [1, 1, 0, 0],
        [-1, 1, 0, 0],
        [0, 0, 1, -1],
    ],
    dtype=complex,
) / SQ2

PSI_MINUS = BELL_MATRIX[:, 0].copy()
PSI_PLUS = BELL_MATRIX[:, 1].copy()
PHI_PLUS = BELL_MATRIX[:, 2].copy()
PHI_MINUS = BELL_MATRIX[:, 3].copy()

P_SINGLET = np.outer(PSI_MINUS, PSI_MINUS.conj())
P_TRIPLET = np.eye(4, dtype=complex) - P_SINGLET


@dataclass(frozen=True)
class Direction:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = np.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(n - 1.0) > 1e-12:
            raise DimensionError(f"direction is not unit length (|n| = {n})")

    @classmethod
    def from_vector(cls, v) -> Direction:
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: Direction) -> float:
        return float(self.vec @ other.vec)


@dataclass(frozen=True)
class InputStateSpec:
    """c0 on the singlet plus c1 on a symmetric state alpha phi+ + beta psi+ + gamma phi-."""

    c0: float
    psi_sym: tuple[complex, complex, complex] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if not 0.0 <= self.c0 <= 1.0:
            raise ValueError(f"c0 must lie in [0, 1], got {self.c0}")
        if abs(np.linalg.norm(np.asarray(self.psi_sym, dtype=complex)) - 1.0) > 1e-12:
            raise ValueError("psi_sym must be normalized")

    @property
    def c1(self) -> float:
        return float(np.sqrt(max(0.0, 1.0 - self.c0**2)))

    @property
    def alpha(self) -> complex:
        return complex(self.psi_sym[0])

    @property
    def beta(self) -> complex:
        return complex(self.psi_sym[1])

    @property
    def gamma(self) -> complex:
        return complex(self.psi_sym[2])


def to_bell(state) -> np.ndarray:
    """Computational-basis amplitudes to Bell-basis amplitudes."""
    return BELL_MATRIX.conj().T @ np.asarray(state, dtype=complex)


def from_bell(coeffs) -> np.ndarray:
    return BELL_MATRIX @ np.asarray(coeffs, dtype=complex)


def su2_rotation(n: Direction) -> np.ndarray:
    """u_n = exp(-i theta/2 m.sigma) with m = z x n, taking +z to n.

    At n = -z the axis is fixed to +y.
    """
    v = n.vec
    theta = float(np.arccos(np.clip(v[2], -1.0, 1.0)))
    m = np.cross([0.0, 0.0, 1.0], v)
    mn = np.linalg.norm(m)
    if mn < 1e-12:
        if v[2] > 0:
            return I2.copy()
        m = np.array([0.0, 1.0, 0.0])
    else:
        m = m / mn
    gen = m[0] * SX + m[1] * SY + m[2] * SZ
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * gen


def two_qubit_rotation(n: Direction) -> np.ndarray:
    u = su2_rotation(n)
    return np.kron(u, u)


def rotate_two_qubit(n: Direction, state) -> np.ndarray:
    return two_qubit_rotation(n) @ np.asarray(state, dtype=complex)


def build_input_state(spec: InputStateSpec) -> np.ndarray:
    sym = spec.alpha * PHI_PLUS + spec.beta * PSI_PLUS + spec.gamma * PHI_MINUS
    return spec.c0 * PSI_MINUS + spec.c1 * sym


def _bloch_of_qubit(ket) -> Direction:
    ket = np.asarray(ket, dtype=complex)
    rho = np.outer(ket, ket.conj())
    return Direction.from_vector([np.trace(rho @ p).real for p in PAULI])


def direction_tetrahedron() -> list[Direction]:
    """Bloch vectors of |0> and (|0> + sqrt2 w^k |1>)/sqrt3, w = exp(2 pi i/3)."""
    kets = [np.array([1.0, 0.0])]
    for k in range(3):
        w = np.exp(2j * np.pi * k / 3)
        kets.append(np.array([1.0, SQ2 * w]) / np.sqrt(3.0))
    return [_bloch_of_qubit(k) for k in kets]


TETRAHEDRON = tuple(direction_tetrahedron())

AXES = tuple(
    Direction(*v)
    for v in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
)


def rotated_bell(n: Direction, which: Bell) -> np.ndarray:
    return rotate_two_qubit(n, BELL_MATRIX[:, which.value])


def local_bloch_first(state) -> np.ndarray:
    """<sigma (x) I> for a two-qubit pure state."""
    state = np.asarray(state, dtype=complex)
    return np.array([np.vdot(state, np.kron(p, I2) @ state).real for p in PAULI])
