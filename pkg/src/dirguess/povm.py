"""The five-outcome abstention POVM, score operators and exact game values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import hilbert as hb
from .errors import AlwaysAbstainsError, CompletenessError, ScoreError, SupportError
from .linalg import fro, psd_power

ABSTAIN = "abstain"
DIRECTION_LABELS = ("n1", "n2", "n3", "n4")
LABELS = DIRECTION_LABELS + (ABSTAIN,)

COMPLETENESS_TOL = 1e-9
PSD_TOL = 1e-10


class ScoreKind(str, Enum):
    FIDELITY = "fidelity"
    LIKELIHOOD = "likelihood"

    @classmethod
    def parse(cls, text: str | ScoreKind) -> ScoreKind:
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"f": "fidelity", "delta": "likelihood", "ml": "likelihood",
                   "maxlikelihood": "likelihood", "max-likelihood": "likelihood"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class AbstentionParams:
    lambda_bar_0: float = 1.0
    lambda_bar_1: float = 1.0

    def __post_init__(self):
        for name in ("lambda_bar_0", "lambda_bar_1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def abstain_operator(self) -> np.ndarray:
        return (1 - self.lambda_bar_0) * hb.P_SINGLET + (1 - self.lambda_bar_1) * hb.P_TRIPLET

    def accept_operator(self) -> np.ndarray:
        """The complement of the abstention element."""
        return self.lambda_bar_0 * hb.P_SINGLET + self.lambda_bar_1 * hb.P_TRIPLET


EJM_PARAMS = AbstentionParams(1.0, 1.0)


@dataclass
class Povm:
    elements: list[np.ndarray]
    labels: list[str] = field(default_factory=lambda: list(LABELS))

    def __post_init__(self):
        self.elements = [np.asarray(e, dtype=complex) for e in self.elements]
        if len(self.elements) != len(self.labels):
            raise ValueError("one label per element is required")

    def __getitem__(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def completeness_error(self) -> float:
        return fro(sum(self.elements) - np.eye(self.dim))

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh((e + e.conj().T) / 2)[0]) for e in self.elements)

    def check(self, tol: float = COMPLETENESS_TOL) -> None:
        err = self.completeness_error()
        if err > tol:
            raise CompletenessError(f"elements sum to identity only within {err:.3e}")
        if self.min_eigenvalue() < -PSD_TOL:
            raise CompletenessError("an element is not positive semidefinite")

    def probabilities(self, state) -> np.ndarray:
        """Born probabilities for a pure state (vector) or density matrix."""
        s = np.asarray(state, dtype=complex)
        if s.ndim == 1:
            return np.array([np.vdot(s, e @ s).real for e in self.elements])
        return np.array([np.trace(e @ s).real for e in self.elements])

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "elements": [
                [[[float(z.real), float(z.imag)] for z in row] for row in e] for e in self.elements
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Povm:
        elements = [
            np.array([[complex(re, im) for re, im in row] for row in e]) for e in data["elements"]
        ]
        return cls(elements, list(data["labels"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> Povm:
        return cls.from_dict(json.loads(Path(path).read_text()))


def direction_vectors(p: AbstentionParams) -> list[np.ndarray]:
    """The sub-normalized vectors Phi_i whose projectors are the direction elements."""
    a0 = np.sqrt(p.lambda_bar_0) / 2
    a1 = np.sqrt(3 * p.lambda_bar_1) / 2
    out = []
    for n in hb.TETRAHEDRON:
        u = hb.two_qubit_rotation(n)
        out.append(a0 * (u @ hb.PSI_MINUS) + a1 * (u @ hb.PSI_PLUS))
    return out


def build_abstention_povm(p: AbstentionParams) -> Povm:
    elements = [np.outer(v, v.conj()) for v in direction_vectors(p)]
    elements.append(p.abstain_operator())
    povm = Povm(elements)
    povm.check()
    return povm


def ejm() -> Povm:
    return build_abstention_povm(EJM_PARAMS)


def score_value(kind: ScoreKind, n: hb.Direction, n_hat: hb.Direction) -> float:
    kind = ScoreKind.parse(kind)
    if kind is ScoreKind.FIDELITY:
        return 0.5 * (1.0 + n.dot(n_hat))
    i, j = tetra_index(n), tetra_index(n_hat)
    return 4.0 if i == j else 0.0


def tetra_index(n: hb.Direction, tol: float = 1e-9) -> int:
    """Index 0..3 of a tetrahedral direction."""
    for i, t in enumerate(hb.TETRAHEDRON):
        if np.max(np.abs(t.vec - n.vec)) < tol:
            return i
    raise ScoreError(f"{n} is not one of the four tetrahedral directions")


def input_ensemble(kind: ScoreKind) -> tuple[hb.Direction, ...]:
    """Discrete input directions: tetrahedron for the likelihood score, the six axes for fidelity."""
    return hb.TETRAHEDRON if ScoreKind.parse(kind) is ScoreKind.LIKELIHOOD else hb.AXES


def score_matrix(kind: ScoreKind) -> np.ndarray:
    """S[k, i] = s(input k, guess n_i) over the kind's input ensemble."""
    kind = ScoreKind.parse(kind)
    return np.array([[score_value(kind, n, t) for t in hb.TETRAHEDRON] for n in input_ensemble(kind)])


def input_states(kind: ScoreKind, spec: hb.InputStateSpec) -> list[np.ndarray]:
    psi = hb.build_input_state(spec)
    return [hb.rotate_two_qubit(n, psi) for n in input_ensemble(kind)]


def outcome_table(povm: Povm, kind: ScoreKind, spec: hb.InputStateSpec) -> np.ndarray:
    """Born probabilities P[k, l] for input k of the ensemble and outcome l."""
    return np.array([povm.probabilities(s) for s in input_states(kind, spec)])


def score_operator(kind: ScoreKind, spec: hb.InputStateSpec) -> np.ndarray:
    kind = ScoreKind.parse(kind)
    psi = hb.build_input_state(spec)
    if kind is ScoreKind.LIKELIHOOD:
        return np.outer(psi, psi.conj())
    c0, c1 = spec.c0, spec.c1
    f = (abs(c0) ** 2 / 2) * hb.P_SINGLET + (abs(c1) ** 2 / 6) * hb.P_TRIPLET
    cross = c0 * np.conj(c1) * np.conj(spec.beta) * np.outer(hb.PSI_MINUS, hb.PSI_PLUS.conj())
    cross = cross + (abs(c1) ** 2 * spec.alpha * np.conj(spec.gamma) / 2) * (
        np.outer(hb.PHI_PLUS, hb.PHI_MINUS.conj()) + np.outer(hb.PHI_MINUS, hb.PHI_PLUS.conj())
    )
    cross = cross / 6
    return f + cross + cross.conj().T


def discrete_fidelity_operator(spec: hb.InputStateSpec) -> np.ndarray:
    """(1/6) sum over the six axes of f(n, +z) U_n Psi_z U_n^dagger.

    Equals the full rotation average only for the psi+ seed; phi components
    are not invariant under the residual z rotation.
    """
    psi = hb.build_input_state(spec)
    rho = np.outer(psi, psi.conj())
    out = np.zeros((4, 4), dtype=complex)
    for n in hb.AXES:
        u = hb.two_qubit_rotation(n)
        out += 0.5 * (1 + n.z) * (u @ rho @ u.conj().T) / 6
    return out


def rescale_povm(p: Povm, abst: AbstentionParams, tol: float = 1e-9) -> Povm:
    """Conjugate direction elements by the pseudo-inverse square root of the accept operator."""
    acc = abst.accept_operator()
    root_inv = psd_power(acc, -0.5)
    support = psd_power(acc, 0)
    outside = np.eye(4) - support
    out = []
    for label, e in zip(p.labels, p.elements):
        if label == ABSTAIN:
            continue
        leak = fro(outside @ e) if np.any(outside) else 0.0
        if leak > tol:
            raise SupportError(f"element {label} leaks {leak:.3e} outside the accepted support")
        out.append(root_inv @ e @ root_inv)
    labels = [lbl for lbl in p.labels if lbl != ABSTAIN]
    # the rescaled set is complete on the support; the complement keeps the identity whole
    out.append(outside)
    labels.append(ABSTAIN)
    return Povm(out, labels)


def exact_game_value(p: Povm, spec: hb.InputStateSpec, kind: ScoreKind) -> tuple[float, float]:
    """Exact (s_av, Q_bar) over the kind's discrete input ensemble."""
    kind = ScoreKind.parse(kind)
    probs = outcome_table(p, kind, spec)
    idx = [p.labels.index(lbl) for lbl in DIRECTION_LABELS]
    answer = probs[:, idx]
    q_bar = float(answer.sum(axis=1).mean())
    if q_bar < 1e-12:
        raise AlwaysAbstainsError("the measurement always abstains on this ensemble")
    gain = float((score_matrix(kind) * answer).sum(axis=1).mean())
    return gain / q_bar, q_bar
