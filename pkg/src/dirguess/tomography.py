"""Simulated detector tomography: MUB probes, multinomial counts, ML reconstruction."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hilbert import I2, SX, SY, SZ
from .linalg import psd_power, psd_power_stack
from .povm import Povm

MAX_ITER = 100_000
STEP_TOL = 1e-10
LOGLIK_EVERY = 100

PAULI = {"I": I2, "X": SX, "Y": SY, "Z": SZ}

# five maximal sets of commuting two-qubit Paulis; their joint eigenbases are
# the five mutually unbiased bases of C^4 (first one gives the computational basis)
MUB_STABILIZERS = (
    ("ZI", "IZ"),
    ("XI", "IX"),
    ("YI", "IY"),
    ("XY", "YZ"),
    ("YX", "ZY"),
)


def _pauli(word: str) -> np.ndarray:
    return np.kron(PAULI[word[0]], PAULI[word[1]])


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-9))
    return v * np.exp(-1j * np.angle(v[k]))


@dataclass
class ProbeSet:
    states: list[np.ndarray]
    basis_size: int = 4

    def projectors(self) -> np.ndarray:
        s = np.array(self.states)
        return np.einsum("ji,jk->jik", s, s.conj())

    def frame_rank(self) -> int:
        ops = self.projectors().reshape(len(self.states), -1)
        return int(np.linalg.matrix_rank(ops, tol=1e-9))

    def informationally_complete(self) -> bool:
        d = self.states[0].size
        return self.frame_rank() == d * d


def build_mub_probes() -> ProbeSet:
    states = []
    for p, q in MUB_STABILIZERS:
        # eigenvalues 2 s_p + s_q are distinct, so eigenvectors are joint eigenvectors;
        # descending order gives |00>, |01>, |10>, |11> for the first basis
        w, v = np.linalg.eigh(2 * _pauli(p) + _pauli(q))
        order = np.argsort(-w)
        states.extend(_fix_phase(v[:, k]) for k in order)
    return ProbeSet(states)


def subset(probes: ProbeSet, bases: list[int]) -> ProbeSet:
    b = probes.basis_size
    return ProbeSet([probes.states[i * b + k] for i in bases for k in range(b)], b)


@dataclass
class CountMatrix:
    counts: np.ndarray  # (probes, outcomes) integers
    shots_per_state: int
    labels: list[str]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["probe_index", "outcome_label", "count"])
            for j, row in enumerate(self.counts):
                for lbl, c in zip(self.labels, row):
                    w.writerow([j, lbl, int(c)])

    @classmethod
    def from_csv(cls, path: str | Path) -> CountMatrix:
        rows: dict[int, dict[str, int]] = {}
        labels: list[str] = []
        with open(path, newline="") as fh:
            for r in csv.DictReader(fh):
                lbl = r["outcome_label"]
                if lbl not in labels:
                    labels.append(lbl)
                rows.setdefault(int(r["probe_index"]), {})[lbl] = int(r["count"])
        counts = np.array([[rows[j].get(lbl, 0) for lbl in labels] for j in sorted(rows)], dtype=np.int64)
        shots = int(counts.sum(axis=1).max()) if counts.size else 0
        return cls(counts, shots, labels)


def probe_probabilities(povm: Povm, probes: ProbeSet) -> np.ndarray:
    return np.array([povm.probabilities(s) for s in probes.states]).clip(0.0, None)


def simulate_counts(povm: Povm, probes: ProbeSet, shots: int, seed: int) -> CountMatrix:
    p = probe_probabilities(povm, probes)
    p = p / p.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = np.array([rng.multinomial(shots, row) for row in p], dtype=np.int64)
    return CountMatrix(counts, shots, list(povm.labels))


def expected_counts(povm: Povm, probes: ProbeSet, shots: int) -> CountMatrix:
    """Noiseless counts: exact probabilities times shots, rounded."""
    p = probe_probabilities(povm, probes)
    return CountMatrix(np.rint(p * shots).astype(np.int64), shots, list(povm.labels))


@dataclass
class ReconstructionResult:
    povm: Povm
    per_element_fidelity: list[float] | None
    overall_fidelity: float | None
    iterations: int
    final_step_delta: float
    converged: bool
    loglik_history: list[float] = field(default_factory=list)
    frame_rank: int = 16
    informationally_complete: bool = True

    def loglik_monotone(self, tol: float = 1e-9) -> bool:
        h = np.array(self.loglik_history)
        return bool(np.all(np.diff(h) >= -tol * np.maximum(1.0, np.abs(h[1:]))))

    def to_dict(self) -> dict:
        return {
            "povm": self.povm.to_dict(),
            "per_element_fidelity": self.per_element_fidelity,
            "overall_fidelity": self.overall_fidelity,
            "iterations": self.iterations,
            "final_step_delta": self.final_step_delta,
            "converged": self.converged,
            "frame_rank": self.frame_rank,
            "informationally_complete": self.informationally_complete,
            "completeness_error": self.povm.completeness_error(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def log_likelihood(freq: np.ndarray, probs: np.ndarray) -> float:
    mask = freq > 0
    return float(np.sum(freq[mask] * np.log(np.clip(probs[mask], 1e-300, None))))


def reconstruct_povm(
    counts: CountMatrix,
    probes: ProbeSet,
    ideal: Povm | None = None,
    max_iter: int = MAX_ITER,
    tol: float = STEP_TOL,
) -> ReconstructionResult:
    """Iterative maximum-likelihood detector tomography.

    Each update is Pi_l <- lam^-1/2 R_l Pi_l R_l lam^-1/2 with
    R_l = sum_j f_jl / p_jl |psi_j><psi_j| and lam = sum_l R_l Pi_l R_l, which keeps
    every iterate a complete POVM.
    """
    return reconstruct_batch([counts], probes, ideal, max_iter, tol)[0]


def reconstruct_batch(
    batch: list[CountMatrix],
    probes: ProbeSet,
    ideal: Povm | None = None,
    max_iter: int = MAX_ITER,
    tol: float = STEP_TOL,
) -> list[ReconstructionResult]:
    """reconstruct_povm for several count matrices at once.

    The iteration runs on a stacked array; a data set stops updating as soon as
    it converges, so each result equals its stand-alone reconstruction.
    """
    proj = probes.projectors()
    freq = np.array([c.counts for c in batch], dtype=float)
    rows = freq.sum(axis=2, keepdims=True)
    freq = np.divide(freq, rows, out=np.zeros_like(freq), where=rows > 0)
    n_sets, _, n_out = freq.shape
    d = proj.shape[1]
    pis = np.tile(np.eye(d, dtype=complex) / n_out, (n_sets, n_out, 1, 1))
    history: list[list[float]] = [[] for _ in range(n_sets)]
    delta = np.full(n_sets, np.inf)
    iters = np.zeros(n_sets, dtype=int)
    active = np.arange(n_sets)
    for it in range(1, max_iter + 1):
        f, cur = freq[active], pis[active]
        p = np.einsum("jab,slba->sjl", proj, cur).real
        if it % LOGLIK_EVERY == 1:
            for k, s in enumerate(active):
                history[s].append(log_likelihood(f[k], p[k]))
        ratio = np.divide(f, p, out=np.zeros_like(f), where=p > 0)
        r = np.einsum("sjl,jab->slab", ratio, proj)
        rpr = r @ cur @ r
        w = psd_power_stack(rpr.sum(axis=1), -0.5)[:, None]
        new = w @ rpr @ w
        new = (new + np.conj(np.swapaxes(new, -1, -2))) / 2
        step = np.max(np.abs(new - cur), axis=(1, 2, 3))
        pis[active] = new
        delta[active] = step
        iters[active] = it
        active = active[step >= tol]
        if active.size == 0:
            break
    rank = probes.frame_rank()
    out = []
    for s, c in enumerate(batch):
        p = np.einsum("jab,lba->jl", proj, pis[s]).real
        history[s].append(log_likelihood(freq[s], p))
        povm = Povm(list(pis[s]), list(c.labels))
        per, overall = (None, None) if ideal is None else povm_fidelity(povm, ideal)
        out.append(ReconstructionResult(
            povm, per, overall, int(iters[s]), float(delta[s]), bool(delta[s] < tol), history[s], rank, rank == d * d
        ))
    return out


def element_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    ta, tb = np.trace(a).real, np.trace(b).real
    if ta < 1e-12 or tb < 1e-12:
        return 1.0 if (ta < 1e-12 and tb < 1e-12) else 0.0
    ra = psd_power(a / ta, 0.5)
    m = ra @ (b / tb) @ ra
    ev = np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None)
    return float(min(1.0, np.sum(np.sqrt(ev)) ** 2))


def povm_fidelity(reconstructed: Povm, ideal: Povm) -> tuple[list[float], float]:
    """Per-element fidelity of trace-normalized elements, averaged with weights Tr(ideal)/d."""
    if list(reconstructed.labels) != list(ideal.labels):
        raise ValueError("POVMs must share outcome labels")
    d = ideal.dim
    per = [element_fidelity(a, b) for a, b in zip(reconstructed.elements, ideal.elements)]
    overall = sum(np.trace(b).real / d * f for b, f in zip(ideal.elements, per))
    return per, float(overall)


def repeat_tomography(ideal: Povm, shots: int, repetitions: int, seed: int, probes: ProbeSet | None = None):
    """Run independent simulate+reconstruct repetitions with seeds derived from ``seed``."""
    probes = build_mub_probes() if probes is None else probes
    seeds = np.random.SeedSequence(seed).generate_state(repetitions, dtype=np.uint64)
    counts = [simulate_counts(ideal, probes, shots, int(s)) for s in seeds]
    return reconstruct_batch(counts, probes, ideal)
