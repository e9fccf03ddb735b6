"""Monte Carlo referee/guesser game with abstention.

Randomness: trials are cut into fixed blocks of ``BLOCK`` trials. Block k
draws from ``PCG64(SeedSequence(seed, spawn_key=(k,)))``, so the stream for a
trial depends only on (seed, trial index). Blocks may run in any order or in
parallel and the record is the same.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import hilbert as hb
from .abstention import AbstentionPlan
from .errors import CompletenessError, InfeasibleError, NoAcceptedTrialsError
from .povm import (
    ABSTAIN,
    DIRECTION_LABELS,
    EJM_PARAMS,
    Povm,
    ScoreKind,
    build_abstention_povm,
    input_ensemble,
    outcome_table,
    score_matrix,
    score_value,
)

BLOCK = 1 << 16
NEG_CLAMP = 1e-10
SUM_TOL = 1e-8


class MeasurementSource(str, Enum):
    IDEAL = "ideal"
    WALK = "walk"


@dataclass(frozen=True)
class GameConfig:
    kind: ScoreKind
    c0: float
    abstention: AbstentionPlan | None = None
    trials: int = 100_000
    seed: int = 0
    measurement_source: MeasurementSource = MeasurementSource.IDEAL
    psi_sym: tuple[complex, complex, complex] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "kind", ScoreKind.parse(self.kind))
        object.__setattr__(self, "measurement_source", MeasurementSource(self.measurement_source))

    @property
    def spec(self) -> hb.InputStateSpec:
        return hb.InputStateSpec(self.c0, self.psi_sym)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "c0": self.c0,
            "abstention": None if self.abstention is None else asdict(self.abstention),
            "trials": self.trials,
            "seed": self.seed,
            "measurement_source": self.measurement_source.value,
            "psi_sym": [[complex(z).real, complex(z).imag] for z in self.psi_sym],
        }


@dataclass
class GameRecord:
    config: GameConfig
    directions: np.ndarray  # index into the kind's input ensemble
    outcomes: np.ndarray  # index into povm labels
    labels: list[str]
    s_hat: float
    Q_bar_hat: float
    stderr: float
    Q_stderr: float
    n_accepted: int
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return int(self.directions.size)

    @property
    def accepted(self) -> np.ndarray:
        return self.outcomes != self.labels.index(ABSTAIN)

    def scores(self) -> np.ndarray:
        """Per-trial score; NaN where the guesser abstained."""
        table = _score_lookup(self.config.kind, self.labels)
        out = table[self.directions, self.outcomes]
        return np.where(self.accepted, out, np.nan)

    def aggregates(self) -> dict:
        return {
            "kind": self.config.kind.value,
            "c0": self.config.c0,
            "lambda_bar_0": None if self.config.abstention is None else self.config.abstention.lambda_bar_0,
            "source": self.config.measurement_source.value,
            "trials": self.trials,
            "n_accepted": self.n_accepted,
            "s_hat": self.s_hat,
            "stderr": self.stderr,
            "Q_bar_hat": self.Q_bar_hat,
            "Q_stderr": self.Q_stderr,
            "seed": self.config.seed,
        }

    def to_json(self) -> str:
        return json.dumps({"config": self.config.to_dict(), "aggregates": self.aggregates(), **self.extra}, indent=1)

    def aggregates_csv(self) -> str:
        buf = io.StringIO()
        row = self.aggregates()
        w = csv.DictWriter(buf, fieldnames=list(row))
        w.writeheader()
        w.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def write_trials_csv(self, path: str | Path) -> None:
        ens = input_ensemble(self.config.kind)
        sc = self.scores()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "direction_index", "nx", "ny", "nz", "outcome", "accepted", "score"])
            for t, (k, o) in enumerate(zip(self.directions, self.outcomes)):
                n = ens[k]
                w.writerow([t, int(k), repr(n.x), repr(n.y), repr(n.z), self.labels[o],
                            int(self.accepted[t]), "" if np.isnan(sc[t]) else repr(float(sc[t]))])


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _score_lookup(kind: ScoreKind, labels: list[str]) -> np.ndarray:
    """Score for (input index, outcome index); zero on the abstain column."""
    s = score_matrix(kind)
    out = np.zeros((s.shape[0], len(labels)))
    for j, lbl in enumerate(labels):
        if lbl in DIRECTION_LABELS:
            out[:, j] = s[:, DIRECTION_LABELS.index(lbl)]
    return out


def _clean(p: np.ndarray) -> np.ndarray:
    """Clamp tiny negatives, check the total, renormalize."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEG_CLAMP):
        raise CompletenessError(f"negative outcome probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    tot = p.sum(axis=-1, keepdims=True)
    if np.any(np.abs(tot - 1.0) > SUM_TOL):
        raise CompletenessError("outcome probabilities do not sum to one")
    return p / tot


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_direction(kind: ScoreKind, rng: np.random.Generator) -> hb.Direction:
    ens = input_ensemble(kind)
    return ens[int(rng.integers(len(ens)))]


def play_trial(cfg: GameConfig, n: hb.Direction, povm: Povm, rng: np.random.Generator):
    """One round: returns (outcome label, accepted, score or None)."""
    state = hb.rotate_two_qubit(n, hb.build_input_state(cfg.spec))
    p = _clean(povm.probabilities(state))
    j = int(np.searchsorted(np.cumsum(p)[:-1], rng.random(), side="right"))
    label = povm.labels[j]
    if label == ABSTAIN:
        return label, False, None
    guess = hb.TETRAHEDRON[DIRECTION_LABELS.index(label)]
    return label, True, score_value(cfg.kind, n, guess)


def measurement_povm(cfg: GameConfig) -> Povm:
    if cfg.measurement_source is MeasurementSource.IDEAL:
        params = EJM_PARAMS if cfg.abstention is None else cfg.abstention.params
        return build_abstention_povm(params)
    from . import walk

    if cfg.abstention is None:
        # the lambda_bar_0 = 1 program is the plain tetrahedral measurement
        row = next(r for r in walk.reference_rows() if r.lambda_bar_0 == 1.0)
        return walk.extract_povm(walk.load_reference_program(row.kind, row.c0))
    row = walk.find_row(cfg.kind, cfg.c0)
    plan = cfg.abstention
    if abs(plan.lambda_bar_1 - 1.0) > 1e-9 or abs(plan.lambda_bar_0 - row.lambda_bar_0) > 5e-4:
        raise InfeasibleError(
            f"walk program for c0 = {row.c0_label} realizes lambda_bar = ({row.lambda_bar_0}, 1), "
            f"not ({plan.lambda_bar_0:.4f}, {plan.lambda_bar_1:.4f})"
        )
    return walk.extract_povm(walk.load_reference_program(cfg.kind, cfg.c0))


def sample_block(cdf: np.ndarray, n_dir: int, seed: int, block: int, size: int):
    """Direction and outcome indices for one block of trials."""
    u = block_rng(seed, block).random((size, 2))
    d = np.minimum((u[:, 0] * n_dir).astype(np.int64), n_dir - 1)
    o = (u[:, 1:2] >= cdf[d]).sum(axis=1)
    return d, o


def run_game(cfg: GameConfig, povm: Povm | None = None, workers: int = 1) -> GameRecord:
    povm = measurement_povm(cfg) if povm is None else povm
    probs = _clean(outcome_table(povm, cfg.kind, cfg.spec))
    cdf = np.cumsum(probs, axis=1)[:, :-1]
    n_dir = probs.shape[0]
    sizes = [min(BLOCK, cfg.trials - b * BLOCK) for b in range(-(-cfg.trials // BLOCK))]

    def job(b):
        return sample_block(cdf, n_dir, cfg.seed, b, sizes[b])

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    directions = np.concatenate([p[0] for p in parts])
    outcomes = np.concatenate([p[1] for p in parts])
    return record_from_trials(cfg, directions, outcomes, list(povm.labels))


def record_from_trials(cfg: GameConfig, directions, outcomes, labels: list[str]) -> GameRecord:
    directions = np.asarray(directions, dtype=np.int64)
    outcomes = np.asarray(outcomes, dtype=np.int64)
    table = _score_lookup(cfg.kind, labels)
    accepted = outcomes != labels.index(ABSTAIN)
    n_acc = int(accepted.sum())
    trials = directions.size
    if n_acc == 0:
        raise NoAcceptedTrialsError("no accepted trials: the guesser abstained every time")
    sc = table[directions[accepted], outcomes[accepted]]
    s_hat = float(sc.sum() / n_acc)
    stderr = float(np.std(sc, ddof=1) / np.sqrt(n_acc)) if n_acc > 1 else float("inf")
    q = n_acc / trials
    return GameRecord(
        cfg, directions, outcomes, labels, s_hat, q, stderr, float(np.sqrt(q * (1 - q) / trials)), n_acc
    )


def read_trials_csv(path: str | Path, cfg: GameConfig, labels: list[str]) -> GameRecord:
    """Rebuild a record from a per-trial dump."""
    dirs, outs = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            dirs.append(int(row["direction_index"]))
            outs.append(labels.index(row["outcome"]))
    return record_from_trials(cfg, dirs, outs, labels)
