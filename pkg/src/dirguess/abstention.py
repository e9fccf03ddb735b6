"""Closed-form abstention plans and analytic scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .povm import AbstentionParams, ScoreKind

SQ3 = np.sqrt(3.0)
F_MAX = (3 + SQ3) / 6
DELTA_MAX = 4.0

# rescaled coefficients (c~0, c~1) of the seed that attains the maximum
TARGET = {
    ScoreKind.LIKELIHOOD: (0.5, SQ3 / 2),
    ScoreKind.FIDELITY: (1 / np.sqrt(2.0), 1 / np.sqrt(2.0)),
}


@dataclass(frozen=True)
class AbstentionPlan:
    lambda_bar_0: float
    lambda_bar_1: float
    Q_bar: float
    c_tilde_0: float
    c_tilde_1: float

    @classmethod
    def from_lambdas(cls, c0: float, lambda_bar_0: float, lambda_bar_1: float) -> AbstentionPlan:
        c1 = np.sqrt(max(0.0, 1 - c0**2))
        q = lambda_bar_0 * c0**2 + lambda_bar_1 * c1**2
        if q <= 0:
            raise InfeasibleError("plan accepts nothing")
        return cls(
            float(lambda_bar_0),
            float(lambda_bar_1),
            float(q),
            float(np.sqrt(lambda_bar_0 / q) * c0),
            float(np.sqrt(lambda_bar_1 / q) * c1),
        )

    @property
    def params(self) -> AbstentionParams:
        return AbstentionParams(self.lambda_bar_0, self.lambda_bar_1)


def feasible_c0_min(kind: ScoreKind) -> float:
    """Smallest c0 for which the optimum is reachable with lambda_bar_1 = 1."""
    t0, _ = TARGET[ScoreKind.parse(kind)]
    return t0


def optimal_plan(kind: ScoreKind, c0: float, constrain_lambda1_to_one: bool = False) -> AbstentionPlan:
    """Maximal-acceptance plan whose rescaled state reaches the score maximum."""
    kind = ScoreKind.parse(kind)
    if not 0.0 < c0 < 1.0:
        raise InfeasibleError(f"optimum unreachable at c0 = {c0}: both c0 and c1 must be nonzero")
    c1 = np.sqrt(1 - c0**2)
    t0, t1 = TARGET[kind]
    # lambda_bar_k = Q t_k^2 / c_k^2 must stay <= 1
    if constrain_lambda1_to_one:
        q = c1**2 / t1**2
        lam0 = q * t0**2 / c0**2
        if lam0 > 1.0 + 1e-12:
            raise InfeasibleError(
                f"constraint infeasible: lambda_bar_1 = 1 needs c0 >= {t0:.6f}, got {c0}"
            )
        lam0 = min(lam0, 1.0)
        lam1 = 1.0
    else:
        q = min(c0**2 / t0**2, c1**2 / t1**2)
        lam0 = min(q * t0**2 / c0**2, 1.0)
        lam1 = min(q * t1**2 / c1**2, 1.0)
    return AbstentionPlan.from_lambdas(c0, lam0, lam1)


def analytic_score_no_abstention(kind: ScoreKind, c0: float, overlap: complex = 1.0) -> float:
    """Score of the plain tetrahedral measurement on c0 psi- + c1 psi+.

    ``overlap`` is <phi_sym|psi_sym> for the likelihood score; 1 when the
    measurement seed is aligned with the state.
    """
    kind = ScoreKind.parse(kind)
    c1 = np.sqrt(max(0.0, 1 - c0**2))
    if kind is ScoreKind.LIKELIHOOD:
        return float(abs(c0 + SQ3 * c1 * overlap) ** 2)
    return float(0.5 + (SQ3 / 3) * c0 * c1)


def fidelity_surface(beta: float, b: float, theta: float) -> float:
    return float(
        0.5
        + (SQ3 / 3)
        * (
            np.cos(theta) * np.sin(theta) * beta * b
            + (SQ3 / 4) * np.sin(theta) ** 2 * (1 - beta**2) * (1 - b**2)
        )
    )


def max_score_bound(kind: ScoreKind) -> float:
    return DELTA_MAX if ScoreKind.parse(kind) is ScoreKind.LIKELIHOOD else F_MAX


def score_with_plan(kind: ScoreKind, plan: AbstentionPlan) -> float:
    """Analytic score of the rescaled state c~0 psi- + c~1 psi+."""
    return analytic_score_no_abstention(kind, plan.c_tilde_0)
