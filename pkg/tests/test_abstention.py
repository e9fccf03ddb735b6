import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirguess import abstention as ab
from dirguess import hilbert as hb
from dirguess import povm as pv
from dirguess.errors import InfeasibleError

F_MAX = (3 + np.sqrt(3)) / 6
KINDS = ["likelihood", "fidelity"]


def test_constrained_examples():
    p = ab.optimal_plan("likelihood", 0.6, True)
    assert abs(p.lambda_bar_0 - 0.5926) < 5e-5 and p.lambda_bar_1 == 1
    assert abs(p.Q_bar - 0.8533) < 5e-5
    assert abs(ab.optimal_plan("fidelity", 0.7571, True).lambda_bar_0 - 0.7446) < 5e-4
    p = ab.optimal_plan("likelihood", 0.5, True)
    assert p.lambda_bar_0 == 1 and abs(p.Q_bar - 1) < 1e-12
    p = ab.optimal_plan("fidelity", 0.9071, True)
    assert abs(p.lambda_bar_0 - (1 - 0.9071**2) / 0.9071**2) < 1e-12
    assert abs(p.lambda_bar_0 - 0.2153) < 5e-5


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("c0", [0.0, 1.0, -0.1, 1.2])
def test_unreachable(kind, c0):
    with pytest.raises(InfeasibleError, match="unreachable"):
        ab.optimal_plan(kind, c0)


@pytest.mark.parametrize("kind, c0", [("likelihood", 0.4), ("fidelity", 0.6)])
def test_constraint_infeasible(kind, c0):
    with pytest.raises(InfeasibleError, match="infeasible"):
        ab.optimal_plan(kind, c0, True)
    ab.optimal_plan(kind, c0, False)


@given(st.floats(0.01, 0.99), st.sampled_from(KINDS), st.booleans())
def test_plan_invariants(c0, kind, constrained):
    if constrained and c0 < ab.feasible_c0_min(kind):
        return
    p = ab.optimal_plan(kind, c0, constrained)
    c1 = np.sqrt(1 - c0**2)
    assert 0 <= p.lambda_bar_0 <= 1 and 0 <= p.lambda_bar_1 <= 1
    assert abs(p.Q_bar - (p.lambda_bar_0 * c0**2 + p.lambda_bar_1 * c1**2)) < 1e-12
    assert abs(p.c_tilde_0**2 + p.c_tilde_1**2 - 1) < 1e-12
    assert np.allclose((p.c_tilde_0, p.c_tilde_1), ab.TARGET[pv.ScoreKind.parse(kind)], atol=1e-9)
    # |c~_j| <= |c_j| / sqrt(Q) with equality on the binding coefficient
    slack = [c / np.sqrt(p.Q_bar) - ct for c, ct in ((c0, p.c_tilde_0), (c1, p.c_tilde_1))]
    assert min(slack) > -1e-12 and min(slack) < 1e-9


@given(st.floats(0.01, 0.99), st.sampled_from(KINDS))
def test_unconstrained_acceptance(c0, kind):
    c1sq = 1 - c0**2
    want = min(4 * c0**2, 4 * c1sq / 3) if kind == "likelihood" else min(2 * c0**2, 2 * c1sq)
    assert abs(ab.optimal_plan(kind, c0).Q_bar - want) < 1e-12


@given(st.floats(0.01, 0.99), st.sampled_from(KINDS), st.booleans())
def test_plan_attains_bound(c0, kind, constrained):
    if constrained and c0 < ab.feasible_c0_min(kind):
        return
    p = ab.optimal_plan(kind, c0, constrained)
    s, q = pv.exact_game_value(pv.build_abstention_povm(p.params), hb.InputStateSpec(c0), kind)
    assert abs(s - ab.max_score_bound(kind)) < 1e-9
    assert abs(q - p.Q_bar) < 1e-9
    assert abs(ab.score_with_plan(kind, p) - ab.max_score_bound(kind)) < 1e-9


@pytest.mark.parametrize("c0", [0.5, 0.6, 0.7, 0.8, 0.9])
def test_likelihood_plans_reach_four(c0):
    p = ab.optimal_plan("likelihood", c0, True)
    s, _ = pv.exact_game_value(pv.build_abstention_povm(p.params), hb.InputStateSpec(c0), "likelihood")
    assert abs(s - 4) < 1e-9


@pytest.mark.parametrize("c0", np.sqrt(0.5) + 0.05 * np.arange(5))
def test_fidelity_plans_reach_maximum(c0):
    p = ab.optimal_plan("fidelity", c0, True)
    s, _ = pv.exact_game_value(pv.build_abstention_povm(p.params), hb.InputStateSpec(c0), "fidelity")
    assert abs(s - F_MAX) < 1e-9


def test_constrained_lambda_decreasing():
    for kind in KINDS:
        c = np.linspace(ab.feasible_c0_min(kind), 0.999, 200)
        lam = [ab.optimal_plan(kind, x, True).lambda_bar_0 for x in c]
        assert np.all(np.diff(lam) < 0)


def test_no_abstention_examples():
    assert abs(ab.analytic_score_no_abstention("likelihood", 0.5) - 4) < 1e-12
    assert abs(ab.analytic_score_no_abstention("likelihood", 0.9) - 2.739) < 5e-4
    assert abs(ab.analytic_score_no_abstention("fidelity", 0.9071) - 0.7204) < 5e-4


@pytest.mark.parametrize("kind", KINDS)
def test_no_abstention_matches_game_value(kind):
    for c0 in np.linspace(0.5, 0.999, 40):
        s, _ = pv.exact_game_value(pv.ejm(), hb.InputStateSpec(c0), kind)
        assert abs(s - ab.analytic_score_no_abstention(kind, c0)) < 1e-9


def test_overlap_parameter():
    # seed misaligned with the state: only the aligned component helps
    c0 = 0.5
    assert abs(ab.analytic_score_no_abstention("likelihood", c0, overlap=0) - 0.25) < 1e-12
    ph = np.exp(0.7j)
    want = abs(c0 + np.sqrt(3) * np.sqrt(0.75) * ph) ** 2
    assert abs(ab.analytic_score_no_abstention("likelihood", c0, overlap=ph) - want) < 1e-12


def test_fidelity_surface_examples():
    assert abs(ab.fidelity_surface(1, 1, np.pi / 4) - F_MAX) < 1e-12
    assert abs(ab.fidelity_surface(1 / np.sqrt(3), 1 / np.sqrt(3), np.pi / 3) - 2 / 3) < 1e-12
    assert ab.fidelity_surface(0, 0, 0) == 0.5


def test_fidelity_surface_grid_maximum():
    g = np.linspace(0, 1, 101)
    th = np.linspace(0, np.pi / 2, 101)
    beta, b, t = np.meshgrid(g, g, th, indexing="ij")
    vals = np.vectorize(ab.fidelity_surface)(beta, b, t)
    i = np.unravel_index(np.argmax(vals), vals.shape)
    assert np.allclose((beta[i], b[i], t[i]), (1.0, 1.0, np.pi / 4), atol=1e-12)
    assert abs(vals[i] - ab.max_score_bound("fidelity")) < 1e-10


def test_fidelity_surface_with_psi_plus_seed_matches_analytic():
    for c0 in np.linspace(0, 1, 11):
        th = np.arccos(c0)
        assert abs(ab.fidelity_surface(1, 1, th) - ab.analytic_score_no_abstention("fidelity", c0)) < 1e-12


def test_bounds():
    assert ab.max_score_bound("likelihood") == 4
    assert abs(ab.max_score_bound("fidelity") - F_MAX) < 1e-15


def test_no_plan_beats_bound():
    for kind, c0, l0, l1 in itertools.product(KINDS, (0.3, 0.6, 0.9), (0.1, 0.5, 1.0), (0.2, 1.0)):
        s, _ = pv.exact_game_value(pv.build_abstention_povm(pv.AbstentionParams(l0, l1)), hb.InputStateSpec(c0), kind)
        assert s <= ab.max_score_bound(kind) + 1e-9
