"""Reference amplitude tables for the (likelihood, c0 = 0.6) walk program.

Each entry maps a walker mode (position, coin) to the row of coefficients that
multiplies the input amplitudes (a, b, c, d). Values are given to three
decimals, so comparisons use a 5e-4 tolerance.
"""

from __future__ import annotations

import numpy as np

from .walk import H, V, WalkProgram, output_functionals, run_batch

KIND = "likelihood"
C0 = 0.6
TOL = 5e-4

T2 = {
    (1, H): (0, 0, 1, 0),
    (1, V): (0, 1, 0, 0),
    (-1, H): (0, 0, 0, -1),
    (-1, V): (-1, 0, 0, 0),
}

T3 = {
    (2, H): (0, 0.933, 0.359, 0),
    (0, H): (-0.707, 0, 0, 0.707),
    (0, V): (0, -0.359, 0.933, 0),
    (-2, V): (-0.707, 0, 0, -0.707),
}

T9 = {
    (8, H): (0, 0.885, 0.34, 0),
    (6, H): (-0.577, 0.068, -0.476, 0.577),
    (2, H): (0.5 + 0.289j, 0.068j, -0.476j, 0.5 - 0.289j),
    (0, H): (-(0.289 + 0.5j), -0.068, 0.476, 0.289 - 0.5j),
    (-2, V): (0, -0.451j, 0.451j, 0),
}

CHECKPOINTS = {2: T2, 3: T3, 9: T9}

READOUT_LABEL = {8: "n1", 6: "n2", 2: "n3", 0: "n4", -2: "abstain"}


def as_rows(table: dict) -> dict[tuple[int, int], np.ndarray]:
    return {k: np.asarray(v, dtype=complex) for k, v in table.items()}


def step_functionals(prog: WalkProgram, t: int) -> dict[tuple[int, int], np.ndarray]:
    """Nonzero (position, coin) -> coefficient rows after t steps."""
    hist, lat = run_batch(prog, np.eye(4), record_steps=True)
    arr = hist[t]  # (4 inputs, sites, 2)
    out = {}
    for i, x in enumerate(lat.positions()):
        for c in (H, V):
            row = arr[:, i, c]
            if np.max(np.abs(row)) > 1e-12:
                out[(int(x), c)] = row
    return out


def phase_aligned_error(got: np.ndarray, want: np.ndarray) -> tuple[float, float]:
    """Max deviation after removing one global phase; also returns that phase (radians)."""
    z = np.vdot(got, want)
    ph = float(np.angle(z)) if abs(z) > 0 else 0.0
    return float(np.max(np.abs(got * np.exp(1j * ph) - want))), ph


def compare(prog: WalkProgram, t: int, per_mode_phase: bool = False) -> dict:
    """Compare the program's amplitudes after t steps with the reference table.

    With ``per_mode_phase`` each output row is compared up to its own global
    phase (outcome phases carry no measurable content).
    """
    want = as_rows(CHECKPOINTS[t])
    got = step_functionals(prog, t)
    missing = sorted(set(want) - set(got))
    extra = sorted(k for k in set(got) - set(want) if np.max(np.abs(got[k])) > TOL)
    errs, phases = {}, {}
    for k, w in want.items():
        g = got.get(k, np.zeros(4, dtype=complex))
        if per_mode_phase:
            errs[k], phases[k] = phase_aligned_error(g, w)
        else:
            errs[k], phases[k] = float(np.max(np.abs(g - w))), 0.0
    worst = max(errs.values())
    return {
        "t": t,
        "max_error": worst,
        "errors": errs,
        "phases": phases,
        "missing": missing,
        "extra": extra,
        "ok": worst < TOL and not missing and not extra,
    }


def reference_probabilities(abcd) -> dict[str, float]:
    v = np.asarray(abcd, dtype=complex)
    return {READOUT_LABEL[x]: float(abs(np.dot(np.asarray(r, dtype=complex), v)) ** 2) for (x, _), r in T9.items()}


def walk_probabilities(prog: WalkProgram, abcd) -> dict[str, float]:
    amps, lat = output_functionals(prog)
    v = np.asarray(abcd, dtype=complex)
    out = {}
    for x, lbl in prog.readout_map.items():
        a = amps[lat.index(x)] @ v
        out[lbl] = out.get(lbl, 0.0) + float(np.sum(np.abs(a) ** 2))
    return out
