"""Discrete-time quantum walk with wave-plate coins.

A program is a list of steps. Each step applies a 2x2 coin at the listed
sites, then translates: coin H (index 0) moves right, coin V (index 1) moves
left. The two-qubit input lives on sites +1 and -1 with the embedding
|1,H> = |00>, |1,V> = |01>, |-1,H> = |10>, |-1,V> = |11>.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import LatticeOverflowError, ProgramFormatError, ProgramLeakError, UntabulatedError, WalkError
from .povm import LABELS, Povm, ScoreKind

H, V = 0, 1
# amplitudes below this are cos(90 deg)-style round-off and are dropped from WalkState
ROUNDOFF = 1e-14


class PlateKind(str, Enum):
    HWP = "HWP"
    QWP = "QWP"


@dataclass(frozen=True)
class WavePlate:
    kind: PlateKind
    angle_deg: float
    name: str | None = None

    def matrix(self) -> np.ndarray:
        return jones_matrix(self)


def hwp(theta_deg: float) -> np.ndarray:
    t = np.deg2rad(2 * theta_deg)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=complex)


def qwp(theta_deg: float) -> np.ndarray:
    t = np.deg2rad(theta_deg)
    c, s = np.cos(t), np.sin(t)
    off = (1 - 1j) * s * c
    return np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=complex)


def jones_matrix(p: WavePlate) -> np.ndarray:
    return hwp(p.angle_deg) if PlateKind(p.kind) is PlateKind.HWP else qwp(p.angle_deg)


@dataclass(frozen=True)
class CoinOp:
    """A stack of plates (first listed acts first) or an explicit 2x2 unitary."""

    plates: tuple[WavePlate, ...] = ()
    unitary: np.ndarray | None = None

    def matrix(self) -> np.ndarray:
        if self.unitary is not None:
            return np.asarray(self.unitary, dtype=complex)
        m = np.eye(2, dtype=complex)
        for p in self.plates:
            m = jones_matrix(p) @ m
        return m


@dataclass(frozen=True)
class WalkStep:
    coins: Mapping[int, CoinOp] = field(default_factory=dict)
    followed_by_translation: bool = True


@dataclass
class WalkProgram:
    steps: list[WalkStep]
    input_positions: tuple[int, int] = (1, -1)
    readout_map: dict[int, str] = field(default_factory=dict)
    name: str = ""
    meta: dict = field(default_factory=dict)

    def plates(self) -> list[tuple[int, int, WavePlate]]:
        """(step, position, plate) for every plate, steps counted from 1."""
        out = []
        for t, st in enumerate(self.steps, start=1):
            for x in sorted(st.coins):
                out.extend((t, x, p) for p in st.coins[x].plates)
        return out

    def plate(self, name: str) -> WavePlate:
        for _, _, p in self.plates():
            if p.name == name:
                return p
        raise KeyError(name)

    def half_width(self) -> int:
        reach = max(abs(x) for x in self.input_positions)
        for st in self.steps:
            if st.coins:
                reach = max(reach, max(abs(x) for x in st.coins))
        return reach + len(self.steps) + 1


class Lattice:
    """Positions -L..L, amplitudes stored as array[..., pos + L, coin]."""

    def __init__(self, half_width: int):
        self.L = int(half_width)
        self.size = 2 * self.L + 1

    def index(self, x: int) -> int:
        if abs(x) > self.L:
            raise LatticeOverflowError(f"position {x} outside lattice -{self.L}..{self.L}")
        return x + self.L

    def positions(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)


@dataclass
class WalkState:
    """Walker-coin amplitudes keyed by (position, coin)."""

    amplitudes: dict[tuple[int, int], complex]

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def position_distribution(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for (x, _), a in self.amplitudes.items():
            out[x] = out.get(x, 0.0) + abs(a) ** 2
        return dict(sorted(out.items()))

    def get(self, x: int, coin: int) -> complex:
        return self.amplitudes.get((x, coin), 0j)

    def to_array(self, lat: Lattice) -> np.ndarray:
        arr = np.zeros((lat.size, 2), dtype=complex)
        for (x, c), a in self.amplitudes.items():
            arr[lat.index(x), c] += a
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray, lat: Lattice, tol: float = 0.0) -> WalkState:
        amps = {}
        for i, x in enumerate(lat.positions()):
            for c in (H, V):
                if abs(arr[i, c]) > tol:
                    amps[(int(x), c)] = complex(arr[i, c])
        return cls(amps)


def embed_input(abcd, input_positions: tuple[int, int] = (1, -1)) -> WalkState:
    """Place (a, b, c, d) on (p0,H), (p0,V), (p1,H), (p1,V)."""
    a, b, c, d = (complex(z) for z in abcd)
    p0, p1 = input_positions
    return WalkState({(p0, H): a, (p0, V): b, (p1, H): c, (p1, V): d})


def coin_stack(prog: WalkProgram, lat: Lattice) -> np.ndarray:
    """Per-step, per-site coin matrices, shape (steps, sites, 2, 2)."""
    out = np.tile(np.eye(2, dtype=complex), (len(prog.steps), lat.size, 1, 1))
    for t, st in enumerate(prog.steps):
        for x, op in st.coins.items():
            out[t, lat.index(x)] = op.matrix()
    return out


def _evolve(arr: np.ndarray, coins: np.ndarray, translate: np.ndarray, keep: bool):
    """Evolve arr[..., site, coin] through every step; optionally keep each step."""
    hist = [arr] if keep else None
    for t in range(coins.shape[0]):
        arr = np.einsum("sij,...sj->...si", coins[t], arr)
        if translate[t]:
            arr = translate_array(arr)
        if keep:
            hist.append(arr)
    return hist if keep else arr


def translate_array(arr: np.ndarray) -> np.ndarray:
    if np.any(arr[..., -1, H] != 0) or np.any(arr[..., 0, V] != 0):
        raise LatticeOverflowError("translation would move amplitude off the lattice")
    out = np.zeros_like(arr)
    out[..., 1:, H] = arr[..., :-1, H]
    out[..., :-1, V] = arr[..., 1:, V]
    return out


def translate(s: WalkState) -> WalkState:
    amps: dict[tuple[int, int], complex] = {}
    for (x, c), a in s.amplitudes.items():
        key = (x + 1, H) if c == H else (x - 1, V)
        amps[key] = amps.get(key, 0j) + a
    return WalkState(amps)


def run_program(
    prog: WalkProgram,
    initial: WalkState,
    record_steps: bool = False,
    half_width: int | None = None,
) -> WalkState | list[WalkState]:
    """Apply every step (coins then translation). With ``record_steps`` return states t = 0..n."""
    stray = sorted({x for (x, _), a in initial.amplitudes.items() if a != 0} - set(prog.input_positions))
    if stray:
        raise WalkError(f"input has amplitude at {stray}, outside input positions {prog.input_positions}")
    lat = Lattice(prog.half_width() if half_width is None else half_width)
    arr = initial.to_array(lat)
    coins = coin_stack(prog, lat)
    trans = np.array([st.followed_by_translation for st in prog.steps], dtype=bool)
    hist = _evolve(arr[None], coins, trans, record_steps)
    if record_steps:
        return [WalkState.from_array(h[0], lat, ROUNDOFF) for h in hist]
    return WalkState.from_array(hist[0], lat, ROUNDOFF)


def run_batch(prog: WalkProgram, inputs: np.ndarray, record_steps: bool = False) -> tuple[np.ndarray, Lattice]:
    """Evolve many (a, b, c, d) inputs at once; returns amplitudes (batch, sites, 2)."""
    lat = Lattice(prog.half_width())
    inputs = np.atleast_2d(np.asarray(inputs, dtype=complex))
    arr = np.zeros((inputs.shape[0], lat.size, 2), dtype=complex)
    p0, p1 = prog.input_positions
    arr[:, lat.index(p0), H] = inputs[:, 0]
    arr[:, lat.index(p0), V] = inputs[:, 1]
    arr[:, lat.index(p1), H] = inputs[:, 2]
    arr[:, lat.index(p1), V] = inputs[:, 3]
    trans = np.array([st.followed_by_translation for st in prog.steps], dtype=bool)
    return _evolve(arr, coin_stack(prog, lat), trans, record_steps), lat


def output_functionals(prog: WalkProgram) -> tuple[np.ndarray, Lattice]:
    """A[site, coin, j]: final amplitude at (site, coin) for embedded basis input j."""
    out, lat = run_batch(prog, np.eye(4))
    return np.transpose(out, (1, 2, 0)), lat


def total_unitary(prog: WalkProgram) -> np.ndarray:
    """The walk unitary on the lattice (x) coin space, index 2 * site + coin.

    Translation wraps around the ring so the matrix is square; the lattice is
    wide enough that amplitude starting inside the program's reach never wraps.
    """
    lat = Lattice(prog.half_width())
    n = lat.size * 2
    arr = np.eye(n, dtype=complex).reshape(n, lat.size, 2)
    coins = coin_stack(prog, lat)
    for t, st in enumerate(prog.steps):
        arr = np.einsum("sij,...sj->...si", coins[t], arr)
        if st.followed_by_translation:
            arr = np.stack([np.roll(arr[..., H], 1, axis=-1), np.roll(arr[..., V], -1, axis=-1)], axis=-1)
    return arr.reshape(n, n).T


def readout_positions(prog: WalkProgram) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for x, label in prog.readout_map.items():
        groups.setdefault(label, []).append(int(x))
    return groups


def extract_povm(prog: WalkProgram, tol: float = 1e-6) -> Povm:
    """Pi_l = sum over readout modes of l of |row><row|, rows being output functionals."""
    if not prog.readout_map:
        raise WalkError("program has no readout map")
    amps, lat = output_functionals(prog)
    groups = readout_positions(prog)
    labels = [lbl for lbl in LABELS if lbl in groups] + [lbl for lbl in groups if lbl not in LABELS]
    elements = []
    for lbl in labels:
        e = np.zeros((4, 4), dtype=complex)
        for x in groups[lbl]:
            for c in (H, V):
                row = amps[lat.index(x), c]
                e += np.outer(row.conj(), row)
        elements.append(e)
    povm = Povm(elements, labels)
    err = povm.completeness_error()
    if err > tol:
        weight = np.sum(np.abs(amps) ** 2, axis=(1, 2))
        read = {lat.index(x) for x in prog.readout_map}
        leaking = [int(x) for i, x in enumerate(lat.positions()) if i not in read and weight[i] > tol]
        raise ProgramLeakError(f"program leaks amplitude (completeness error {err:.3e})", leaking)
    return povm


def outcome_amplitudes(prog: WalkProgram, abcd) -> dict[str, np.ndarray]:
    """Final (H, V) amplitudes at each readout position for one input."""
    amps, lat = output_functionals(prog)
    v = np.asarray(abcd, dtype=complex)
    return {
        lbl: np.concatenate([amps[lat.index(x)] @ v for x in xs])
        for lbl, xs in readout_positions(prog).items()
    }


# --- SWAP structure -------------------------------------------------------

SWAP_MODES = ((1, H), (1, V), (-1, H), (-1, V))

# the linear map realised on the embedded two-qubit space (columns are inputs)
SWAP_TARGET = np.array(
    [[0, 0, 1, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0]], dtype=complex
)


def swap_structure() -> list[WalkStep]:
    """Two translations around three half-wave plates at 45, 0 and 45 degrees."""
    return [
        WalkStep({}),
        WalkStep(
            {
                2: CoinOp((WavePlate(PlateKind.HWP, 45.0),)),
                0: CoinOp((WavePlate(PlateKind.HWP, 0.0),)),
                -2: CoinOp((WavePlate(PlateKind.HWP, 45.0),)),
            }
        ),
    ]


def apply_swap_structure(s: WalkState, tol: float = 1e-12) -> WalkState:
    stray = [k for k, a in s.amplitudes.items() if k not in SWAP_MODES and abs(a) > tol]
    if stray:
        raise WalkError(f"amplitude outside the four input modes: {sorted(stray)}")
    return run_program(WalkProgram(swap_structure()), s)


def swap_structure_matrix() -> np.ndarray:
    """The 4x4 map the structure induces on the embedded two-qubit space."""
    cols = []
    for j in range(4):
        out = apply_swap_structure(embed_input(np.eye(4)[j]))
        cols.append([out.get(x, c) for x, c in SWAP_MODES])
    return np.array(cols).T


# --- program files --------------------------------------------------------


def _complex_matrix(data, where: str) -> np.ndarray:
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in data])
    except (TypeError, ValueError) as exc:
        raise ProgramFormatError(f"{where}: unitary must be a 2x2 array of [re, im] pairs") from exc
    if m.shape != (2, 2):
        raise ProgramFormatError(f"{where}: unitary must be 2x2, got {m.shape}")
    if np.max(np.abs(m.conj().T @ m - np.eye(2))) > 1e-10:
        raise ProgramFormatError(f"{where}: matrix is not unitary")
    return m


def program_from_dict(data: dict) -> WalkProgram:
    if "steps" not in data:
        raise ProgramFormatError("missing field 'steps'")
    steps = []
    for t, st in enumerate(data["steps"], start=1):
        coins: dict[int, CoinOp] = {}
        sites = st.get("sites", st) if isinstance(st, dict) else st
        if not isinstance(sites, list):
            raise ProgramFormatError(f"steps[{t}]: expected a list of sites")
        for k, site in enumerate(sites):
            where = f"steps[{t}].sites[{k}]"
            if "position" not in site:
                raise ProgramFormatError(f"{where}: missing field 'position'")
            try:
                x = int(site["position"])
            except (TypeError, ValueError) as exc:
                raise ProgramFormatError(f"{where}.position: not an integer") from exc
            if x in coins:
                raise ProgramFormatError(f"{where}: position {x} listed twice")
            if "unitary" in site:
                coins[x] = CoinOp(unitary=_complex_matrix(site["unitary"], where))
                continue
            plates = []
            for m, p in enumerate(site.get("plates", [])):
                pw = f"{where}.plates[{m}]"
                try:
                    plates.append(WavePlate(PlateKind(p["kind"]), float(p["angle_deg"]), p.get("name")))
                except KeyError as exc:
                    raise ProgramFormatError(f"{pw}: missing field {exc}") from exc
                except (TypeError, ValueError) as exc:
                    raise ProgramFormatError(f"{pw}: {exc}") from exc
            coins[x] = CoinOp(tuple(plates))
        translation = st.get("translate", True) if isinstance(st, dict) else True
        steps.append(WalkStep(coins, bool(translation)))
    try:
        readout = {int(k): str(v) for k, v in data.get("readout_map", {}).items()}
        inputs = tuple(int(x) for x in data.get("input_positions", (1, -1)))
    except (TypeError, ValueError) as exc:
        raise ProgramFormatError(f"readout_map/input_positions: {exc}") from exc
    if len(inputs) != 2:
        raise ProgramFormatError("input_positions must list two sites")
    return WalkProgram(steps, inputs, readout, data.get("name", ""), data.get("meta", {}))


def program_to_dict(prog: WalkProgram) -> dict:
    steps = []
    for st in prog.steps:
        sites = []
        for x in sorted(st.coins):
            op = st.coins[x]
            if op.unitary is not None:
                u = np.asarray(op.unitary, dtype=complex)
                sites.append({"position": x, "unitary": [[[z.real, z.imag] for z in r] for r in u]})
            else:
                plates = []
                for p in op.plates:
                    d = {"kind": PlateKind(p.kind).value, "angle_deg": p.angle_deg}
                    if p.name:
                        d["name"] = p.name
                    plates.append(d)
                sites.append({"position": x, "plates": plates})
        entry: dict = {"sites": sites}
        if not st.followed_by_translation:
            entry["translate"] = False
        steps.append(entry)
    return {
        "name": prog.name,
        "input_positions": list(prog.input_positions),
        "readout_map": {str(k): v for k, v in sorted(prog.readout_map.items(), reverse=True)},
        "steps": steps,
        "meta": prog.meta,
    }


def load_program(path: str | Path) -> WalkProgram:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProgramFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return program_from_dict(data)


def save_program(prog: WalkProgram, path: str | Path) -> None:
    Path(path).write_text(json.dumps(program_to_dict(prog), indent=1) + "\n")


# --- shipped reference programs -------------------------------------------


@dataclass(frozen=True)
class ReferenceRow:
    kind: ScoreKind
    c0_label: float
    c0: float
    lambda_bar_0: float
    file: str


def reference_rows() -> list[ReferenceRow]:
    index = json.loads(resources.files(__package__).joinpath("programs/index.json").read_text())
    return [
        ReferenceRow(ScoreKind.parse(r["kind"]), r["c0_label"], r["c0"], r["lambda_bar_0"], r["file"])
        for r in index["rows"]
    ]


def find_row(kind: ScoreKind, c0: float, tol: float = 5e-4) -> ReferenceRow:
    kind = ScoreKind.parse(kind)
    for r in reference_rows():
        if r.kind is kind and (abs(r.c0_label - c0) < tol or abs(r.c0 - c0) < tol):
            return r
    tab = ", ".join(f"{r.c0_label:g}" for r in reference_rows() if r.kind is kind)
    raise UntabulatedError(
        f"no reference program for {kind.value} at c0 = {c0}; tabulated values are {tab} "
        "(interpolating plate angles is not supported)"
    )


def load_reference_program(kind: ScoreKind, c0: float) -> WalkProgram:
    row = find_row(kind, c0)
    data = json.loads(resources.files(__package__).joinpath("programs", row.file).read_text())
    return program_from_dict(data)


def reference_program_path(kind: ScoreKind, c0: float) -> Path:
    row = find_row(kind, c0)
    return Path(str(resources.files(__package__).joinpath("programs", row.file)))


def random_inputs(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
