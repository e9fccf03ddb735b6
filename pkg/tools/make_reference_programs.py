"""Write the ten reference walk programs shipped in src/dirguess/programs/.

The plate layout is the same for every row; only seven angles change. Run
from the repository root: python tools/make_reference_programs.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "dirguess" / "programs"

FIXED = {"H1": 0.0, "H2": 45.0, "H3": 67.5, "H5": 45.0, "H8": 0.0, "H10": 45.0, "H12": 135.0,
         "Q1": 0.0, "Q2": 0.0, "Q3": 0.0, "Q4": 0.0}
VARIABLE = ("H4", "H6", "H7", "H9", "H11", "H13", "H14")

# kind, c0 as printed, lambda_bar_0, (H4, H6, H7, H9, H11, H13, H14)
ROWS = [
    ("likelihood", 0.5, 1.0, (37.5, -17.6322, 0, 0, 90, 67.5, 135)),
    ("likelihood", 0.6, 0.5926, (34.4812, -14.9358, 9.3055, -9.8396, 76.5853, 63.7945, 154.832)),
    ("likelihood", 0.7, 0.3469, (31.8908, -12.2404, 11.9161, -13.107, 72.5750, 60.2494, 161.9564)),
    ("likelihood", 0.8, 0.1875, (29.5181, -9.4659, 13.3941, -15.1616, 70.2017, 56.7066, 167.1705)),
    ("likelihood", 0.9, 0.0782, (27.0854, -6.3509, 14.3445, -16.5887, 68.6211, 52.8111, 81.8811)),
    ("fidelity", 0.7071, 1.0, (37.5, -17.6322, 0, 0, 90, 67.5, 135)),
    ("fidelity", 0.7571, 0.7446, (35.7409, -16.1181, 7.3188, -7.5701, 79.5303, 65.3951, 150.1793)),
    ("fidelity", 0.8071, 0.5351, (33.9481, -14.4101, 9.9664, -10.6312, 75.5878, 63.0929, 156.4935)),
    ("fidelity", 0.8571, 0.3612, (32.0684, -12.4365, 11.7771, -12.9225, 72.7939, 60.5034, 161.5285)),
    ("fidelity", 0.9071, 0.2153, (29.9985, -10.0501, 13.1451, -14.8025, 70.6083, 57.4457, 166.1771)),
]

# step -> list of (position, [plate names or ("NOT", angle) for unnamed half-wave plates])
LAYOUT = {
    1: [(-1, ["H1"]), (1, ["H2"])],
    2: [(-2, [("SWAP", 45.0)]), (0, [("SWAP", 0.0)]), (2, [("SWAP", 45.0)])],
    3: [(-1, ["H3"]), (1, ["H4"])],
    4: [(-2, ["H5"]), (0, ["H6"]), (2, ["H7"])],
    5: [(-1, ["H8"]), (1, ["H9"])],
    6: [(-2, ["Q1", "H10"]), (0, ["Q2", "H11"])],
    7: [(-1, ["Q3"]), (1, [("NOT", 45.0)])],
    8: [(-2, ["Q4", "H12"]), (0, ["H13"])],
    9: [(-1, ["H14"])],
}

READOUT = {8: "n1", 6: "n2", 2: "n3", 0: "n4", -2: "abstain"}


def exact_c0(kind: str, label: float) -> float:
    # the fidelity rows are sqrt(2)/2 + 0.05 k printed to four decimals
    if kind == "fidelity":
        k = round((label - np.sqrt(0.5)) / 0.05)
        return float(np.sqrt(0.5) + 0.05 * k)
    return float(label)


def program(kind: str, label: float, angles) -> dict:
    ang = dict(FIXED, **dict(zip(VARIABLE, map(float, angles))))
    steps = []
    for t in sorted(LAYOUT):
        sites = []
        for x, plates in LAYOUT[t]:
            out = []
            for p in plates:
                if isinstance(p, tuple):
                    out.append({"kind": "HWP", "angle_deg": p[1], "name": p[0]})
                else:
                    out.append({"kind": "QWP" if p[0] == "Q" else "HWP", "angle_deg": ang[p], "name": p})
            sites.append({"position": x, "plates": out})
        steps.append({"sites": sites})
    return {
        "name": f"{kind} c0={label}",
        "input_positions": [1, -1],
        "readout_map": {str(k): v for k, v in READOUT.items()},
        "steps": steps,
        "meta": {"kind": kind, "c0_label": label, "c0": exact_c0(kind, label)},
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    index = []
    for kind, label, lam0, angles in ROWS:
        fname = f"{kind}_{label:.4f}.json"
        (OUT / fname).write_text(json.dumps(program(kind, label, angles), indent=1) + "\n")
        index.append({"kind": kind, "c0_label": label, "c0": exact_c0(kind, label),
                      "lambda_bar_0": lam0, "file": fname})
    (OUT / "index.json").write_text(json.dumps({"rows": index}, indent=1) + "\n")


if __name__ == "__main__":
    main()
