"""Command line entry point: ``dirguess {scores,verify-walk,tomography,walk-run}``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import checkpoints as cp
from . import walk
from .abstention import analytic_score_no_abstention, optimal_plan
from .errors import (
    DirguessError,
    InfeasibleError,
    ProgramFormatError,
    UntabulatedError,
)
from .game import GameConfig, MeasurementSource, run_game
from .hilbert import InputStateSpec
from .povm import AbstentionParams, ScoreKind, build_abstention_povm, exact_game_value
from .tomography import build_mub_probes, povm_fidelity, repeat_tomography

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4
EXIT_FORMAT = 5

OUT_ENV = "DIRGUESS_OUT_DIR"
WALK_TOL = 5e-4

DEFAULTS = {
    "score": "likelihood",
    "c0": None,
    "abstention": "optimal-constrained",
    "trials": 100_000,
    "shots": 20_000,
    "repetitions": 25,
    "seed": 0,
    "out": None,
    "measurement_source": "ideal",
    "dump_steps": False,
    "dump_trials": False,
    "input": "1,0,0,0",
}

SCORE_COLUMNS = ["c0", "score_no_abst", "score_with_abst", "lambda_bar_0", "Q_bar", "mc_score", "mc_stderr", "status"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_grid(values) -> list[float]:
    if values is None:
        return []
    if isinstance(values, (int, float)):
        return [float(values)]
    out = []
    for v in values:
        if isinstance(v, (int, float)):
            out.append(float(v))
            continue
        out.extend(float(x) for x in str(v).replace(" ", "").split(",") if x)
    return out


def _parse_complex_list(text: str) -> np.ndarray:
    try:
        vals = [complex(x.replace(" ", "").replace("i", "j")) for x in text.split(",")]
    except ValueError as exc:
        raise CliError(f"cannot parse input amplitudes {text!r}: {exc}", EXIT_USAGE) from exc
    if len(vals) != 4:
        raise CliError("input state needs four amplitudes a,b,c,d", EXIT_USAGE)
    v = np.array(vals)
    n = np.linalg.norm(v)
    if n == 0:
        raise CliError("input state is zero", EXIT_USAGE)
    return v / n


def resolve(args: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides defaults."""
    conf = dict(DEFAULTS)
    if args.config:
        try:
            file_conf = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_IO) from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"{args.config}: line {exc.lineno}: {exc.msg}", EXIT_FORMAT) from exc
        conf.update({k.replace("-", "_"): v for k, v in file_conf.items()})
    for k, v in vars(args).items():
        if k in ("func", "config", "command") or v is None:
            continue
        if k in ("dump_steps", "dump_trials") and v is False:
            continue
        conf[k] = v
    conf["command"] = args.command
    return conf


def _out_dir(conf: dict, default_name: str) -> Path:
    out = conf.get("out")
    if out is None:
        out = Path(os.environ.get(OUT_ENV, ".")) / default_name
    return Path(out)


def _derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, dtype=np.uint64)[0])


def _write_manifest(path: Path, conf: dict, outputs: list[Path], seeds: list[int], started: str) -> Path:
    man = {
        "command": conf["command"],
        "config": {k: v for k, v in conf.items() if k != "command"},
        "version": __version__,
        "seeds": seeds,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    mpath = path.with_name(path.stem + ".manifest.json")
    mpath.write_text(json.dumps(man, indent=1, default=str) + "\n")
    return mpath


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- scores ---------------------------------------------------------------


def score_row(kind: ScoreKind, c0: float, abstention: str, trials: int, seed: int, source: str):
    """One CSV row plus the game record (None when no Monte Carlo ran)."""
    row = {"c0": c0, "score_no_abst": analytic_score_no_abstention(kind, c0)}
    rec = None
    status = "ok"
    plan = None
    if abstention != "none":
        try:
            plan = optimal_plan(kind, c0, abstention == "optimal-constrained")
        except InfeasibleError as exc:
            status = f"infeasible: {exc}"
    if status == "ok":
        params = AbstentionParams() if plan is None else plan.params
        s, q = exact_game_value(build_abstention_povm(params), InputStateSpec(c0), kind)
        row.update(score_with_abst=s, lambda_bar_0=params.lambda_bar_0, Q_bar=q)
        if trials > 0:
            try:
                rec = run_game(GameConfig(kind, c0, plan, trials, seed, MeasurementSource(source)))
                row.update(mc_score=rec.s_hat, mc_stderr=rec.stderr)
            except (UntabulatedError, InfeasibleError) as exc:
                status = f"no walk program: {exc}"
    row["status"] = status
    return row, rec


def cmd_scores(conf: dict) -> int:
    kind = ScoreKind.parse(conf["score"])
    grid = _parse_grid(conf["c0"])
    out = _out_dir(conf, f"scores_{kind.value}.csv")
    started = _now()
    seeds = [_derived_seed(int(conf["seed"]), i) for i in range(len(grid))]
    # grid points are independent and seeded separately; map keeps output order
    with ThreadPoolExecutor(max(1, min(len(grid), os.cpu_count() or 1))) as ex:
        results = list(ex.map(
            lambda cs: score_row(kind, cs[0], conf["abstention"], int(conf["trials"]), cs[1], conf["measurement_source"]),
            zip(grid, seeds),
        ))
    rows = [r for r, _ in results]
    outputs = [out]
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        if conf.get("dump_trials"):
            for (r, rec) in results:
                if rec is not None:
                    tp = out.with_name(f"{out.stem}_c0={r['c0']}_trials.csv")
                    rec.write_trials_csv(tp)
                    outputs.append(tp)
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SCORE_COLUMNS)
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        _write_manifest(out, conf, outputs, seeds, started)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    for r in rows:
        print(", ".join(f"{k}={r.get(k, '')}" for k in SCORE_COLUMNS))
    print(f"wrote {out}")
    return EXIT_OK


# --- verify-walk ----------------------------------------------------------


def verify_walk(kind: ScoreKind, c0: float) -> dict:
    row = walk.find_row(kind, c0)
    prog = walk.load_reference_program(kind, c0)
    got = walk.extract_povm(prog)
    ideal = build_abstention_povm(AbstentionParams(row.lambda_bar_0, 1.0))
    dist = {lbl: float(np.linalg.norm(a - b)) for lbl, a, b in zip(got.labels, got.elements, ideal.elements)}
    _, overall = povm_fidelity(got, ideal)
    report = {
        "kind": kind.value,
        "c0": row.c0_label,
        "lambda_bar_0": row.lambda_bar_0,
        "distances": dist,
        "overall_fidelity": overall,
        "checkpoints": {},
        "ok": max(dist.values()) <= WALK_TOL,
    }
    if kind is ScoreKind.parse(cp.KIND) and abs(row.c0_label - cp.C0) < 1e-9:
        for t in (2, 3):
            r = cp.compare(prog, t)
            report["checkpoints"][f"t={t}"] = {"max_error": r["max_error"], "ok": r["ok"]}
        r = cp.compare(prog, 9, per_mode_phase=True)
        report["checkpoints"]["t=9 (per-outcome phase)"] = {"max_error": r["max_error"], "ok": r["ok"]}
        report["ok"] = report["ok"] and all(c["ok"] for c in report["checkpoints"].values())
    return report


def cmd_verify_walk(conf: dict) -> int:
    kind = ScoreKind.parse(conf["score"])
    grid = _parse_grid(conf["c0"])
    if len(grid) != 1:
        raise CliError("verify-walk needs exactly one --c0", EXIT_USAGE)
    report = verify_walk(kind, grid[0])
    for name, c in report["checkpoints"].items():
        print(f"checkpoint {name}: max error {c['max_error']:.2e} {'ok' if c['ok'] else 'FAIL'}")
    for lbl, d in report["distances"].items():
        print(f"{lbl:8s} |Pi_walk - Pi_ideal|_F = {d:.2e}")
    print(f"overall fidelity {report['overall_fidelity']:.9f}")
    if conf.get("out"):
        out = Path(conf["out"])
        try:
            out.write_text(json.dumps(report, indent=1) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    print("PASS" if report["ok"] else "FAIL")
    return EXIT_OK if report["ok"] else EXIT_VALIDATION


# --- tomography -----------------------------------------------------------


def tomography_report(kind: ScoreKind, c0: float, shots: int, repetitions: int, seed: int, source: str) -> dict:
    if shots <= 0:
        raise CliError("shots must be positive", EXIT_USAGE)
    if repetitions <= 0:
        raise CliError("repetitions must be positive", EXIT_USAGE)
    row = walk.find_row(kind, c0)
    ideal = build_abstention_povm(AbstentionParams(row.lambda_bar_0, 1.0))
    truth = ideal if source == "ideal" else walk.extract_povm(walk.load_reference_program(kind, c0))
    results = repeat_tomography(truth, shots, repetitions, seed, build_mub_probes())
    fids = []
    for r in results:
        per, overall = povm_fidelity(r.povm, ideal)
        r.per_element_fidelity, r.overall_fidelity = per, overall
        fids.append(overall)
    fids = np.array(fids)
    return {
        "kind": kind.value,
        "c0": row.c0_label,
        "lambda_bar_0": row.lambda_bar_0,
        "measurement_source": source,
        "shots": shots,
        "repetitions": repetitions,
        "seed": seed,
        "mean_overall_fidelity": float(fids.mean()),
        "std_overall_fidelity": float(fids.std(ddof=1)) if len(fids) > 1 else 0.0,
        "runs": [r.to_dict() for r in results],
    }


def cmd_tomography(conf: dict) -> int:
    kind = ScoreKind.parse(conf["score"])
    grid = _parse_grid(conf["c0"])
    if len(grid) != 1:
        raise CliError("tomography needs exactly one --c0", EXIT_USAGE)
    started = _now()
    rep = tomography_report(
        kind, grid[0], int(conf["shots"]), int(conf["repetitions"]), int(conf["seed"]), conf["measurement_source"]
    )
    out = _out_dir(conf, f"tomography_{kind.value}_{grid[0]:.4f}.json")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(rep, indent=1) + "\n")
        _write_manifest(out, conf, [out], [int(conf["seed"])], started)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    print(
        f"mean overall fidelity {rep['mean_overall_fidelity']:.6f} "
        f"+- {rep['std_overall_fidelity']:.6f} over {rep['repetitions']} repetitions"
    )
    print(f"wrote {out}")
    return EXIT_OK


# --- walk-run -------------------------------------------------------------


def cmd_walk_run(conf: dict) -> int:
    if conf.get("program"):
        try:
            prog = walk.load_program(conf["program"])
        except OSError as exc:
            raise CliError(f"cannot read {conf['program']}: {exc}", EXIT_IO) from exc
    elif conf.get("reference"):
        kind, _, c0 = str(conf["reference"]).partition(":")
        prog = walk.load_reference_program(ScoreKind.parse(kind), float(c0))
    else:
        raise CliError("walk-run needs a program file or --reference KIND:C0", EXIT_USAGE)
    v = _parse_complex_list(conf["input"]) if isinstance(conf["input"], str) else np.asarray(conf["input"], complex)
    states = walk.run_program(prog, walk.embed_input(v, prog.input_positions), record_steps=True)
    final = states[-1]
    report: dict = {"input": [[z.real, z.imag] for z in v]}
    if conf.get("dump_steps"):
        report["steps"] = []
        for t, s in enumerate(states):
            rows = [[x, "HV"[c], a.real, a.imag] for (x, c), a in sorted(s.amplitudes.items())]
            report["steps"].append({"t": t, "amplitudes": rows})
            print(f"t={t}")
            for x, c, re, im in rows:
                print(f"  x={x:+d} {c}: {re:+.6f}{im:+.6f}i")
    dist = final.position_distribution()
    report["final_distribution"] = {str(x): p for x, p in dist.items()}
    print("final position distribution")
    for x, p in sorted(dist.items(), reverse=True):
        label = prog.readout_map.get(x, "")
        print(f"  x={x:+d} {label:8s} p={p:.6f}")
    if conf.get("out"):
        out = Path(conf["out"])
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(report, indent=1) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dirguess", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, c0=True):
        sp.add_argument("--config", help="JSON file of option defaults")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        if c0:
            sp.add_argument("--score", choices=["fidelity", "likelihood"])
            sp.add_argument("--c0", action="append", help="value or comma list; repeatable")

    sp = sub.add_parser("scores", help="theory and Monte Carlo scores over a c0 grid")
    common(sp)
    sp.add_argument("--abstention", choices=["none", "optimal", "optimal-constrained"])
    sp.add_argument("--trials", type=int)
    sp.add_argument("--measurement-source", dest="measurement_source", choices=["ideal", "walk"])
    sp.add_argument("--dump-trials", dest="dump_trials", action="store_true", help="also write per-trial CSVs")
    sp.set_defaults(func=cmd_scores)

    sp = sub.add_parser("verify-walk", help="check a reference walk program against the ideal POVM")
    common(sp)
    sp.set_defaults(func=cmd_verify_walk)

    sp = sub.add_parser("tomography", help="simulated detector tomography of a tabulated POVM")
    common(sp)
    sp.add_argument("--shots", type=int)
    sp.add_argument("--repetitions", type=int)
    sp.add_argument("--measurement-source", dest="measurement_source", choices=["ideal", "walk"])
    sp.set_defaults(func=cmd_tomography)

    sp = sub.add_parser("walk-run", help="evolve an input through a walk program file")
    common(sp, c0=False)
    sp.add_argument("program", nargs="?", help="walk program JSON file")
    sp.add_argument("--reference", help="use a shipped program, e.g. likelihood:0.6")
    sp.add_argument("--input", help="amplitudes a,b,c,d (complex allowed, e.g. 0.5+0.5j)")
    sp.add_argument("--dump-steps", dest="dump_steps", action="store_true")
    sp.set_defaults(func=cmd_walk_run)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        conf = resolve(args)
        return args.func(conf)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UntabulatedError as exc:
        print(f"error: untabulated: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ProgramFormatError as exc:
        print(f"error: malformed program: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DirguessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
