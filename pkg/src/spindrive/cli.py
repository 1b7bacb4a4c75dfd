"""Command-line entry points: sudoku, maxcut, analyze, oracle.

Every solver run writes a run-report JSON (full parameter echo plus seed),
the trace/heatmap CSVs, and rendered figures into the output directory, so
a run can be reproduced and replotted from its artifacts alone.

Options may come from a JSON config file (--config); explicit command-line
flags override config values, and unknown config keys are rejected.  The
SPINDRIVE_OUT environment variable supplies the default output directory.

Exit codes: 0 = target reached / verified, 2 = completed without reaching
the target, 1 = input or runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import report as report_mod
from .dmrg import SweepParams
from .driver import DriveParams, solve
from .ising import characterize, read_qubo, to_ising, to_operator_terms
from .maxcut import cut_value, read_graph, to_qubo
from .mps import load_checkpoint
from .oracle import (
    BRUTE_FORCE_CAP,
    DENSE_CAP,
    brute_force_ground,
    dense_ground_energy,
)
from .sudoku import (
    InconsistentCluesError,
    board_to_text,
    clamp,
    decode,
    full_qubo,
    parse_board,
    verify,
)

_CONFIG_KEYS = {
    "steps", "hx", "eta", "bond_dim", "sweeps", "seed", "restarts",
    "target_energy", "rescale", "init", "jobs", "out", "reference",
    "figures", "verbose", "eig_tol", "cutoff", "early_exit", "instance",
}

_DEFAULTS = {
    "steps": 10,
    "hx": 1.0,
    "eta": 0.0,
    "bond_dim": 30,
    "sweeps": 5,
    "seed": 0,
    "restarts": 0,
    "target_energy": None,
    "rescale": False,
    "init": "minus",
    "jobs": 1,
    "out": None,
    "reference": None,
    "figures": True,
    "verbose": False,
    "eig_tol": 1e-14,
    "cutoff": 1e-10,
    "early_exit": False,
    "instance": None,
}

# per-command parameter regimes
_COMMAND_DEFAULTS = {
    "sudoku": {"hx": 0.7, "bond_dim": 60},
    "maxcut": {"hx": 1.0, "bond_dim": 30},
}


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--steps", type=int, default=None, help="number of driving steps M")
    p.add_argument("--hx", type=float, default=None, help="base transverse field")
    p.add_argument("--eta", type=float, default=None, help="transverse-field noise half-width")
    p.add_argument("--bond-dim", type=int, default=None, dest="bond_dim",
                   help="DMRG bond dimension cap D")
    p.add_argument("--sweeps", type=int, default=None, help="DMRG sweeps per driving step")
    p.add_argument("--seed", type=int, default=None, help="PRNG seed")
    p.add_argument("--restarts", type=int, default=None, help="max restarts on a missed target")
    p.add_argument("--target-energy", type=float, default=None, dest="target_energy",
                   help="stop as soon as this classical energy is reached")
    p.add_argument("--rescale", action=argparse.BooleanOptionalAction, default=None,
                   help="divide the model by its largest |coupling| before solving")
    p.add_argument("--init", type=str, default=None,
                   help="initial state: 'minus' or 'random:D'")
    p.add_argument("--early-exit", action=argparse.BooleanOptionalAction, default=None,
                   dest="early_exit", help="let DMRG stop early inside a step")
    p.add_argument("--eig-tol", type=float, default=None, dest="eig_tol",
                   help="eigensolver / early-exit tolerance")
    p.add_argument("--cutoff", type=float, default=None,
                   help="SVD truncation cutoff")
    p.add_argument("--resume", type=str, default=None,
                   help="MPS checkpoint file to start from")
    p.add_argument("--checkpoint", type=str, default=None,
                   help="write an MPS checkpoint here after every step")


def _add_common_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers for instance batches")
    p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None,
                   help="render figures next to the CSV output")
    p.add_argument("--verbose", "-v", action="store_const", const=True, default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spindrive",
        description="Solve QUBO problems by driving matrix product states with DMRG sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sudoku = sub.add_parser("sudoku", help="solve a Sudoku board file")
    p_sudoku.add_argument("board", type=str, nargs="?", default=None,
                          help="board text file (or 'instance' in the config)")
    _add_solver_options(p_sudoku)
    _add_common_options(p_sudoku)

    p_maxcut = sub.add_parser("maxcut", help="solve MaxCut instance files")
    p_maxcut.add_argument("instances", type=str, nargs="*", default=[],
                          help="instance files or directories "
                               "(or 'instance' in the config)")
    p_maxcut.add_argument("--reference", type=float, default=None,
                          help="known ground energy E0 to verify against")
    _add_solver_options(p_maxcut)
    _add_common_options(p_maxcut)

    p_analyze = sub.add_parser("analyze", help="field/coupling statistics of a model")
    src = p_analyze.add_mutually_exclusive_group(required=True)
    src.add_argument("--board", type=str, help="Sudoku board file")
    src.add_argument("--qubo", type=str, help="QUBO JSON file")
    src.add_argument("--maxcut", type=str, help="MaxCut instance file")
    _add_common_options(p_analyze)

    p_oracle = sub.add_parser("oracle", help="exact solvers for small instances")
    src = p_oracle.add_mutually_exclusive_group(required=True)
    src.add_argument("--qubo", type=str, help="QUBO JSON file")
    src.add_argument("--maxcut", type=str, help="MaxCut instance file")
    p_oracle.add_argument("--dense", action="store_true",
                          help="dense ground energy of a*Hx + b*Hz instead of brute force")
    p_oracle.add_argument("--a", type=float, default=0.0, help="driver weight (with --dense)")
    p_oracle.add_argument("--b", type=float, default=1.0, help="problem weight (with --dense)")
    p_oracle.add_argument("--hx", type=float, default=1.0, help="transverse field (with --dense)")
    _add_common_options(p_oracle)

    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _merge_options(ns: argparse.Namespace) -> dict:
    """defaults < per-command defaults < config file < explicit flags."""
    merged = dict(_DEFAULTS)
    merged.update(_COMMAND_DEFAULTS.get(ns.command, {}))
    merged.update(_load_config(getattr(ns, "config", None)))
    for key in _CONFIG_KEYS:
        value = getattr(ns, key, None)
        if value is not None:
            merged[key] = value
    if merged["out"] is None:
        merged["out"] = os.environ.get("SPINDRIVE_OUT", "runs")
    return merged


def _parse_init(value: str) -> tuple[str, int]:
    if value == "minus":
        return "minus", 3
    if value == "random":
        return "random", 3
    if value.startswith("random:"):
        return "random", int(value.split(":", 1)[1])
    raise ValueError(f"bad --init value {value!r}; use 'minus' or 'random:D'")


def _drive_params(opts: dict, target_energy=None) -> DriveParams:
    init, init_bond = _parse_init(opts["init"])
    sweep = SweepParams(
        max_bond=opts["bond_dim"],
        cutoff=opts["cutoff"],
        eig_tol=opts["eig_tol"],
        nsweeps=opts["sweeps"],
    )
    return DriveParams(
        m_steps=opts["steps"],
        hx=opts["hx"],
        eta=opts["eta"],
        sweep=sweep,
        init=init,
        init_bond=init_bond,
        seed=opts["seed"],
        max_restarts=opts["restarts"],
        target_energy=target_energy,
        rescale=opts["rescale"],
        early_exit=opts["early_exit"],
    )


def _write_run_outputs(report, outdir: Path, figures: bool) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    report_mod.write_report_json(report, outdir / "report.json")
    report_mod.write_trace_csv(report, outdir / "trace.csv")
    report_mod.write_heatmap_csv(report, outdir / "heatmap.csv")
    if figures:
        report_mod.render_trace_figure(report, outdir / "trace.png")
        report_mod.render_heatmap_figure(report, outdir / "heatmap.png")


def _print_step_table(report) -> None:
    print("step      a      b        energy     sx_total     sz_total  bond")
    for s in report.steps:
        print(f"{s.step:4d} {s.a:6.3f} {s.b:6.3f} {s.energy:13.6f} "
              f"{s.sx_total:12.6f} {s.sz_total:12.6f} {s.max_bond:5d}")


def _marked_grid(board, clues) -> str:
    """Render a board with clue cells bracketed."""
    clue_cells = {(i, j) for (i, j, _) in clues}
    side = board.side
    lines = []
    for i in range(1, side + 1):
        row = []
        for j in range(1, side + 1):
            v = board.cells[i - 1][j - 1]
            text = str(v) if v != 0 else "."
            row.append(f"[{text}]" if (i, j) in clue_cells else f" {text} ")
        lines.append("".join(row))
    return "\n".join(lines)


def cmd_sudoku(ns: argparse.Namespace) -> int:
    opts = _merge_options(ns)
    board_path = ns.board if ns.board is not None else opts["instance"]
    if board_path is None:
        raise ValueError("no board given (positional argument or config 'instance')")
    with open(board_path) as fh:
        board = parse_board(fh.read())
    q = full_qubo(board.block_size)
    reduced, cmap = clamp(board, q)
    n_up = board.side ** 2 - board.clue_count()
    outdir = Path(opts["out"]) / Path(board_path).stem
    outdir.mkdir(parents=True, exist_ok=True)

    if cmap.n_free == 0:
        verdict = verify(board)
        print(_marked_grid(board, cmap.fixed_one))
        print(f"fully determined board; constant energy {reduced.offset}")
        (outdir / "solution.txt").write_text(board_to_text(board))
        if verdict.valid and reduced.offset == 0.0:
            return 0
        for v in verdict.violations:
            print(f"violation: {v}", file=sys.stderr)
        return 2

    model = to_ising(reduced)
    target = opts["target_energy"] if opts["target_energy"] is not None else 0.0
    params = _drive_params(opts, target_energy=target)
    initial = load_checkpoint(ns.resume) if ns.resume else None
    report = solve(model, params, n_up_ground=n_up, initial_state=initial,
                   checkpoint_path=ns.checkpoint)
    result = decode(report.final_configuration, cmap, board)
    verdict = verify(result.board) if result.ok else None

    _write_run_outputs(report, outdir, opts["figures"])
    (outdir / "solution.txt").write_text(board_to_text(result.board))
    if opts["verbose"]:
        _print_step_table(report)
    print(_marked_grid(result.board, cmap.fixed_one))
    print(f"free spins: {cmap.n_free}, clues: {board.clue_count()}")
    print(f"final energy: {report.final_energy} after {report.restarts_used} restarts")
    for problem in result.problems:
        print(f"decode: {problem}", file=sys.stderr)
    if verdict is not None and not verdict.valid:
        for v in verdict.violations:
            print(f"violation: {v}", file=sys.stderr)
    ok = (report.final_energy <= target + 1e-9 and result.ok
          and verdict is not None and verdict.valid)
    print("verified" if ok else "not verified")
    return 0 if ok else 2


def _solve_maxcut_instance(path: str, opts: dict, reference) -> dict:
    g = read_graph(path)
    model = to_ising(to_qubo(g))
    params = _drive_params(opts, target_energy=reference)
    report = solve(model, params)
    cut = cut_value(g, report.final_configuration.as_binary())
    matched = None
    if reference is not None:
        matched = abs(report.final_energy - reference) < 1e-9
    return {
        "path": path,
        "report": report,
        "cut": cut,
        "energy": report.final_energy,
        "matched": matched,
        "n_vertices": g.n_vertices,
        "n_edges": g.n_edges,
    }


def _expand_instances(paths) -> list[str]:
    out = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            out.extend(str(f) for f in sorted(path.iterdir()) if f.is_file())
        else:
            out.append(str(path))
    if not out:
        raise ValueError("no instance files found")
    return out


def cmd_maxcut(ns: argparse.Namespace) -> int:
    opts = _merge_options(ns)
    named = ns.instances
    if not named and opts["instance"] is not None:
        conf = opts["instance"]
        named = conf if isinstance(conf, list) else [conf]
    instances = _expand_instances(named)
    reference = opts["reference"]
    jobs = max(1, int(opts["jobs"]))
    results = []
    if jobs > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_solve_maxcut_instance, p, opts, reference)
                       for p in instances]
            results = [f.result() for f in futures]
    else:
        results = [_solve_maxcut_instance(p, opts, reference) for p in instances]

    all_ok = True
    for res in results:
        name = Path(res["path"]).name
        outdir = Path(opts["out"]) / name
        _write_run_outputs(res["report"], outdir, opts["figures"])
        if opts["verbose"]:
            _print_step_table(res["report"])
        line = (f"{name}: energy {res['energy']}, cut {res['cut']}, "
                f"restarts {res['report'].restarts_used}")
        if res["matched"] is not None:
            line += f", reference {reference}, match={res['matched']}"
            all_ok &= res["matched"]
        print(line)
    return 0 if all_ok else 2


def _model_from_source(ns: argparse.Namespace):
    if getattr(ns, "board", None):
        with open(ns.board) as fh:
            board = parse_board(fh.read())
        reduced, _ = clamp(board, full_qubo(board.block_size))
        if reduced.n == 0:
            raise ValueError("board has no free variables to analyze")
        return to_ising(reduced), Path(ns.board).stem
    if getattr(ns, "qubo", None):
        return to_ising(read_qubo(ns.qubo)), Path(ns.qubo).stem
    return to_ising(to_qubo(read_graph(ns.maxcut))), Path(ns.maxcut).stem


def cmd_analyze(ns: argparse.Namespace) -> int:
    opts = _merge_options(ns)
    model, name = _model_from_source(ns)
    profile = characterize(model)
    outdir = Path(opts["out"]) / name
    outdir.mkdir(parents=True, exist_ok=True)
    report_mod.write_hz_csv(model, outdir / "hz.csv")
    report_mod.write_rho_csv(profile, outdir / "rho.csv")
    if opts["figures"]:
        report_mod.render_hz_figure(model, outdir / "hz.png")
        report_mod.render_rho_figure(profile, outdir / "rho.png")
    print(f"spins: {model.n}, couplings: {len(model.couplings)}, "
          f"hz mean {profile.hz_mean:.4g} +- {profile.hz_std:.4g}")
    if profile.rho:
        print(f"rho(1) = {profile.rho[0]:.4g}")
    return 0


def cmd_oracle(ns: argparse.Namespace) -> int:
    graph = None
    if ns.qubo:
        model = to_ising(read_qubo(ns.qubo))
    else:
        graph = read_graph(ns.maxcut)
        model = to_ising(to_qubo(graph))
    if ns.dense:
        if model.n > DENSE_CAP:
            print(f"dense diagonalization is capped at {DENSE_CAP} spins, "
                  f"got {model.n}", file=sys.stderr)
            return 1
        from .mpo import OperatorTerm

        hz_terms, coupling_terms, constant = to_operator_terms(model)
        hx_terms = [OperatorTerm(ns.hx, ((m, "Sx"),)) for m in range(1, model.n + 1)]
        energy = dense_ground_energy(hx_terms, hz_terms + coupling_terms,
                                     ns.a, ns.b, constant, model.n)
        print(f"dense ground energy (a={ns.a}, b={ns.b}, hx={ns.hx}): {energy}")
        return 0
    if model.n > BRUTE_FORCE_CAP:
        print(f"brute force is capped at {BRUTE_FORCE_CAP} spins, got {model.n}",
              file=sys.stderr)
        return 1
    result = brute_force_ground(model)
    print(f"ground energy: {result.best_energy} "
          f"({len(result.best_configs)} minimizers over {result.evaluated_count} configurations)")
    if graph is not None:
        best = result.best_configs[0]
        print(f"max cut value: {cut_value(graph, best.as_binary())}")
    return 0


def main(argv=None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    handlers = {
        "sudoku": cmd_sudoku,
        "maxcut": cmd_maxcut,
        "analyze": cmd_analyze,
        "oracle": cmd_oracle,
    }
    try:
        return handlers[ns.command](ns)
    except InconsistentCluesError as exc:
        print(f"inconsistent clues: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
