"""Command-line front end.

All inputs are JSON documents; tabular outputs are CSV with a fixed column
order documented per command in ``--help``.  Every output file starts with a
provenance block (tool version, command, fully resolved configuration with
all defaults filled in) so any run can be reproduced exactly; the timestamp
line is the only part excluded from byte-for-byte comparison.

Exit codes: 0 success, 2 invalid configuration or input, 3 numerical
failure, 4 infeasible model (empty target or empty compatible set).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .games import (
    Ball,
    FiniteUnion,
    GameError,
    HalfSpace,
    MixedAction,
    Polytope,
    TargetSet,
    VectorGame,
)
from .grids import simplex_grid
from .hjb import (
    SchemeConfig,
    SchemeError,
    classify,
    save_value_grid,
    slices_to_rows,
    solve_value,
)
from .lifted import PotentialClimber, PureColumn, StationaryLifted, run_wsim
from .lp import LpError
from .monitoring import EmptyFiber, SignalStructure, build_etilde
from .simulate import (
    BestResponseAdversary,
    RandomAdversary,
    StationaryAdversary,
    convergence_scan,
    run,
    scan_to_csv,
    trajectory_to_csv,
)
from .synthesis import RepeatedStrategy, build_nadc
from .transport import DiscreteMeasure, TransportError, w2


class ConfigError(ValueError):
    """Bad flags or malformed input files."""


class InfeasibleModel(ValueError):
    """The requested model has no feasible element."""


# ---------------------------------------------------------------- input files


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def load_game(path: str) -> VectorGame:
    doc = load_json(path)
    if "payoffs" not in doc:
        raise ConfigError(f"{path}: missing field 'payoffs'")
    arr = np.asarray(doc["payoffs"], dtype=float)
    if arr.ndim == 2:  # scalar payoffs given as a plain matrix
        arr = arr[:, :, None]
    try:
        return VectorGame(arr)
    except GameError as exc:
        raise ConfigError(f"{path}: field 'payoffs' invalid: {exc}") from exc


def target_from_doc(doc: dict, path: str) -> TargetSet:
    kind = doc.get("type")
    try:
        if kind == "halfspace":
            return HalfSpace(np.asarray(doc["normal"], dtype=float), float(doc["offset"]))
        if kind == "ball":
            return Ball(np.asarray(doc["center"], dtype=float), float(doc["radius"]))
        if kind == "polytope":
            vertices = doc.get("vertices")
            return Polytope(
                np.asarray(doc["normals"], dtype=float),
                np.asarray(doc["offsets"], dtype=float),
                None if vertices is None else np.asarray(vertices, dtype=float),
            )
        if kind == "union":
            return FiniteUnion(tuple(target_from_doc(m, path) for m in doc["members"]))
    except KeyError as exc:
        raise ConfigError(f"{path}: target of type {kind!r} missing field {exc}") from exc
    except GameError as exc:
        if "empty" in str(exc):
            raise InfeasibleModel(f"{path}: {exc}") from exc
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}: unknown target type {kind!r}")


def load_target(path: str) -> TargetSet:
    return target_from_doc(load_json(path), path)


def load_signals(path: str) -> SignalStructure:
    doc = load_json(path)
    if "matrix" not in doc:
        raise ConfigError(f"{path}: missing field 'matrix'")
    try:
        return SignalStructure(np.asarray(doc["matrix"], dtype=float))
    except GameError as exc:
        raise ConfigError(f"{path}: field 'matrix' invalid: {exc}") from exc


def load_measure(path: str) -> DiscreteMeasure:
    doc = load_json(path)
    try:
        return DiscreteMeasure(
            np.asarray(doc["points"], dtype=float), np.asarray(doc["weights"], dtype=float)
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing field {exc}") from exc
    except TransportError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ------------------------------------------------------------------ plumbing


def parse_box(spec: str, d: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Box flag format: 'lo:hi' per dimension, comma separated."""
    if not spec:
        return None
    try:
        pairs = [part.split(":") for part in spec.split(",")]
        lo = np.array([float(p[0]) for p in pairs])
        hi = np.array([float(p[1]) for p in pairs])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"bad --box value {spec!r}; expected lo:hi[,lo:hi...]") from exc
    if lo.size != d:
        raise ConfigError(f"--box has {lo.size} dimensions, payoffs have {d}")
    return lo, hi


def parse_ggrid(spec: str, d: int) -> tuple[int, ...]:
    try:
        parts = [int(p) for p in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --ggrid value {spec!r}") from exc
    if len(parts) == 1:
        parts = parts * d
    if len(parts) != d:
        raise ConfigError(f"--ggrid has {len(parts)} entries, payoffs have {d} dimensions")
    return tuple(parts)


def scheme_config(cfg: dict, game: VectorGame) -> SchemeConfig:
    try:
        return SchemeConfig(
            s0=cfg["s0"],
            steps=cfg["sgrid"],
            g_nodes=parse_ggrid(cfg["ggrid"], game.d),
            action_resolution=cfg["actions"],
            order=cfg["order"],
            box=parse_box(cfg["box"], game.d),
        )
    except SchemeError as exc:
        raise ConfigError(str(exc)) from exc


def header_lines(command: str, cfg: dict) -> list[str]:
    provenance = {"version": __version__, "command": command, "config": cfg}
    return [
        f"# generated: {datetime.now(timezone.utc).isoformat()}",
        "# provenance: " + json.dumps(provenance, sort_keys=True),
    ]


def provenance_to_argv(provenance: dict) -> list[str]:
    """Rebuild the exact command line from a provenance block."""
    argv = [provenance["command"]]
    for key, value in provenance["config"].items():
        argv.extend([f"--{key.replace('_', '-')}", str(value)])
    return argv


def read_provenance(path: str) -> dict:
    with open(path) as fh:
        for line in fh:
            if line.startswith("# provenance: "):
                return json.loads(line[len("# provenance: ") :])
            if line.strip().startswith('"provenance"') or line.strip() == "{":
                fh.seek(0)
                return json.load(fh)["provenance"]
    raise ConfigError(f"{path}: no provenance header found")


def write_kv_csv(path: str, rows: list[tuple], command: str, cfg: dict) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines(command, cfg):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["key", "value"])
        for row in rows:
            writer.writerow(row)


# ------------------------------------------------------------------ commands


def cmd_value(cfg: dict) -> int:
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    scheme = scheme_config(cfg, game)
    result = classify(game, target, scheme, tol=cfg["tol"])
    vg = result["grid"]
    if cfg["grid_out"]:
        save_value_grid(vg, cfg["grid_out"])
    if cfg["slices_out"]:
        with open(cfg["slices_out"], "w", newline="") as fh:
            for line in header_lines("value", cfg):
                fh.write(line + "\n")
            writer = csv.writer(fh)
            writer.writerow(["s"] + [f"g{i + 1}" for i in range(game.d)] + ["V"])
            for row in slices_to_rows(vg):
                writer.writerow(list(row))
    rows = [
        ("estimate", repr(result["estimate"])),
        ("bound", repr(result["bound"])),
        ("verdict", result["verdict"]),
        ("kappa", repr(game.kappa)),
    ]
    write_kv_csv(cfg["out"], rows, "value", cfg)
    print(f"estimate={result['estimate']:.6g} bound={result['bound']:.6g} verdict={result['verdict']}")
    return 0


def cmd_classify(cfg: dict) -> int:
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    scheme = scheme_config(cfg, game)
    result = classify(game, target, scheme, tol=cfg["tol"])
    rows = [
        ("estimate", repr(result["estimate"])),
        ("bound", repr(result["bound"])),
        ("tol", repr(cfg["tol"])),
        ("verdict", result["verdict"]),
    ]
    write_kv_csv(cfg["out"], rows, "classify", cfg)
    print(result["verdict"])
    return 0


def cmd_synthesize(cfg: dict) -> int:
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    scheme = scheme_config(cfg, game)
    vg = solve_value(game, target, scheme)
    try:
        strat = build_nadc(vg, cfg["N"])
    except GameError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        ("N", strat.N),
        ("s0", repr(vg.cfg.s0)),
        ("mstar", strat.mstar),
        ("g0", json.dumps(list(strat.g0))),
        ("x0", json.dumps(list(strat.x0.weights))),
    ]
    write_kv_csv(cfg["out"], rows, "synthesize", cfg)
    return 0


def _adversary(name: str, game: VectorGame, target, scheme: SchemeConfig, n: int, seed: int):
    if name == "stationary-uniform":
        return StationaryAdversary(MixedAction.uniform(game.b))
    if name == "random":
        return RandomAdversary(game.b, seed)
    if name == "best-response":
        from dataclasses import replace

        vg2 = solve_value(game, target, replace(scheme, order="maxmin"))
        return BestResponseAdversary(vg2, n)
    raise ConfigError(f"unknown adversary {name!r}")


def cmd_simulate(cfg: dict) -> int:
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    scheme = scheme_config(cfg, game)
    vg = solve_value(game, target, scheme)
    try:
        strategy = RepeatedStrategy(build_nadc(vg, cfg["N"]), cfg["n"])
    except GameError as exc:
        raise ConfigError(str(exc)) from exc
    adversary = _adversary(cfg["adversary"], game, target, scheme, cfg["n"], cfg["seed"])
    traj = run(strategy, adversary, game, target, cfg["n"])
    trajectory_to_csv(traj, cfg["out"], header_lines("simulate", cfg))
    print(f"final distance {traj.distances[-1]:.6g} after {cfg['n']} stages")
    return 0


def cmd_scan(cfg: dict) -> int:
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    scheme = scheme_config(cfg, game)
    vg = solve_value(game, target, scheme)
    try:
        horizons = sorted({int(h) for h in cfg["horizons"].split(",")})
    except ValueError as exc:
        raise ConfigError(f"bad --horizons value {cfg['horizons']!r}") from exc
    names = [name.strip() for name in cfg["adversaries"].split(",")]
    adversaries = {
        name: (lambda n, name=name: _adversary(name, game, target, scheme, n, cfg["seed"]))
        for name in names
    }
    rows = convergence_scan(
        lambda n: RepeatedStrategy(build_nadc(vg, cfg["N"]), n),
        adversaries,
        game,
        target,
        horizons,
    )
    scan_to_csv(rows, cfg["out"], header_lines("scan", cfg))
    return 0


def cmd_ot(cfg: dict) -> int:
    mu = load_measure(cfg["mu"])
    nu = load_measure(cfg["nu"])
    res = w2(mu, nu)
    with open(cfg["out"], "w", newline="") as fh:
        for line in header_lines("ot", cfg):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["record", "i", "j", "value"])
        writer.writerow(["cost", "", "", repr(res.cost)])
        for i in range(len(mu)):
            writer.writerow(["phi", i, "", repr(float(res.phi[i]))])
        for j in range(len(nu)):
            writer.writerow(["phistar", "", j, repr(float(res.phistar[j]))])
        for i in range(len(mu)):
            for j in range(len(nu)):
                if res.plan[i, j] > 0.0:
                    writer.writerow(["plan", i, j, repr(float(res.plan[i, j]))])
    print(f"W2^2 = {res.cost:.10g}")
    return 0


def _build_et(cfg: dict):
    game = load_game(cfg["game"])
    target = load_target(cfg["target"])
    if not isinstance(target, Polytope):
        raise ConfigError("compatible-set construction needs a polytope target")
    signals = load_signals(cfg["signals"])
    grid_x = [MixedAction(w) for w in simplex_grid(game.a, cfg["actions"] if game.a > 1 else 2)]
    try:
        return build_etilde(game, target, grid_x, signals)
    except EmptyFiber as exc:
        raise InfeasibleModel(str(exc)) from exc
    except GameError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_pm(cfg: dict) -> int:
    et = _build_et(cfg)
    doc = {
        "generated": datetime.now(timezone.utc).isoformat(),
        "provenance": {"version": __version__, "command": "pm", "config": cfg},
        "grid_points": [list(p) for p in et.grid_points],
        "constraint_matrix": [list(r) for r in et.constraint_matrix],
        "constraint_bounds": list(et.constraint_bounds),
        "feasible": et.feasible,
        "n_actions": et.n_actions,
        "n_signals": et.n_signals,
    }
    with open(cfg["out"], "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
    print("feasible" if et.feasible else "empty")
    return 0


def cmd_wsim(cfg: dict) -> int:
    et = _build_et(cfg)
    if not et.feasible:
        raise InfeasibleModel("compatible-distribution polytope is empty")
    name = cfg["adversary"]
    if name == "uniform":
        adversary = StationaryLifted(np.full(et.n_signals, 1.0 / et.n_signals))
    elif name == "climber":
        adversary = PotentialClimber()
    elif name.startswith("column"):
        adversary = PureColumn(et.n_signals, int(name[len("column") :]))
    else:
        raise ConfigError(f"unknown adversary {name!r}")
    traj, _ = run_wsim(et, adversary, cfg["n"], cfg["delta"])
    with open(cfg["out"], "w", newline="") as fh:
        for line in header_lines("wsim", cfg):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["m", "W2sq", "W2"])
        for m in range(len(traj)):
            writer.writerow([m + 1, repr(float(traj.w2sq[m])), repr(float(traj.w2dist[m]))])
    print(f"final W2 = {traj.w2dist[-1]:.6g}")
    return 0


# --------------------------------------------------------------- entry point


def _add_scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s0", type=float, default=0.1, help="start time of the scheme, in (0,1)")
    p.add_argument("--sgrid", type=int, default=50, help="number of backward time steps")
    p.add_argument(
        "--ggrid", default="51", help="state nodes per dimension, single int or comma list"
    )
    p.add_argument("--actions", type=int, default=11, help="action-grid points per simplex edge")
    p.add_argument("--order", choices=["minmax", "maxmin"], default="minmax")
    p.add_argument(
        "--box", default="", help="state box as lo:hi[,lo:hi...]; default: payoff bounding box"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="approach",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="solve the value grid; summary CSV: key,value")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    _add_scheme_flags(p)
    p.add_argument("--tol", type=float, default=0.1, help="verdict tolerance")
    p.add_argument("--out", required=True, help="summary CSV path")
    p.add_argument("--grid-out", dest="grid_out", default="", help="optional value-grid container")
    p.add_argument(
        "--slices-out", dest="slices_out", default="", help="optional slice CSV: s,g_1..g_d,V"
    )

    p = sub.add_parser("classify", help="verdict only; CSV columns: key,value")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    _add_scheme_flags(p)
    p.add_argument("--tol", type=float, default=0.1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synthesize", help="build the delayed feedback strategy; CSV: key,value")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    _add_scheme_flags(p)
    p.add_argument("--N", type=int, required=True, help="mesh intervals of the strategy")
    p.add_argument("--out", required=True)

    p = sub.add_parser(
        "simulate", help="repeated-game run; CSV: m,x*,y*,g*,gbar*,distance"
    )
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    _add_scheme_flags(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="horizon")
    p.add_argument(
        "--adversary",
        choices=["stationary-uniform", "best-response", "random"],
        default="best-response",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("scan", help="worst-case distance per horizon; CSV: n,max_final_distance,argmax_adversary")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    _add_scheme_flags(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--horizons", required=True, help="comma-separated horizons")
    p.add_argument(
        "--adversaries",
        default="stationary-uniform,best-response,random",
        help="comma-separated adversary names",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="accepted for interface parity; runs are sequential")
    p.add_argument("--out", required=True)

    p = sub.add_parser("ot", help="optimal transport; CSV: record,i,j,value")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pm", help="compatible-distribution polytope; JSON output")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--actions", type=int, default=3, help="own-action grid resolution")
    p.add_argument("--out", required=True)

    p = sub.add_parser("wsim", help="greedy lifted simulation; CSV: m,W2sq,W2")
    p.add_argument("--game", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--actions", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--adversary", default="uniform", help="uniform | climber | column<k>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    return parser


_COMMANDS = {
    "value": cmd_value,
    "classify": cmd_classify,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "ot": cmd_ot,
    "pm": cmd_pm,
    "wsim": cmd_wsim,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    cfg = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleModel as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4
    except (EmptyFiber,) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4
    except SchemeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LpError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (GameError, TransportError) as exc:
        if "empty" in str(exc).lower() or "infeasible" in str(exc).lower():
            print(f"infeasible: {exc}", file=sys.stderr)
            return 4
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
