"""Command-line interface: config-driven runs writing file artifacts.

Subcommands:
  run       evolve a configured system; write density CSVs, optional PGM
            heatmaps and measurement histograms, the per-substep audit,
            and the cumulative CNOT ledger into --out
  layout    print the qubit register map for a config
  schedule  print the substep schedule for a config

All artifacts are deterministic functions of the config file and the seed:
rows are emitted in sorted order and floats with 17 significant digits, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cfl import build_cycle, schedule_table
from .errors import ConfigError, QBoltzError
from .kernels import ACTIVE_IMPL
from .layout import GridSpec, VelocityTable, build_layout
from .reflection import Box
from .sim import PrepSpec, RunResult, run_simulation


@dataclass(frozen=True)
class RunSettings:
    grid: GridSpec
    velocity: VelocityTable
    boxes: tuple[Box, ...]
    prep: PrepSpec
    cycles: int
    snapshots: tuple[int, ...]
    backend: str
    shots: int
    seed: int
    exclude: str
    oracle_check: bool


def load_settings(path: str | Path) -> RunSettings:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return settings_from_dict(raw)


def settings_from_dict(raw: dict) -> RunSettings:
    known = {
        "grid", "velocities", "obstacles", "prep", "cycles", "snapshots",
        "backend", "shots", "seed", "exclude", "oracle_check",
    }
    stray = set(raw) - known
    if stray:
        raise ConfigError(f"unknown config keys: {sorted(stray)}")
    try:
        grid = GridSpec(tuple(raw["grid"]))
        velocity = VelocityTable.from_lists(raw["velocities"])
    except KeyError as exc:
        raise ConfigError(f"config is missing required key {exc}") from exc
    try:
        boxes = tuple(
            Box(tuple(b["lo"]), tuple(b["hi"])) for b in raw.get("obstacles", [])
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(
            "each obstacle must be an object with 'lo' and 'hi' corner lists"
        ) from exc
    prep_raw = raw.get("prep", {})
    stray_prep = set(prep_raw) - {"x", "h"}
    if stray_prep:
        raise ConfigError(f"unknown prep keys: {sorted(stray_prep)}")
    prep = PrepSpec(
        x_roles=tuple(prep_raw.get("x", ())),
        h_roles=tuple(prep_raw.get("h", ())),
    )
    exclude = raw.get("exclude", "obstacle-interior")
    if exclude not in ("none", "obstacle-interior"):
        raise ConfigError("exclude must be 'none' or 'obstacle-interior'")
    backend = raw.get("backend", "perm")
    if backend not in ("dense", "perm"):
        raise ConfigError("backend must be 'dense' or 'perm'")
    return RunSettings(
        grid=grid,
        velocity=velocity,
        boxes=boxes,
        prep=prep,
        cycles=int(raw.get("cycles", 1)),
        snapshots=tuple(int(c) for c in raw.get("snapshots", ())),
        backend=backend,
        shots=int(raw.get("shots", 0)),
        seed=int(raw.get("seed", 0)),
        exclude=exclude,
        oracle_check=bool(raw.get("oracle_check", False)),
    )


def execute(settings: RunSettings) -> RunResult:
    stray = sorted({c for c in settings.snapshots if not 0 <= c <= settings.cycles})
    if stray:
        raise ConfigError(
            f"snapshot cycles {stray} fall outside the run (0..{settings.cycles})"
        )
    snapshot_cycles = set(settings.snapshots) | {settings.cycles}
    return run_simulation(
        grid=settings.grid,
        velocity=settings.velocity,
        boxes=settings.boxes,
        prep=settings.prep,
        cycles=settings.cycles,
        backend=settings.backend,
        check_oracle=settings.oracle_check,
        snapshot_cycles=sorted(snapshot_cycles),
    )


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_density_csv(path: Path, density: np.ndarray) -> None:
    ndim = density.ndim
    header = ",".join("xyz"[:ndim]) + ",mass"
    lines = [header]
    for cell in np.ndindex(density.shape):
        coords = ",".join(str(c) for c in cell)
        lines.append(f"{coords},{_fmt(float(density[cell]))}")
    path.write_text("\n".join(lines) + "\n")


def write_histogram_csv(path: Path, counts: dict[tuple[int, ...], int], ndim: int) -> None:
    header = ",".join("xyz"[:ndim]) + ",count"
    lines = [header]
    for cell in sorted(counts):
        coords = ",".join(str(c) for c in cell)
        lines.append(f"{coords},{counts[cell]}")
    path.write_text("\n".join(lines) + "\n")


def write_heatmap_pgm(path: Path, density: np.ndarray) -> None:
    """8-bit PGM, scaled to the peak cell.  Row r is y = (Ny-1-r), so +y
    points up; columns follow x."""
    if density.ndim != 2:
        raise ConfigError("heatmaps are only defined for 2D grids")
    nx, ny = density.shape
    peak = float(density.max())
    scale = 255.0 / peak if peak > 0 else 0.0
    rows = bytearray()
    for r in range(ny):
        y = ny - 1 - r
        for x in range(nx):
            rows.append(int(round(float(density[x, y]) * scale)))
    path.write_bytes(f"P5\n{nx} {ny}\n255\n".encode() + bytes(rows))


def write_audit_csv(path: Path, result: RunResult) -> None:
    lines = ["substep,cycle,time,stepping,cnots,ancilla_mass,obstacle_mass,norm_error,oracle_dev"]
    for r in result.reports:
        stepping = "+".join(str(m) for m in r.stepping)
        dev = _fmt(r.oracle_dev) if r.oracle_dev is not None else ""
        lines.append(
            f"{r.index},{r.cycle},{r.time},{stepping},{r.cnots},"
            f"{_fmt(r.ancilla_mass)},{_fmt(r.obstacle_mass)},{_fmt(r.norm_error)},{dev}"
        )
    path.write_text("\n".join(lines) + "\n")


def write_ledger_csv(path: Path, result: RunResult) -> None:
    lines = ["scope,cnots"]
    for scope in sorted(result.cost_paths):
        lines.append(f"{scope},{result.cost_paths[scope]}")
    lines.append(f"total,{result.total_cnots}")
    path.write_text("\n".join(lines) + "\n")


def gate_report(result: RunResult) -> str:
    """Cumulative CNOT table grouped one level below the substep."""
    groups: dict[str, int] = {}
    for path, cost in result.cost_paths.items():
        parts = path.split("/")
        group = parts[1] if len(parts) > 1 else parts[0]
        groups[group] = groups.get(group, 0) + cost
    width = max(len(g) for g in groups) if groups else 8
    lines = [f"{'group':<{width}}  cnots"]
    for group in sorted(groups):
        lines.append(f"{group:<{width}}  {groups[group]}")
    lines.append(f"{'total':<{width}}  {result.total_cnots}")
    return "\n".join(lines)


def cmd_run(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    overrides = {}
    if args.backend:
        overrides["backend"] = args.backend
    if args.cycles is not None:
        overrides["cycles"] = args.cycles
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.snapshots:
        overrides["snapshots"] = tuple(
            int(c) for c in args.snapshots.split(",") if c
        )
    if args.oracle_diff:
        overrides["oracle_check"] = True
    if overrides:
        settings = RunSettings(**{**settings.__dict__, **overrides})

    result = execute(settings)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ndim = settings.grid.ndim
    for cycle, density in sorted(result.snapshots.items()):
        write_density_csv(out / f"density_t{cycle:03d}.csv", density)
        if ndim == 2:
            write_heatmap_pgm(out / f"heatmap_t{cycle:03d}.pgm", density)
        if settings.shots > 0:
            counts = result.sample_snapshot(
                cycle, settings.shots, settings.seed,
                exclude_obstacle=(settings.exclude == "obstacle-interior"),
            )
            write_histogram_csv(out / f"histogram_t{cycle:03d}.csv", counts, ndim)
    write_audit_csv(out / "audit.csv", result)
    write_ledger_csv(out / "ledger.csv", result)

    summary = {
        "backend": settings.backend,
        "kernels": ACTIVE_IMPL,
        "qubits": result.layout.num_qubits,
        "cycles": settings.cycles,
        "substeps": len(result.reports),
        "total_cnots": result.total_cnots,
        "excluded_cells": len(result.obstacle_cells)
        if settings.exclude == "obstacle-interior" else 0,
        "snapshots": sorted(result.snapshots),
        "max_ancilla_mass": max((r.ancilla_mass for r in result.reports), default=0.0),
        "max_obstacle_mass": max((r.obstacle_mass for r in result.reports), default=0.0),
        "max_oracle_dev": max(
            (r.oracle_dev for r in result.reports if r.oracle_dev is not None),
            default=None,
        ),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    print(f"{result.layout.num_qubits} qubits, {len(result.reports)} substeps, "
          f"{result.total_cnots} CNOTs -> {out}")
    if args.gate_report:
        print(gate_report(result))
    return 0


def cmd_layout(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    print(build_layout(settings.grid, settings.velocity).describe())
    return 0


def cmd_schedule(args: argparse.Namespace) -> int:
    settings = load_settings(args.config)
    print(schedule_table(build_cycle(settings.velocity.all_magnitudes())), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qboltz",
        description="Quantum circuit simulation of collisionless lattice transport",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured system and write artifacts")
    run.add_argument("config", help="JSON config file")
    run.add_argument("--out", default="out", help="artifact directory (default: out)")
    run.add_argument("--backend", choices=("dense", "perm"))
    run.add_argument("--cycles", type=int)
    run.add_argument("--shots", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--snapshots", help="comma-separated cycle numbers")
    run.add_argument("--oracle-diff", action="store_true",
                     help="evolve the classical reference alongside and record deviations")
    run.add_argument("--gate-report", action="store_true",
                     help="print the cumulative CNOT table")
    run.set_defaults(func=cmd_run)

    lay = sub.add_parser("layout", help="print the register map for a config")
    lay.add_argument("config")
    lay.set_defaults(func=cmd_layout)

    sched = sub.add_parser("schedule", help="print the substep schedule for a config")
    sched.add_argument("config")
    sched.set_defaults(func=cmd_schedule)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QBoltzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
