"""Command-line interface: ``vortexshape {simulate,crosscheck,stability,invariants}``.

Exit codes: 0 success, 1 configuration error, 2 halted integration (or, for
``crosscheck``, a deviation above tolerance).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import problems as pb
from .errors import DomainError
from .shape import ShapePoint
from .sphere import Circulations
from .stability import EnergyCasimirSpec, analyze_tetrahedron, tetrahedron_configuration
from .timeint import IntegratorConfig, TrajectoryRecord, drift

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HALTED = 2
POSITION_TOL = 1e-6


class ConfigError(ValueError):
    """A configuration field is missing or invalid; the message names the field."""


@dataclass
class RunConfig:
    level: str
    c: Circulations
    X0: np.ndarray | None
    shape0: ShapePoint | None
    phases: np.ndarray | None
    integrator: IntegratorConfig
    project_constraints: bool
    raw: dict


# --- config parsing ----------------------------------------------------------


def _field(d: dict, key: str, where: str, default: Any = ...) -> Any:
    if key in d:
        return d[key]
    if default is ...:
        raise ConfigError(f"missing field '{where}{key}'")
    return default


def _float_list(v: Any, name: str) -> np.ndarray:
    try:
        arr = np.asarray(v, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}' must be a list of numbers") from None
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"field '{name}' contains non-finite values")
    return arr


def load_config(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def parse_integrator(d: dict) -> IntegratorConfig:
    allowed = {"method", "t_end", "dt", "rtol", "atol", "sample_stride", "sample_dt", "max_steps"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown field 'integrator.{sorted(unknown)[0]}'")
    try:
        return IntegratorConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'integrator': {exc}") from None


def _initial_positions(init: dict, n: int, R: float, seed_override: int | None) -> np.ndarray:
    if "positions" in init:
        X = _float_list(init["positions"], "initial.positions")
        if X.shape != (n, 3):
            raise ConfigError(f"field 'initial.positions' must have {n} rows of 3 numbers (one per circulation)")
        r = np.linalg.norm(X, axis=1)
        bad = np.flatnonzero(np.abs(r - R) > POSITION_TOL * R)
        if bad.size:
            raise ConfigError(f"field 'initial.positions': vortex {bad[0] + 1} is off the sphere of radius {R}")
        return R * X / r[:, None]
    preset = _field(init, "preset", "initial.")
    if preset == "tetrahedron":
        if n != 4:
            raise ConfigError("field 'initial.preset': tetrahedron needs exactly 4 circulations")
        X = tetrahedron_configuration(R)
    elif preset == "ring":
        m = int(_field(init, "n", "initial.", n))
        if m != n:
            raise ConfigError(f"field 'initial.n' ({m}) does not match the number of circulations ({n})")
        X = pb.ring_configuration(n, float(_field(init, "colatitude", "initial.", np.pi / 2)), R)
    elif preset == "random":
        m = int(_field(init, "n", "initial.", n))
        if m != n:
            raise ConfigError(f"field 'initial.n' ({m}) does not match the number of circulations ({n})")
        seed = seed_override if seed_override is not None else int(_field(init, "seed", "initial.", 0))
        X = pb.random_configuration(n, R, seed)
    else:
        raise ConfigError(f"field 'initial.preset': unknown preset {preset!r}")
    pert = init.get("perturbation")
    if pert:
        size = float(_field(pert, "size", "initial.perturbation."))
        seed = seed_override if seed_override is not None else int(pert.get("seed", 0))
        rng = np.random.default_rng(seed)
        X = X + size * R * rng.standard_normal(X.shape)
        X = R * X / np.linalg.norm(X, axis=1)[:, None]
    return X


def parse_config(data: dict, seed_override: int | None = None) -> RunConfig:
    level = data.get("level", "sphere")
    if level not in pb.LEVELS:
        raise ConfigError(f"field 'level' must be one of {', '.join(pb.LEVELS)}")
    gamma = _float_list(_field(data, "gamma", ""), "gamma")
    if gamma.ndim != 1 or gamma.size < 1:
        raise ConfigError("field 'gamma' must be a non-empty list")
    if np.any(gamma == 0):
        raise ConfigError("field 'gamma' must not contain zeros")
    R = data.get("R", 1.0)
    if not isinstance(R, (int, float)) or not R > 0:
        raise ConfigError("field 'R' must be a positive number")
    c = Circulations(gamma, float(R))
    if "N" in data and int(data["N"]) != c.N:
        raise ConfigError(f"field 'N' ({data['N']}) does not match len(gamma) ({c.N})")
    init = _field(data, "initial", "")
    if not isinstance(init, dict):
        raise ConfigError("field 'initial' must be an object")
    X0 = shape0 = None
    if "shape" in init:
        if level != "shape":
            raise ConfigError("field 'initial.shape' is only valid with level 'shape'")
        sd = init["shape"]
        s = _float_list(_field(sd, "s", "initial.shape."), "initial.shape.s")
        mu = _float_list(sd.get("mu", []), "initial.shape.mu").reshape(-1, 2) if sd.get("mu") else np.zeros((0, 2))
        try:
            shape0 = ShapePoint(s, mu[:, 0] + 1j * mu[:, 1])
        except ValueError as exc:
            raise ConfigError(f"field 'initial.shape': {exc}") from None
        if shape0.N != c.N:
            raise ConfigError(f"field 'initial.shape.s' implies N={shape0.N}, but gamma has {c.N} entries")
    else:
        X0 = _initial_positions(init, c.N, c.R, seed_override)
    phases = init.get("phases")
    if phases is not None:
        phases = _float_list(phases, "initial.phases")
        if phases.shape != (c.N,):
            raise ConfigError(f"field 'initial.phases' must have {c.N} entries")
    integ = parse_integrator(data.get("integrator", {}))
    return RunConfig(level, c, X0, shape0, phases, integ, bool(data.get("project_constraints", False)), data)


def build_problem(cfg: RunConfig) -> pb.Problem:
    if cfg.level == "shape":
        if cfg.shape0 is not None:
            return pb.shape_problem_from_point(cfg.shape0, cfg.c, cfg.project_constraints)
        return pb.shape_problem(cfg.X0, cfg.c, cfg.project_constraints)
    if cfg.level in ("lifted", "liepoisson"):
        return pb.make_problem(cfg.level, cfg.X0, cfg.c, phases=cfg.phases)
    return pb.make_problem(cfg.level, cfg.X0, cfg.c)


# --- output ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path: Path, problem: pb.Problem, rec: TrajectoryRecord) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(problem.columns)
        for k, t in enumerate(rec.times):
            row = [_fmt(t), *(_fmt(v) for v in rec.states[k])]
            row += [_fmt(rec.monitors[name][k]) for name in problem.monitors]
            w.writerow(row)


def read_trajectory_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"trajectory {path} is empty")
    header = rows[0]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    except ValueError:
        raise ConfigError(f"trajectory {path} contains non-numeric entries") from None
    return header, data.reshape(len(rows) - 1, len(header))


def _write_json(path: Path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=True)
        fh.write("\n")


def _drift_summary(rec: TrajectoryRecord) -> dict[str, float]:
    return {k: drift(v) for k, v in rec.monitors.items()}


# --- commands ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = parse_config(load_config(args.config), args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    rec = problem.run(cfg.integrator)
    write_trajectory_csv(out / "trajectory.csv", problem, rec)
    drifts = _drift_summary(rec)
    summary = {
        "level": cfg.level,
        "N": cfg.c.N,
        "R": cfg.c.R,
        "gamma": cfg.c.gamma.tolist(),
        "t_final": float(rec.times[-1]),
        "samples": int(len(rec.times)),
        "steps": rec.n_steps,
        "rejected_steps": rec.n_rejected,
        "renormalizations": rec.n_corrections,
        "halted": rec.halted,
        "halt_reason": rec.halt_reason,
        "drifts": drifts,
    }
    if args.tolerance is not None:
        summary["tolerance"] = args.tolerance
        summary["within_tolerance"] = {k: bool(v <= args.tolerance) for k, v in drifts.items()}
    _write_json(out / "summary.json", summary)
    print(f"{cfg.level}: {len(rec.times)} samples to t={rec.times[-1]:.6g}, {rec.n_steps} steps")
    for k, v in drifts.items():
        print(f"  drift {k:>10}: {v:.3e}")
    if rec.halted:
        print(f"halted: {rec.halt_reason}", file=sys.stderr)
        return EXIT_HALTED
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    cfg = parse_config(load_config(args.config), args.seed)
    if cfg.X0 is None:
        raise ConfigError("field 'initial': crosscheck needs sphere positions or a preset, not a shape")
    tol = 1e-6 if args.tolerance is None else args.tolerance
    sample_dt = float(cfg.raw.get("sample_dt", 0.1))
    checks = [pb.reduction_chain(cfg.X0, cfg.c, cfg.integrator, sample_dt)]
    if cfg.c.N >= 2:
        checks.append(pb.shape_equivalence(cfg.X0, cfg.c, cfg.integrator, sample_dt))
    report = {
        "N": cfg.c.N,
        "tolerance": tol,
        "checks": [
            {"name": ch.name, "deviation": ch.deviation, "ok": ch.ok(tol), "halt_reason": ch.halt_reason}
            for ch in checks
        ],
    }
    report["ok"] = all(ch["ok"] for ch in report["checks"])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "crosscheck.json", report)
    for ch in report["checks"]:
        print(f"{'PASS' if ch['ok'] else 'FAIL'}  {ch['name']}: sup deviation {ch['deviation']:.3e} (tol {tol:g})")
    if any(ch.halt_reason for ch in checks):
        return EXIT_HALTED
    return EXIT_OK if report["ok"] else EXIT_HALTED


def cmd_stability(args) -> int:
    data = load_config(args.config) if args.config else {}
    gamma = args.gamma if args.gamma is not None else data.get("gamma")
    if gamma is None:
        raise ConfigError("missing field 'gamma' (or --gamma)")
    gamma = _float_list(gamma, "gamma")
    if gamma.shape != (4,):
        raise ConfigError("tetrahedron analysis requires N=4")
    R = args.radius if args.radius is not None else float(data.get("R", 1.0))
    sd = data.get("stability", {})
    try:
        spec = EnergyCasimirSpec.quadratic(
            phi_slope=float(sd.get("phi_slope", -1.5)),
            phi_curvature=float(sd.get("phi_curvature", 0.0)),
            psi_weights=sd.get("psi_weights", (1.0, 1.0, 1.0)),
            psi_linear=sd.get("psi_linear", (0.0, 0.0, 0.0)),
        )
        report = analyze_tetrahedron(gamma, R, spec)
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    print(report.table())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "stability.json", report.to_dict())
    return EXIT_OK


_LEVEL_BY_FIRST_COLUMN = {"x1_1": "sphere", "re_z1": "lifted", "lam_1": "liepoisson", "s_1": "shape"}


def cmd_invariants(args) -> int:
    header, data = read_trajectory_csv(args.trajectory)
    if len(header) < 2 or header[0] != "t" or header[1] not in _LEVEL_BY_FIRST_COLUMN:
        raise ConfigError(f"trajectory {args.trajectory}: unrecognized header")
    level = _LEVEL_BY_FIRST_COLUMN[header[1]]
    cfgd = load_config(args.config) if args.config else {}
    gamma = args.gamma if args.gamma is not None else cfgd.get("gamma")
    if gamma is None:
        raise ConfigError("missing field 'gamma' (or --gamma)")
    R = args.radius if args.radius is not None else float(cfgd.get("R", 1.0))
    c = Circulations(_float_list(gamma, "gamma"), R)
    monitors = {
        "sphere": pb.sphere_monitors,
        "lifted": pb.lifted_monitors,
        "liepoisson": pb.liepoisson_monitors,
        "shape": pb.shape_monitors,
    }[level](c)
    width = {"sphere": 3 * c.N, "lifted": 4 * c.N, "liepoisson": c.N**2, "shape": (c.N - 1) ** 2}[level]
    if len(header) < 1 + width:
        raise ConfigError(f"trajectory {args.trajectory} has too few state columns for N={c.N}")
    states = data[:, 1 : 1 + width]
    series = {k: np.array([m(y) for y in states]) for k, m in monitors.items()}
    drifts = {k: drift(v) for k, v in series.items()}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "invariants.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *series])
            for k, t in enumerate(data[:, 0]):
                w.writerow([_fmt(t), *(_fmt(series[name][k]) for name in series)])
        _write_json(out / "invariants.json", {"level": level, "drifts": drifts})
    for k, v in drifts.items():
        print(f"drift {k:>10}: {v:.3e}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; exit status 2 is reserved for halted runs
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vortexshape", description="Point vortices on the sphere and their reductions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="JSON run configuration")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--tolerance", type=float, help="acceptance tolerance")
        sp.add_argument("--seed", type=int, help="override the random seed of the config")

    s = sub.add_parser("simulate", help="integrate one level and write trajectory.csv and summary.json")
    common(s)
    s.set_defaults(func=cmd_simulate, out_default="vortexshape-output")
    s = sub.add_parser("crosscheck", help="compare sphere, lifted and shape trajectories")
    common(s)
    s.set_defaults(func=cmd_crosscheck)
    s = sub.add_parser("stability", help="energy-Casimir analysis of the tetrahedron")
    common(s, config_required=False)
    s.add_argument("--gamma", type=float, nargs=4, metavar="G", help="four circulations")
    s.add_argument("--radius", type=float, help="sphere radius R")
    s.set_defaults(func=cmd_stability)
    s = sub.add_parser("invariants", help="recompute monitors from a saved trajectory CSV")
    s.add_argument("trajectory", help="trajectory.csv written by simulate")
    common(s, config_required=False)
    s.add_argument("--gamma", type=float, nargs="+", metavar="G", help="circulations")
    s.add_argument("--radius", type=float, help="sphere radius R")
    s.set_defaults(func=cmd_invariants)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None and hasattr(args, "out_default"):
        args.out = args.out_default
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
