"""Command-line front end: configuration, orchestration, and persistence.

``solitonsim <command> --config path.json [--key=value ...]`` runs one
experiment per invocation and writes, into the configured output directory:

* ``config_echo.json``   -- the validated configuration actually used,
* ``ledger.csv`` / report CSVs per command,
* ``summary.json``       -- pass/fail of every check performed.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical abort or
a failed numerical gate.  All floating output carries 17 significant digits;
runs with identical configuration (including seeds) are byte-identical.
SOLITONSIM_THREADS caps sweep concurrency.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import _kernels
from .elliptic import EllipticConfig, solve_elliptic, write_history_csv
from .evolver import (
    EnergyRecord,
    InstabilityError,
    MapState,
    SolverConfig,
    check_energy_inequality,
    deviations_monotone,
    epsilon_sweep,
    evolve,
)
from .geometry import (
    SPHERE,
    hermitian_hessian_residual,
    killing_symmetrized_residual,
)
from .grid import (
    GridField,
    PeriodicGrid1D,
    PeriodicGrid2D,
    laplacian,
    l2_norm,
    read_field_csv,
    write_field_csv,
)
from .profiles import (
    bump_degree_sheet,
    latitude_profile,
    pole_profile,
    sheet_from_profile,
    suspension_sheet,
    tangent_perturbation,
)
from .verify import (
    build_soliton_frames,
    holomorphic_isometry_check,
    ishimori_phi,
    ishimori_residual,
    poisson_source,
    residual_refinement,
    schrodinger_residual,
    sheet_degree,
    spacetime_sheet,
)

COMMANDS = (
    "evolve",
    "soliton-profile",
    "verify-reduction",
    "ishimori",
    "sweep-eps",
    "refine",
    "check-geometry",
)


class ConfigError(ValueError):
    pass


_SECTION_KEYS = {
    "": {
        "command",
        "output_dir",
        "grid",
        "solver",
        "elliptic",
        "initial_data",
        "sweep",
        "refine",
        "verify",
        "ishimori",
        "geometry_checks",
        "snapshots",
    },
    "grid": {"n", "length", "nx", "ny", "lx", "ly"},
    "solver": {
        "dt",
        "t_end",
        "epsilon",
        "scheme",
        "renormalize_every",
        "record_every",
        "constraint_tol",
        "tangency_tol",
        "cfl_factor",
        "energy_tol",
    },
    "elliptic": {"flow_dt", "max_iters", "residual_target", "mode"},
    "initial_data": {"kind", "k", "costheta", "path", "base", "amplitude", "seed", "modes", "south"},
    "sweep": {"eps_list"},
    "refine": {"n_list", "k", "t_end", "dt_factor"},
    "verify": {"n_pair", "k", "oracle_tol"},
    "ishimori": {"n_pair", "window", "dt_factor", "stride", "k", "costheta"},
    "geometry_checks": {"num_points", "fd_step", "seed"},
}


def _check_keys(section: str, obj: dict) -> None:
    allowed = _SECTION_KEYS[section]
    unknown = sorted(set(obj) - allowed)
    if unknown:
        where = f"section {section!r}" if section else "top level"
        raise ConfigError(f"unknown keys at {where}: {', '.join(unknown)}")


def load_config(path, overrides=None, command=None) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        _apply_override(cfg, key, value)
    if command is not None:
        cfg["command"] = command
    validate_config(cfg)
    return cfg


def _apply_override(cfg: dict, dotted: str, raw: str) -> None:
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-object key {part!r}")
    node[parts[-1]] = value


def validate_config(cfg: dict) -> None:
    _check_keys("", cfg)
    command = cfg.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    if "output_dir" not in cfg:
        raise ConfigError("output_dir is required")
    for section in cfg:
        if section in ("command", "output_dir", "snapshots"):
            continue
        if not isinstance(cfg[section], dict):
            raise ConfigError(f"section {section!r} must be an object")
        _check_keys(section, cfg[section])
    initial = cfg.get("initial_data")
    if initial is not None:
        _validate_initial(initial)


def _validate_initial(spec: dict) -> None:
    _check_keys("initial_data", spec)
    kind = spec.get("kind")
    if kind not in ("pole", "latitude", "file", "perturbed"):
        raise ConfigError(f"unrecognized initial_data kind {kind!r}")
    if kind == "latitude":
        if "k" not in spec or "costheta" not in spec:
            raise ConfigError("latitude initial data needs k and costheta")
        if not -1.0 <= float(spec["costheta"]) <= 1.0:
            raise ConfigError("costheta must lie in [-1, 1]")
    if kind == "file" and "path" not in spec:
        raise ConfigError("file initial data needs path")
    if kind == "perturbed":
        for key in ("base", "amplitude", "seed"):
            if key not in spec:
                raise ConfigError(f"perturbed initial data needs {key}")
        _validate_initial(spec["base"])


def load_initial(spec: dict, grid: PeriodicGrid1D) -> MapState:
    """Build the initial map and velocity from an initial_data spec."""
    _validate_initial(spec)
    kind = spec["kind"]
    if kind == "pole":
        u = pole_profile(grid, south=bool(spec.get("south", False)))
    elif kind == "latitude":
        u = latitude_profile(grid, int(spec["k"]), float(spec["costheta"]))
    elif kind == "file":
        field = read_field_csv(spec["path"])
        if field.is_scalar or field.values.shape != (grid.n, 3):
            raise ConfigError(
                f"file initial data has shape {field.values.shape}, "
                f"expected ({grid.n}, 3)"
            )
        nrm = np.sqrt(np.einsum("ij,ij->i", field.values, field.values))
        if np.max(np.abs(nrm - 1.0)) > 1e-3:
            raise ConfigError(
                "file initial data deviates from unit length by more than 1e-3"
            )
        u = GridField(grid, field.values / nrm[:, None])
    else:
        base = load_initial(spec["base"], grid)
        u = tangent_perturbation(
            GridField(grid, base.u),
            float(spec["amplitude"]),
            int(spec["seed"]),
            modes=int(spec.get("modes", 2)),
        )
    return MapState(grid, u.values, np.zeros_like(u.values))


def _grid_1d(cfg: dict) -> PeriodicGrid1D:
    g = cfg.get("grid")
    if not g or "n" not in g:
        raise ConfigError("grid.n is required")
    return PeriodicGrid1D(int(g["n"]), float(g.get("length", 2.0 * math.pi)))


def _solver_config(cfg: dict) -> SolverConfig:
    s = dict(cfg.get("solver") or {})
    s.pop("energy_tol", None)
    if "dt" not in s or "t_end" not in s:
        raise ConfigError("solver.dt and solver.t_end are required")
    try:
        return SolverConfig(**s)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_ledger(path: Path, ledger: list[EnergyRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(EnergyRecord.CSV_COLUMNS + "\n")
        for rec in ledger:
            fh.write(rec.csv_row() + "\n")


# ---------------------------------------------------------------------------
# command handlers (each returns the summary dict with a "passed" flag)


def _cmd_evolve(cfg: dict, outdir: Path) -> dict:
    grid = _grid_1d(cfg)
    config = _solver_config(cfg)
    config.check_grid(grid)
    state = load_initial(cfg.get("initial_data", {"kind": "pole"}), grid)
    t0 = time.perf_counter()
    result = evolve(state, config, store_trajectory=bool(cfg.get("snapshots", False)))
    elapsed = time.perf_counter() - t0
    _write_ledger(outdir / "ledger.csv", result.ledger)
    if cfg.get("snapshots", False):
        for i, snap in enumerate(result.trajectory):
            write_field_csv(GridField(grid, snap.u), outdir / f"snap_{i:06}.csv")
    h0 = result.ledger[0].hamiltonian
    energy_tol = (cfg.get("solver") or {}).get("energy_tol")
    if energy_tol is None:
        energy_tol = (
            1e-4 * max(1.0, abs(h0))
            if config.epsilon == 0
            else 10.0 * config.dt**2
        )
    ineq = check_energy_inequality(result.ledger, config.epsilon, float(energy_tol))
    summary = {
        "command": "evolve",
        "aborted": result.aborted,
        "abort_time": result.abort_time,
        "abort_reason": result.abort_reason,
        "constraint": {
            "max_constraint_drift": result.max_constraint_drift,
            "max_tangency_drift": result.max_tangency_drift,
            "max_pre_renorm_drift": result.max_pre_renorm_drift,
        },
        "energy": {
            "h0": h0,
            "h_end": result.ledger[-1].hamiltonian,
            "tolerance": float(energy_tol),
            "max_violation": ineq.max_violation,
            "inequality_passed": ineq.passed,
        },
        "steps": int(round(config.t_end / config.dt)),
        "runtime_s": elapsed,
        "passed": (not result.aborted)
        and ineq.passed
        and result.max_constraint_drift <= config.constraint_tol
        and result.max_tangency_drift <= config.tangency_tol,
    }
    return summary


def _elliptic_config(cfg: dict, grid: PeriodicGrid1D) -> EllipticConfig:
    e = dict(cfg.get("elliptic") or {})
    e.setdefault("flow_dt", 0.9 * grid.h**2 / 4.0)
    try:
        return EllipticConfig(**e)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_soliton_profile(cfg: dict, outdir: Path) -> dict:
    grid = _grid_1d(cfg)
    config = _elliptic_config(cfg, grid)
    state = load_initial(cfg.get("initial_data", {"kind": "pole"}), grid)
    result = solve_elliptic(GridField(grid, state.u), config)
    write_field_csv(result.u, outdir / "profile.csv")
    write_history_csv(result.history, outdir / "history.csv")
    last = result.history[-1]
    defect = float(np.max(SPHERE.constraint_defect(result.u.values)))
    return {
        "command": "soliton-profile",
        "mode": config.mode,
        "iterations": last["iter"],
        "F": last["F"],
        "residual_linf": last["residual_linf"],
        "constraint": {"max_constraint_drift": defect, "max_tangency_drift": 0.0},
        "converged": result.converged,
        "passed": result.converged,
    }


def _cmd_verify_reduction(cfg: dict, outdir: Path) -> dict:
    grid = _grid_1d(cfg)
    v = cfg.get("verify") or {}
    k = int(v.get("k", 2))
    n_pair = v.get("n_pair", [grid.n, 2 * grid.n])
    oracle_tol = float(v.get("oracle_tol", 1e-6))
    costheta = -1.0 / k**2

    default_init = {
        "kind": "perturbed",
        "base": {"kind": "latitude", "k": k, "costheta": costheta},
        "amplitude": 0.01,
        "seed": 7,
    }
    state = load_initial(cfg.get("initial_data", default_init), grid)
    config = _elliptic_config(cfg, grid)
    if "elliptic" not in cfg or "mode" not in cfg["elliptic"]:
        config.mode = "residual_descent"
    solved = solve_elliptic(GridField(grid, state.u), config)
    write_field_csv(solved.u, outdir / "profile.csv")
    oracle = float(np.max(np.abs(k**2 * solved.u.values[:, 2] + 1.0)))

    report = residual_refinement(
        lambda n: latitude_profile(PeriodicGrid1D(n, grid.length), k, costheta),
        n_pair,
    )
    with open(outdir / "schrodinger_residual.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")

    equator = latitude_profile(grid, 1, 0.0)
    negative = schrodinger_residual(equator)
    expected_neg = math.sqrt(grid.length)

    rng = np.random.Generator(np.random.Philox(key=20260809))
    samples = []
    for _ in range(100):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        x = rng.normal(size=3)
        samples.append((u, x - (x @ u) * u))
    intertwine = holomorphic_isometry_check(math.pi / 3.0, samples)

    frames = build_soliton_frames(solved.u, [0.0, 2.0 * math.pi])
    periodicity = float(np.max(np.abs(frames[1].values - frames[0].values)))

    checks = {
        "solver_converged": solved.converged,
        "latitude_oracle": oracle <= oracle_tol,
        "refinement_order_in_band": 1.7 <= (report.order or 0.0) <= 2.3,
        "negative_control": abs(negative.l2 - expected_neg) <= 0.02 * expected_neg,
        "intertwining": intertwine <= 1e-13,
        "frame_periodicity": periodicity <= 1e-13,
    }
    return {
        "command": "verify-reduction",
        "k": k,
        "latitude_oracle_max": oracle,
        "oracle_tol": oracle_tol,
        "constraint": {
            "max_constraint_drift": float(
                np.max(SPHERE.constraint_defect(solved.u.values))
            ),
            "max_tangency_drift": 0.0,
        },
        "residual_l2_fine": report.l2,
        "refinement_order": report.order,
        "negative_control_l2": negative.l2,
        "negative_control_expected": expected_neg,
        "intertwining_defect": intertwine,
        "frame_periodicity_defect": periodicity,
        "checks": checks,
        "passed": all(checks.values()),
    }


def _cmd_ishimori(cfg: dict, outdir: Path) -> dict:
    ish = cfg.get("ishimori") or {}
    n_pair = ish.get("n_pair", [128, 256])
    window = float(ish.get("window", math.pi / 2.0))
    dt_factor = float(ish.get("dt_factor", 0.25))
    stride = int(ish.get("stride", 4))
    k = int(ish.get("k", 2))
    costheta = float(ish.get("costheta", -0.25))

    reports = []
    drift = {"max_constraint_drift": 0.0, "max_tangency_drift": 0.0}
    for n in n_pair:
        grid = PeriodicGrid1D(int(n))
        dt = dt_factor * grid.h
        state = load_initial({"kind": "latitude", "k": k, "costheta": costheta}, grid)
        config = SolverConfig(dt=dt, t_end=window, record_every=1)
        result = evolve(state, config)
        if result.aborted:
            return {"command": "ishimori", "passed": False, "aborted": True}
        drift["max_constraint_drift"] = max(
            drift["max_constraint_drift"], result.max_constraint_drift
        )
        drift["max_tangency_drift"] = max(
            drift["max_tangency_drift"], result.max_tangency_drift
        )
        sheet = spacetime_sheet(result.trajectory, stride=stride)
        reports.append(ishimori_residual(sheet, interior_x=True))
    order = math.log2(reports[0].l2 / reports[1].l2)
    reports[1].order = order
    with open(outdir / "ishimori_residual.json", "w", encoding="utf-8") as fh:
        fh.write(reports[1].to_json() + "\n")

    # phi recovery diagnostics on closed test sheets
    n0 = int(n_pair[0])
    flat = sheet_from_profile(latitude_profile(PeriodicGrid1D(n0), k, costheta), n0)
    rhs_flat = poisson_source(flat)
    y_indep_max = float(np.max(np.abs(rhs_flat.values)))

    sus = suspension_sheet(PeriodicGrid2D(n0, n0))
    phi, compat = ishimori_phi(sus)
    rhs = poisson_source(sus)
    mean = compat / (sus.grid.lx * sus.grid.ly)
    resid = laplacian(phi).values - (rhs.values - mean)
    rel = l2_norm(resid, sus.grid.spacings) / max(
        l2_norm(rhs.values, sus.grid.spacings), 1e-300
    )

    bump = bump_degree_sheet(PeriodicGrid2D(n0, n0))
    degree = sheet_degree(bump)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, compat_bump = ishimori_phi(bump)
    quantization = abs(compat_bump - 8.0 * math.pi * round(degree))

    checks = {
        "refinement_order_in_band": 1.7 <= order <= 2.3,
        "y_independent_source_vanishes": y_indep_max == 0.0,
        "phi_residual": rel <= 1e-10,
        "degree_is_integer": abs(degree - round(degree)) <= 1e-6,
        "source_quantization": quantization <= 8.0 * math.pi * 0.05,
    }
    return {
        "command": "ishimori",
        "n_pair": [int(x) for x in n_pair],
        "residual_l2_fine": reports[1].l2,
        "refinement_order": order,
        "y_independent_source_max": y_indep_max,
        "phi_relative_residual": rel,
        "degree": degree,
        "source_integral": compat_bump,
        "constraint": drift,
        "checks": checks,
        "passed": all(checks.values()),
    }


def _cmd_sweep_eps(cfg: dict, outdir: Path) -> dict:
    grid = _grid_1d(cfg)
    sweep = cfg.get("sweep") or {}
    if "eps_list" not in sweep:
        raise ConfigError("sweep.eps_list is required")
    eps_list = [float(e) for e in sweep["eps_list"]]
    config = _solver_config(cfg)
    for e in eps_list:
        if e > 0 and config.dt > grid.h**2 / (4.0 * e) + 1e-15:
            raise ConfigError(
                f"solver.dt violates the viscous guard for eps = {e}"
            )
    state = load_initial(cfg.get("initial_data", {"kind": "pole"}), grid)
    rows = epsilon_sweep(state, config, eps_list)
    with open(outdir / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("epsilon,sup_l2,sup_linf,aborted\n")
        for row in rows:
            fh.write(
                f"{row.epsilon:.17g},{row.sup_l2:.17g},{row.sup_linf:.17g},"
                f"{int(row.aborted)}\n"
            )
    usable = [r for r in rows if not r.aborted and r.epsilon > 0]
    ratios = [a.sup_l2 / b.sup_l2 for a, b in zip(usable, usable[1:]) if b.sup_l2 > 0]
    monotone = deviations_monotone(rows)
    return {
        "command": "sweep-eps",
        "eps_list": eps_list,
        "deviations_l2": {f"{r.epsilon:g}": r.sup_l2 for r in rows},
        "ratios": ratios,
        "monotone": monotone,
        "aborted_rows": [r.epsilon for r in rows if r.aborted],
        "constraint": {
            "max_constraint_drift": max(r.max_constraint_drift for r in rows),
            "max_tangency_drift": max(r.max_tangency_drift for r in rows),
        },
        "passed": monotone and not any(r.aborted for r in rows),
    }


def _cmd_refine(cfg: dict, outdir: Path) -> dict:
    ref = cfg.get("refine") or {}
    n_list = [int(n) for n in ref.get("n_list", [128, 256, 512])]
    k = int(ref.get("k", 2))
    t_end = float(ref.get("t_end", 1.0))
    dt_factor = float(ref.get("dt_factor", 0.25))
    costheta = 1.0 / k**2

    errors = []
    drift = {"max_constraint_drift": 0.0, "max_tangency_drift": 0.0}
    for n in n_list:
        grid = PeriodicGrid1D(n)
        profile = latitude_profile(grid, k, costheta)
        state = MapState(grid, profile.values.copy(), np.zeros_like(profile.values))
        config = SolverConfig(dt=dt_factor * grid.h, t_end=t_end, record_every=1)
        result = evolve(state, config)
        if result.aborted:
            return {"command": "refine", "passed": False, "aborted": True}
        drift["max_constraint_drift"] = max(
            drift["max_constraint_drift"], result.max_constraint_drift
        )
        drift["max_tangency_drift"] = max(
            drift["max_tangency_drift"], result.max_tangency_drift
        )
        sup = max(
            float(np.max(np.abs(snap.u - profile.values)))
            for snap in result.trajectory
        )
        errors.append(sup)
    orders = [
        math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)
    ]
    with open(outdir / "refine.csv", "w", encoding="utf-8") as fh:
        fh.write("n,sup_error,order\n")
        for i, n in enumerate(n_list):
            order = orders[i - 1] if i > 0 else math.nan
            fh.write(f"{n},{errors[i]:.17g},{order:.17g}\n")
    in_band = all(1.7 <= o <= 2.3 for o in orders)
    return {
        "command": "refine",
        "n_list": n_list,
        "sup_errors": errors,
        "orders": orders,
        "constraint": drift,
        "passed": in_band,
    }


def _cmd_check_geometry(cfg: dict, outdir: Path) -> dict:
    g = cfg.get("geometry_checks") or {}
    num_points = int(g.get("num_points", 20))
    fd_step = float(g.get("fd_step", 1e-4))
    seed = int(g.get("seed", 20260809))
    rng = np.random.Generator(np.random.Philox(key=seed))

    height = lambda p: p[..., 2]
    height_grad = lambda p: np.array([0.0, 0.0, 1.0])
    control = lambda p: p[..., 0] * p[..., 2]
    control_grad = lambda p: np.array([p[2], 0.0, p[0]])

    hessian_height = []
    hessian_control = []
    killing = []
    identities = 0.0
    for _ in range(num_points):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        hessian_height.append(
            hermitian_hessian_residual(SPHERE, height, u, fd_step, grad=height_grad)
        )
        hessian_control.append(
            hermitian_hessian_residual(SPHERE, control, u, fd_step, grad=control_grad)
        )
        killing.append(killing_symmetrized_residual(SPHERE, u, fd_step))
        x = rng.normal(size=3)
        x = SPHERE.project_tangent(u, x)
        jj = SPHERE.complex_structure(u, SPHERE.complex_structure(u, x))
        identities = max(identities, float(np.max(np.abs(jj + x))))
        rel = SPHERE.grad_potential(u) - SPHERE.complex_structure(
            u, SPHERE.killing_field(u)
        )
        identities = max(identities, float(np.max(np.abs(rel))))

    checks = {
        "height_hessian_commutes": max(hessian_height) <= 1e-6,
        "control_hessian_does_not": max(hessian_control) > 1e-2,
        "killing_field": max(killing) <= 1e-6,
        "pointwise_identities": identities <= 1e-13,
    }
    return {
        "command": "check-geometry",
        "num_points": num_points,
        "fd_step": fd_step,
        "constraint": {"max_constraint_drift": 0.0, "max_tangency_drift": 0.0},
        "height_hessian_max": max(hessian_height),
        "control_hessian_max": max(hessian_control),
        "killing_residual_max": max(killing),
        "identity_defect": identities,
        "checks": checks,
        "passed": all(checks.values()),
    }


_HANDLERS = {
    "evolve": _cmd_evolve,
    "soliton-profile": _cmd_soliton_profile,
    "verify-reduction": _cmd_verify_reduction,
    "ishimori": _cmd_ishimori,
    "sweep-eps": _cmd_sweep_eps,
    "refine": _cmd_refine,
    "check-geometry": _cmd_check_geometry,
}


def run(cfg: dict) -> int:
    """Execute a validated configuration; returns the process exit code."""
    try:
        validate_config(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "config_echo.json", cfg)
    try:
        summary = _HANDLERS[cfg["command"]](cfg, outdir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (InstabilityError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        _write_json(
            outdir / "summary.json",
            {"command": cfg["command"], "passed": False, "abort_reason": str(exc)},
        )
        return 3
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    summary["kernels_backend"] = _kernels.BACKEND
    _write_json(outdir / "summary.json", summary)
    print(json.dumps({"passed": summary["passed"], "output_dir": str(outdir)}))
    return 0 if summary["passed"] else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="solitonsim",
        description="wave maps with potential on the sphere: evolution, "
        "stationary loops, and verification studies",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument(
        "overrides",
        nargs="*",
        metavar="--key=value",
        help="override config entries (dotted paths allowed)",
    )
    args, extra = parser.parse_known_args(argv)

    overrides = {}
    for item in list(args.overrides) + extra:
        if not item.startswith("--") or "=" not in item:
            print(f"unrecognized argument: {item}", file=sys.stderr)
            return 2
        key, _, value = item[2:].partition("=")
        overrides[key] = value

    try:
        cfg = load_config(args.config, overrides, command=args.command)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
