"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
PASS/FAIL lines.  Tolerances are fixed here, not calibrated at run time.
"""

import json
import math
import time

import numpy as np

from solitonsim.cli import run as cli_run
from solitonsim.elliptic import (
    EllipticConfig,
    functional_F,
    solve_elliptic,
    tangential_residual_linf,
)
from solitonsim.evolver import (
    MapState,
    SolverConfig,
    check_energy_inequality,
    epsilon_sweep,
    evolve,
)
from solitonsim.geometry import (
    SPHERE,
    hermitian_hessian_residual,
    killing_symmetrized_residual,
)
from solitonsim.grid import PeriodicGrid1D, PeriodicGrid2D, l2_norm, laplacian
from solitonsim.profiles import (
    latitude_profile,
    sheet_from_profile,
    suspension_sheet,
    tangent_perturbation,
)
from solitonsim.verify import (
    ishimori_phi,
    ishimori_residual,
    poisson_source,
    refinement_order,
    residual_refinement,
    schrodinger_residual,
    spacetime_sheet,
)

from conftest import random_unit

# the standard regression datum: a perturbed latitude loop in the lower
# hemisphere (bounded long-time sloshing, see notes in the evolver module)
STANDARD_DATUM = dict(k=1, costheta=-0.7, amplitude=0.01, seed=7)


def _standard_state(n=256):
    grid = PeriodicGrid1D(n)
    base = latitude_profile(grid, STANDARD_DATUM["k"], STANDARD_DATUM["costheta"])
    u = tangent_perturbation(
        base, STANDARD_DATUM["amplitude"], STANDARD_DATUM["seed"]
    )
    return MapState(grid, u.values.copy(), np.zeros((n, 3)))


def _verdict(index, name, passed):
    print(f"ACCEPTANCE {index:02d} {name}: {'PASS' if passed else 'FAIL'}")
    assert passed, f"criterion {index} ({name}) failed"


def test_criterion_01_constraint_preservation():
    state = _standard_state(256)
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=20.0, record_every=10)
    t0 = time.perf_counter()
    res = evolve(state, cfg, store_trajectory=False)
    elapsed = time.perf_counter() - t0
    ok = (
        not res.aborted
        and res.max_constraint_drift <= 1e-12
        and res.max_tangency_drift <= 1e-10
        and elapsed <= 10.0
    )
    print(
        f"  constraint {res.max_constraint_drift:.2e}, "
        f"tangency {res.max_tangency_drift:.2e}, runtime {elapsed:.2f}s"
    )
    _verdict(1, "constraint-preservation", ok)


def test_criterion_02_hamiltonian_conservation():
    drifts = {}
    for div in (4, 8):
        state = _standard_state(256)
        cfg = SolverConfig(dt=state.grid.h / div, t_end=10.0, record_every=10)
        res = evolve(state, cfg, store_trajectory=False)
        assert not res.aborted
        h0 = res.ledger[0].hamiltonian
        drifts[div] = max(
            abs(r.hamiltonian - h0) for r in res.ledger
        ) / max(1.0, abs(h0))
    improvement = drifts[4] / drifts[8]
    ok = drifts[4] <= 1e-4 and improvement >= 3.5
    print(
        f"  rel drift {drifts[4]:.3e} at dt=h/4, {drifts[8]:.3e} at dt=h/8 "
        f"({improvement:.2f}x improvement)"
    )
    _verdict(2, "hamiltonian-conservation", ok)


def test_criterion_03_energy_inequality_viscous():
    n = 128
    grid = PeriodicGrid1D(n)
    u = tangent_perturbation(latitude_profile(grid, 2, 0.25), 0.01, seed=7)
    ok = True
    for eps in (0.1, 0.05):
        dt = 0.9 * grid.h**2 / (4.0 * 0.1)  # strictest guard covers both
        state = MapState(grid, u.values.copy(), np.zeros((n, 3)))
        cfg = SolverConfig(dt=dt, t_end=3.0, epsilon=eps, record_every=1)
        res = evolve(state, cfg, store_trajectory=False)
        hs = [r.hamiltonian for r in res.ledger]
        worst = max(b - a for a, b in zip(hs, hs[1:]))
        ok = ok and not res.aborted and worst <= 10.0 * dt * dt
        ok = ok and check_energy_inequality(res.ledger, eps, 10.0 * dt * dt).passed
        print(f"  eps={eps}: max per-step increase {worst:.3e} vs {10 * dt * dt:.3e}")
    _verdict(3, "energy-inequality-viscous", ok)


def test_criterion_04_static_latitude_order():
    errors = {}
    for n in (128, 256, 512):
        grid = PeriodicGrid1D(n)
        profile = latitude_profile(grid, 2, 0.25)
        state = MapState(grid, profile.values.copy(), np.zeros((n, 3)))
        cfg = SolverConfig(dt=grid.h / 4, t_end=1.0, record_every=1)
        res = evolve(state, cfg)
        assert not res.aborted
        errors[n] = max(
            float(np.max(np.abs(s.u - profile.values))) for s in res.trajectory
        )
    orders = [
        math.log2(errors[128] / errors[256]),
        math.log2(errors[256] / errors[512]),
    ]
    bound_ok = all(errors[n] <= (2 * math.pi / n) ** 2 for n in errors)
    ok = bound_ok and all(1.7 <= o <= 2.3 for o in orders)
    print(f"  sup errors {errors}, orders {orders[0]:.3f}, {orders[1]:.3f}")
    _verdict(4, "static-latitude-preserved-order-2", ok)


def test_criterion_05_elliptic_soliton():
    # saddle-type loop by damped Gauss-Newton least squares
    n = 4096
    grid = PeriodicGrid1D(n)
    init = tangent_perturbation(latitude_profile(grid, 2, -0.25), 0.01, seed=11)
    cfg = EllipticConfig(flow_dt=1e-3, max_iters=100, mode="residual_descent")
    result = solve_elliptic(init, cfg)
    residual = tangential_residual_linf(result.u)
    oracle = float(np.max(np.abs(result.u.values[:, 2] + 0.25)))
    descent_ok = result.converged and residual <= 1e-8 and oracle <= 1e-6

    # minimizer by gradient flow from a perturbed pole
    g2 = PeriodicGrid1D(64)
    from solitonsim.profiles import pole_profile

    near_pole = tangent_perturbation(pole_profile(g2), 0.05, seed=3)
    flow_cfg = EllipticConfig(
        flow_dt=0.9 * g2.h**2 / 4.0, max_iters=20000, mode="gradient_flow"
    )
    flowed = solve_elliptic(near_pole, flow_cfg)
    f_val = functional_F(flowed.u)
    flow_ok = flowed.converged and abs(f_val + 2 * math.pi) <= 1e-6

    print(
        f"  residual_descent: linf {residual:.2e}, |u3+1/4| {oracle:.2e}; "
        f"gradient_flow: F {f_val:.9f} (target {-2 * math.pi:.9f})"
    )
    _verdict(5, "elliptic-soliton", descent_ok and flow_ok)


def test_criterion_06_reduction_certification():
    report = residual_refinement(
        lambda n: latitude_profile(PeriodicGrid1D(n), 2, -0.25), (256, 512)
    )
    family_ok = (
        report.order is not None
        and 1.7 <= report.order <= 2.3
        and report.l2 <= 1e-3
    )

    # the solver's own converged profile satisfies the flow equation to
    # solver tolerance (its residual is the rotated tangential residual)
    grid = PeriodicGrid1D(512)
    init = tangent_perturbation(latitude_profile(grid, 2, -0.25), 0.01, seed=11)
    solved = solve_elliptic(
        init, EllipticConfig(flow_dt=1e-3, max_iters=80, mode="residual_descent")
    )
    converged_rep = schrodinger_residual(solved.u)
    converged_ok = solved.converged and converged_rep.l2 <= 1e-6

    negative = schrodinger_residual(latitude_profile(PeriodicGrid1D(512), 1, 0.0))
    expected = math.sqrt(2 * math.pi)
    negative_ok = abs(negative.l2 - expected) <= 0.02 * expected

    print(
        f"  family l2 {report.l2:.3e} (order {report.order:.3f}); "
        f"converged l2 {converged_rep.l2:.3e}; "
        f"equator control {negative.l2:.6f} vs sqrt(2 pi) {expected:.6f}"
    )
    _verdict(
        6, "reduction-certification", family_ok and converged_ok and negative_ok
    )


def test_criterion_07_viscous_limit_sweep():
    n = 128
    grid = PeriodicGrid1D(n)
    profile = latitude_profile(grid, 2, -0.25)
    state = MapState(grid, profile.values.copy(), np.zeros((n, 3)))
    dt = 0.9 * grid.h**2 / (4.0 * 0.1)
    cfg = SolverConfig(dt=dt, t_end=2.0, record_every=5)
    rows = epsilon_sweep(state, cfg, [0.1, 0.05, 0.025, 0.0])
    devs = [r.sup_l2 for r in rows[:-1]]
    ratios = [devs[0] / devs[1], devs[1] / devs[2]]
    monotone = devs[0] > devs[1] > devs[2]
    ok = (
        not any(r.aborted for r in rows)
        and monotone
        and all(1.5 <= r <= 2.5 for r in ratios)
    )
    print(f"  deviations {[f'{d:.3e}' for d in devs]}, ratios {ratios}")
    _verdict(7, "viscous-limit-sweep", ok)


def test_criterion_08_killing_potential_checks(rng):
    height = lambda p: p[..., 2]
    height_grad = lambda p: np.array([0.0, 0.0, 1.0])
    control = lambda p: p[..., 0] * p[..., 2]
    control_grad = lambda p: np.array([p[2], 0.0, p[0]])

    height_vals, control_vals, killing_vals = [], [], []
    for _ in range(20):
        u = random_unit(rng)
        height_vals.append(
            hermitian_hessian_residual(SPHERE, height, u, 1e-4, grad=height_grad)
        )
        control_vals.append(
            hermitian_hessian_residual(SPHERE, control, u, 1e-4, grad=control_grad)
        )
        killing_vals.append(killing_symmetrized_residual(SPHERE, u, 1e-4))
    ok = (
        max(height_vals) <= 1e-6
        and max(control_vals) > 1e-2
        and max(killing_vals) <= 1e-6
    )
    print(
        f"  height hessian max {max(height_vals):.2e}, control max "
        f"{max(control_vals):.2e}, killing max {max(killing_vals):.2e}"
    )
    _verdict(8, "killing-potential-checks", ok)


def test_criterion_09_long_time_bounded_h1():
    state = _standard_state(256)
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=100.0, record_every=20)
    res = evolve(state, cfg, store_trajectory=False)
    h1_0 = res.ledger[0].h1_seminorm
    h1_max = max(r.h1_seminorm for r in res.ledger)
    ok = not res.aborted and h1_max < 3.0 * h1_0
    print(f"  h1(0) {h1_0:.3f}, max {h1_max:.3f} (bound {3 * h1_0:.3f})")
    _verdict(9, "long-time-bounded-h1", ok)


def test_criterion_10_ishimori_soliton():
    reports = []
    for n in (128, 256):
        grid = PeriodicGrid1D(n)
        profile = latitude_profile(grid, 2, -0.25)
        state = MapState(grid, profile.values.copy(), np.zeros((n, 3)))
        cfg = SolverConfig(dt=grid.h / 4, t_end=math.pi / 2, record_every=1)
        res = evolve(state, cfg)
        assert not res.aborted
        reports.append(
            ishimori_residual(spacetime_sheet(res.trajectory, stride=4), True)
        )
    order = refinement_order(reports[0], reports[1])
    order_ok = 1.7 <= order <= 2.3

    g2 = PeriodicGrid2D(64, 64)
    s = suspension_sheet(g2)
    rhs = poisson_source(s)
    phi, _ = ishimori_phi(s)
    resid = laplacian(phi).values - rhs.values
    phi_ok = l2_norm(resid, g2.spacings) <= 1e-10 * l2_norm(rhs.values, g2.spacings)

    flat = sheet_from_profile(latitude_profile(PeriodicGrid1D(64), 2, -0.25), 64)
    flat_ok = float(np.max(np.abs(poisson_source(flat).values))) == 0.0

    print(
        f"  2-D residual order {order:.3f}; phi residual relative "
        f"{l2_norm(resid, g2.spacings) / l2_norm(rhs.values, g2.spacings):.2e}; "
        f"y-independent source max {float(np.max(np.abs(poisson_source(flat).values))):.1f}"
    )
    _verdict(10, "ishimori-soliton", order_ok and phi_ok and flat_ok)


def test_criterion_11_determinism(tmp_path):
    cfg = {
        "command": "evolve",
        "output_dir": "",
        "grid": {"n": 128},
        "solver": {"dt": 0.012, "t_end": 2.0, "record_every": 5},
        "initial_data": {
            "kind": "perturbed",
            "base": {
                "kind": "latitude",
                "k": STANDARD_DATUM["k"],
                "costheta": STANDARD_DATUM["costheta"],
            },
            "amplitude": STANDARD_DATUM["amplitude"],
            "seed": STANDARD_DATUM["seed"],
        },
    }
    payloads = []
    for name in ("first", "second"):
        out = tmp_path / name
        cfg["output_dir"] = str(out)
        code = cli_run(json.loads(json.dumps(cfg)))
        assert code == 0
        # the ledger and every numerical report are byte-stable; summary.json
        # is excluded only because it carries the measured wall time
        echo = (out / "config_echo.json").read_text()
        echo = echo.replace(str(out), "OUTDIR")
        payloads.append((out / "ledger.csv").read_bytes() + echo.encode())
    ok = payloads[0] == payloads[1]
    print(f"  ledgers byte-identical: {ok}")
    _verdict(11, "determinism", ok)
