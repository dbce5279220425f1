import numpy as np
import pytest

from solitonsim.evolver import (
    InstabilityError,
    MapState,
    SolverConfig,
    acceleration,
    check_energy_inequality,
    deviations_monotone,
    energy_report,
    epsilon_sweep,
    evolve,
    step,
)
from solitonsim.geometry import SPHERE, TORUS, rotation_z
from solitonsim.grid import PeriodicGrid1D, sobolev_seminorm, GridField
from solitonsim.profiles import latitude_profile, pole_profile, tangent_perturbation


def make_state(n=64, k=2, costheta=0.25, amplitude=0.0, seed=7):
    grid = PeriodicGrid1D(n)
    u = latitude_profile(grid, k, costheta)
    if amplitude > 0:
        u = tangent_perturbation(u, amplitude, seed)
    return MapState(grid, u.values.copy(), np.zeros((n, 3)))


def pole_state(n=32):
    grid = PeriodicGrid1D(n)
    u = pole_profile(grid)
    return MapState(grid, u.values.copy(), np.zeros((n, 3)))


def test_acceleration_pole_equilibrium():
    state = pole_state()
    a = acceleration(state, 0.0).values
    assert np.max(np.abs(a)) == 0.0


def test_acceleration_equator_closed_form():
    # u = (cos x, sin x, 0), v = 0: continuum acceleration is -e3 everywhere
    errs = []
    for n in (64, 128):
        state = make_state(n, k=1, costheta=0.0)
        a = acceleration(state, 0.0).values
        errs.append(np.max(np.abs(a - [0.0, 0.0, -1.0])))
    h = 2 * np.pi / 64
    assert errs[0] <= h**2
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


def test_acceleration_static_latitude_residual_order():
    errs = []
    for n in (64, 128):
        state = make_state(n, k=2, costheta=0.25)
        errs.append(np.max(np.abs(acceleration(state, 0.0).values)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.3)


def test_acceleration_validates_state():
    state = pole_state()
    state.u[3] *= 1.1
    with pytest.raises(ValueError, match="node 3"):
        acceleration(state, 0.0)


def test_step_keeps_equilibrium():
    state = pole_state()
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=1.0)
    new = step(state, cfg)
    assert np.max(np.abs(new.u - state.u)) <= 1e-14
    assert np.max(np.abs(new.v)) <= 1e-14


def test_step_small_dt_drift_consistency():
    state = make_state(64, amplitude=0.05)
    state.v[:] = SPHERE.project_tangent(state.u, np.cross(state.u, [0.0, 0.0, 0.3]))
    dt = 1e-5
    cfg = SolverConfig(dt=dt, t_end=1.0)
    new = step(state, cfg)
    assert np.max(np.abs(new.u - (state.u + dt * state.v))) <= 50 * dt**2


def test_step_local_order_richardson():
    state = make_state(64, amplitude=0.05)
    # nonzero velocity: from v = 0 the flow is even in t and the odd-order
    # local error cancels, which would overstate the order
    state.v[:] = SPHERE.project_tangent(state.u, np.cross(state.u, [0.1, 0.0, 0.4]))
    h = state.grid.h
    one = step(state, SolverConfig(dt=h / 4, t_end=1.0))
    half = step(state, SolverConfig(dt=h / 8, t_end=1.0))
    half = step(half, SolverConfig(dt=h / 8, t_end=1.0))
    d_coarse = np.max(np.abs(one.u - half.u))

    one_f = step(state, SolverConfig(dt=h / 8, t_end=1.0))
    half_f = step(state, SolverConfig(dt=h / 16, t_end=1.0))
    half_f = step(half_f, SolverConfig(dt=h / 16, t_end=1.0))
    d_fine = np.max(np.abs(one_f.u - half_f.u))
    # local error O(dt^3): halving dt shrinks the defect ~8x
    assert d_coarse / d_fine == pytest.approx(8.0, rel=0.5)


def test_step_cfl_guard():
    state = pole_state()
    with pytest.raises(ValueError, match="CFL"):
        step(state, SolverConfig(dt=state.grid.h, t_end=1.0))
    with pytest.raises(ValueError, match="viscous"):
        step(state, SolverConfig(dt=state.grid.h / 4, t_end=1.0, epsilon=1.0))


def test_step_instability_raises():
    state = make_state(64, amplitude=0.1)
    state.v[:] = 80.0 * SPHERE.project_tangent(state.u, np.random.default_rng(1).normal(size=state.u.shape))
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=1.0)
    with pytest.raises(InstabilityError):
        s = state
        for _ in range(200):
            s = step(s, cfg)


def test_evolve_pole_hamiltonian_and_value():
    state = pole_state()
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=10.0)
    res = evolve(state, cfg)
    h0 = res.ledger[0].hamiltonian
    assert h0 == pytest.approx(2 * np.pi, abs=1e-12)
    assert max(abs(r.hamiltonian - h0) for r in res.ledger) <= 1e-13


def test_energy_report_closed_forms():
    state = pole_state(64)
    rec = energy_report(state)
    assert rec.kinetic == 0.0
    assert rec.dirichlet == 0.0
    assert rec.potential_integral == pytest.approx(2 * np.pi, abs=1e-12)
    assert rec.hamiltonian == pytest.approx(2 * np.pi, abs=1e-12)

    equator = make_state(128, k=1, costheta=0.0)
    rec = energy_report(equator)
    assert rec.kinetic == 0.0
    assert rec.dirichlet == pytest.approx(np.pi, abs=equator.grid.h**2)
    assert abs(rec.potential_integral) <= 1e-13
    assert rec.hamiltonian == pytest.approx(
        rec.kinetic + rec.dirichlet + rec.potential_integral, abs=0
    )


def test_energy_report_h1_matches_sobolev_seminorm():
    state = make_state(64, amplitude=0.03)
    rec = energy_report(state)
    expected = sobolev_seminorm(GridField(state.grid, state.u), 1, velocity=state.v)
    assert rec.h1_seminorm == pytest.approx(expected, rel=1e-12)


def test_evolve_static_latitude_spatial_order():
    errs = {}
    for n in (64, 128):
        state = make_state(n, k=2, costheta=0.25)
        ref = state.u.copy()
        cfg = SolverConfig(dt=state.grid.h / 4, t_end=1.0, record_every=1)
        res = evolve(state, cfg)
        errs[n] = max(float(np.max(np.abs(s.u - ref))) for s in res.trajectory)
    assert np.log2(errs[64] / errs[128]) == pytest.approx(2.0, abs=0.3)


def test_evolve_viscous_hamiltonian_nonincreasing():
    state = make_state(64, amplitude=0.05)
    h = state.grid.h
    eps = 0.1
    cfg = SolverConfig(dt=0.9 * h * h / (4 * eps), t_end=2.0, epsilon=eps, record_every=1)
    res = evolve(state, cfg)
    hs = [r.hamiltonian for r in res.ledger]
    assert all(b <= a + 10 * cfg.dt**2 for a, b in zip(hs, hs[1:]))
    assert hs[-1] < hs[0]


def test_check_energy_inequality_examples():
    def ledger_from(hs):
        return [
            type("R", (), {"hamiltonian": h})() for h in hs
        ]

    assert check_energy_inequality(ledger_from([1.0, 0.98, 0.97]), 0.1, 1e-6).passed
    rep = check_energy_inequality(ledger_from([1.0, 1.1]), 0.1, 1e-6)
    assert not rep.passed
    assert rep.max_violation == pytest.approx(0.1)
    assert check_energy_inequality(ledger_from([1.0, 1.0 + 1e-9]), 0.0, 1e-6).passed


def test_evolve_rotation_equivariance():
    state = make_state(64, amplitude=0.05, seed=3)
    alpha = 0.7
    rot = rotation_z(alpha)
    rotated = MapState(state.grid, state.u @ rot.T, state.v @ rot.T)
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=1.0)
    res_a = evolve(rotated, cfg)
    res_b = evolve(state, cfg)
    assert np.max(np.abs(res_a.final.u - res_b.final.u @ rot.T)) <= 1e-11


def test_evolve_time_reversal():
    state = make_state(64, amplitude=0.05, seed=3)
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=1.0)
    fwd = evolve(state, cfg)
    back_state = MapState(state.grid, fwd.final.u.copy(), -fwd.final.v)
    back = evolve(back_state, cfg)
    assert np.max(np.abs(back.final.u - state.u)) <= 100 * cfg.dt**2


def test_leapfrog_rk4_agreement():
    state = make_state(64, amplitude=0.05, seed=9)
    h = state.grid.h
    lf = evolve(state, SolverConfig(dt=h / 8, t_end=0.5))
    rk = evolve(state, SolverConfig(dt=h / 8, t_end=0.5, scheme="rk4"))
    assert np.max(np.abs(lf.final.u - rk.final.u)) <= 20 * (h / 8) ** 2


def test_evolve_warns_on_non_tangent_velocity():
    state = make_state(32)
    state.v[:] = 0.05 * state.u  # purely normal
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=0.1)
    with pytest.warns(UserWarning, match="not tangent"):
        res = evolve(state, cfg)
    assert not res.aborted
    assert np.max(np.abs(res.ledger[0].kinetic)) <= 1e-20


def test_evolve_abort_returns_last_valid_state():
    state = make_state(64, amplitude=0.1)
    rng = np.random.default_rng(4)
    state.v[:] = 80.0 * SPHERE.project_tangent(state.u, rng.normal(size=state.u.shape))
    cfg = SolverConfig(dt=state.grid.h / 4, t_end=5.0)
    res = evolve(state, cfg)
    assert res.aborted
    assert res.abort_reason is not None
    assert np.all(np.isfinite(res.final.u))
    assert np.max(SPHERE.constraint_defect(res.final.u)) <= 1e-12


def test_epsilon_sweep_equilibrium_is_eps_independent():
    state = pole_state()
    cfg = SolverConfig(dt=0.5 * state.grid.h**2 / 0.4, t_end=0.5)
    rows = epsilon_sweep(state, cfg, [0.1, 0.05, 0.0])
    assert all(r.sup_l2 <= 1e-12 for r in rows)


def test_epsilon_sweep_first_order_ratios():
    state = make_state(64, k=2, costheta=-0.25)
    h = state.grid.h
    cfg = SolverConfig(dt=0.9 * h * h / 0.4, t_end=1.0, record_every=5)
    rows = epsilon_sweep(state, cfg, [0.1, 0.05, 0.025, 0.0])
    assert rows[-1].sup_l2 == 0.0
    assert deviations_monotone(rows)
    r1 = rows[0].sup_l2 / rows[1].sup_l2
    r2 = rows[1].sup_l2 / rows[2].sup_l2
    assert 1.5 <= r1 <= 2.5
    assert 1.5 <= r2 <= 2.5


def test_epsilon_sweep_validates_list():
    state = pole_state()
    cfg = SolverConfig(dt=1e-3, t_end=0.1)
    with pytest.raises(ValueError):
        epsilon_sweep(state, cfg, [0.05, 0.1, 0.0])
    with pytest.raises(ValueError):
        epsilon_sweep(state, cfg, [0.1, 0.05])


def test_epsilon_sweep_reference_only():
    state = pole_state()
    cfg = SolverConfig(dt=1e-3, t_end=0.1)
    rows = epsilon_sweep(state, cfg, [0.0])
    assert len(rows) == 1
    assert rows[0].sup_l2 == 0.0 and rows[0].sup_linf == 0.0


def test_epsilon_sweep_threaded_matches_sequential(monkeypatch):
    state = make_state(48, k=2, costheta=-0.25)
    h = state.grid.h
    cfg = SolverConfig(dt=0.9 * h * h / 0.4, t_end=0.5, record_every=5)
    seq = epsilon_sweep(state, cfg, [0.1, 0.05, 0.0])
    monkeypatch.setenv("SOLITONSIM_THREADS", "3")
    par = epsilon_sweep(state, cfg, [0.1, 0.05, 0.0])
    assert [r.sup_l2 for r in seq] == [r.sup_l2 for r in par]


# ---------------------------------------------------------------------------
# torus target through the generic path


def test_torus_equilibrium_and_constraints():
    n = 32
    grid = PeriodicGrid1D(n)
    u = np.zeros((n, 4))
    u[:, 0] = 1.0  # alpha = 0 is a critical point of the torus potential
    u[:, 2] = 1.0
    state = MapState(grid, u, np.zeros((n, 4)))
    cfg = SolverConfig(dt=grid.h / 4, t_end=1.0)
    res = evolve(state, cfg, geometry=TORUS)
    assert not res.aborted
    assert np.max(np.abs(res.final.u - u)) <= 1e-13


def test_torus_wave_keeps_constraints():
    n = 64
    grid = PeriodicGrid1D(n)
    x = grid.nodes()
    u = np.stack([np.cos(x), np.sin(x), np.cos(2 * x), np.sin(2 * x)], axis=1)
    state = MapState(grid, u, np.zeros((n, 4)))
    cfg = SolverConfig(dt=grid.h / 4, t_end=1.0)
    res = evolve(state, cfg, geometry=TORUS)
    assert not res.aborted
    assert res.max_constraint_drift <= 1e-12
    assert res.max_tangency_drift <= 1e-10
    hs = [r.hamiltonian for r in res.ledger]
    assert max(abs(v - hs[0]) for v in hs) <= 1e-3
