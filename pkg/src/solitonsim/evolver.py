"""Time integration of the sphere-valued wave system with height potential.

Semi-discrete system on a periodic 1-D grid (method of lines):

    u_tt = laplacian(u) + lam u - grad_potential(u) + eps * tangent(laplacian(u_t))

with lam u the normal curvature force that keeps |u| = 1, and eps >= 0 the
viscous regularization strength.  At eps = 0 the flow conserves the discrete
Hamiltonian

    H = 1/2 ||u_t||^2 + 1/2 ||D+ u||^2 + integral of the potential,

where D+ is the staggered forward difference (the gradient whose square is
exactly conserved by the 3-point Laplacian); for eps > 0, H is nonincreasing.

The default scheme is a constrained leapfrog of RATTLE type: kick-drift-kick
where the first half-kick receives the exactly solved normal impulse landing
the drift on the sphere and the second half-kick is followed by the tangency
projection.  The scheme is time-reversible and keeps |u| = 1 and u . u_t = 0
to rounding at every accepted step.  A classical RK4 stepper (constraint
restoration by projection after each full step) is retained for cross-scheme
agreement checks.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .geometry import SPHERE, SphereGeometry, TargetGeometry
from .grid import GridField, PeriodicGrid1D, diff1_values, laplacian_values


class InstabilityError(RuntimeError):
    """Raised when a step loses the constraint; advises a smaller dt."""


@dataclass
class MapState:
    """Discretized map u: grid -> target plus its tangent velocity v = u_t."""

    grid: PeriodicGrid1D
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.u, dtype=float)
        self.v = np.ascontiguousarray(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.shape[0] != self.grid.n:
            raise ValueError("u and v must be nodal arrays over the grid")

    def copy(self) -> "MapState":
        return MapState(self.grid, self.u.copy(), self.v.copy(), self.t)

    def validate(
        self,
        geometry: TargetGeometry = SPHERE,
        constraint_tol: float = 1e-12,
        tangency_tol: float = 1e-10,
    ) -> None:
        defect = geometry.constraint_defect(self.u)
        worst = int(np.argmax(defect))
        if not np.all(np.isfinite(self.u)) or defect[worst] > constraint_tol:
            raise ValueError(
                f"constraint violated at node {worst}: |u|-1 = {defect[worst]:.3e}"
            )
        tang = np.abs(np.einsum("ij,ij->i", self.u, self.v))
        worst = int(np.argmax(tang))
        if not np.all(np.isfinite(self.v)) or tang[worst] > tangency_tol:
            raise ValueError(
                f"tangency violated at node {worst}: u.v = {tang[worst]:.3e}"
            )


@dataclass
class SolverConfig:
    dt: float
    t_end: float
    epsilon: float = 0.0
    scheme: str = "leapfrog"
    renormalize_every: int = 1
    record_every: int = 10
    constraint_tol: float = 1e-12
    tangency_tol: float = 1e-10
    cfl_factor: float = 0.5

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.scheme not in ("leapfrog", "rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.renormalize_every < 1 or self.record_every < 1:
            raise ValueError("cadences must be >= 1")
        if not 0 < self.cfl_factor <= 0.5:
            raise ValueError("cfl_factor must lie in (0, 0.5]")

    def check_grid(self, grid: PeriodicGrid1D) -> None:
        h = grid.h
        if self.dt > self.cfl_factor * h + 1e-15:
            raise ValueError(
                f"CFL guard violated: dt = {self.dt:.3e} exceeds "
                f"{self.cfl_factor} * h = {self.cfl_factor * h:.3e}"
            )
        if self.epsilon > 0:
            bound = h * h / (4.0 * self.epsilon)
            if self.dt > bound + 1e-15:
                raise ValueError(
                    f"viscous guard violated: dt must not exceed h^2/(4 eps) = {bound:.3e}"
                )


@dataclass
class EnergyRecord:
    t: float
    kinetic: float
    dirichlet: float
    potential_integral: float
    hamiltonian: float
    constraint_drift: float
    tangency_drift: float
    h1_seminorm: float

    CSV_COLUMNS = (
        "t,kinetic,dirichlet,potential_integral,hamiltonian,"
        "constraint_drift,tangency_drift,h1_seminorm"
    )

    def csv_row(self) -> str:
        vals = (
            self.t,
            self.kinetic,
            self.dirichlet,
            self.potential_integral,
            self.hamiltonian,
            self.constraint_drift,
            self.tangency_drift,
            self.h1_seminorm,
        )
        return ",".join(f"{x:.17g}" for x in vals)


@dataclass
class EvolveResult:
    final: MapState
    trajectory: list[MapState]
    ledger: list[EnergyRecord]
    aborted: bool = False
    abort_time: float | None = None
    abort_reason: str | None = None
    max_pre_renorm_drift: float = 0.0
    max_constraint_drift: float = 0.0
    max_tangency_drift: float = 0.0


def acceleration(
    state: MapState,
    epsilon: float,
    geometry: TargetGeometry = SPHERE,
    check: bool = True,
) -> GridField:
    """Right-hand side of the second-order system at the given state.

    a = laplacian(u) + A(u)(du, du) - grad_potential(u)
        + eps * tangent(laplacian(v)),

    where A(u)(du, du) is the signed trace of the second fundamental form
    over (u_t, u_x); for the sphere it is (|u_x|^2 - |u_t|^2) u.
    """
    if check:
        state.validate(geometry)
    h = state.grid.h
    u, v = state.u, state.v
    a = laplacian_values(u, (h,))
    a += geometry.sff_trace_lorentz(u, v, diff1_values(u, h), check=False)
    a -= geometry.grad_potential(u, check=False)
    if epsilon > 0:
        a += epsilon * geometry.project_tangent(u, laplacian_values(v, (h,)), check=False)
    return GridField(state.grid, a)


def _force_generic(u, v, h, eps, geometry):
    f = laplacian_values(u, (h,))
    f -= geometry.grad_potential(u, check=False)
    if eps > 0:
        f += eps * geometry.project_tangent(u, laplacian_values(v, (h,)), check=False)
    return f


def _leapfrog_generic(u, v, h, dt, eps, geometry, restore=True):
    """Geometry-agnostic version of the kernel step (same algorithm)."""
    f = _force_generic(u, v, h, eps, geometry)
    w = u + dt * v + (0.5 * dt * dt) * f
    if restore:
        shifted, min_disc = geometry.normal_shift(u, w)
        vh = v + (shifted - u - dt * v) / dt  # equals v + dt/2 f + multiplier * normals
    else:
        _, min_disc = geometry.normal_shift(u, w)
        vh = v + 0.5 * dt * f
    u_new = u + dt * vh
    pre_drift = float(np.max(geometry.constraint_defect(u_new)))
    if restore:
        u_new = geometry.project_point(u_new, check=False)
    v_new = vh + 0.5 * dt * _force_generic(u_new, vh, h, eps, geometry)
    if restore:
        v_new = geometry.project_tangent(u_new, v_new, check=False)
    u[:] = u_new
    v[:] = v_new
    return pre_drift, min_disc


def _rk4_step(u, v, h, dt, eps, geometry, restore=True):
    def acc(uu, vv):
        a = laplacian_values(uu, (h,))
        a += geometry.sff_trace_lorentz(uu, vv, diff1_values(uu, h), check=False)
        a -= geometry.grad_potential(uu, check=False)
        if eps > 0:
            a += eps * geometry.project_tangent(uu, laplacian_values(vv, (h,)), check=False)
        return a

    k1u, k1v = v, acc(u, v)
    k2u, k2v = v + 0.5 * dt * k1v, acc(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
    k3u, k3v = v + 0.5 * dt * k2v, acc(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
    k4u, k4v = v + dt * k3v, acc(u + dt * k3u, v + dt * k3v)
    u_new = u + (dt / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
    v_new = v + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    pre_drift = float(np.max(geometry.constraint_defect(u_new)))
    if restore:
        u_new = geometry.project_point(u_new, check=False)
        v_new = geometry.project_tangent(u_new, v_new, check=False)
    u[:] = u_new
    v[:] = v_new
    return pre_drift, 1.0


def _advance(u, v, h, config, geometry, restore):
    if config.scheme == "rk4":
        return _rk4_step(u, v, h, config.dt, config.epsilon, geometry, restore)
    if isinstance(geometry, SphereGeometry):
        return _kernels.leapfrog_step_sphere(
            u, v, h, config.dt, config.epsilon, restore
        )
    return _leapfrog_generic(u, v, h, config.dt, config.epsilon, geometry, restore)


def _instability_threshold(config: SolverConfig) -> float:
    # well above the natural O(dt^2) pre-restoration drift, well below order 1
    return max(1e3 * config.constraint_tol, 100.0 * config.dt * config.dt)


def step(
    state: MapState, config: SolverConfig, geometry: TargetGeometry = SPHERE
) -> MapState:
    """Advance one time step; raises InstabilityError on constraint loss."""
    config.check_grid(state.grid)
    new = state.copy()
    pre_drift, min_disc = _advance(new.u, new.v, state.grid.h, config, geometry, True)
    if not math.isfinite(pre_drift) or min_disc <= 0.0:
        raise InstabilityError(
            f"constraint unreachable at t = {state.t:.6g}; reduce dt"
        )
    if pre_drift > _instability_threshold(config):
        raise InstabilityError(
            f"constraint drift {pre_drift:.3e} before restoration at "
            f"t = {state.t:.6g}; reduce dt"
        )
    new.t = state.t + config.dt
    return new


def energy_report(state: MapState, geometry: TargetGeometry = SPHERE) -> EnergyRecord:
    """Energy ledger entry; hamiltonian = kinetic + dirichlet + potential.

    The Dirichlet term uses the staggered forward-difference gradient, whose
    square is the quantity exactly conserved by the semi-discrete flow.
    """
    h = state.grid.h
    u, v = state.u, state.v
    kinetic = 0.5 * h * float(np.sum(v * v))
    fwd = (np.roll(u, -1, 0) - u) / h
    dirichlet = 0.5 * h * float(np.sum(fwd * fwd))
    potential = h * float(np.sum(geometry.potential(u)))
    constraint = float(np.max(geometry.constraint_defect(u)))
    tangency = float(np.max(np.abs(np.einsum("ij,ij->i", u, v))))
    # H^1 norm of the section (v, Du); covariant derivative = project o diff.
    # Inlined rather than delegated so it tolerates not-yet-restored states.
    du = diff1_values(u, h)
    h1 = math.sqrt(h * float(np.sum(v * v) + np.sum(du * du)))
    dv_c = geometry.project_tangent(u, diff1_values(v, h), check=False)
    ddu_c = geometry.project_tangent(u, diff1_values(du, h), check=False)
    h1 += math.sqrt(h * float(np.sum(dv_c * dv_c) + np.sum(ddu_c * ddu_c)))
    return EnergyRecord(
        t=state.t,
        kinetic=kinetic,
        dirichlet=dirichlet,
        potential_integral=potential,
        hamiltonian=kinetic + dirichlet + potential,
        constraint_drift=constraint,
        tangency_drift=tangency,
        h1_seminorm=h1,
    )


def evolve(
    initial: MapState,
    config: SolverConfig,
    geometry: TargetGeometry = SPHERE,
    store_trajectory: bool = True,
) -> EvolveResult:
    """Integrate to t_end, recording the energy ledger every record_every steps.

    The initial map is renormalized and the initial velocity tangent-projected
    (with a warning when the tangency defect is above tolerance).  On
    instability or NaN the last healthy state is returned with the abort flag,
    time, and reason set.
    """
    config.check_grid(initial.grid)
    h = initial.grid.h
    state = initial.copy()
    state.u = geometry.project_point(state.u)
    tangency = float(np.max(np.abs(np.einsum("ij,ij->i", state.u, state.v))))
    if tangency > config.tangency_tol:
        warnings.warn(
            f"initial velocity is not tangent (defect {tangency:.3e}); projecting",
            stacklevel=2,
        )
    state.v = geometry.project_tangent(state.u, state.v, check=False)
    state.validate(geometry, config.constraint_tol, config.tangency_tol)

    nsteps = max(1, int(round(config.t_end / config.dt)))
    threshold = _instability_threshold(config)

    ledger = [energy_report(state, geometry)]
    trajectory = [state.copy()] if store_trajectory else []
    result = EvolveResult(final=state, trajectory=trajectory, ledger=ledger)

    u, v = state.u, state.v
    backup_u, backup_v = u.copy(), v.copy()
    for j in range(nsteps):
        restore = (j + 1) % config.renormalize_every == 0
        pre_drift, min_disc = _advance(u, v, h, config, geometry, restore)
        bad = not math.isfinite(pre_drift) or min_disc <= 0.0 or (
            restore and pre_drift > threshold
        )
        if bad or not np.all(np.isfinite(u)):
            result.aborted = True
            result.abort_time = state.t
            result.abort_reason = (
                "non-finite state"
                if not math.isfinite(pre_drift) or not np.all(np.isfinite(u))
                else f"constraint drift {pre_drift:.3e} exceeded threshold"
            )
            u[:], v[:] = backup_u, backup_v  # roll back to last healthy state
            break
        result.max_pre_renorm_drift = max(result.max_pre_renorm_drift, pre_drift)
        state.t = initial.t + (j + 1) * config.dt
        backup_u[:], backup_v[:] = u, v
        if (j + 1) % config.record_every == 0 or j == nsteps - 1:
            rec = energy_report(state, geometry)
            ledger.append(rec)
            result.max_constraint_drift = max(
                result.max_constraint_drift, rec.constraint_drift
            )
            result.max_tangency_drift = max(
                result.max_tangency_drift, rec.tangency_drift
            )
            if store_trajectory:
                trajectory.append(state.copy())
    result.final = state
    return result


@dataclass
class InequalityReport:
    passed: bool
    max_violation: float


def check_energy_inequality(
    ledger: list[EnergyRecord], epsilon: float, tol: float
) -> InequalityReport:
    """Check the two branches of the energy law against the ledger.

    eps > 0: H(t) <= H(0) + tol for all t (dissipation);
    eps = 0: |H(t) - H(0)| <= tol (conservation).
    """
    if not ledger:
        raise ValueError("ledger is empty")
    h0 = ledger[0].hamiltonian
    if epsilon > 0:
        violation = max(rec.hamiltonian - h0 for rec in ledger)
    else:
        violation = max(abs(rec.hamiltonian - h0) for rec in ledger)
    return InequalityReport(passed=violation <= tol, max_violation=max(violation, 0.0))


@dataclass
class SweepRow:
    epsilon: float
    sup_l2: float
    sup_linf: float
    aborted: bool
    max_constraint_drift: float = 0.0
    max_tangency_drift: float = 0.0


def _sweep_threads() -> int:
    raw = os.environ.get("SOLITONSIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def epsilon_sweep(
    initial: MapState, config: SolverConfig, eps_list: list[float]
) -> list[SweepRow]:
    """Run the evolver across viscosities and report deviation from eps = 0.

    All runs share the initial data and dt.  eps_list must be sorted in
    descending order and contain the reference value 0.  Rows of aborted runs
    are flagged and should be excluded from monotonicity assessments.
    SOLITONSIM_THREADS caps the number of concurrent member runs.
    """
    eps = [float(e) for e in eps_list]
    if sorted(eps, reverse=True) != eps or any(e < 0 for e in eps):
        raise ValueError("eps_list must be nonnegative and sorted descending")
    if eps[-1] != 0.0:
        raise ValueError("eps_list must contain the reference value 0")

    def run(e):
        cfg = replace(config, epsilon=e)
        return evolve(initial, cfg, store_trajectory=True)

    workers = min(_sweep_threads(), len(eps))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, eps))
    else:
        results = [run(e) for e in eps]

    ref = results[-1]
    h = initial.grid.h
    rows = []
    for e, res in zip(eps, results):
        if res.aborted or ref.aborted:
            rows.append(
                SweepRow(
                    e,
                    math.nan,
                    math.nan,
                    True,
                    res.max_constraint_drift,
                    res.max_tangency_drift,
                )
            )
            continue
        sup_l2 = 0.0
        sup_linf = 0.0
        for a, b in zip(res.trajectory, ref.trajectory):
            d = a.u - b.u
            sup_l2 = max(sup_l2, math.sqrt(h * float(np.sum(d * d))))
            sup_linf = max(sup_linf, float(np.max(np.abs(d))))
        rows.append(
            SweepRow(
                e,
                sup_l2,
                sup_linf,
                False,
                res.max_constraint_drift,
                res.max_tangency_drift,
            )
        )
    return rows


def deviations_monotone(rows: list[SweepRow], slack: float = 0.1) -> bool:
    """True when sup-deviations decrease with eps (within relative slack)."""
    usable = [r for r in rows if not r.aborted and r.epsilon > 0]
    for prev, nxt in zip(usable, usable[1:]):
        if nxt.sup_l2 > prev.sup_l2 * (1.0 + slack):
            return False
    return True
