"""Stationary loops on the sphere: tension balancing the potential gradient.

The stationary equation for maps u: S^1 -> S^2 is

    u_xx + |u_x|^2 u + grad_potential(u) = 0,

the critical-point equation of F(u) = 1/2 ||u_x||^2 - integral(potential).
Constant maps at the poles are the extrema of F; the nonconstant solutions
are latitude loops with k^2 u3 = -1, which are saddle points of F.  Two
solver modes are therefore provided:

* ``gradient_flow``: explicit descent flow of F with nodewise renormalization
  (finds minimizers, i.e. the poles);
* ``residual_descent``: damped Gauss-Newton least squares on the tangential
  residual plus the unit constraints (finds the saddle-type loops directly).

Stopping is measured in the nodewise sup norm of the *tangent-projected*
residual P(u) r: the raw residual r retains an O(h^2) normal component on any
unit field (the central-difference |u_x|^2 differs from the staggered value
that the discrete Laplacian produces along the normal), so only the
tangential part can be driven to zero on the constraint manifold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .grid import GridField, PeriodicGrid1D, diff1_values, laplacian_values


@dataclass
class EllipticConfig:
    flow_dt: float
    max_iters: int = 2000
    residual_target: float = 1e-8
    mode: str = "gradient_flow"

    def __post_init__(self):
        if self.flow_dt <= 0:
            raise ValueError("flow_dt must be positive")
        if self.mode not in ("gradient_flow", "residual_descent"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def check_grid(self, grid: PeriodicGrid1D) -> None:
        if self.mode == "gradient_flow" and self.flow_dt > grid.h**2 / 4.0 + 1e-15:
            raise ValueError(
                f"parabolic stability requires flow_dt <= h^2/4 = {grid.h ** 2 / 4:.3e}"
            )


@dataclass
class EllipticResult:
    u: GridField
    history: list[dict]
    converged: bool


def _require_unit(u: np.ndarray) -> None:
    if np.max(np.abs(np.sqrt(np.einsum("ij,ij->i", u, u)) - 1.0)) > 1e-9:
        raise ValueError("field must be unit length nodewise")


def _functional(u: np.ndarray, h: float) -> float:
    du = diff1_values(u, h)
    return 0.5 * h * float(np.sum(du * du)) - h * float(np.sum(u[:, 2]))


def functional_F(u: GridField) -> float:
    """F(u) = 1/2 ||u_x||_{L^2}^2 - integral of the height potential."""
    _require_unit(u.values)
    return _functional(u.values, u.grid.h)


def _residual_values(u: np.ndarray, h: float) -> np.ndarray:
    # r = laplacian(u) + |u_x|^2 u + grad_potential(u)
    r = laplacian_values(u, (h,))
    du = diff1_values(u, h)
    r += np.einsum("ij,ij->i", du, du)[:, None] * u
    r -= u[:, 2][:, None] * u
    r[:, 2] += 1.0
    return r


def _tangential(u: np.ndarray, r: np.ndarray) -> np.ndarray:
    return r - np.einsum("ij,ij->i", u, r)[:, None] * u


def elliptic_residual(u: GridField) -> tuple[GridField, float]:
    """Residual field of the stationary equation and its sup norm."""
    _require_unit(u.values)
    r = _residual_values(u.values, u.grid.h)
    return GridField(u.grid, r), float(np.max(np.abs(r)))


def tangential_residual_linf(u: GridField) -> float:
    """Sup norm of the tangent-projected stationary residual."""
    _require_unit(u.values)
    r = _residual_values(u.values, u.grid.h)
    return float(np.max(np.abs(_tangential(u.values, r))))


def _descent_history_entry(it: int, u: np.ndarray, grid: PeriodicGrid1D) -> dict:
    # iterates may sit slightly off the sphere mid-solve; evaluate F on the
    # renormalized copy and the residual on the raw iterate
    un = u / np.sqrt(np.einsum("ij,ij->i", u, u))[:, None]
    r = _residual_values(u, grid.h)
    return {
        "iter": it,
        "F": _functional(un, grid.h),
        "residual_linf": float(np.max(np.abs(_tangential(u, r)))),
    }


def _gradient_flow(u0: np.ndarray, grid: PeriodicGrid1D, config: EllipticConfig):
    """Explicit descent flow of F: u <- normalize(u + flow_dt * (tension + grad)).

    The first variation of F along a tangent field W is
    -integral < u_xx + |u_x|^2 u + grad_potential(u), W >, so the *descent*
    direction is +r.  F is nonincreasing along the flow up to the O(flow_dt^2)
    renormalization correction.
    """
    u = u0.copy()
    h = grid.h
    history = [_descent_history_entry(0, u, grid)]
    for it in range(1, config.max_iters + 1):
        if history[-1]["residual_linf"] <= config.residual_target:
            return u, history, True
        u = u + config.flow_dt * _residual_values(u, h)
        u /= np.sqrt(np.einsum("ij,ij->i", u, u))[:, None]
        history.append(_descent_history_entry(it, u, grid))
    done = history[-1]["residual_linf"] <= config.residual_target
    return u, history, done


def _jacobian(u: np.ndarray, h: float) -> sp.csr_matrix:
    """Exact Jacobian of [P(u) r(u); |u_i|^2 - 1] with respect to ambient u."""
    n = len(u)
    du = diff1_values(u, h)
    r = _residual_values(u, h)
    ur = np.einsum("ij,ij->i", u, r)
    eye = np.eye(3)[None]
    proj = eye - u[:, :, None] * u[:, None, :]
    du2 = np.einsum("ij,ij->i", du, du)
    e3 = np.array([0.0, 0.0, 1.0])
    # dr blocks: diagonal and the two stencil neighbours
    dii = (-2.0 / h**2 + du2 - u[:, 2])[:, None, None] * eye \
        - u[:, :, None] * e3[None, None, :]
    dip = (1.0 / h**2) * eye + u[:, :, None] * (du / h)[:, None, :]
    dim = (1.0 / h**2) * eye - u[:, :, None] * (du / h)[:, None, :]
    # dF = P dr + dP r, with dP r = -(du . r) u - (u . r) du
    cii = proj @ dii - u[:, :, None] * r[:, None, :] - ur[:, None, None] * eye
    cip = proj @ dip
    cim = proj @ dim
    idx = np.arange(n)

    def coo(jcol, block):
        rows = np.broadcast_to(
            3 * idx[:, None, None] + np.arange(3)[None, :, None], (n, 3, 3)
        ).ravel()
        cols = np.broadcast_to(
            3 * jcol[:, None, None] + np.arange(3)[None, None, :], (n, 3, 3)
        ).ravel()
        return rows, cols, block.ravel()

    parts = [coo(idx, cii), coo((idx + 1) % n, cip), coo((idx - 1) % n, cim)]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    jac = sp.csr_matrix((vals, (rows, cols)), shape=(3 * n, 3 * n))
    unit_rows = sp.csr_matrix(
        (2.0 * u.ravel(), (np.repeat(idx, 3), np.arange(3 * n))), shape=(n, 3 * n)
    )
    return sp.vstack([jac, unit_rows]).tocsr()


def _residual_descent(u0: np.ndarray, grid: PeriodicGrid1D, config: EllipticConfig):
    """Damped Gauss-Newton on 1/2 ||P(u) r||^2 + 1/2 |||u|^2 - 1||^2.

    Levenberg-Marquardt damping with multiplicative backtracking keeps the
    merit function strictly decreasing; the rotational zero mode of the
    solution family is absorbed by the damping term.
    """
    u = u0.copy()
    h = grid.h
    n = len(u)
    mu = 1e-2
    history = [_descent_history_entry(0, u, grid)]

    def merit(uu):
        res = _tangential(uu, _residual_values(uu, h))
        g = np.einsum("ij,ij->i", uu, uu) - 1.0
        return float(np.sum(res * res) + np.sum(g * g))

    for it in range(1, config.max_iters + 1):
        tang = _tangential(u, _residual_values(u, h))
        g = np.einsum("ij,ij->i", u, u) - 1.0
        if (
            history[-1]["residual_linf"] <= config.residual_target
            and np.max(np.abs(g)) <= 1e-12
        ):
            return u, history, True
        jac = _jacobian(u, h)
        res = np.concatenate([tang.ravel(), g])
        jtj = (jac.T @ jac).tocsc()
        rhs = -jac.T @ res
        old = float(res @ res)
        accepted = False
        for _ in range(30):
            delta = spsolve(jtj + mu * sp.identity(3 * n, format="csc"), rhs)
            u_try = u + delta.reshape(n, 3)
            if merit(u_try) < old:
                u = u_try
                mu = max(mu / 5.0, 1e-14)
                accepted = True
                break
            mu *= 10.0
        history.append(_descent_history_entry(it, u, grid))
        if not accepted:
            break
    done = history[-1]["residual_linf"] <= config.residual_target
    return u, history, done


def solve_elliptic(u_init: GridField, config: EllipticConfig) -> EllipticResult:
    """Solve the stationary equation from the given unit initial field.

    Returns the final iterate (renormalized nodewise), the iteration history
    as ``{iter, F, residual_linf}`` rows, and a convergence flag; hitting
    max_iters returns the best iterate flagged non-converged.
    """
    _require_unit(u_init.values)
    config.check_grid(u_init.grid)
    if config.mode == "gradient_flow":
        u, history, done = _gradient_flow(u_init.values, u_init.grid, config)
    else:
        u, history, done = _residual_descent(u_init.values, u_init.grid, config)
    u = u / np.sqrt(np.einsum("ij,ij->i", u, u))[:, None]
    return EllipticResult(GridField(u_init.grid, u), history, done)


def write_history_csv(history: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iter,F,residual_linf\n")
        for row in history:
            fh.write(
                f"{row['iter']},{row['F']:.17g},{row['residual_linf']:.17g}\n"
            )
