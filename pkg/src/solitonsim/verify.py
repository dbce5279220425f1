"""Certification of rotation-soliton candidates and the planar spin system.

A loop u solving the stationary equation generates the rotating solution
w(t) = S_t o u of the sphere-valued first-order flow w_t = w x laplacian(w);
because rotations commute with every operator involved, the flow residual of
the whole family equals the rotation of its t = 0 value, so all residuals
here are evaluated at t = 0.

The planar spin system with hyperbolic spatial part couples s(t, x, y) to an
auxiliary potential through a Poisson equation whose source is twice the
area-form pullback density 2 s . (s_x x s_y); on closed smooth sheets the
source integrates to 8 pi times the sheet's degree.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import SPHERE
from .grid import (
    GridField,
    IncompatibleRhsError,
    PeriodicGrid2D,
    diff1_values,
    integrate,
    laplacian_values,
    poisson_solve_periodic,
    second_diff_values,
)


@dataclass
class ResidualReport:
    l2: float
    linf: float
    n: int | tuple[int, int]
    order: float | None = None

    def __post_init__(self):
        if self.l2 < 0 or self.linf < 0:
            raise ValueError("residual norms must be nonnegative")

    def to_json(self) -> str:
        n = list(self.n) if isinstance(self.n, tuple) else self.n
        return json.dumps({"l2": self.l2, "linf": self.linf, "n": n, "order": self.order})


def _norms(r: np.ndarray, spacings) -> tuple[float, float]:
    cell = 1.0
    for h in spacings:
        cell *= h
    return math.sqrt(cell * float(np.sum(r * r))), float(np.max(np.abs(r)))


def _require_unit(u: np.ndarray) -> None:
    nrm = np.sqrt(np.einsum("...i,...i->...", u, u))
    if np.max(np.abs(nrm - 1.0)) > 1e-9:
        raise ValueError("field must be unit length nodewise")


def schrodinger_residual_field(u: GridField) -> GridField:
    """t = 0 residual of the rotating ansatz in the first-order sphere flow.

    r = V(u) - u x (laplacian(u) + |u_x|^2 u); the cubed term drops under the
    cross product, leaving r = e3 x u - u x laplacian(u).
    """
    _require_unit(u.values)
    h = u.grid.h
    lap = laplacian_values(u.values, (h,))
    r = SPHERE.killing_field(u.values, check=False) - np.cross(u.values, lap)
    return GridField(u.grid, r)


def schrodinger_residual(u: GridField) -> ResidualReport:
    r = schrodinger_residual_field(u)
    l2, linf = _norms(r.values, u.grid.spacings)
    return ResidualReport(l2=l2, linf=linf, n=u.grid.n)


def build_soliton_frames(u: GridField, times) -> list[GridField]:
    """Rotated copies S_t o u; rotations are isometries, so frame energies agree."""
    _require_unit(u.values)
    return [GridField(u.grid, SPHERE.isometry_flow(float(t), u.values)) for t in times]


def holomorphic_isometry_check(alpha: float, samples) -> float:
    """max |S_a(u x X) - S_a(u) x S_a(X)| over (point, tangent) samples.

    Zero for the rotation group (proper rotations preserve cross products);
    order-one for any improper (orientation-reversing) substitute.
    """
    worst = 0.0
    for u, x in samples:
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        lhs = SPHERE.isometry_flow(alpha, np.cross(u, x), check=False)
        rhs = np.cross(
            SPHERE.isometry_flow(alpha, u, check=False),
            SPHERE.isometry_flow(alpha, x, check=False),
        )
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ---------------------------------------------------------------------------
# planar (2-D) checks


def spacetime_sheet(trajectory, stride: int = 1) -> GridField:
    """Stack evolver snapshots into a 2-D sheet with the time axis first.

    The sheet's x spacing is the snapshot spacing; it is *not* periodic in x,
    so residuals over it should be evaluated with ``interior_x=True``.
    """
    frames = trajectory[::stride]
    if len(frames) < 8:
        raise ValueError("need at least 8 snapshots for a sheet")
    dt = frames[1].t - frames[0].t
    g1 = frames[0].grid
    grid = PeriodicGrid2D(len(frames), g1.n, lx=len(frames) * dt, ly=g1.length)
    vals = np.stack([f.u for f in frames], axis=0)
    return GridField(grid, vals)


def hyperbolic_residual_field(s: GridField) -> GridField:
    """r = e3 x s - s x (s_xx - s_yy) on a 2-D sheet."""
    _require_unit(s.values)
    grid = s.grid
    box = second_diff_values(s.values, grid.hx, axis=0)
    box -= second_diff_values(s.values, grid.hy, axis=1)
    r = SPHERE.killing_field(s.values, check=False) - np.cross(s.values, box)
    return GridField(grid, r)


def ishimori_residual(s: GridField, interior_x: bool = False) -> ResidualReport:
    """Residual of the reduced hyperbolic spin equation on a sheet.

    With ``interior_x`` the two rows whose stencil wraps the x seam are
    excluded (for sheets assembled from an evolver run, which is not
    time-periodic).
    """
    r = hyperbolic_residual_field(s).values
    if interior_x:
        r = r[1:-1, :, :]
    l2, linf = _norms(r, s.grid.spacings)
    return ResidualReport(l2=l2, linf=linf, n=(s.grid.nx, s.grid.ny))


def poisson_source(s: GridField) -> GridField:
    """rhs = 2 s . (s_x x s_y): twice the area-form pullback density."""
    _require_unit(s.values)
    grid = s.grid
    sx = diff1_values(s.values, grid.hx, axis=0)
    sy = diff1_values(s.values, grid.hy, axis=1)
    rhs = 2.0 * np.einsum("ijk,ijk->ij", s.values, np.cross(sx, sy))
    return GridField(grid, rhs)


def ishimori_phi(s: GridField) -> tuple[GridField, float]:
    """Recover the auxiliary potential phi with laplacian(phi) = rhs.

    Returns the mean-zero solution for the mean-removed source together with
    the compatibility defect (the integral of the source).  On closed smooth
    sheets the integral is 8 pi times the degree, so a warning rather than an
    error is issued when it is far from zero: the sheet simply has nonzero
    degree and phi solves the mean-removed problem.
    """
    rhs = poisson_source(s)
    compatibility = integrate(rhs)
    try:
        phi = poisson_solve_periodic(rhs)
    except IncompatibleRhsError:
        warnings.warn(
            f"source integrates to {compatibility:.6e} (nonzero degree); "
            "solving the mean-removed problem",
            stacklevel=2,
        )
        mean = compatibility / (s.grid.lx * s.grid.ly)
        removed = GridField(s.grid, rhs.values - mean)
        phi = poisson_solve_periodic(removed, compatibility_tol=math.inf)
    return phi, compatibility


def sheet_degree(s: GridField) -> float:
    """Discrete degree: summed signed solid angles of the image quadrilaterals.

    Independent of the finite-difference machinery; integer-valued (to
    rounding) on closed sheets and usable as an oracle for quantization of
    the Poisson source integral (= 8 pi x degree).
    """
    _require_unit(s.values)
    v = s.values

    def solid(a, b, c):
        num = np.einsum("ijk,ijk->ij", a, np.cross(b, c))
        den = (
            1.0
            + np.einsum("ijk,ijk->ij", a, b)
            + np.einsum("ijk,ijk->ij", b, c)
            + np.einsum("ijk,ijk->ij", c, a)
        )
        return 2.0 * np.arctan2(num, den)

    b = np.roll(v, -1, 0)
    c = np.roll(v, -1, 1)
    d = np.roll(np.roll(v, -1, 0), -1, 1)
    omega = solid(v, b, d) + solid(v, d, c)
    return float(omega.sum() / (4.0 * math.pi))


# ---------------------------------------------------------------------------
# refinement studies


def refinement_order(coarse: ResidualReport, fine: ResidualReport) -> float:
    """Observed order from a grid-doubling pair, based on the L2 norms."""
    if coarse.l2 <= 0 or fine.l2 <= 0:
        raise ValueError("refinement order needs positive residuals")
    return math.log2(coarse.l2 / fine.l2)


def residual_refinement(build, n_pair, residual=schrodinger_residual) -> ResidualReport:
    """Evaluate a residual on profiles built at two resolutions.

    ``build(n)`` must return the profile at resolution n.  Returns the fine
    report with its ``order`` field filled from the (coarse, fine) pair.
    """
    n_coarse, n_fine = n_pair
    coarse = residual(build(int(n_coarse)))
    fine = residual(build(int(n_fine)))
    fine.order = refinement_order(coarse, fine)
    return fine
