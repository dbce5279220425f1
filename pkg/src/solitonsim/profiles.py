"""Closed-form initial data: latitude loops, perturbations, and test sheets."""

from __future__ import annotations

import math

import numpy as np

from .grid import GridField, PeriodicGrid1D, PeriodicGrid2D


def pole_profile(grid: PeriodicGrid1D, south: bool = False) -> GridField:
    u = np.zeros((grid.n, 3))
    u[:, 2] = -1.0 if south else 1.0
    return GridField(grid, u)


def latitude_profile(grid: PeriodicGrid1D, k: int, costheta: float) -> GridField:
    """Loop winding k times around a latitude circle at height costheta.

    Within this family, tension balances the height-potential gradient at
    k^2 costheta = -1 (stationary loop of the elliptic problem) and at
    k^2 costheta = +1 (static solution of the wave problem).
    """
    if not -1.0 <= costheta <= 1.0:
        raise ValueError("costheta must lie in [-1, 1]")
    s = math.sqrt(1.0 - costheta * costheta)
    x = grid.nodes()
    u = np.stack(
        [s * np.cos(k * x), s * np.sin(k * x), np.full(grid.n, costheta)], axis=1
    )
    return GridField(grid, u)


def tangent_perturbation(
    u: GridField, amplitude: float, seed: int, modes: int = 2
) -> GridField:
    """Add band-limited tangent noise to a sphere-valued map and renormalize.

    Uses a counter-based generator (Philox) keyed on the 64-bit seed, so the
    result is bitwise reproducible across runs and platforms.  The noise is a
    combination of the first ``modes`` Fourier modes per ambient component,
    tangent-projected and scaled to root-mean-square ``amplitude``.
    """
    grid = u.grid
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    x = 2.0 * np.pi * np.arange(grid.n) / grid.n
    xi = np.zeros((grid.n, 3))
    for comp in range(3):
        for m in range(1, modes + 1):
            a, b = gen.normal(), gen.normal()
            xi[:, comp] += a * np.cos(m * x) + b * np.sin(m * x)
    uu = u.values
    xi -= np.einsum("ij,ij->i", uu, xi)[:, None] * uu
    rms = math.sqrt(float(np.mean(np.einsum("ij,ij->i", xi, xi))))
    if rms > 0:
        xi *= amplitude / rms
    out = uu + xi
    out /= np.sqrt(np.einsum("ij,ij->i", out, out))[:, None]
    return GridField(grid, out)


# ---------------------------------------------------------------------------
# 2-D test sheets (maps from the torus into the sphere)


def constant_sheet(grid: PeriodicGrid2D, point=(0.0, 0.0, 1.0)) -> GridField:
    s = np.broadcast_to(np.asarray(point, dtype=float), (grid.nx, grid.ny, 3)).copy()
    return GridField(grid, s)


def sheet_from_profile(profile: GridField, ny: int, ly: float = 2.0 * math.pi) -> GridField:
    """Extend a 1-D profile u(x) to the y-independent sheet s(x, y) = u(x)."""
    g1 = profile.grid
    grid = PeriodicGrid2D(g1.n, ny, lx=g1.length, ly=ly)
    s = np.repeat(profile.values[:, None, :], ny, axis=1)
    return GridField(grid, s)


def suspension_sheet(grid: PeriodicGrid2D) -> GridField:
    """Smooth degree-zero sheet (sin x cos y, sin x sin y, cos x).

    The area-form pullback density is sin(x); antipodal symmetry in x makes
    its grid sum vanish exactly for even nx.
    """
    x = grid.nodes_x()[:, None]
    y = grid.nodes_y()[None, :]
    s = np.stack(
        [
            np.broadcast_to(np.sin(x) * np.cos(y), grid.shape),
            np.broadcast_to(np.sin(x) * np.sin(y), grid.shape),
            np.broadcast_to(np.cos(x) * np.ones_like(y), grid.shape),
        ],
        axis=-1,
    )
    return GridField(grid, s)


def bump_degree_sheet(grid: PeriodicGrid2D, radius: float = 2.4) -> GridField:
    """Smooth degree-one sheet: a disk wrapped once over the sphere.

    Inside a disk of the given radius about the cell center the polar angle
    runs from 0 (north pole) to pi via a C^2 smoothstep; outside, the sheet is
    constant at the south pole.  The area-form pullback integrates to the full
    sphere area, so the Poisson source 2 s . (s_x x s_y) integrates to 8 pi.
    """
    x = grid.nodes_x()[:, None] - grid.lx / 2.0
    y = grid.nodes_y()[None, :] - grid.ly / 2.0
    r = np.sqrt(x * x + y * y)
    t = np.clip(r / radius, 0.0, 1.0)
    theta = math.pi * (10.0 * t**3 - 15.0 * t**4 + 6.0 * t**5)
    safe_r = np.maximum(r, 1e-300)
    cx = np.where(r > 0, x / safe_r, 0.0)
    cy = np.where(r > 0, y / safe_r, 0.0)
    s = np.stack(
        [np.sin(theta) * cx, np.sin(theta) * cy, np.cos(theta) * np.ones_like(cx)],
        axis=-1,
    )
    return GridField(grid, s)
