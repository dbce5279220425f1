"""Uniform periodic grids, finite differences, quadrature, and a Poisson solver.

All spatial operators are second-order central stencils with periodic
wraparound; quadrature is the rectangle rule, which is the trapezoid rule on a
periodic grid and spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class IncompatibleRhsError(ValueError):
    """Poisson right-hand side with nonzero mean on the torus."""

    def __init__(self, integral: float, mean: float):
        self.integral = integral
        self.mean = mean
        super().__init__(
            f"right-hand side is incompatible: integral {integral:.6e} "
            f"(mean {mean:.6e}) must vanish on a periodic domain"
        )


@dataclass(frozen=True)
class PeriodicGrid1D:
    n: int
    length: float = 2.0 * math.pi

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need at least 8 nodes")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,)

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.h,)

    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.h


@dataclass(frozen=True)
class PeriodicGrid2D:
    nx: int
    ny: int
    lx: float = 2.0 * math.pi
    ly: float = 2.0 * math.pi

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError("need at least 8 nodes per axis")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("lengths must be positive")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nx, self.ny)

    @property
    def spacings(self) -> tuple[float, ...]:
        return (self.hx, self.hy)

    def nodes_x(self) -> np.ndarray:
        return np.arange(self.nx) * self.hx

    def nodes_y(self) -> np.ndarray:
        return np.arange(self.ny) * self.hy


@dataclass
class GridField:
    """Values attached to grid nodes: scalar, or one ambient vector per node."""

    grid: PeriodicGrid1D | PeriodicGrid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        gshape = self.grid.shape
        if self.values.shape[: len(gshape)] != gshape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {gshape}"
            )
        if self.values.ndim > len(gshape) + 1:
            raise ValueError("expected scalar or vector nodal values")

    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == len(self.grid.shape)

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy())


# ---------------------------------------------------------------------------
# array-level stencils (shared by the evolver and solvers)


def diff1_values(a: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    return (np.roll(a, -1, axis) - np.roll(a, 1, axis)) / (2.0 * h)


def second_diff_values(a: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    return (np.roll(a, -1, axis) - 2.0 * a + np.roll(a, 1, axis)) / (h * h)


def laplacian_values(a: np.ndarray, spacings) -> np.ndarray:
    out = second_diff_values(a, spacings[0], axis=0)
    for ax in range(1, len(spacings)):
        out += second_diff_values(a, spacings[ax], axis=ax)
    return out


def integrate_values(a: np.ndarray, spacings) -> float:
    cell = 1.0
    for h in spacings:
        cell *= h
    return float(cell * np.sum(a))


# ---------------------------------------------------------------------------
# field-level operations


def diff1(f: GridField, axis: int = 0) -> GridField:
    h = f.grid.spacings[axis]
    return GridField(f.grid, diff1_values(f.values, h, axis=axis))


def laplacian(f: GridField) -> GridField:
    return GridField(f.grid, laplacian_values(f.values, f.grid.spacings))


def integrate(f: GridField) -> float:
    if not f.is_scalar:
        raise ValueError("integrate expects a scalar field")
    return integrate_values(f.values, f.grid.spacings)


def l2_norm(values: np.ndarray, spacings) -> float:
    return math.sqrt(integrate_values(values * values, spacings))


def sobolev_seminorm(u: GridField, k: int, velocity: np.ndarray | None = None) -> float:
    """Discrete H^{k,2} norm of the section (u_t, u_x) over the map u.

    The covariant derivative of a section X along the map is the tangent
    projection of its central difference, D X = P(u) diff1(X).  The returned
    value is sum_{l<=k} ||D^l (v, Du)||_{L^2}.
    """
    if not isinstance(u.grid, PeriodicGrid1D):
        raise ValueError("Sobolev seminorms are defined on 1-D grids here")
    if k < 0 or k > 4:
        raise ValueError("order k must lie in 0..4")
    uu = u.values
    if np.max(np.abs(np.sqrt(np.einsum("ij,ij->i", uu, uu)) - 1.0)) > 1e-9:
        raise ValueError("map must be unit length nodewise")
    h = u.grid.h
    if velocity is None:
        velocity = np.zeros_like(uu)

    def cov(x):
        d = diff1_values(x, h)
        return d - np.einsum("ij,ij->i", uu, d)[:, None] * uu

    parts = [velocity, diff1_values(uu, h)]
    total = 0.0
    for _ in range(k + 1):
        sq = sum(np.sum(p * p) for p in parts)
        total += math.sqrt(h * sq)
        parts = [cov(p) for p in parts]
    return total


def poisson_solve_periodic(rhs: GridField, compatibility_tol: float = 1e-8) -> GridField:
    """Solve the discrete Poisson equation on a periodic 2-D grid.

    Diagonalizes the 5-point Laplacian by FFT, which makes the solve exact for
    that stencil: applying ``laplacian`` to the result reproduces the
    mean-removed right-hand side to rounding.

    Parameters
    ----------
    rhs : scalar GridField on a PeriodicGrid2D
        Source term.  Its integral must vanish up to
        ``compatibility_tol * ||rhs||_L2`` (solvability on the torus).
    compatibility_tol : float
        Relative tolerance on the integral of ``rhs``.

    Returns
    -------
    GridField
        The unique mean-zero solution of ``laplacian(phi) = rhs - mean(rhs)``.

    Raises
    ------
    IncompatibleRhsError
        If the integral of ``rhs`` exceeds the tolerance.
    """
    grid = rhs.grid
    if not isinstance(grid, PeriodicGrid2D) or not rhs.is_scalar:
        raise ValueError("expected a scalar field on a 2-D periodic grid")
    total = integrate(rhs)
    scale = l2_norm(rhs.values, grid.spacings)
    if abs(total) > compatibility_tol * max(scale, 1e-300):
        raise IncompatibleRhsError(total, total / (grid.lx * grid.ly))
    return GridField(grid, _poisson_mean_removed(rhs.values, grid))


def _poisson_mean_removed(values: np.ndarray, grid: PeriodicGrid2D) -> np.ndarray:
    kx = np.fft.fftfreq(grid.nx) * grid.nx
    ky = np.fft.fftfreq(grid.ny) * grid.ny
    # eigenvalues of the 1-D 3-point stencil: -(2 - 2 cos(2 pi m / n)) / h^2
    ex = -(2.0 - 2.0 * np.cos(2.0 * np.pi * kx / grid.nx)) / grid.hx**2
    ey = -(2.0 - 2.0 * np.cos(2.0 * np.pi * ky / grid.ny)) / grid.hy**2
    denom = ex[:, None] + ey[None, :]
    denom[0, 0] = 1.0
    rhat = np.fft.fft2(values)
    rhat[0, 0] = 0.0
    phi = np.real(np.fft.ifft2(rhat / denom))
    return phi - phi.mean()


# ---------------------------------------------------------------------------
# CSV serialization: header "x[,y],c0,c1,..."; row-major, one node per row


def write_field_csv(f: GridField, path) -> None:
    vals = f.values if not f.is_scalar else f.values[..., None]
    ncomp = vals.shape[-1]
    comp_names = [f"c{i}" for i in range(ncomp)]
    with open(path, "w", encoding="utf-8") as fh:
        if isinstance(f.grid, PeriodicGrid1D):
            fh.write(",".join(["x"] + comp_names) + "\n")
            x = f.grid.nodes()
            for i in range(f.grid.n):
                row = [f"{x[i]:.17g}"] + [f"{vals[i, c]:.17g}" for c in range(ncomp)]
                fh.write(",".join(row) + "\n")
        else:
            fh.write(",".join(["x", "y"] + comp_names) + "\n")
            x, y = f.grid.nodes_x(), f.grid.nodes_y()
            for i in range(f.grid.nx):
                for j in range(f.grid.ny):
                    row = [f"{x[i]:.17g}", f"{y[j]:.17g}"] + [
                        f"{vals[i, j, c]:.17g}" for c in range(ncomp)
                    ]
                    fh.write(",".join(row) + "\n")


def read_field_csv(path) -> GridField:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if header[0] != "x":
        raise ValueError(f"unrecognized field CSV header: {header}")
    two_d = len(header) > 1 and header[1] == "y"
    ncoord = 2 if two_d else 1
    ncomp = len(header) - ncoord
    if ncomp < 1 or header[ncoord] != "c0":
        raise ValueError(f"unrecognized field CSV header: {header}")
    if two_d:
        x = np.unique(data[:, 0])
        y = np.unique(data[:, 1])
        nx, ny = len(x), len(y)
        if nx * ny != data.shape[0]:
            raise ValueError("2-D field CSV is not a full row-major grid")
        grid = PeriodicGrid2D(nx, ny, lx=nx * (x[1] - x[0]), ly=ny * (y[1] - y[0]))
        vals = data[:, ncoord:].reshape(nx, ny, ncomp)
    else:
        n = data.shape[0]
        grid = PeriodicGrid1D(n, length=n * (data[1, 0] - data[0, 0]))
        vals = data[:, ncoord:].reshape(n, ncomp)
    if ncomp == 1:
        vals = vals[..., 0]
    return GridField(grid, vals)
