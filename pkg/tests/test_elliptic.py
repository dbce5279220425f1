import numpy as np
import pytest

from solitonsim.elliptic import (
    EllipticConfig,
    elliptic_residual,
    functional_F,
    solve_elliptic,
    tangential_residual_linf,
)
from solitonsim.geometry import rotation_z
from solitonsim.grid import GridField, PeriodicGrid1D
from solitonsim.profiles import latitude_profile, pole_profile, tangent_perturbation


def stencil_eigenvalue(h, k):
    return (2.0 - 2.0 * np.cos(k * h)) / h**2


def test_functional_examples():
    g = PeriodicGrid1D(128)
    assert functional_F(pole_profile(g)) == pytest.approx(-2 * np.pi, abs=1e-12)

    equator_point = GridField(g, np.tile([1.0, 0.0, 0.0], (g.n, 1)))
    assert functional_F(equator_point) == pytest.approx(0.0, abs=1e-12)

    lat = latitude_profile(g, 2, -0.25)
    # closed form within the family: pi k^2 sin^2(theta) - 2 pi cos(theta)
    assert functional_F(lat) == pytest.approx(17 * np.pi / 4, abs=20 * g.h**2)


def test_elliptic_residual_pole_exact():
    g = PeriodicGrid1D(64)
    field, linf = elliptic_residual(pole_profile(g))
    assert linf == 0.0
    assert np.max(np.abs(field.values)) == 0.0


def test_elliptic_residual_latitude_order():
    linfs = {}
    for n in (128, 256):
        g = PeriodicGrid1D(n)
        _, linf = elliptic_residual(latitude_profile(g, 2, -0.25))
        linfs[n] = linf
    assert np.log2(linfs[128] / linfs[256]) == pytest.approx(2.0, abs=0.2)


def test_elliptic_residual_equator_negative_control():
    g = PeriodicGrid1D(256)
    field, linf = elliptic_residual(latitude_profile(g, 1, 0.0))
    # tension vanishes on the discrete equator; the residual is the potential
    # gradient e3 at every node
    assert np.max(np.abs(field.values - [0.0, 0.0, 1.0])) <= g.h**2
    assert linf == pytest.approx(1.0, abs=g.h**2)


def test_solve_from_pole_converges_immediately():
    g = PeriodicGrid1D(64)
    cfg = EllipticConfig(flow_dt=0.9 * g.h**2 / 4)
    result = solve_elliptic(pole_profile(g), cfg)
    assert result.converged
    assert result.history[-1]["iter"] == 0


def test_gradient_flow_near_pole_to_minimizer():
    g = PeriodicGrid1D(64)
    init = tangent_perturbation(pole_profile(g), 0.05, seed=3)
    cfg = EllipticConfig(flow_dt=0.9 * g.h**2 / 4, max_iters=20000, mode="gradient_flow")
    result = solve_elliptic(init, cfg)
    assert result.converged
    assert functional_F(result.u) == pytest.approx(-2 * np.pi, abs=1e-6)
    fs = [row["F"] for row in result.history]
    # descent flow of F: monotone up to the renormalization correction
    tol = 10 * cfg.flow_dt**2
    assert all(b <= a + tol for a, b in zip(fs, fs[1:]))


def test_gradient_flow_stability_guard():
    g = PeriodicGrid1D(64)
    with pytest.raises(ValueError, match="flow_dt"):
        solve_elliptic(pole_profile(g), EllipticConfig(flow_dt=g.h))


def test_residual_descent_latitude_oracle():
    g = PeriodicGrid1D(512)
    init = tangent_perturbation(latitude_profile(g, 2, -0.25), 0.01, seed=11)
    cfg = EllipticConfig(flow_dt=1e-3, max_iters=60, mode="residual_descent")
    result = solve_elliptic(init, cfg)
    assert result.converged
    assert tangential_residual_linf(result.u) <= cfg.residual_target
    # discrete member of the latitude family: u3 = -1/c_k exactly
    ck = stencil_eigenvalue(g.h, 2)
    assert np.max(np.abs(result.u.values[:, 2] + 1.0 / ck)) <= 1e-9
    # the raw residual keeps only its O(h^2) normal part
    _, full_linf = elliptic_residual(result.u)
    normal_floor = abs(
        (np.sin(2 * g.h) / g.h) ** 2 - ck
    ) * (1 - 0.25**2)
    assert full_linf == pytest.approx(normal_floor, rel=0.05)


def test_residual_descent_non_converged_flagged():
    g = PeriodicGrid1D(128)
    init = tangent_perturbation(latitude_profile(g, 2, -0.25), 0.05, seed=2)
    cfg = EllipticConfig(flow_dt=1e-3, max_iters=2, mode="residual_descent")
    result = solve_elliptic(init, cfg)
    assert not result.converged


def test_solve_rotation_invariance():
    g = PeriodicGrid1D(128)
    init = tangent_perturbation(latitude_profile(g, 2, -0.25), 0.01, seed=5)
    cfg = EllipticConfig(flow_dt=1e-3, max_iters=60, mode="residual_descent")
    base = solve_elliptic(init, cfg)
    rot = rotation_z(1.1)
    rotated = solve_elliptic(GridField(g, init.values @ rot.T), cfg)
    assert base.converged and rotated.converged
    assert np.max(np.abs(rotated.u.values - base.u.values @ rot.T)) <= 1e-8
