"""NumPy reference implementation of the hot stepping kernel.

The compiled backend in ``_core.pyx`` implements the same contract; the two
must agree on every output to rounding.  Keep any change here mirrored there.
"""

import numpy as np

BACKEND = "pure"


def _force(u, v, h, eps):
    # laplacian(u) - grad_potential(u) + eps * tangent(laplacian(v));
    # the curvature/constraint normal force is supplied by the step's
    # position multiplier, not here.
    f = (np.roll(u, -1, 0) - 2.0 * u + np.roll(u, 1, 0)) / (h * h)
    f += u[:, 2][:, None] * u
    f[:, 2] -= 1.0
    if eps > 0.0:
        lv = (np.roll(v, -1, 0) - 2.0 * v + np.roll(v, 1, 0)) / (h * h)
        lv -= np.einsum("ij,ij->i", u, lv)[:, None] * u
        f += eps * lv
    return f


def leapfrog_step_sphere(u, v, h, dt, eps, restore=True):
    """Advance (u, v) in place by one constrained leapfrog step.

    Kick-drift-kick with an exactly solved position multiplier: the first
    half-kick receives the normal impulse that lands the drifted point on the
    sphere, the second half-kick is followed by the tangency projection.

    Returns (pre_drift, min_disc): the max nodewise deviation of |u| from 1
    before the safety renormalization (rounding-level in a healthy step), and
    the minimum multiplier discriminant (nonpositive means the sphere is
    unreachable -> unstable step).
    """
    f = _force(u, v, h, eps)
    w = u + dt * v + (0.5 * dt * dt) * f
    wu = np.einsum("ij,ij->i", w, u)
    disc = wu * wu - (np.einsum("ij,ij->i", w, w) - 1.0)
    min_disc = float(disc.min())
    if restore:
        c = -wu + np.sqrt(np.maximum(disc, 0.0))
        vh = v + 0.5 * dt * f + (c / dt)[:, None] * u
    else:
        vh = v + 0.5 * dt * f
    u += dt * vh
    nrm = np.sqrt(np.einsum("ij,ij->i", u, u))
    pre_drift = float(np.abs(nrm - 1.0).max())
    if restore:
        u /= nrm[:, None]
    v[:] = vh + 0.5 * dt * _force(u, vh, h, eps)
    if restore:
        v -= np.einsum("ij,ij->i", u, v)[:, None] * u
    return pre_drift, min_disc
