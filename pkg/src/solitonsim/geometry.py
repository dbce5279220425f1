"""Closed-form geometry of the embedded target manifolds.

The primary target is the unit sphere S^2 in R^3 with the height potential
lam(u) = u3.  On the sphere the tangential gradient of the height is
P(u) e3 = e3 - u3 u, the complex structure is the cross product
J(u) X = u x X, and the rotation field V(u) = e3 x u generates the
one-parameter rotation group about the z-axis.  These satisfy the defining
relation of a Killing potential, grad lam = J V, pointwise.

A flat two-torus S^1 x S^1 in R^4 is included as a zero-curvature control
target.  Its circle factors are extrinsically uncoupled, so cross-factor
contamination in curvature terms is immediately visible.  The torus carries
the potential cos(alpha) = u1, which is *not* a Killing potential (the flat
torus admits no nonconstant one); its field V = -J grad(lam) therefore fails
the symmetrized-derivative test and serves as a negative control.
"""

from __future__ import annotations

import numpy as np

UNIT_TOL = 1e-9
TANGENT_TOL = 1e-8


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


def rotation_z(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class TargetGeometry:
    """Interface shared by the embedded targets.

    Points and vectors are ambient arrays of shape (..., K).  All operations
    are pure functions; instances carry no mutable state.
    """

    ambient_dim: int

    def project_point(self, p, check=True):
        raise NotImplementedError

    def project_tangent(self, u, x, check=True):
        raise NotImplementedError

    def potential(self, u):
        raise NotImplementedError

    def grad_potential(self, u, check=True):
        raise NotImplementedError

    def complex_structure(self, u, x, check=True):
        raise NotImplementedError

    def killing_field(self, u, check=True):
        raise NotImplementedError

    def isometry_flow(self, t, u, check=True):
        raise NotImplementedError

    def sff_trace_lorentz(self, u, ut, ux, check=True):
        raise NotImplementedError

    def constraint_defect(self, u):
        """Nodewise deviation from the embedding constraints."""
        raise NotImplementedError

    def normal_shift(self, u, w):
        """Shift w along the normal directions at u back onto the manifold.

        Returns (shifted, min_discriminant); a nonpositive discriminant means
        the constraint is unreachable from w (time step way too large).
        """
        raise NotImplementedError

    def tangent_basis(self, u):
        """Orthonormal basis (e1, e2) of the tangent plane at a single point."""
        raise NotImplementedError

    # -- shared validation helpers ------------------------------------

    def _require_on_manifold(self, u):
        defect = np.max(self.constraint_defect(u))
        if not np.isfinite(defect) or defect > UNIT_TOL:
            raise ValueError(
                f"point is not on the target manifold (defect {defect:.3e})"
            )

    def _require_tangent(self, u, x):
        err = self._tangency_defect(u, x)
        if not np.isfinite(err) or err > TANGENT_TOL:
            raise ValueError(f"vector is not tangent (defect {err:.3e})")

    def _tangency_defect(self, u, x):
        raise NotImplementedError


class SphereGeometry(TargetGeometry):
    """Unit sphere S^2 in R^3 with potential lam(u) = u3."""

    ambient_dim = 3

    def project_point(self, p, check=True):
        p = np.asarray(p, dtype=float)
        nrm = np.sqrt(_dot(p, p))
        if check and (not np.all(np.isfinite(nrm)) or np.any(nrm == 0.0)):
            raise ValueError("cannot project the zero vector onto the sphere")
        return p / nrm[..., None]

    def project_tangent(self, u, x, check=True):
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if check:
            self._require_on_manifold(u)
        return x - _dot(u, x)[..., None] * u

    def potential(self, u):
        return np.asarray(u, dtype=float)[..., 2]

    def grad_potential(self, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        g = -u[..., 2][..., None] * u
        g[..., 2] += 1.0
        return g

    def complex_structure(self, u, x, check=True):
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if check:
            self._require_on_manifold(u)
            self._require_tangent(u, x)
        return np.cross(u, x)

    def killing_field(self, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        # e3 x u == -u x e3
        v = np.empty_like(u)
        v[..., 0] = -u[..., 1]
        v[..., 1] = u[..., 0]
        v[..., 2] = 0.0
        return v

    def isometry_flow(self, t, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        return u @ rotation_z(float(t)).T

    def sff_trace_lorentz(self, u, ut, ux, check=True):
        u = np.asarray(u, dtype=float)
        ut = np.asarray(ut, dtype=float)
        ux = np.asarray(ux, dtype=float)
        if check:
            self._require_on_manifold(u)
            self._require_tangent(u, ut)
            self._require_tangent(u, ux)
        lam = _dot(ux, ux) - _dot(ut, ut)
        return lam[..., None] * u

    def constraint_defect(self, u):
        u = np.asarray(u, dtype=float)
        return np.abs(np.sqrt(_dot(u, u)) - 1.0)

    def normal_shift(self, u, w):
        wu = _dot(w, u)
        disc = wu * wu - (_dot(w, w) - 1.0)
        c = -wu + np.sqrt(np.maximum(disc, 0.0))
        return w + c[..., None] * u, float(np.min(disc))

    def tangent_basis(self, u):
        u = np.asarray(u, dtype=float)
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(u)))] = 1.0
        e1 = axis - (axis @ u) * u
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(u, e1)
        if abs(np.linalg.norm(e2) - 1.0) > 1e-12:
            raise RuntimeError("degenerate tangent basis")
        return e1, e2

    def _tangency_defect(self, u, x):
        scale = np.maximum(1.0, np.sqrt(_dot(x, x)))
        return np.max(np.abs(_dot(u, x)) / scale)


class FlatTorusGeometry(TargetGeometry):
    """Flat torus S^1 x S^1 in R^4, coordinates (u1, u2, u3, u4) per factor pair.

    Potential lam(u) = u1 = cos(alpha).  V is defined as -J grad(lam) so the
    relation grad lam = J V holds by construction; V is not a Killing field
    here and the flow it generates is not isometric.
    """

    ambient_dim = 4

    @staticmethod
    def _pairs(x):
        return x[..., 0:2], x[..., 2:4]

    def project_point(self, p, check=True):
        p = np.asarray(p, dtype=float)
        out = p.copy()
        for sl in (slice(0, 2), slice(2, 4)):
            nrm = np.sqrt(_dot(p[..., sl], p[..., sl]))
            if check and (not np.all(np.isfinite(nrm)) or np.any(nrm == 0.0)):
                raise ValueError("cannot project a zero factor pair onto the torus")
            out[..., sl] = p[..., sl] / nrm[..., None]
        return out

    def project_tangent(self, u, x, check=True):
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if check:
            self._require_on_manifold(u)
        out = x.copy()
        for sl in (slice(0, 2), slice(2, 4)):
            out[..., sl] -= _dot(u[..., sl], x[..., sl])[..., None] * u[..., sl]
        return out

    def potential(self, u):
        return np.asarray(u, dtype=float)[..., 0]

    def grad_potential(self, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        # P(u) e1 restricted to the first factor: (u2^2, -u1 u2, 0, 0)
        g = np.zeros_like(u)
        g[..., 0] = u[..., 1] ** 2
        g[..., 1] = -u[..., 0] * u[..., 1]
        return g

    def _factor_frames(self, u):
        t1 = np.zeros_like(u)
        t1[..., 0] = -u[..., 1]
        t1[..., 1] = u[..., 0]
        t2 = np.zeros_like(u)
        t2[..., 2] = -u[..., 3]
        t2[..., 3] = u[..., 2]
        return t1, t2

    def complex_structure(self, u, x, check=True):
        u = np.asarray(u, dtype=float)
        x = np.asarray(x, dtype=float)
        if check:
            self._require_on_manifold(u)
            self._require_tangent(u, x)
        t1, t2 = self._factor_frames(u)
        a = _dot(x, t1)[..., None]
        b = _dot(x, t2)[..., None]
        return a * t2 - b * t1

    def killing_field(self, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        # -J grad(lam) = u2 * t2
        t1, t2 = self._factor_frames(u)
        return u[..., 1][..., None] * t2

    def isometry_flow(self, t, u, check=True):
        u = np.asarray(u, dtype=float)
        if check:
            self._require_on_manifold(u)
        # flow of V = u2 t2: first factor fixed, second rotated by t*u2
        ang = float(t) * u[..., 1]
        c, s = np.cos(ang), np.sin(ang)
        out = u.copy()
        out[..., 2] = c * u[..., 2] - s * u[..., 3]
        out[..., 3] = s * u[..., 2] + c * u[..., 3]
        return out

    def sff_trace_lorentz(self, u, ut, ux, check=True):
        u = np.asarray(u, dtype=float)
        ut = np.asarray(ut, dtype=float)
        ux = np.asarray(ux, dtype=float)
        if check:
            self._require_on_manifold(u)
            self._require_tangent(u, ut)
            self._require_tangent(u, ux)
        out = np.zeros_like(u)
        for sl in (slice(0, 2), slice(2, 4)):
            lam = _dot(ux[..., sl], ux[..., sl]) - _dot(ut[..., sl], ut[..., sl])
            out[..., sl] = lam[..., None] * u[..., sl]
        return out

    def constraint_defect(self, u):
        u = np.asarray(u, dtype=float)
        d1 = np.abs(np.sqrt(_dot(u[..., 0:2], u[..., 0:2])) - 1.0)
        d2 = np.abs(np.sqrt(_dot(u[..., 2:4], u[..., 2:4])) - 1.0)
        return np.maximum(d1, d2)

    def normal_shift(self, u, w):
        out = w.copy()
        min_disc = np.inf
        for sl in (slice(0, 2), slice(2, 4)):
            wp, up = w[..., sl], u[..., sl]
            wu = _dot(wp, up)
            disc = wu * wu - (_dot(wp, wp) - 1.0)
            min_disc = min(min_disc, float(np.min(disc)))
            c = -wu + np.sqrt(np.maximum(disc, 0.0))
            out[..., sl] = wp + c[..., None] * up
        return out, min_disc

    def tangent_basis(self, u):
        t1, t2 = self._factor_frames(np.asarray(u, dtype=float))
        return t1, t2

    def _tangency_defect(self, u, x):
        scale = np.maximum(1.0, np.sqrt(_dot(x, x)))
        d1 = np.abs(_dot(u[..., 0:2], x[..., 0:2])) / scale
        d2 = np.abs(_dot(u[..., 2:4], x[..., 2:4])) / scale
        return max(np.max(d1), np.max(d2))


SPHERE = SphereGeometry()
TORUS = FlatTorusGeometry()


def _retraction_curve_point(geom, u, e, delta):
    return geom.project_point(u + delta * e, check=False)


def tangential_gradient_fd(geom, potential, u, fd_step):
    """Tangent-projected gradient of a scalar by central differences."""
    e1, e2 = geom.tangent_basis(u)
    g = np.zeros_like(np.asarray(u, dtype=float))
    for e in (e1, e2):
        plus = potential(_retraction_curve_point(geom, u, e, fd_step))
        minus = potential(_retraction_curve_point(geom, u, e, -fd_step))
        g += (plus - minus) / (2.0 * fd_step) * e
    return g


def _covariant_matrix_fd(geom, field, u, fd_step):
    """2x2 matrix of the covariant derivative of a tangent field at u.

    Entry (a, b) is < e_b, D_{e_a} field >, computed by central differences
    of the field along normalization-retraction curves and projecting back.
    """
    e1, e2 = geom.tangent_basis(u)
    basis = (e1, e2)
    m = np.zeros((2, 2))
    for a, ea in enumerate(basis):
        fp = field(_retraction_curve_point(geom, u, ea, fd_step))
        fm = field(_retraction_curve_point(geom, u, ea, -fd_step))
        d = geom.project_tangent(u, (fp - fm) / (2.0 * fd_step), check=False)
        for b, eb in enumerate(basis):
            m[a, b] = eb @ d
    return m


# In the (e1, e2) bases built above, e2 = J e1 on both targets, so J is the
# standard symplectic 2x2 matrix.
_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def hermitian_hessian_residual(geom, potential, u, fd_step, grad=None):
    """Commutator norm of the covariant Hessian of a candidate potential with J.

    Builds the 2x2 covariant Hessian H of ``potential`` at u in an orthonormal
    tangent basis by central finite differences of the tangent-projected
    gradient and returns ||H J - J H||_2.  The result vanishes (up to
    O(fd_step^2) and rounding) exactly when the candidate generates an
    isometry flow through grad = J V.

    ``grad`` may supply the ambient gradient of the candidate in closed form;
    otherwise it is itself approximated by finite differences.
    """
    u = np.asarray(u, dtype=float)
    geom._require_on_manifold(u)
    if not 0.0 < fd_step <= 1e-2:
        raise ValueError("fd_step must lie in (0, 1e-2]")
    if grad is not None:
        field = lambda p: geom.project_tangent(p, grad(p), check=False)
    else:
        field = lambda p: tangential_gradient_fd(geom, potential, p, fd_step)
    hess = _covariant_matrix_fd(geom, field, u, fd_step)
    comm = hess @ _J2 - _J2 @ hess
    return float(np.linalg.norm(comm, 2))


def killing_symmetrized_residual(geom, u, fd_step, field=None):
    """Norm of (DV)^T + DV at u for the geometry's distinguished field V.

    Vanishes to O(fd_step^2) iff V is a Killing field at u.
    """
    u = np.asarray(u, dtype=float)
    geom._require_on_manifold(u)
    if field is None:
        field = lambda p: geom.killing_field(p, check=False)
    m = _covariant_matrix_fd(geom, field, u, fd_step)
    return float(np.linalg.norm(m + m.T, 2))
