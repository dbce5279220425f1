# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel; mirrors ``pure.py`` exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "compiled"


cdef void _force(double[:, ::1] u, double[:, ::1] v, double h, double eps,
                 double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, im, ip, c
    cdef double ih2 = 1.0 / (h * h)
    cdef double u3, udotlv
    cdef double lv0, lv1, lv2
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i < n - 1 else 0
        u3 = u[i, 2]
        for c in range(3):
            out[i, c] = (u[ip, c] - 2.0 * u[i, c] + u[im, c]) * ih2 + u3 * u[i, c]
        out[i, 2] -= 1.0
        if eps > 0.0:
            lv0 = (v[ip, 0] - 2.0 * v[i, 0] + v[im, 0]) * ih2
            lv1 = (v[ip, 1] - 2.0 * v[i, 1] + v[im, 1]) * ih2
            lv2 = (v[ip, 2] - 2.0 * v[i, 2] + v[im, 2]) * ih2
            udotlv = u[i, 0] * lv0 + u[i, 1] * lv1 + u[i, 2] * lv2
            out[i, 0] += eps * (lv0 - udotlv * u[i, 0])
            out[i, 1] += eps * (lv1 - udotlv * u[i, 1])
            out[i, 2] += eps * (lv2 - udotlv * u[i, 2])


def leapfrog_step_sphere(double[:, ::1] u, double[:, ::1] v, double h,
                         double dt, double eps, bint restore=True):
    """Same contract as the NumPy backend; see ``pure.leapfrog_step_sphere``."""
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray fa = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] f = fa
    cdef Py_ssize_t i, c
    cdef double w0, w1, w2, wu, w2n, disc, mult, nrm, dev
    cdef double min_disc = 1e300
    cdef double pre_drift = 0.0
    cdef double hdt = 0.5 * dt
    cdef double udotv

    _force(u, v, h, eps, f)
    for i in range(n):
        w0 = u[i, 0] + dt * v[i, 0] + hdt * dt * f[i, 0]
        w1 = u[i, 1] + dt * v[i, 1] + hdt * dt * f[i, 1]
        w2 = u[i, 2] + dt * v[i, 2] + hdt * dt * f[i, 2]
        wu = w0 * u[i, 0] + w1 * u[i, 1] + w2 * u[i, 2]
        w2n = w0 * w0 + w1 * w1 + w2 * w2
        disc = wu * wu - (w2n - 1.0)
        if disc < min_disc or disc != disc:
            min_disc = disc
        if restore:
            mult = (-wu + sqrt(disc if disc > 0.0 else 0.0)) / dt
        else:
            mult = 0.0
        for c in range(3):
            v[i, c] = v[i, c] + hdt * f[i, c] + mult * u[i, c]
            u[i, c] = u[i, c] + dt * v[i, c]
        nrm = sqrt(u[i, 0] * u[i, 0] + u[i, 1] * u[i, 1] + u[i, 2] * u[i, 2])
        dev = nrm - 1.0 if nrm >= 1.0 else 1.0 - nrm
        if dev > pre_drift or dev != dev:
            pre_drift = dev
        if restore:
            for c in range(3):
                u[i, c] /= nrm
    _force(u, v, h, eps, f)
    for i in range(n):
        for c in range(3):
            v[i, c] += hdt * f[i, c]
        if restore:
            udotv = u[i, 0] * v[i, 0] + u[i, 1] * v[i, 1] + u[i, 2] * v[i, 2]
            for c in range(3):
                v[i, c] -= udotv * u[i, c]
    return pre_drift, min_disc
