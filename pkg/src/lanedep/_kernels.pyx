# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-loop integrator core.

Scalar arithmetic is ordered exactly as in the pure-Python fallback so
the two backends agree; see _kernels_py.py for the reference semantics.
"""

import numpy as np

COMPILED = True


cdef inline void _deriv(double[4][4] a, double[4][2] b, double t, double* s,
                        double p0, double p1, double q0, double q1,
                        double t_clamp, double* out) noexcept nogil:
    cdef double tc = t if t < t_clamp else t_clamp
    cdef double psi1 = p0 + p1 * tc
    cdef double psi2 = q0 + q1 * tc
    cdef int i
    for i in range(4):
        out[i] = (a[i][0] * s[0] + a[i][1] * s[1] + a[i][2] * s[2] + a[i][3] * s[3]
                  + b[i][0] * psi1 + b[i][1] * psi2)


def integrate_closed_loop(ac, bc, x0, double t0, double h, int substeps,
                          int n_out_max, double p0, double p1, double q0,
                          double q1, double t_clamp, double band_ey,
                          double band_eydot):
    """See _kernels_py.integrate_closed_loop for the contract."""
    cdef double[:, ::1] ac_v = np.ascontiguousarray(ac, dtype=np.float64)
    cdef double[:, ::1] bc_v = np.ascontiguousarray(bc, dtype=np.float64)
    cdef double[::1] x0_v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[4][4] a
    cdef double[4][2] b
    cdef double[4] x
    cdef double[4] k1
    cdef double[4] k2
    cdef double[4] k3
    cdef double[4] k4
    cdef double[4] s2
    cdef double[4] s3
    cdef double[4] s4
    cdef int i, j, step, sub
    cdef double t = t0
    cdef bint deactivated

    for i in range(4):
        x[i] = x0_v[i]
        for j in range(4):
            a[i][j] = ac_v[i, j]
        for j in range(2):
            b[i][j] = bc_v[i, j]

    out = np.empty((n_out_max + 1, 4), dtype=np.float64)
    cdef double[:, ::1] out_v = out
    for i in range(4):
        out_v[0, i] = x[i]
    if x[0] < band_ey and -x[0] < band_ey and x[1] < band_eydot and -x[1] < band_eydot:
        return out[:1].copy(), True

    deactivated = False
    cdef int rows = 1
    with nogil:
        for step in range(n_out_max):
            for sub in range(substeps):
                _deriv(a, b, t, x, p0, p1, q0, q1, t_clamp, k1)
                for i in range(4):
                    s2[i] = x[i] + 0.5 * h * k1[i]
                _deriv(a, b, t + 0.5 * h, s2, p0, p1, q0, q1, t_clamp, k2)
                for i in range(4):
                    s3[i] = x[i] + 0.5 * h * k2[i]
                _deriv(a, b, t + 0.5 * h, s3, p0, p1, q0, q1, t_clamp, k3)
                for i in range(4):
                    s4[i] = x[i] + h * k3[i]
                _deriv(a, b, t + h, s4, p0, p1, q0, q1, t_clamp, k4)
                for i in range(4):
                    x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                t = t + h
            for i in range(4):
                out_v[rows, i] = x[i]
            rows = rows + 1
            if x[0] < band_ey and -x[0] < band_ey and x[1] < band_eydot and -x[1] < band_eydot:
                deactivated = True
                break
    return out[:rows].copy(), deactivated
