"""Pure-Python closed-loop integrator, used when the compiled core is
unavailable.

The arithmetic mirrors the compiled kernel operation for operation so
both backends produce matching trajectories.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def integrate_closed_loop(
    ac,
    bc,
    x0,
    t0: float,
    h: float,
    substeps: int,
    n_out_max: int,
    p0: float,
    p1: float,
    q0: float,
    q1: float,
    t_clamp: float,
    band_ey: float,
    band_eydot: float,
):
    """Fixed-step RK4 integration of x' = Ac x + Bc psi(t).

    The exogenous input is affine in time and frozen past ``t_clamp``:
    psi(t) = [p0 + p1 * min(t, t_clamp), q0 + q1 * min(t, t_clamp)].
    Integration advances ``substeps`` fine steps of size ``h`` per output
    row and stops after the first output row whose state satisfies
    |x[0]| < band_ey and |x[1]| < band_eydot, or after ``n_out_max``
    output rows.

    :returns: (states array of shape (n_rows, 4) including the initial
        state, deactivated flag).
    """
    a = [[float(ac[i][j]) for j in range(4)] for i in range(4)]
    b = [[float(bc[i][j]) for j in range(2)] for i in range(4)]
    x = [float(x0[0]), float(x0[1]), float(x0[2]), float(x0[3])]
    out = [list(x)]
    t = float(t0)
    deactivated = abs(x[0]) < band_ey and abs(x[1]) < band_eydot
    if deactivated:
        return np.array(out), True

    def deriv(tt, s):
        tc = tt if tt < t_clamp else t_clamp
        psi1 = p0 + p1 * tc
        psi2 = q0 + q1 * tc
        return [
            a[i][0] * s[0] + a[i][1] * s[1] + a[i][2] * s[2] + a[i][3] * s[3]
            + b[i][0] * psi1 + b[i][1] * psi2
            for i in range(4)
        ]

    for _ in range(n_out_max):
        for _ in range(substeps):
            k1 = deriv(t, x)
            s2 = [x[i] + 0.5 * h * k1[i] for i in range(4)]
            k2 = deriv(t + 0.5 * h, s2)
            s3 = [x[i] + 0.5 * h * k2[i] for i in range(4)]
            k3 = deriv(t + 0.5 * h, s3)
            s4 = [x[i] + h * k3[i] for i in range(4)]
            k4 = deriv(t + h, s4)
            x = [
                x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                for i in range(4)
            ]
            t += h
        out.append(list(x))
        if abs(x[0]) < band_ey and abs(x[1]) < band_eydot:
            deactivated = True
            break
    return np.array(out), deactivated
