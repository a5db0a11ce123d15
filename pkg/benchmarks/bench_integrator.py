"""Benchmark the compiled closed-loop integrator against the fallback.

Runs the same batch of triggered departure events through both kernel
implementations, checks that they agree to float precision, and prints
the wall-clock times and speedup.

Usage: python benchmarks/bench_integrator.py [--events N] [--repeats R]
"""

import argparse
import time

import numpy as np

from lanedep import _kernels_py
from lanedep.vehicle import ControllerGains, VehicleParams, closed_loop_matrices

try:
    from lanedep import _kernels
except ImportError:
    _kernels = None


def build_cases(n_events: int, seed: int = 0):
    """Random triggered-event integrator inputs at mixed speeds."""
    rng = np.random.default_rng(seed)
    gains = ControllerGains()
    params = VehicleParams()
    cases = []
    for _ in range(n_events):
        v_x = float(rng.uniform(10.0, 35.0))
        T = float(rng.uniform(2.0, 8.0))
        rho_0 = float(rng.uniform(-5e-4, 5e-4))
        delta_rho = float(rng.uniform(-5e-4, 5e-4))
        y0 = float(rng.uniform(0.25, 0.8))
        v_y = float(rng.uniform(-0.3, 0.5))
        A_c, B_c = closed_loop_matrices(params, gains, v_x)
        x0 = np.array([y0 + params.edge_margin, v_y, np.arctan(v_y / v_x), 0.0])
        p0 = v_x * rho_0
        p1 = v_x * delta_rho / T
        q1 = delta_rho * gains.t_lp * v_x / T
        q0 = delta_rho * gains.t_lp**2 * v_x / (2.0 * T) + v_x * rho_0 * gains.t_lp
        n_out_max = 2 * int(round(T / 0.1))
        cases.append(
            (A_c, B_c, x0, 0.0, 0.01, 10, n_out_max, p0, p1, q0, q1, T,
             gains.deact_offset, gains.deact_rate)
        )
    return cases


def run_all(kernel, cases):
    return [kernel.integrate_closed_loop(*case) for case in cases]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _kernels is None:
        raise SystemExit("compiled kernel not available; build the extension first")

    cases = build_cases(args.events)

    # parity before timing
    ref = run_all(_kernels, cases)
    alt = run_all(_kernels_py, cases)
    worst = 0.0
    for (s_c, d_c), (s_p, d_p) in zip(ref, alt):
        assert d_c == d_p
        assert s_c.shape == s_p.shape
        worst = max(worst, float(np.max(np.abs(s_c - s_p))))
    print(f"parity over {args.events} events: max |state diff| = {worst:.3e}")

    timings = {}
    for name, kernel in (("compiled", _kernels), ("pure-python", _kernels_py)):
        best = min(
            _timed(run_all, kernel, cases) for _ in range(args.repeats)
        )
        timings[name] = best
        print(f"{name:12s}: {best:8.3f} s  ({1e3 * best / args.events:.3f} ms/event)")
    print(f"speedup: {timings['pure-python'] / timings['compiled']:.1f}x")


def _timed(fn, *fn_args):
    t0 = time.perf_counter()
    fn(*fn_args)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
