#!/usr/bin/env python3
"""Benchmark the compiled kernel lane against the numpy reference lane.

Times the four pointwise kernels on representative field sizes, then an
end-to-end right-hand-side evaluation and a short integration.  The
end-to-end numbers are reported for the current backend; rerun with
``LLBAR_NO_EXT=1`` to get the pure-numpy lane (the script invokes itself
that way when the extension is available).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from llbar._kernels import _ref

try:
    from llbar._kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, repeat=300):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def kernel_table():
    rng = np.random.default_rng(0)
    sizes = [("3 x 64^2", 3, 64 * 64), ("3 x 128^2", 3, 128 * 128), ("1 x 128^2", 1, 128 * 128)]
    e = np.array([0.0, 0.0, 1.0])
    print(f"{'kernel':<18}{'size':<12}{'numpy (us)':>12}{'cython (us)':>13}{'speedup':>9}")
    for label, m, n in sizes:
        u = rng.standard_normal((m, n))
        v = rng.standard_normal((m, n))
        a = rng.standard_normal(m)
        cases = [("cubic_mag", (u,)), ("dot_scale", (u, a))]
        if m == 3:
            cases += [("cross3", (u, v)), ("easy_axis_field", (u, e, 0.5, 0.25))]
        for name, args in cases:
            t_ref = _time(getattr(_ref, name), *args)
            if _core is not None:
                t_core = _time(getattr(_core, name), *args)
                print(
                    f"{name:<18}{label:<12}{t_ref * 1e6:>12.2f}{t_core * 1e6:>13.2f}"
                    f"{t_ref / t_core:>9.2f}"
                )
            else:
                print(f"{name:<18}{label:<12}{t_ref * 1e6:>12.2f}{'n/a':>13}{'':>9}")


def end_to_end():
    from llbar import Field, Grid, ModelParams, StepperConfig, integrate, rhs
    from llbar._kernels import BACKEND
    from llbar.diagnostics import random_smooth_field

    g = Grid(2, 3, (64, 64), (2 * np.pi, 2 * np.pi))
    p = ModelParams(
        grid=g,
        sigma=1.0,
        eps=0.1,
        gamma=0.5,
        kappa1=1.0,
        kappa2=1.0,
        lambda1=0.3,
        lambda2=0.1,
        aniso_enabled=True,
        demag_enabled=True,
    )
    u = random_smooth_field(g, seed=1, amplitude=1.0)
    t_rhs = _time(lambda: rhs(u, p), repeat=50)
    cfg = StepperConfig(dt=1e-3, t_end=0.2, scheme="imex_bdf2")
    t0 = time.perf_counter()
    integrate(u, p, cfg)
    t_total = time.perf_counter() - t0
    steps = cfg.n_steps
    print(
        f"backend={BACKEND}: rhs eval {t_rhs * 1e3:.3f} ms, "
        f"{steps} steps in {t_total:.2f} s ({steps / t_total:.0f} steps/s)"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--e2e-only", action="store_true", help="skip the kernel table")
    args = parser.parse_args()
    if not args.e2e_only:
        kernel_table()
        print()
    end_to_end()
    if _core is not None and not os.environ.get("LLBAR_NO_EXT") and not args.e2e_only:
        sys.stdout.flush()
        env = dict(os.environ, LLBAR_NO_EXT="1")
        subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--e2e-only"], env=env, check=False
        )


if __name__ == "__main__":
    main()
