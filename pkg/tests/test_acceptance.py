"""Acceptance criteria, one test per criterion, tolerances pinned.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or
``-rA``) and asserts the stated threshold.  Everything runs at desk
scale: grids <= 128 per axis, individual runs well under a minute.
"""

import numpy as np
import pytest

from llbar import Field, Grid, StepperConfig, integrate
from llbar.config import parse_config
from llbar.diagnostics import (
    absorbing_entry_time,
    inequality_audit,
    lyapunov,
    lyapunov_dissipation_residual,
    norm,
    random_smooth_field,
    rate_fit,
    trajectory_distance,
)
from llbar.experiments import run
from llbar.initial import seeded_initial_field
from llbar.model import AffineQuadraticSource, ModelParams, effective_field, _demag_hat

pytestmark = pytest.mark.acceptance


def report(criterion: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_linear_dispersion():
    # all-linear configuration: per-mode growth factor exp((sigma+eps|k|^2)(kappa1-|k|^2) T)
    sigma, kappa1, T, dt = 1.0, 2.0, 1.0, 1e-4
    g = Grid(2, 1, (32, 32), (2 * np.pi, 2 * np.pi))
    X, Y = g.meshgrid()
    modes = [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2), (3, 0), (0, 3)]
    vals = np.zeros(g.field_shape)
    for i, (kx, ky) in enumerate(modes):
        vals[0] += (0.5 + 0.05 * i) * np.cos(kx * X + ky * Y)
    u0 = Field.from_values(g, vals)

    worst = 0.0
    for eps in (0.0, 0.1):
        p = ModelParams(grid=g, sigma=sigma, eps=eps, kappa1=kappa1, kappa2=0.0)
        uT = integrate(u0, p, StepperConfig(dt=dt, t_end=T, scheme="imex_bdf2"))
        c0, cT = u0.coeffs[0], uT.coeffs[0]
        for kx, ky in modes:
            k2 = float(kx**2 + ky**2)
            expected = np.exp((sigma + eps * k2) * (kappa1 - k2) * T)
            measured = abs(cT[kx, ky]) / abs(c0[kx, ky])
            worst = max(worst, abs(measured - expected) / expected)
    report(
        "criterion 1 (linear dispersion)",
        worst < 1e-3,
        f"max per-mode relative error {worst:.3e} < 1e-3 over 10 modes, eps in {{0, 0.1}}",
    )


def test_criterion_2_oracle_equivalence(tmp_path):
    cfg = parse_config(
        """
experiment: oracle_check
grid: {d: 1, m: 1, n: [64], lengths: [6.283185307179586]}
model: {sigma: 1.0, eps: 0.1, kappa1: 1.0, kappa2: 1.0}
stepper: {dt: 1.0e-4, t_end: 1.0, record_every: 1000}
initial:
  kind: modes
  modes:
    - {k: [1], component: 0, amplitude: 0.2, kind: sin}
    - {k: [2], component: 0, amplitude: 0.1, kind: cos}
oracle: {n_modes: 8, max_discrepancy: 1.0e-4}
"""
    )
    summary = run(cfg, tmp_path, assert_mode=True)
    worst = summary["max_projected_discrepancy"]
    report(
        "criterion 2 (oracle equivalence)",
        worst < 1e-4,
        f"max L2 discrepancy vs 8-mode Galerkin oracle {worst:.3e} < 1e-4 at T=1, dt=1e-4",
    )


def test_criterion_3_lyapunov_monotonicity_and_identity():
    g = Grid(1, 1, (64,), (2 * np.pi,))
    p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=1.0)
    seeds = [1, 2, 3, 4, 5]
    worst_jump, worst_rel, worst_ratio_err = 0.0, 0.0, 0.0
    for seed in seeds:
        u0 = random_smooth_field(g, seed=seed, amplitude=1.0)

        energies = []
        integrate(u0, p, StepperConfig(dt=1e-4, t_end=0.5, scheme="imex_euler",
                                       record_every=50),
                  observer=lambda t, u: energies.append(lyapunov(u, p)))
        jumps = np.diff(energies) / (1.0 + energies[0])
        worst_jump = max(worst_jump, float(jumps.max(initial=-np.inf)))

        def rel_residual(dt):
            times, states = [], []
            integrate(u0, p, StepperConfig(dt=dt, t_end=0.02, scheme="imex_euler"),
                      observer=lambda t, u: (times.append(t), states.append(u)))
            r = lyapunov_dissipation_residual(times, states, p)
            h_scale = max(
                p.sigma * norm(effective_field(u, p), "l2") ** 2 for u in states
            )
            return float(np.abs(r).max() / h_scale)

        r_coarse = rel_residual(1e-4)
        r_fine = rel_residual(5e-5)
        worst_rel = max(worst_rel, r_coarse)
        worst_ratio_err = max(worst_ratio_err, abs(r_coarse / r_fine - 2.0))

    ok = worst_jump <= 1e-10 and worst_rel < 1e-2 and worst_ratio_err <= 0.6
    report(
        "criterion 3 (energy decay + dissipation identity)",
        ok,
        f"5 seeds: max normalised energy increase {worst_jump:.2e} <= 1e-10, "
        f"max relative residual {worst_rel:.2e} < 1e-2, "
        f"refinement factor within {worst_ratio_err:.2f} of 2 (tol 0.6)",
    )


def test_criterion_4_dissipativity_absorbing_set():
    g = Grid(1, 1, (64,), (2 * np.pi,))
    p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=1.0)
    # coefficient-only radius: the double-well floor |u| -> sqrt(kappa1/kappa2)
    radius_sq = (1.5 * np.sqrt(p.kappa1 / p.kappa2 * g.volume)) ** 2
    finals, entries = [], []
    for amplitude in (1.0, 10.0, 100.0):
        spec = {"kind": "random", "seed": 21, "decay": 2.0, "cutoff": 1 / 3,
                "amplitude": amplitude, "offset": [1.0]}
        u0 = seeded_initial_field(spec, g)
        ts, l2s = [], []
        integrate(u0, p, StepperConfig(dt=1e-4, t_end=3.0, scheme="imex_euler",
                                       record_every=200),
                  observer=lambda t, u: (ts.append(t), l2s.append(norm(u, "l2"))))
        finals.append(float(np.mean(l2s[-max(1, len(l2s) // 10):])))
        entries.append(absorbing_entry_time(ts, np.array(l2s) ** 2, radius_sq))
    spread = (max(finals) - min(finals)) / max(finals)
    ok = spread <= 0.05 and all(e is not None for e in entries)
    report(
        "criterion 4 (dissipativity / absorbing set)",
        ok,
        f"|u0| in {{1,10,100}}: long-time levels {[f'{v:.4f}' for v in finals]} "
        f"spread {spread:.3%} <= 5%, entry times {entries} all finite",
    )


def test_criterion_5_continuous_dependence(tmp_path):
    cfg = parse_config(
        """
experiment: compare
grid: {d: 1, m: 1, n: [64], lengths: [6.283185307179586]}
model: {sigma: 1.0, eps: 0.1, kappa1: 1.0, kappa2: 1.0}
stepper: {dt: 5.0e-4, t_end: 1.0, scheme: imex_bdf2, record_every: 200}
initial: {kind: random, seed: 7, amplitude: 1.0}
compare: {deltas: [1.0e-3, 1.0e-4, 1.0e-5], seed: 42, kind: l2, slope_tolerance: 0.05}
"""
    )
    summary = run(cfg, tmp_path, assert_mode=True)
    slope = summary["fit"]["slope"]
    ratios = [r["ratio"] for r in summary["results"]]
    ratio_spread = (max(ratios) - min(ratios)) / max(ratios)
    ok = abs(slope - 1.0) <= 0.05 and ratio_spread < 0.1
    report(
        "criterion 5 (continuous dependence)",
        ok,
        f"log-log slope {slope:.4f} within 1 +/- 0.05; distance/delta ratios "
        f"{[f'{r:.4f}' for r in ratios]} spread {ratio_spread:.2%}",
    )


def test_criterion_6_smoothing_of_differences():
    g = Grid(1, 1, (64,), (2 * np.pi,))
    p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=1.0)
    u0 = random_smooth_field(g, seed=31, amplitude=1.0)
    # rough-but-H1 perturbation direction: slow spectral decay up to half Nyquist
    w = random_smooth_field(g, seed=32, decay=1.0, cutoff_fraction=0.5, amplitude=1.0)
    delta = 1e-3
    v0 = Field.from_values(g, u0.values + delta * w.values)
    h1_gap = trajectory_distance(u0, v0, "h1")

    sample_times = (1e-3, 1e-2, 1e-1)
    states_u, states_v = {}, {}
    cfg = StepperConfig(dt=1e-4, t_end=0.1, scheme="imex_bdf2", record_every=10)

    def collect(store):
        def obs(t, u):
            store[round(t, 10)] = u

        return obs

    integrate(u0, p, cfg, observer=collect(states_u))
    integrate(v0, p, cfg, observer=collect(states_v))

    q_values = {}
    ratios = {}
    for t in sample_times:
        h2_gap = trajectory_distance(states_u[t], states_v[t], "h2")
        ratios[t] = h2_gap / h1_gap
        q_values[t] = t * ratios[t] ** 2
    finite = all(np.isfinite(list(ratios.values())))
    bounded = all(
        q_values[t] <= 1.25 * max(q_values[s] for s in sample_times if s > t)
        for t in sample_times[:-1]
    )
    report(
        "criterion 6 (smoothing estimate)",
        finite and bounded,
        f"H2/H1 ratios {[f'{ratios[t]:.3f}' for t in sample_times]} finite; "
        f"t*(ratio)^2 = {[f'{q_values[t]:.4f}' for t in sample_times]} "
        "bounded toward t -> 0 (no blow-up faster than t^-1/2)",
    )


def test_criterion_7_eps_robustness(tmp_path):
    cfg = parse_config(
        """
experiment: sweep_eps
grid: {d: 1, m: 1, n: [64], lengths: [6.283185307179586]}
model: {sigma: 1.0, kappa1: 1.0, kappa2: 1.0, beta1: 0.3, chi: 0.1, nu: [1.0]}
stepper: {dt: 5.0e-4, t_end: 1.0, scheme: imex_bdf2, record_every: 500}
initial: {kind: random, seed: 11, amplitude: 1.0}
sweep:
  eps_values: [1.0e-1, 3.0e-2, 1.0e-2, 3.0e-3, 1.0e-3]
  kind: h1
  slope_range: [0.9, 1.1]
  min_r_squared: 0.98
"""
    )
    summary = run(cfg, tmp_path, assert_mode=True)
    slope, r2 = summary["fit"]["slope"], summary["fit"]["r_squared"]
    ok = 0.9 <= slope <= 1.1 and r2 >= 0.98
    report(
        "criterion 7 (vanishing-damping robustness)",
        ok,
        f"H1 distance to the second-order limit: slope {slope:.4f} in [0.9, 1.1], "
        f"r^2 {r2:.5f} >= 0.98 over eps in [1e-3, 1e-1] (lambda2 forced 0, d=1)",
    )


def test_criterion_8_steady_state_convergence(tmp_path):
    cfg = parse_config(
        """
experiment: steady
grid: {d: 1, m: 1, n: [64], lengths: [6.283185307179586]}
model: {sigma: 1.0, eps: 0.1, kappa1: 1.0, kappa2: 1.0}
stepper: {dt: 1.0e-3, t_end: 11.0, record_every: 50}
initial: {kind: random, seed: 5, amplitude: 3.0, offset: [1.0]}
steady: {residual_max: 1.0e-8, min_r_squared: 0.99, fit_decades: 1.0}
"""
    )
    summary = run(cfg, tmp_path, assert_mode=True)
    resid = summary["final_h_residual"]
    r2 = summary["decay_fit"]["r_squared"]
    ok = resid < 1e-8 and r2 >= 0.99
    report(
        "criterion 8 (steady-state convergence)",
        ok,
        f"final |H|_L2 {resid:.3e} < 1e-8; log|H| vs t linear over the final decade "
        f"with r^2 {r2:.6f} >= 0.99 (rate {summary['decay_fit']['slope']:.3f})",
    )


def test_criterion_9_identity_and_inequality_audit():
    g = Grid(2, 3, (64, 64), (2 * np.pi, 2 * np.pi))
    p = ModelParams(
        grid=g,
        lambda1=0.5,
        lambda2=0.3,
        aniso_enabled=True,
        demag_enabled=True,
        source=AffineQuadraticSource((0.2, 0.0, 0.1)),
    )
    rep = inequality_audit(2024, p, pairs=100)
    identity_worst = max(
        rep["checks"]["grad_product_identity"]["max_violation"],
        rep["checks"]["laplacian_product_identity"]["max_violation"],
    )
    inequality_worst = max(
        rep["checks"]["anisotropy_monotonicity"]["max_violation"],
        rep["checks"]["demag_l2_contraction"]["max_violation"],
        rep["checks"]["source_local_lipschitz"]["max_violation"],
    )
    ok = identity_worst < 1e-8 and inequality_worst < 1e-10
    report(
        "criterion 9 (identity/inequality audit)",
        ok,
        f"100 pairs at n=64: worst identity violation {identity_worst:.3e} < 1e-8, "
        f"worst inequality violation {inequality_worst:.3e} < 1e-10",
    )


def test_criterion_10_demag_maxwell_system():
    g = Grid(3, 3, (16, 16, 16), (2 * np.pi,) * 3)
    p = ModelParams(grid=g, demag_enabled=True)
    kx, ky, kz = g.wavenumber_grids()
    w = g.parseval_weights
    worst_curl, worst_div = 0.0, 0.0
    rng = np.random.default_rng(99)
    for _ in range(20):
        v = Field.from_values(g, rng.standard_normal(g.field_shape))
        phi = _demag_hat(v)
        curl = np.stack([
            ky * phi[2] - kz * phi[1],
            kz * phi[0] - kx * phi[2],
            kx * phi[1] - ky * phi[0],
        ])
        total = phi + v.coeffs
        div = kx * total[0] + ky * total[1] + kz * total[2]
        div.reshape(-1)[0] = 0.0  # mean mode is zero by convention
        worst_curl = max(worst_curl, float(np.sqrt(np.sum(w * np.abs(curl) ** 2) * g.cell_volume)))
        worst_div = max(worst_div, float(np.sqrt(np.sum(w * np.abs(div) ** 2) * g.cell_volume)))
    ok = worst_curl < 1e-10 and worst_div < 1e-10
    report(
        "criterion 10 (stray-field Maxwell constraints)",
        ok,
        f"20 random 3D fields: max |curl Phi_d| {worst_curl:.3e}, "
        f"max |div(Phi_d + u)| {worst_div:.3e}, both < 1e-10 on nonzero modes",
    )
