"""Norms, the Lyapunov functional, residuals, distances and rate fits.

These are the quantities the long-time estimates are phrased in:
L2/L4/H1/H2 norms, the free energy

    L(u) = 1/2 |grad u|^2 + (kappa2/4) | |u|^2 - kappa1/kappa2 |^2,

its dissipation identity dL/dt = -sigma |H|^2 - eps |grad H|^2 along
gradient-flow trajectories, steady-state residuals |H|, trajectory
distances, absorbing-set entry times, log-log rate fits, and a seeded
audit of the pointwise identities and inequalities the terms satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Field, gradient, laplacian
from .grid import ConfigurationError, Grid
from .model import (
    ModelConfigError,
    ModelParams,
    effective_field,
    rhs,
    source_term,
)

__all__ = [
    "norm",
    "lyapunov",
    "lyapunov_dissipation_residual",
    "steady_residual",
    "trajectory_distance",
    "rate_fit",
    "exp_decay_fit",
    "absorbing_entry_time",
    "random_smooth_field",
    "inequality_audit",
    "RunRecord",
    "RateFit",
]

NORM_KINDS = ("l2", "l4", "h1", "h2")


def _spectral_moment(u: Field, power: int) -> float:
    """sum_k w_k |k|^(2 power) |u_hat|^2 * dV (squared seminorm of order ``power``)."""
    g = u.grid
    k2 = g.k_squared
    mult = k2 if power == 1 else k2**power
    return float(np.sum(g.parseval_weights * mult * np.abs(u.coeffs) ** 2) * g.cell_volume)


def norm(u: Field, kind: str) -> float:
    """L2/L4 by physical quadrature; H1/H2 add spectral derivative content."""
    g = u.grid
    kind = kind.lower()
    if kind == "l2":
        return float(np.sqrt(np.sum(u.values**2) * g.cell_volume))
    if kind == "l4":
        mag2 = np.einsum("c...,c...->...", u.values, u.values)
        return float(np.sum(mag2**2) * g.cell_volume) ** 0.25
    if kind == "h1":
        return float(np.sqrt(np.sum(u.values**2) * g.cell_volume + _spectral_moment(u, 1)))
    if kind == "h2":
        return float(
            np.sqrt(
                np.sum(u.values**2) * g.cell_volume
                + _spectral_moment(u, 1)
                + _spectral_moment(u, 2)
            )
        )
    raise ConfigurationError(f"unknown norm kind {kind!r}; choose from {NORM_KINDS}")


def lyapunov(u: Field, p: ModelParams) -> float:
    """Free energy L(u); exact Lyapunov function of the gradient-flow configuration."""
    if p.kappa2 <= 0:
        raise ModelConfigError("the free energy needs kappa2 > 0")
    g = u.grid
    mag2 = np.einsum("c...,c...->...", u.values, u.values)
    well = mag2 - p.kappa1 / p.kappa2
    return float(0.5 * _spectral_moment(u, 1) + 0.25 * p.kappa2 * np.sum(well**2) * g.cell_volume)


def lyapunov_dissipation_residual(times, states, p: ModelParams) -> np.ndarray:
    """Per-interval defect of the energy dissipation identity.

    r_n = (L(u_{n+1}) - L(u_n)) / dt + sigma |H(u_mid)|^2 + eps |grad H(u_mid)|^2
    with the midpoint state u_mid = (u_n + u_{n+1})/2, so the residual is
    attributable to time discretisation alone.
    """
    if len(states) < 2 or len(times) != len(states):
        raise ValueError("need at least two synchronised samples")
    energies = [lyapunov(u, p) for u in states]
    out = np.empty(len(states) - 1)
    for i in range(len(states) - 1):
        dt = times[i + 1] - times[i]
        if dt <= 0:
            raise ValueError("times must be strictly increasing")
        mid = Field.from_values(states[i].grid, 0.5 * (states[i].values + states[i + 1].values))
        h = effective_field(mid, p)
        diss = p.sigma * norm(h, "l2") ** 2 + p.eps * _spectral_moment(h, 1)
        out[i] = (energies[i + 1] - energies[i]) / dt + diss
    return out


@dataclass(frozen=True)
class SteadyResidual:
    h_norm: float
    rhs_norm: float


def steady_residual(u: Field, p: ModelParams) -> SteadyResidual:
    """|H(u)|_L2, plus the full right-hand-side norm for general configurations."""
    h = norm(effective_field(u, p), "l2")
    if p.is_gradient_flow() and p.gamma == 0:
        return SteadyResidual(h, h * p.sigma if p.eps == 0 else norm(rhs(u, p), "l2"))
    return SteadyResidual(h, norm(rhs(u, p), "l2"))


def trajectory_distance(u: Field, v: Field, kind: str = "l2") -> float:
    if u.grid is not v.grid and u.grid.metadata() != v.grid.metadata():
        raise ConfigurationError("trajectory distance needs fields on the same grid")
    return norm(Field.from_values(u.grid, u.values - v.values), kind)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def _line_fit(x: np.ndarray, y: np.ndarray) -> RateFit:
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2)


def rate_fit(pairs) -> RateFit:
    """Least-squares slope of log(distance) against log(parameter)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least three (parameter, distance) pairs")
    params = np.array([float(a) for a, _ in pairs])
    dists = np.array([float(b) for _, b in pairs])
    if np.any(params <= 0) or np.any(dists <= 0):
        raise ValueError("rate fits need positive parameters and distances")
    return _line_fit(np.log(params), np.log(dists))


def exp_decay_fit(times, values, decades: float = 1.0) -> RateFit:
    """Linear fit of log(values) vs time over the final ``decades`` of decay."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    times, values = times[keep], values[keep]
    if len(values) < 3:
        raise ValueError("need at least three positive samples")
    floor = values[-1]
    window = values <= floor * 10.0**decades
    if window.sum() < 3:
        window = np.zeros_like(window)
        window[-3:] = True
    return _line_fit(times[window], np.log(values[window]))


def absorbing_entry_time(times, values, threshold: float):
    """First time from which the series stays <= threshold to the end; None if never."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) != len(values) or len(times) == 0:
        raise ValueError("need equal-length, nonempty series")
    below = values <= threshold
    suffix_ok = np.logical_and.accumulate(below[::-1])[::-1]
    idx = np.argmax(suffix_ok)
    if not suffix_ok[idx]:
        return None
    return float(times[idx])


# -- seeded smooth random fields ------------------------------------------------


def random_smooth_field(
    grid: Grid,
    seed=None,
    decay: float = 2.0,
    cutoff_fraction: float = 1.0 / 3.0,
    amplitude: float | None = None,
) -> Field:
    """Seeded random field with spectrum ~ (1 + |k|^2)^(-decay) below a hard cutoff.

    The cutoff keeps the field resolved on the grid, so pointwise
    product identities hold to discretisation accuracy.  ``amplitude``
    rescales to an exact L2 norm.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.standard_normal(grid.field_shape)
    f = Field.from_values(grid, noise)
    filt = (1.0 + grid.k_squared) ** (-decay) * grid.dealias_mask(cutoff_fraction)
    shaped = Field.from_coeffs(grid, f.coeffs * filt)
    vals = shaped.values
    if amplitude is not None:
        cur = np.sqrt(np.sum(vals**2) * grid.cell_volume)
        if cur == 0:
            raise ConfigurationError("cannot normalise a zero field")
        vals = vals * (amplitude / cur)
    return Field.from_values(grid, vals)


# -- identity / inequality audit -------------------------------------------------


def _grad_product_identity_violation(v: Field, w: Field) -> float:
    """grad(|v|^2 w) = 2 w (v . grad v) + |v|^2 grad w, pointwise."""
    g = v.grid
    vv, wv = v.values, w.values
    mag2 = np.einsum("c...,c...->...", vv, vv)
    lhs = gradient(Field.from_values(g, mag2[np.newaxis] * wv))
    gv = gradient(v)
    gw = gradient(w)
    v_dot_gv = np.einsum("c...,ac...->a...", vv, gv)
    rhs_ = 2.0 * wv[np.newaxis] * v_dot_gv[:, np.newaxis] + mag2[np.newaxis, np.newaxis] * gw
    return float(np.abs(lhs - rhs_).max())


def _laplacian_product_identity_violation(v: Field, w: Field) -> float:
    """Lap(|v|^2 w) = 2 |grad v|^2 w + 2 (v . Lap v) w + 4 grad w (v . grad v)^T + |v|^2 Lap w."""
    g = v.grid
    vv, wv = v.values, w.values
    mag2 = np.einsum("c...,c...->...", vv, vv)
    lhs = laplacian(Field.from_values(g, mag2[np.newaxis] * wv)).values
    gv = gradient(v)
    gw = gradient(w)
    lap_v = laplacian(v).values
    lap_w = laplacian(w).values
    grad_v_sq = np.einsum("ac...,ac...->...", gv, gv)
    v_dot_lap = np.einsum("c...,c...->...", vv, lap_v)
    v_dot_gv = np.einsum("c...,ac...->a...", vv, gv)
    rhs_ = (
        2.0 * grad_v_sq[np.newaxis] * wv
        + 2.0 * v_dot_lap[np.newaxis] * wv
        + 4.0 * np.einsum("ac...,a...->c...", gw, v_dot_gv)
        + mag2[np.newaxis] * lap_w
    )
    return float(np.abs(lhs - rhs_).max())


def _anisotropy_values(u: np.ndarray, e: np.ndarray, lam1: float, lam2: float) -> np.ndarray:
    s = np.einsum("c,c...->...", e, u)
    return (lam1 * s - lam2 * s**3)[np.newaxis] * e.reshape((3,) + (1,) * (u.ndim - 1))


def inequality_audit(seed: int, p: ModelParams, pairs: int = 100) -> dict:
    """Evaluate the pointwise identities and term inequalities on seeded field pairs.

    Violations are reported, not raised.  Identities are checked to
    absolute scale on unit-norm fields; inequalities get the slack
    stated with each entry.
    """
    g = p.grid
    rng = np.random.default_rng(seed)
    report = {
        "seed": int(seed),
        "pairs": int(pairs),
        "grid": g.metadata(),
        "checks": {},
    }

    def track(name, value, threshold):
        entry = report["checks"].setdefault(
            name, {"max_violation": 0.0, "threshold": threshold, "pass": True}
        )
        entry["max_violation"] = max(entry["max_violation"], float(value))
        entry["pass"] = entry["max_violation"] <= threshold

    e = np.asarray(p.easy_axis, dtype=float)
    if g.m == 3 and np.linalg.norm(e) > 0:
        e = e / np.linalg.norm(e)
    a_src = np.asarray(p.source.a, dtype=float) if p.source is not None else None

    for _ in range(pairs):
        v = random_smooth_field(g, rng, amplitude=1.0)
        w = random_smooth_field(g, rng, amplitude=1.0)

        track("grad_product_identity", _grad_product_identity_violation(v, w), 1e-8)
        track("laplacian_product_identity", _laplacian_product_identity_violation(v, w), 1e-8)

        if g.m == 3:
            # monotonicity defect of the anisotropy map
            pa_v = _anisotropy_values(v.values, e, p.lambda1, p.lambda2)
            pa_w = _anisotropy_values(w.values, e, p.lambda1, p.lambda2)
            diff = v.values - w.values
            lhs = np.sum((pa_v - pa_w) * diff) * g.cell_volume
            bound = p.lambda1 * np.sum(diff**2) * g.cell_volume
            track("anisotropy_monotonicity", lhs - bound, 1e-10)

            from .model import _demag_hat  # mode-wise contraction bound

            phi_hat = _demag_hat(v)
            phi_sq = np.sum(g.parseval_weights * np.abs(phi_hat) ** 2) * g.cell_volume
            v_sq = np.sum(g.parseval_weights * np.abs(v.coeffs) ** 2) * g.cell_volume
            track("demag_l2_contraction", np.sqrt(phi_sq) - np.sqrt(v_sq), 1e-12)

        if a_src is not None:
            sv = source_term(v, p)
            sw = source_term(w, p)
            dist = norm(Field.from_values(g, sv.values - sw.values), "l2")
            sup_v = float(np.sqrt(np.einsum("c...,c...->...", v.values, v.values).max()))
            sup_w = float(np.sqrt(np.einsum("c...,c...->...", w.values, w.values).max()))
            c_lip = max(1.0, float(np.linalg.norm(a_src)))
            bound = c_lip * (1.0 + sup_v + sup_w) * trajectory_distance(v, w, "l2")
            track("source_local_lipschitz", dist - bound, 1e-10)

    report["pass"] = all(entry["pass"] for entry in report["checks"].values())
    return report


# -- time series container --------------------------------------------------------


@dataclass
class RunRecord:
    """Diagnostic time series along one trajectory."""

    times: list = dc_field(default_factory=list)
    l2: list = dc_field(default_factory=list)
    l4: list = dc_field(default_factory=list)
    h1: list = dc_field(default_factory=list)
    h2: list = dc_field(default_factory=list)
    lyapunov: list = dc_field(default_factory=list)
    h_residual: list = dc_field(default_factory=list)
    meta: dict = dc_field(default_factory=dict)

    SERIES = ("l2", "l4", "h1", "h2", "lyapunov", "h_residual")

    def append(self, t: float, u: Field, p: ModelParams):
        if self.times and t <= self.times[-1]:
            raise ValueError("record times must be strictly increasing")
        self.times.append(float(t))
        self.l2.append(norm(u, "l2"))
        self.l4.append(norm(u, "l4"))
        self.h1.append(norm(u, "h1"))
        self.h2.append(norm(u, "h2"))
        self.lyapunov.append(lyapunov(u, p) if p.kappa2 > 0 else float("nan"))
        self.h_residual.append(norm(effective_field(u, p), "l2"))

    def observer(self, p: ModelParams):
        """Callback suitable for :func:`llbar.stepper.integrate`."""

        def _obs(t, u):
            self.append(t, u, p)

        return _obs

    def validate(self):
        n = len(self.times)
        for name in self.SERIES:
            if len(getattr(self, name)) != n:
                raise ValueError(f"series {name} length differs from times")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
