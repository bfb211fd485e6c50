"""Terms of the fourth-order evolution system.

The state u evolves by

    du/dt = sigma (H + Phi_d(u)) - eps Lap(H + Phi_d(u))
            - gamma u x (H + Phi_d(u)) + R(u) + S(u),
    H = Psi(u) + Phi_a(u),

with the exchange/Ginzburg-Landau field Psi(u) = Lap u + kappa1 u
- kappa2 |u|^2 u, uniaxial anisotropy Phi_a, stray-field projection
Phi_d, current-driven transport R, and a lower-order source S.  The
vector case (m = 3) is the Landau-Lifshitz-Baryakhtar family; the
scalar case (m = 1) is the convective Cahn-Hilliard/Allen-Cahn family,
for which gamma, Phi_a and Phi_d are switched off.

All pointwise nonlinearities are evaluated in physical space; derivative
factors come from the spectral representation.  Nonlinear products are
dealiased per the configured policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels as kernels
from .field import Field, cubic_padded, dealias, diff_axis
from .grid import Boundary, ConfigurationError, Grid

__all__ = [
    "ModelConfigError",
    "AffineQuadraticSource",
    "ModelParams",
    "exchange_gl_field",
    "anisotropy_field",
    "demag_field",
    "effective_field",
    "convective_term",
    "source_term",
    "rhs",
]

DEALIAS_POLICIES = ("none", "two_thirds", "pad2")


class ModelConfigError(ConfigurationError):
    """Model parameters inconsistent with the grid or with each other."""


@dataclass(frozen=True)
class AffineQuadraticSource:
    """Source map u -> u + (a.u) u, the quadratic proliferation example."""

    a: tuple[float, ...]


@dataclass(frozen=True)
class ModelParams:
    """All coefficients of the evolution system, tied to a grid.

    ``nu`` is the time-independent current density on the grid, shape
    (d, *n); pass a length-d constant vector to broadcast it.  The
    smallness condition 2 chi^2 < kappa2 sigma^2 is enforced whenever
    chi is nonzero.
    """

    grid: Grid
    sigma: float = 1.0
    eps: float = 0.0
    gamma: float = 0.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    easy_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    beta1: float = 0.0
    beta2: float = 0.0
    chi: float = 0.0
    nu: np.ndarray | None = None
    source: AffineQuadraticSource | None = None
    demag_enabled: bool = False
    aniso_enabled: bool = False
    dealias_policy: str = "two_thirds"
    nu_const: tuple[float, ...] | None = dc_field(default=None, compare=False)

    def __post_init__(self):
        g = self.grid
        if self.sigma <= 0:
            raise ModelConfigError(f"sigma must be positive, got {self.sigma}")
        if self.eps < 0:
            raise ModelConfigError(f"eps must be nonnegative, got {self.eps}")
        if self.kappa2 < 0:
            raise ModelConfigError(f"kappa2 must be nonnegative, got {self.kappa2}")
        if self.lambda2 < 0:
            raise ModelConfigError(f"lambda2 must be nonnegative, got {self.lambda2}")
        if self.gamma < 0:
            raise ModelConfigError(f"gamma must be nonnegative, got {self.gamma}")
        if self.dealias_policy not in DEALIAS_POLICIES:
            raise ModelConfigError(f"unknown dealias policy {self.dealias_policy!r}")
        if g.m == 1:
            if self.gamma != 0:
                raise ModelConfigError("the gyromagnetic term needs m = 3; set gamma = 0 for scalar fields")
            # stray field and anisotropy are vector-only; auto-disabled
            object.__setattr__(self, "demag_enabled", False)
            object.__setattr__(self, "aniso_enabled", False)
        if self.chi != 0 and not (2.0 * self.chi**2 < self.kappa2 * self.sigma**2):
            raise ModelConfigError(
                f"convective strength too large: 2*chi^2 = {2 * self.chi ** 2:g} must be "
                f"< kappa2*sigma^2 = {self.kappa2 * self.sigma ** 2:g}"
            )
        if self.aniso_enabled:
            e = np.asarray(self.easy_axis, dtype=np.float64)
            if e.shape != (3,) or abs(np.linalg.norm(e) - 1.0) > 1e-12:
                raise ModelConfigError("easy_axis must be a unit 3-vector (|e| = 1 to 1e-12)")
            object.__setattr__(self, "easy_axis", tuple(e))
        if self.demag_enabled and g.boundary is not Boundary.PERIODIC:
            raise ModelConfigError("the stray-field projection is defined on periodic grids only")
        nu = self.nu
        if nu is not None:
            nu = np.asarray(nu, dtype=np.float64)
            if nu.shape == (g.d,):
                object.__setattr__(self, "nu_const", tuple(nu))
                nu = np.broadcast_to(nu.reshape((g.d,) + (1,) * g.d), (g.d,) + g.n).copy()
            elif nu.shape != (g.d,) + g.n:
                raise ModelConfigError(
                    f"current density must have shape ({g.d},) or {(g.d,) + g.n}, got {nu.shape}"
                )
            object.__setattr__(self, "nu", nu)
        if g.m == 1 and self.chi != 0:
            if self.nu_const is None or not np.any(self.nu_const):
                raise ModelConfigError(
                    "the scalar quadratic-flux closure needs a nonzero constant current direction"
                )

    # -- derived quantities -------------------------------------------------

    def nu_h2_sq(self) -> float:
        """Squared H^2 norm of the current density (the bound reported in run metadata)."""
        if self.nu is None:
            return 0.0
        g = self.grid
        total = 0.0
        k2 = g.k_squared
        w = g.parseval_weights
        for a in range(g.d):
            comp = Field.from_values(
                Grid(g.d, 1, g.n, g.lengths, g.boundary), self.nu[a][np.newaxis]
            )
            c2 = np.abs(comp.coeffs[0]) ** 2
            total += float(np.sum(w * c2 * (1.0 + k2 + k2**2))) * g.cell_volume
        return total

    def is_gradient_flow(self) -> bool:
        """True when only the exchange/Ginzburg-Landau field drives the dynamics."""
        return (
            not self.aniso_enabled
            and not self.demag_enabled
            and self.source is None
            and self.beta1 == 0
            and self.beta2 == 0
            and self.chi == 0
        )


# -- dealiasing of nonlinear products ---------------------------------------


def _masked(f: Field, p: ModelParams) -> Field:
    if p.dealias_policy == "none":
        return f
    return dealias(f)


def _cubic(u: Field, p: ModelParams) -> Field:
    """|u|^2 u with the configured aliasing treatment."""
    if p.dealias_policy == "pad2":
        return cubic_padded(u)
    g = u.grid
    vals = kernels.cubic_mag(u.values.reshape(g.m, -1)).reshape(g.field_shape)
    return _masked(Field.from_values(g, vals), p)


# -- individual terms ---------------------------------------------------------


def exchange_gl_field(u: Field, p: ModelParams) -> Field:
    """Psi(u) = Lap u + kappa1 u - kappa2 |u|^2 u.

    The linear part is exact in spectral space; only the cubic product
    passes through the dealias policy.
    """
    g = u.grid
    psi_hat = (p.kappa1 - g.k_squared) * u.coeffs
    if p.kappa2 != 0:
        psi_hat = psi_hat - p.kappa2 * _cubic(u, p).coeffs
    return Field.from_coeffs(g, psi_hat)


def anisotropy_field(u: Field, p: ModelParams) -> Field:
    """Phi_a(u) = lambda1 (e.u) e - lambda2 (e.u)^3 e along the easy axis."""
    g = u.grid
    if g.m != 3 or not p.aniso_enabled:
        raise ModelConfigError("the anisotropy field needs m = 3 with anisotropy enabled")
    e = np.asarray(p.easy_axis)
    flat = u.values.reshape(3, -1)
    if p.lambda2 == 0 or p.dealias_policy == "none":
        vals = kernels.easy_axis_field(flat, e, p.lambda1, p.lambda2).reshape(g.field_shape)
        return Field.from_values(g, vals)
    # cubic part dealiased separately so the linear part stays exact
    lin = kernels.easy_axis_field(flat, e, p.lambda1, 0.0).reshape(g.field_shape)
    s = np.einsum("c,cj->j", e, flat)
    cub = (s**3)[np.newaxis, :] * e[:, np.newaxis]
    cub_f = _masked(Field.from_values(g, cub.reshape(g.field_shape)), p)
    return Field.from_coeffs(g, Field.from_values(g, lin).coeffs - p.lambda2 * cub_f.coeffs)


def _demag_hat(u: Field) -> np.ndarray:
    """Longitudinal projection -k (k.u_hat)/|k|^2 with zero mean mode."""
    g = u.grid
    kvecs = g.wavenumber_grids()
    c = u.coeffs
    k_dot = np.zeros(g.spectral_shape, dtype=c.dtype)
    for a in range(g.d):
        k_dot = k_dot + kvecs[a] * c[a]
    k2 = g.k_squared.copy()
    flat = k2.reshape(-1)
    flat[0] = 1.0  # mean mode is set to zero below
    out = np.zeros_like(c)
    for a in range(g.d):
        out[a] = -kvecs[a] * k_dot / k2
    return out


def demag_field(u: Field, p: ModelParams) -> Field:
    """Stray field as the longitudinal Fourier projection of u.

    Mode k != 0 maps to -k (k . u_hat)/|k|^2; the mean mode is zero.
    This choice keeps |Phi_d(v)| <= |v| mode-wise and satisfies the
    static Maxwell constraints on every resolved nonzero mode.
    """
    g = u.grid
    if g.m != 3 or not p.demag_enabled:
        raise ModelConfigError("the stray field needs m = 3 with demag enabled")
    if g.boundary is not Boundary.PERIODIC:
        raise ModelConfigError("the stray-field projection is defined on periodic grids only")
    return Field.from_coeffs(g, _demag_hat(u))


def effective_field(u: Field, p: ModelParams) -> Field:
    """H = Psi(u) + Phi_a(u), the variational field driving the dynamics."""
    psi = exchange_gl_field(u, p)
    if p.aniso_enabled:
        return Field.from_coeffs(u.grid, psi.coeffs + anisotropy_field(u, p).coeffs)
    return psi


def _directional_derivative(u: Field, p: ModelParams) -> np.ndarray:
    """(nu . grad) u in physical space, shape (m, *n)."""
    g = u.grid
    out = np.zeros(g.field_shape)
    vals = u.values
    for a in range(g.d):
        out += p.nu[a] * diff_axis(vals, g, a, parity="cos")
    return out


def _quadratic_flux_divergence(u: Field, p: ModelParams) -> np.ndarray:
    """div(u (x) u) for the vector case; div(u^2 nu_hat) for the scalar case."""
    g = u.grid
    vals = u.values
    out = np.zeros(g.field_shape)
    if g.m == 1:
        direction = np.asarray(p.nu_const)
        direction = direction / np.linalg.norm(direction)
        sq = vals[0] ** 2
        for a in range(g.d):
            out[0] += diff_axis(direction[a] * sq, g, a, parity="cos")
        return out
    for a in range(g.d):
        flux = vals * vals[a]  # row c of u (x) u restricted to spatial columns
        out += diff_axis(flux, g, a, parity="cos")
    return out


def convective_term(u: Field, p: ModelParams) -> Field:
    """R(u) = beta1 (nu.grad) u + beta2 u x (nu.grad) u + chi div(u (x) u).

    The beta1 transport term is linear in u and left unmasked; the
    quadratic pieces pass through the dealias policy.
    """
    g = u.grid
    lin = None
    quad = None
    if (p.beta1 != 0 or p.beta2 != 0) and p.nu is not None:
        dd = _directional_derivative(u, p)
        if p.beta1 != 0:
            lin = p.beta1 * dd
        if p.beta2 != 0 and g.m == 3:
            quad = p.beta2 * kernels.cross3(
                u.values.reshape(3, -1), dd.reshape(3, -1)
            ).reshape(g.field_shape)
    if p.chi != 0:
        flux_div = p.chi * _quadratic_flux_divergence(u, p)
        quad = flux_div if quad is None else quad + flux_div
    if lin is None and quad is None:
        return Field.zeros(g)
    out_hat = np.zeros((g.m,) + g.spectral_shape, dtype=u.coeffs.dtype)
    if lin is not None:
        out_hat += Field.from_values(g, lin).coeffs
    if quad is not None:
        out_hat += _masked(Field.from_values(g, quad), p).coeffs
    return Field.from_coeffs(g, out_hat)


def source_term(u: Field, p: ModelParams) -> Field:
    """S(u): zero, or the affine-quadratic map u + (a.u) u."""
    g = u.grid
    if p.source is None:
        return Field.zeros(g)
    a = np.asarray(p.source.a, dtype=np.float64)
    if a.shape != (g.m,):
        raise ModelConfigError(f"source coefficient must have {g.m} components, got {a.shape}")
    if not np.any(a):
        return u.copy()
    quad = kernels.dot_scale(u.values.reshape(g.m, -1), a).reshape(g.field_shape)
    quad_f = _masked(Field.from_values(g, quad), p)
    return Field.from_coeffs(g, u.coeffs + quad_f.coeffs)


def rhs(u: Field, p: ModelParams) -> Field:
    """Full right-hand side of the evolution system."""
    g = u.grid
    core_hat = effective_field(u, p).coeffs
    if p.demag_enabled:
        core_hat = core_hat + _demag_hat(u)
    out_hat = (p.sigma + p.eps * g.k_squared) * core_hat  # sigma(core) - eps Lap(core)
    if p.gamma != 0:
        core_vals = Field.from_coeffs(g, core_hat).values
        cross = kernels.cross3(u.values.reshape(3, -1), core_vals.reshape(3, -1))
        cross_f = _masked(Field.from_values(g, cross.reshape(g.field_shape)), p)
        out_hat = out_hat - p.gamma * cross_f.coeffs
    if (p.beta1 != 0 or p.beta2 != 0 or p.chi != 0) and not (
        p.nu is None and p.chi == 0
    ):
        out_hat = out_hat + convective_term(u, p).coeffs
    if p.source is not None:
        out_hat = out_hat + source_term(u, p).coeffs
    return Field.from_coeffs(g, out_hat)
