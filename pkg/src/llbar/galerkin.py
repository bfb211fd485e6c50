"""Independent low-mode Galerkin oracle.

Projects the evolution system onto the span of the first N Laplacian
eigenfunctions of the box (Fourier or cosine basis, matching the main
grid's boundary mode) and integrates the resulting ODE with classical
RK4.  Nonlinearities are evaluated pointwise on an oversampled
quadrature grid and projected back, which is exact for the retained
mode count.  This path shares no transform or term code with the
pseudospectral solver, so agreement between the two is a genuine
cross-check.

Kept deliberately small (N <= 64): the oracle exists for correctness,
not performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import Field
from .grid import Boundary, ConfigurationError, Grid
from .model import ModelParams
from .stepper import BlowUpError

__all__ = ["Eigenbasis", "GalerkinSystem", "project", "ode_rhs", "integrate_rk4", "reconstruct"]

N_CAP = 64
OVERSAMPLE = 4  # quadrature grid refinement on top of the 2x needed for quadratics


@dataclass(frozen=True)
class _Mode:
    j: tuple[int, ...]  # per-axis frequency index
    phase: tuple[int, ...]  # per-axis 0 = cos, 1 = sin (periodic only)
    mu: float  # Laplacian eigenvalue


def _enumerate_modes(grid: Grid, n_modes: int) -> list[_Mode]:
    periodic = grid.boundary is Boundary.PERIODIC
    # bound the per-axis index by the n-th eigenvalue of the slackest axis
    l_star = max(grid.lengths)
    if periodic:
        mu_cap = (2.0 * np.pi * ((n_modes + 1) // 2 + 1) / l_star) ** 2
    else:
        mu_cap = (np.pi * n_modes / l_star) ** 2
    j_max = []
    for L in grid.lengths:
        scale = 2.0 * np.pi / L if periodic else np.pi / L
        j_max.append(int(np.floor(np.sqrt(mu_cap) / scale)) + 1)

    modes = []
    for j in np.ndindex(*[jm + 1 for jm in j_max]):
        mu = 0.0
        for a, ja in enumerate(j):
            scale = 2.0 * np.pi / grid.lengths[a] if periodic else np.pi / grid.lengths[a]
            mu += (scale * ja) ** 2
        if mu > mu_cap + 1e-12:
            continue
        if periodic:
            phases = [(0,) if ja == 0 else (0, 1) for ja in j]
            for phase in np.ndindex(*[len(ph) for ph in phases]):
                modes.append(_Mode(tuple(j), tuple(phases[a][phase[a]] for a in range(grid.d)), mu))
        else:
            modes.append(_Mode(tuple(j), (0,) * grid.d, mu))
    modes.sort(key=lambda md: (round(md.mu, 12), md.j, md.phase))
    if len(modes) < n_modes:
        raise ConfigurationError(f"could not enumerate {n_modes} eigenfunctions")
    return modes[:n_modes]


def _axis_factor(mode: _Mode, axis: int, x: np.ndarray, grid: Grid, derivative: bool):
    j = mode.j[axis]
    L = grid.lengths[axis]
    periodic = grid.boundary is Boundary.PERIODIC
    k = (2.0 * np.pi if periodic else np.pi) * j / L
    if j == 0:
        base = np.full_like(x, 1.0 / np.sqrt(L))
        return np.zeros_like(x) if derivative else base
    amp = np.sqrt(2.0 / L)
    use_sin = periodic and mode.phase[axis] == 1
    if not derivative:
        return amp * (np.sin(k * x) if use_sin else np.cos(k * x))
    if use_sin:
        return amp * k * np.cos(k * x)
    return -amp * k * np.sin(k * x)


class Eigenbasis:
    """First-N Laplacian eigenfunctions with quadrature tables."""

    def __init__(self, grid: Grid, n_modes: int):
        if n_modes < 1 or n_modes > N_CAP:
            raise ConfigurationError(f"mode count must be in [1, {N_CAP}], got {n_modes}")
        self.grid = grid
        self.modes = _enumerate_modes(grid, n_modes)
        self.n_modes = n_modes
        self.mu = np.array([md.mu for md in self.modes])

        j_peak = [max(md.j[a] for md in self.modes) for a in range(grid.d)]
        for a, jp in enumerate(j_peak):
            limit = grid.n[a] // 2 - 1 if grid.boundary is Boundary.PERIODIC else grid.n[a] - 1
            if jp > limit:
                raise ConfigurationError(
                    f"{n_modes} modes need axis-{a} frequency {jp}, beyond the grid resolution"
                )
        self.nq = tuple(2 * OVERSAMPLE * (jp + 1) for jp in j_peak)
        coords = []
        for a, nqa in enumerate(self.nq):
            L = grid.lengths[a]
            if grid.boundary is Boundary.PERIODIC:
                coords.append(np.arange(nqa) * (L / nqa))
            else:
                coords.append((np.arange(nqa) + 0.5) * (L / nqa))
        self.quad_dv = float(np.prod([grid.lengths[a] / self.nq[a] for a in range(grid.d)]))
        mesh = np.meshgrid(*coords, indexing="ij")
        self.psi = self._tables(mesh, derivative_axis=None)
        self.dpsi = np.stack(
            [self._tables(mesh, derivative_axis=a) for a in range(grid.d)], axis=0
        )
        gram = self.psi @ self.psi.T * self.quad_dv
        err = np.abs(gram - np.eye(n_modes)).max()
        if err > 1e-12:
            raise RuntimeError(f"eigenfunction quadrature lost orthonormality: {err:g}")

    def _tables(self, mesh, derivative_axis):
        q = mesh[0].size
        out = np.empty((self.n_modes, q))
        for i, md in enumerate(self.modes):
            acc = np.ones_like(mesh[0])
            for a in range(self.grid.d):
                acc = acc * _axis_factor(md, a, mesh[a], self.grid, derivative_axis == a)
            out[i] = acc.reshape(-1)
        return out

    def evaluate_on(self, coords: list[np.ndarray]) -> np.ndarray:
        """Eigenfunction table (N, npoints) on an external tensor grid."""
        mesh = np.meshgrid(*coords, indexing="ij")
        return self._tables(mesh, derivative_axis=None)


@dataclass
class GalerkinSystem:
    basis: Eigenbasis
    coeffs: np.ndarray  # (m, N)
    params: ModelParams

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def project(u0: Field, n_modes: int, params: ModelParams) -> GalerkinSystem:
    """Orthogonal projection of u0 onto the first n_modes eigenfunctions."""
    grid = u0.grid
    basis = Eigenbasis(grid, n_modes)
    _validate_params(params, grid)
    psi_main = basis.evaluate_on([grid.axis_coordinates(a) for a in range(grid.d)])
    coeffs = u0.values.reshape(grid.m, -1) @ psi_main.T * grid.cell_volume
    return GalerkinSystem(basis, coeffs, params)


def reconstruct(g: GalerkinSystem, grid: Grid | None = None) -> Field:
    """Evaluate the Galerkin state as a Field on the (main) grid."""
    grid = grid or g.basis.grid
    psi_main = g.basis.evaluate_on([grid.axis_coordinates(a) for a in range(grid.d)])
    vals = (g.coeffs @ psi_main).reshape(grid.field_shape)
    return Field.from_values(grid, vals)


def _validate_params(p: ModelParams, grid: Grid):
    if p.demag_enabled and grid.d != 1:
        raise ConfigurationError(
            "the oracle supports the stray field only in 1D, where it is diagonal on the basis"
        )
    if (p.beta1 != 0 or p.beta2 != 0) and p.nu is not None and p.nu_const is None:
        raise ConfigurationError("the oracle supports constant current densities only")


def _rhs_coeffs(c: np.ndarray, basis: Eigenbasis, p: ModelParams) -> np.ndarray:
    grid = basis.grid
    m = grid.m
    psi, dpsi, dv = basis.psi, basis.dpsi, basis.quad_dv
    mu = basis.mu

    def proj(f):
        return f @ psi.T * dv

    u = c @ psi  # (m, Q)
    # effective field: (kappa1 - mu) c from the exact diagonal part, cubic projected
    h = (p.kappa1 - mu)[np.newaxis, :] * c
    if p.kappa2 != 0:
        mag2 = np.einsum("cq,cq->q", u, u)
        h = h - p.kappa2 * proj(mag2[np.newaxis, :] * u)
    if p.aniso_enabled:
        e = np.asarray(p.easy_axis)
        s = np.einsum("c,cq->q", e, u)
        phi_a = (p.lambda1 * s - p.lambda2 * s**3)[np.newaxis, :] * e[:, np.newaxis]
        h = h + proj(phi_a)

    phi_d = np.zeros_like(c)
    if p.demag_enabled:
        # 1D periodic: every nonzero mode projects the x-component longitudinally
        nonzero = mu > 1e-14
        phi_d[0, nonzero] = -c[0, nonzero]

    cdot = (p.sigma + p.eps * mu)[np.newaxis, :] * (h + phi_d)

    needs_fields = p.gamma != 0 or p.beta1 != 0 or p.beta2 != 0 or p.chi != 0 or p.source is not None
    if not needs_fields:
        return cdot

    if p.gamma != 0:
        core = (h + phi_d) @ psi
        cross = np.empty_like(u)
        cross[0] = u[1] * core[2] - u[2] * core[1]
        cross[1] = u[2] * core[0] - u[0] * core[2]
        cross[2] = u[0] * core[1] - u[1] * core[0]
        cdot = cdot - p.gamma * proj(cross)

    if p.beta1 != 0 or p.beta2 != 0 or p.chi != 0:
        grad = np.einsum("cn,anq->acq", c, dpsi)  # (d, m, Q)
        r = np.zeros_like(u)
        if (p.beta1 != 0 or p.beta2 != 0) and p.nu_const is not None:
            nu = np.asarray(p.nu_const)
            dd = np.einsum("a,acq->cq", nu, grad)
            if p.beta1 != 0:
                r += p.beta1 * dd
            if p.beta2 != 0 and m == 3:
                cr = np.empty_like(u)
                cr[0] = u[1] * dd[2] - u[2] * dd[1]
                cr[1] = u[2] * dd[0] - u[0] * dd[2]
                cr[2] = u[0] * dd[1] - u[1] * dd[0]
                r += p.beta2 * cr
        if p.chi != 0:
            if m == 1:
                direction = np.asarray(p.nu_const)
                direction = direction / np.linalg.norm(direction)
                r[0] += p.chi * 2.0 * u[0] * np.einsum("a,aq->q", direction, grad[:, 0])
            else:
                # div(u (x) u) = (u.grad)u + u div(u), truncated to d components
                adv = np.einsum("aq,acq->cq", u[: grid.d], grad)
                divu = np.einsum("aaq->q", grad[:, : grid.d])
                r += p.chi * (adv + u * divu[np.newaxis, :])
        cdot = cdot + proj(r)

    if p.source is not None:
        a = np.asarray(p.source.a)
        s_vals = u + np.einsum("c,cq->q", a, u)[np.newaxis, :] * u
        cdot = cdot + proj(s_vals)

    return cdot


def ode_rhs(g: GalerkinSystem) -> np.ndarray:
    """Time derivative of the Galerkin coefficients, shape (m, N)."""
    return _rhs_coeffs(g.coeffs, g.basis, g.params)


def integrate_rk4(
    g: GalerkinSystem, dt: float, t_end: float, max_norm: float = 1e8, observer=None
) -> GalerkinSystem:
    """Classical fourth-order integration of the Galerkin ODE."""
    if dt <= 0 or t_end < dt:
        raise ConfigurationError("need dt > 0 and t_end >= dt")
    n_steps = max(1, int(round(t_end / dt)))
    c = g.coeffs.copy()
    basis, p = g.basis, g.params
    if observer is not None:
        observer(0.0, GalerkinSystem(basis, c.copy(), p))
    for k in range(1, n_steps + 1):
        k1 = _rhs_coeffs(c, basis, p)
        k2 = _rhs_coeffs(c + 0.5 * dt * k1, basis, p)
        k3 = _rhs_coeffs(c + 0.5 * dt * k2, basis, p)
        k4 = _rhs_coeffs(c + dt * k3, basis, p)
        c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = float(np.linalg.norm(c))
        if not np.isfinite(norm) or norm > max_norm:
            raise BlowUpError(k, k * dt, norm)
        if observer is not None:
            observer(k * dt, GalerkinSystem(basis, c.copy(), p))
    return GalerkinSystem(basis, c, p)
