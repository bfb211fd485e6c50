"""Tests for the low-mode Galerkin oracle."""

import numpy as np
import pytest

from llbar import Boundary, ConfigurationError, Field, Grid, StepperConfig, integrate
from llbar.diagnostics import lyapunov, norm, random_smooth_field
from llbar.galerkin import Eigenbasis, GalerkinSystem, integrate_rk4, ode_rhs, project, reconstruct
from llbar.model import ModelParams
from llbar.stepper import BlowUpError


def grid_1d(m=1):
    return Grid(1, m, (64,), (2 * np.pi,))


def mode_field(grid, profile):
    return Field.from_values(grid, profile[None] if grid.m == 1 else profile)


class TestEigenbasis:
    def test_1d_periodic_ordering(self):
        basis = Eigenbasis(grid_1d(), 8)
        assert np.allclose(basis.mu, [0, 1, 1, 4, 4, 9, 9, 16])

    @pytest.mark.parametrize(
        "grid,n_modes",
        [
            (Grid(1, 1, (64,), (2 * np.pi,)), 12),
            (Grid(2, 1, (32, 32), (2 * np.pi, 2 * np.pi)), 16),
            (Grid(1, 1, (64,), (1.0,), Boundary.NEUMANN_COSINE), 10),
            (Grid(2, 1, (24, 24), (1.0, 2.0), Boundary.NEUMANN_COSINE), 12),
        ],
    )
    def test_orthonormality_on_quadrature_grid(self, grid, n_modes):
        basis = Eigenbasis(grid, n_modes)  # constructor verifies the Gram matrix
        gram = basis.psi @ basis.psi.T * basis.quad_dv
        assert np.abs(gram - np.eye(n_modes)).max() < 1e-12

    def test_mode_cap_and_resolution_limits(self):
        with pytest.raises(ConfigurationError):
            Eigenbasis(grid_1d(), 65)
        with pytest.raises(ConfigurationError, match="beyond the grid"):
            Eigenbasis(Grid(1, 1, (8,), (2 * np.pi,)), 12)


class TestProjection:
    def test_data_in_span_round_trips(self):
        g = grid_1d()
        x, = g.meshgrid()
        p = ModelParams(grid=g)
        u0 = mode_field(g, 0.2 * np.sin(x) + 0.1 * np.cos(2 * x))
        sys0 = project(u0, 8, p)
        assert np.abs(reconstruct(sys0).values - u0.values).max() < 1e-12

    def test_high_mode_outside_span_projects_to_zero(self):
        g = grid_1d()
        x, = g.meshgrid()
        p = ModelParams(grid=g)
        sys0 = project(mode_field(g, np.sin(9 * x)), 8, p)
        assert np.abs(sys0.coeffs).max() < 1e-13

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_projection_contracts_l2(self, seed):
        g = grid_1d()
        p = ModelParams(grid=g)
        u0 = random_smooth_field(g, seed=seed, amplitude=1.0)
        sys0 = project(u0, 12, p)
        assert sys0.l2_norm() <= norm(u0, "l2") + 1e-12


class TestOdeRhs:
    def test_linear_configuration_is_diagonal(self):
        g = grid_1d()
        p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=2.0, kappa2=0.0)
        u0 = random_smooth_field(g, seed=3, amplitude=1.0)
        sys0 = project(u0, 8, p)
        expected = (1.0 + 0.1 * sys0.basis.mu) * (2.0 - sys0.basis.mu) * sys0.coeffs
        assert np.abs(ode_rhs(sys0) - expected).max() < 1e-12

    def test_zero_coefficients_zero_rhs(self):
        g = grid_1d()
        p = ModelParams(grid=g, kappa2=1.0)
        sys0 = project(Field.zeros(g), 8, p)
        assert np.abs(ode_rhs(sys0)).max() == 0.0

    def test_constant_mode_reduces_to_scalar_ode(self):
        # N = 1 keeps only the constant eigenfunction 1/sqrt(V); the cubic
        # projection picks up a 1/V factor: c' = sigma (kappa1 c - kappa2 c^3 / V)
        g = grid_1d()
        p = ModelParams(grid=g, sigma=1.3, kappa1=0.8, kappa2=0.9)
        u0 = Field.constant(g, (0.6,))
        sys0 = project(u0, 1, p)
        c = sys0.coeffs[0, 0]
        expected = 1.3 * (0.8 * c - 0.9 * c**3 / g.volume)
        assert abs(ode_rhs(sys0)[0, 0] - expected) < 1e-12


class TestRk4:
    def test_fixed_point_unchanged(self):
        g = grid_1d()
        p = ModelParams(grid=g, kappa1=1.0, kappa2=1.0)
        sys0 = project(Field.constant(g, (1.0,)), 4, p)
        out = integrate_rk4(sys0, 1e-2, 0.5)
        assert np.abs(out.coeffs - sys0.coeffs).max() < 1e-12

    def test_linear_decay_fourth_order(self):
        g = grid_1d()
        x, = g.meshgrid()
        p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=0.0)
        u0 = mode_field(g, np.sin(2 * x))
        lam = (1.0 + 0.1 * 4.0) * (1.0 - 4.0)
        errs = []
        for dt in (2e-2, 1e-2):
            out = integrate_rk4(project(u0, 8, p), dt, 0.2)
            exact = np.exp(lam * 0.2) * project(u0, 8, p).coeffs
            errs.append(np.abs(out.coeffs - exact).max())
        assert 12.0 < errs[0] / errs[1] < 20.0  # global error O(dt^4)

    def test_blow_up_guard(self):
        g = grid_1d()
        p = ModelParams(grid=g, sigma=1.0, kappa1=500.0, kappa2=0.0)
        sys0 = project(Field.constant(g, (1.0,)), 4, p)
        with pytest.raises(BlowUpError):
            integrate_rk4(sys0, 1e-2, 1.0, max_norm=1e3)

    def test_lyapunov_nonincreasing_along_oracle(self):
        g = grid_1d()
        x, = g.meshgrid()
        p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=1.0)
        u0 = mode_field(g, 0.4 * np.sin(x) + 0.2 * np.cos(2 * x))
        values = []
        integrate_rk4(project(u0, 8, p), 1e-3, 0.5,
                      observer=lambda t, s: values.append(lyapunov(reconstruct(s), p)))
        values = np.array(values)
        assert np.all(np.diff(values) <= 1e-10 * (1.0 + values[0]))


class TestOracleAgreement:
    def test_quick_cross_check_against_stepper(self):
        g = grid_1d()
        x, = g.meshgrid()
        p = ModelParams(grid=g, sigma=1.0, eps=0.1, kappa1=1.0, kappa2=1.0)
        u0 = mode_field(g, 0.2 * np.sin(x) + 0.1 * np.cos(2 * x))
        dt, T = 2e-4, 0.2
        ps = integrate(u0, p, StepperConfig(dt=dt, t_end=T, scheme="imex_bdf2"))
        oracle = integrate_rk4(project(u0, 8, p), dt, T)
        projected = project(ps, 8, p)
        assert np.linalg.norm(projected.coeffs - oracle.coeffs) < 1e-5

    def test_oracle_rejects_varying_current(self):
        g = grid_1d()
        nu = np.linspace(0.0, 1.0, 64)[None]
        p = ModelParams(grid=g, beta1=0.5, nu=nu)
        with pytest.raises(ConfigurationError, match="constant current"):
            project(random_smooth_field(g, seed=0), 4, p)

    def test_oracle_with_torque_terms_runs(self):
        g = grid_1d(m=3)
        p = ModelParams(grid=g, sigma=1.0, eps=0.05, gamma=0.3, kappa1=1.0, kappa2=1.0,
                        lambda1=0.2, lambda2=0.0, aniso_enabled=True, demag_enabled=True,
                        beta1=0.1, beta2=0.05, chi=0.1, nu=(1.0,))
        u0 = random_smooth_field(g, seed=7, amplitude=0.5)
        dt, T = 2e-4, 0.1
        ps = integrate(u0, p, StepperConfig(dt=dt, t_end=T, scheme="imex_bdf2"))
        oracle = integrate_rk4(project(u0, 10, p), dt, T)
        projected = project(ps, 10, p)
        # full-torque dynamics leak more into the unresolved tail; loose bound
        assert np.linalg.norm(projected.coeffs - oracle.coeffs) < 1e-3
