import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_drift_state, make_uniform_state
from drift_ap import riemann
from drift_ap.mesh import BoundarySpec, build_grid, fill_ghosts
from drift_ap.model import case_params, drift_limit_state
from drift_ap.riemann import (SpeedMode, TimeControls, compute_dt,
                              interface_speed, mass_flux, momentum_flux_x,
                              momentum_flux_y, roe_average)

densities = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
velocities = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)
vec3 = st.tuples(velocities, velocities, velocities)


class TestRoeAverage:
    def test_identical_states(self):
        s = roe_average(1.0, (-1.0, 1.0, 0.0), 1.0, (-1.0, 1.0, 0.0))
        assert s.n_hat == 1.0
        assert s.u_hat == (-1.0, 1.0, 0.0)

    def test_weighted_mean(self):
        s = roe_average(1.0, (0.0, 0.0, 0.0), 4.0, (3.0, 0.0, 0.0))
        assert s.n_hat == pytest.approx(2.0)
        assert s.u_hat[0] == pytest.approx(2.0)
        assert s.momentum[0] == pytest.approx(4.0)

    def test_swapped_weights(self):
        s = roe_average(4.0, (3.0, 0.0, 0.0), 1.0, (0.0, 0.0, 0.0))
        assert s.n_hat == pytest.approx(2.0)
        assert s.u_hat[0] == pytest.approx(2.0)

    def test_rejects_nonpositive_density(self):
        with pytest.raises(ValueError):
            roe_average(0.0, (0.0, 0.0, 0.0), 1.0, (0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            roe_average(np.array([1.0, -2.0]), (0.0, 0.0, 0.0),
                        np.array([1.0, 1.0]), (0.0, 0.0, 0.0))

    @given(n_l=densities, n_r=densities, u_l=vec3, u_r=vec3)
    def test_swap_symmetry(self, n_l, n_r, u_l, u_r):
        fwd = roe_average(n_l, u_l, n_r, u_r)
        rev = roe_average(n_r, u_r, n_l, u_l)
        assert fwd.n_hat == rev.n_hat
        for a, b in zip(fwd.u_hat, rev.u_hat):
            assert a == pytest.approx(b, rel=1e-14, abs=1e-14)

    @given(n_l=densities, n_r=densities, u_l=vec3, u_r=vec3)
    def test_u_hat_between_sides(self, n_l, n_r, u_l, u_r):
        s = roe_average(n_l, u_l, n_r, u_r)
        for ul, ur, uh in zip(u_l, u_r, s.u_hat):
            lo, hi = min(ul, ur), max(ul, ur)
            margin = 1e-12 * (abs(lo) + abs(hi) + 1.0)
            assert lo - margin <= uh <= hi + margin


class TestInterfaceSpeed:
    def test_resolved_uniform_drift_flow(self):
        params = case_params(1e-6)
        a = interface_speed(1.0, -1.0, 1.0, -1.0, SpeedMode.RESOLVED, params)
        assert a == pytest.approx(1001.0)

    def test_nonresolved_uniform_drift_flow(self):
        params = case_params(1e-6)
        a = interface_speed(1.0, -1.0, 1.0, -1.0, SpeedMode.NONRESOLVED, params)
        assert a == pytest.approx(1.0)

    def test_symmetric_acoustic_fan(self):
        params = case_params(1e-6)
        a = interface_speed(1.0, 0.0, 1.0, 0.0, SpeedMode.RESOLVED, params)
        assert a == pytest.approx(1000.0)

    def test_resolved_propagates_zero_epsilon_error(self):
        with pytest.raises(ZeroDivisionError):
            interface_speed(1.0, 0.0, 1.0, 0.0, SpeedMode.RESOLVED,
                            case_params(0.0))

    @given(n_l=densities, n_r=densities, u_l=velocities, u_r=velocities)
    def test_speed_dominates_interface_velocity(self, n_l, n_r, u_l, u_r):
        params = case_params(0.25)
        u_hat = roe_average(n_l, (u_l, 0, 0), n_r, (u_r, 0, 0)).u_hat[0]
        for mode in SpeedMode:
            a = interface_speed(n_l, u_l, n_r, u_r, mode, params)
            assert a >= abs(u_hat) - 1e-12 * (abs(u_hat) + 1.0)

    @given(n_l=densities, n_r=densities, u_l=velocities, u_r=velocities)
    def test_resolved_at_least_nonresolved(self, n_l, n_r, u_l, u_r):
        params = case_params(0.25)
        res = interface_speed(n_l, u_l, n_r, u_r, SpeedMode.RESOLVED, params)
        non = interface_speed(n_l, u_l, n_r, u_r, SpeedMode.NONRESOLVED, params)
        assert res >= non - 1e-12 * (res + 1.0)


class TestMomentumFluxes:
    def test_uniform_drift_state_pressure_dominates(self):
        params = case_params(1e-6)
        state = (1.0, (-1.0, 1.0, 0.0))
        gxx, gxy, gxz = momentum_flux_x(state, state, 1001.0, params)
        assert gxx == pytest.approx(1.000001)
        assert gxy == pytest.approx(-1e-6)
        assert gxz == 0.0

    def test_limit_flux_is_pure_pressure(self):
        params = case_params(0.0)
        state = (1.0, (3.0, -2.0, 5.0))
        gxx, gxy, gxz = momentum_flux_x(state, state, 7.0, params)
        assert (gxx, gxy, gxz) == (1.0, 0.0, 0.0)

    def test_density_jump_at_rest(self):
        params = case_params(1.0)
        gxx, gxy, gxz = momentum_flux_x((1.0, (0.0, 0.0, 0.0)),
                                        (2.0, (0.0, 0.0, 0.0)), 1.0, params)
        assert gxx == pytest.approx(1.5)
        assert gxy == 0.0 and gxz == 0.0

    @given(n=densities, u=vec3, eps=st.floats(min_value=0.0, max_value=2.0))
    def test_consistency_with_pointwise_flux(self, n, u, eps):
        params = case_params(eps)
        a = 3.0
        gxx, gxy, gxz = momentum_flux_x((n, u), (n, u), a, params)
        assert gxx == pytest.approx(eps * n * u[0] ** 2 + n, rel=1e-12, abs=1e-12)
        assert gxy == pytest.approx(eps * n * u[0] * u[1], rel=1e-12, abs=1e-12)
        assert gxz == pytest.approx(eps * n * u[0] * u[2], rel=1e-12, abs=1e-12)
        gyx, gyy, gyz = momentum_flux_y((n, u), (n, u), a, params)
        assert gyy == pytest.approx(eps * n * u[1] ** 2 + n, rel=1e-12, abs=1e-12)
        assert gyx == pytest.approx(eps * n * u[1] * u[0], rel=1e-12, abs=1e-12)
        assert gyz == pytest.approx(eps * n * u[1] * u[2], rel=1e-12, abs=1e-12)

    def test_internal_face_loop_matches_public_fluxes_bitwise(self):
        grid = build_grid(6, 5)
        rng = np.random.default_rng(3)
        state = make_uniform_state(grid)
        state.n[:] = rng.uniform(0.5, 2.0, grid.shape)
        state.mx[:] = rng.uniform(-1.0, 1.0, grid.shape)
        state.my[:] = rng.uniform(-1.0, 1.0, grid.shape)
        state.mz[:] = rng.uniform(-1.0, 1.0, grid.shape)
        params = case_params(0.7)
        ax, ay = riemann.face_speeds(state, grid, SpeedMode.RESOLVED, params)
        div = riemann.momentum_divergences(state, grid, params, ax, ay)

        n = state.n
        ux, uy, uz = state.velocities()
        left = (n[:-1, 1:-1], (ux[:-1, 1:-1], uy[:-1, 1:-1], uz[:-1, 1:-1]))
        right = (n[1:, 1:-1], (ux[1:, 1:-1], uy[1:, 1:-1], uz[1:, 1:-1]))
        gx = momentum_flux_x(left, right, ax, params)
        bottom = (n[1:-1, :-1], (ux[1:-1, :-1], uy[1:-1, :-1], uz[1:-1, :-1]))
        top = (n[1:-1, 1:], (ux[1:-1, 1:], uy[1:-1, 1:], uz[1:-1, 1:]))
        gy = momentum_flux_y(bottom, top, ay, params)
        for k in range(3):
            expected = ((gx[k][1:, :] - gx[k][:-1, :]) / grid.dx
                        + (gy[k][:, 1:] - gy[k][:, :-1]) / grid.dy)
            np.testing.assert_array_equal(div[k], expected)

    def test_conservative_telescoping_along_row(self):
        # State uniform in y: the y-flux contributions cancel and the
        # row sum of divergences telescopes to the boundary fluxes.
        grid = build_grid(12, 4)
        rng = np.random.default_rng(11)
        state = make_uniform_state(grid)
        column_n = rng.uniform(0.5, 2.0, grid.shape[0])
        column_m = rng.uniform(-1.0, 1.0, grid.shape[0])
        for j in range(grid.shape[1]):
            state.n[:, j] = column_n
            state.mx[:, j] = column_m
        params = case_params(0.5)
        ax, ay = riemann.face_speeds(state, grid, SpeedMode.RESOLVED, params)
        div_x, _, _ = riemann.momentum_divergences(state, grid, params, ax, ay)

        n = state.n
        ux, uy, uz = state.velocities()
        left = (n[:-1, 1:-1], (ux[:-1, 1:-1], uy[:-1, 1:-1], uz[:-1, 1:-1]))
        right = (n[1:, 1:-1], (ux[1:, 1:-1], uy[1:, 1:-1], uz[1:, 1:-1]))
        gxx, _, _ = momentum_flux_x(left, right, ax, params)
        j = 1  # any interior row
        row_sum = np.sum(div_x[:, j]) * grid.dx
        assert row_sum == pytest.approx(gxx[-1, j] - gxx[0, j], rel=1e-12,
                                        abs=1e-13)


class TestMassFlux:
    def test_uniform(self):
        assert mass_flux(-1.0, -1.0, 5.0, 1.0, 1.0) == -1.0

    def test_pure_viscosity(self):
        assert mass_flux(0.0, 0.0, 1.0, 1.0, 2.0) == -0.5

    def test_antisymmetric_average(self):
        assert mass_flux(-1.0, 1.0, 3.0, 2.0, 2.0) == 0.0


class TestTimeControls:
    def test_cfl_bounds(self):
        TimeControls(cfl=1.0)
        with pytest.raises(ValueError):
            TimeControls(cfl=0.0)
        with pytest.raises(ValueError):
            TimeControls(cfl=1.5)


class TestComputeDt:
    def setup_method(self):
        self.grid = build_grid(100, 100)
        self.bc = BoundarySpec.uniform(*drift_limit_state())

    def test_resolved_reference_value(self):
        state = make_drift_state(self.grid)
        fill_ghosts(state, self.bc)
        dt = compute_dt(state, self.grid, SpeedMode.RESOLVED,
                        case_params(1e-6), 0.5)
        assert dt == pytest.approx(2.4975e-6, rel=1e-4)
        assert np.log10(dt) == pytest.approx(-5.60, abs=0.01)

    def test_nonresolved_reference_value(self):
        state = make_drift_state(self.grid)
        fill_ghosts(state, self.bc)
        dt = compute_dt(state, self.grid, SpeedMode.NONRESOLVED,
                        case_params(1e-6), 0.5)
        assert dt == pytest.approx(2.5e-3, rel=1e-12)
        assert np.log10(dt) == pytest.approx(-2.60, abs=0.01)

    def test_rest_state_falls_back_to_dt_max(self):
        grid = build_grid(8, 8)
        state = make_uniform_state(grid, n=1.0)
        dt = compute_dt(state, grid, SpeedMode.NONRESOLVED, case_params(1e-6),
                        0.5, dt_max=0.01)
        assert dt == 0.01
        with pytest.raises(ValueError):
            compute_dt(state, grid, SpeedMode.NONRESOLVED, case_params(1e-6),
                       0.5)

    def test_invalid_cfl_rejected(self):
        grid = build_grid(8, 8)
        state = make_drift_state(grid)
        with pytest.raises(ValueError):
            compute_dt(state, grid, SpeedMode.NONRESOLVED, case_params(1e-6),
                       1.0001)

    def test_linear_in_cfl_and_resolution(self):
        params = case_params(1e-4)
        state = make_drift_state(self.grid)
        fill_ghosts(state, self.bc)
        dt_half = compute_dt(state, self.grid, SpeedMode.RESOLVED, params, 0.25)
        dt_full = compute_dt(state, self.grid, SpeedMode.RESOLVED, params, 0.5)
        assert dt_full == pytest.approx(2.0 * dt_half, rel=1e-13)

        fine = build_grid(200, 200)
        state_fine = make_drift_state(fine)
        fill_ghosts(state_fine, self.bc)
        dt_fine = compute_dt(state_fine, fine, SpeedMode.RESOLVED, params, 0.5)
        assert dt_full == pytest.approx(2.0 * dt_fine, rel=1e-13)
