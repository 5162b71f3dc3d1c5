import numpy as np
import pytest

from combustion1d.grid import (
    BoundaryCondition,
    HALF_LINE_INSULATED,
    HALF_LINE_ISOTHERMAL,
    Mesh,
    State,
    StepControl,
    dcell_to_node,
    dnode_to_cell,
    h1_dev,
    interval_integral,
    interval_range,
    l2_dev,
    node_weights,
)
from conftest import equilibrium_state, random_valid_state


class TestMesh:
    def test_whole_line_geometry(self):
        mesh = Mesh(half_length=8.0, n=16)
        assert mesh.dx == 1.0
        assert mesh.nodes[0] == -8.0 and mesh.nodes[-1] == 8.0
        assert np.all(np.diff(mesh.nodes) > 0)
        assert len(mesh.cells) == 16
        assert mesh.cells[0] == pytest.approx(-7.5)

    def test_half_line_geometry(self):
        mesh = Mesh(half_length=8.0, n=16, kind="half-line")
        assert mesh.x_lo == 0.0 and mesh.x_hi == 8.0
        assert mesh.dx == 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            Mesh(half_length=8.0, n=4)
        with pytest.raises(ValueError):
            Mesh(half_length=-1.0, n=16)
        with pytest.raises(ValueError):
            Mesh(half_length=1.0, n=16, kind="circle")


class TestOperators:
    def test_dnode_to_cell_constant(self, mesh16):
        f = np.full(mesh16.n + 1, 3.7)
        assert np.all(dnode_to_cell(f, mesh16) == 0.0)

    def test_dnode_to_cell_identity(self, mesh16):
        assert np.allclose(dnode_to_cell(mesh16.nodes, mesh16), 1.0)

    def test_dnode_to_cell_quadratic_exact(self):
        # centered difference of x^2 lands exactly on 2*x at cell centers
        mesh = Mesh(half_length=4.0, n=16)  # dx = 0.5
        vals = dnode_to_cell(mesh.nodes**2, mesh)
        assert np.allclose(vals, 2.0 * mesh.cells, rtol=0, atol=1e-13)

    def test_length_mismatch(self, mesh16):
        with pytest.raises(ValueError):
            dnode_to_cell(np.zeros(mesh16.n), mesh16)
        with pytest.raises(ValueError):
            dcell_to_node(np.zeros(mesh16.n + 1), mesh16, (1.0, 1.0))

    def test_dcell_to_node_equilibrium_field(self, mesh16, bc):
        g = np.ones(mesh16.n)
        out = dcell_to_node(g, mesh16, bc.cell_ghosts("theta", g))
        assert np.all(out == 0.0)

    def test_dcell_to_node_linear_interior(self, mesh16):
        g = 2.0 * mesh16.cells + 1.0
        out = dcell_to_node(g, mesh16, (0.0, 0.0))
        assert np.allclose(out[1:-1], 2.0)

    def test_insulated_wall_gradient_is_zero(self):
        # reflective ghost makes the wall-node temperature gradient vanish
        mesh = Mesh(half_length=8.0, n=16, kind="half-line")
        bc = BoundaryCondition(kind=HALF_LINE_INSULATED)
        g = np.linspace(2.0, 1.0, mesh.n) ** 2
        out = dcell_to_node(g, mesh, bc.cell_ghosts("theta", g))
        assert out[0] == 0.0

    def test_linearity(self, mesh64):
        rng = np.random.default_rng(3)
        f1, f2 = rng.standard_normal((2, mesh64.n + 1))
        g1, g2 = rng.standard_normal((2, mesh64.n))
        a, b = 1.3, -0.7
        assert np.allclose(dnode_to_cell(a * f1 + b * f2, mesh64),
                           a * dnode_to_cell(f1, mesh64) + b * dnode_to_cell(f2, mesh64),
                           atol=1e-12)
        lhs = dcell_to_node(a * g1 + b * g2, mesh64, (0.0, 0.0))
        rhs = a * dcell_to_node(g1, mesh64, (0.0, 0.0)) \
            + b * dcell_to_node(g2, mesh64, (0.0, 0.0))
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_summation_by_parts(self, mesh64):
        # with f pinned to zero at both boundary nodes the discrete operators
        # are exact adjoints; this backs the budget identities
        rng = np.random.default_rng(11)
        g = rng.standard_normal(mesh64.n)
        f = rng.standard_normal(mesh64.n + 1)
        f[0] = f[-1] = 0.0
        lhs = np.sum(g * dnode_to_cell(f, mesh64)) * mesh64.dx
        rhs = -np.sum(f * dcell_to_node(g, mesh64, (g[0], g[-1]))) * mesh64.dx
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestBoundaryCondition:
    def test_whole_line_ghosts(self, bc):
        g = np.array([4.0, 5.0, 6.0])
        assert bc.cell_ghosts("u", g) == (1.0, 1.0)
        assert bc.cell_ghosts("theta", g) == (1.0, 1.0)
        assert bc.cell_ghosts("z", g) == (0.0, 0.0)

    def test_isothermal_wall_value_pinned(self):
        bc = BoundaryCondition(kind=HALF_LINE_ISOTHERMAL)
        g = np.array([1.4, 1.2, 1.1])
        gl, gr = bc.cell_ghosts("theta", g)
        assert 0.5 * (gl + g[0]) == pytest.approx(1.0)
        assert gr == 1.0

    def test_z_wall_variants(self):
        g = np.array([0.5, 0.2, 0.1])
        dirichlet = BoundaryCondition(kind=HALF_LINE_INSULATED, z_end="dirichlet0")
        gl, _ = dirichlet.cell_ghosts("z", g)
        assert 0.5 * (gl + g[0]) == pytest.approx(0.0)
        neumann = BoundaryCondition(kind=HALF_LINE_INSULATED, z_end="neumann0")
        gl, _ = neumann.cell_ghosts("z", g)
        assert gl == g[0]

    def test_validation(self):
        with pytest.raises(ValueError):
            BoundaryCondition(kind="periodic")
        with pytest.raises(ValueError):
            BoundaryCondition(z_end="dirichlet1")

    def test_mesh_kind(self):
        assert BoundaryCondition().mesh_kind == "whole-line"
        assert BoundaryCondition(kind=HALF_LINE_INSULATED).mesh_kind == "half-line"


class TestStepControl:
    def test_validation(self):
        with pytest.raises(ValueError):
            StepControl(safety=0.0)
        with pytest.raises(ValueError):
            StepControl(safety=1.5)
        with pytest.raises(ValueError):
            StepControl(theta_floor=0.0)
        with pytest.raises(ValueError):
            StepControl(dt_max=-0.1)


class TestNorms:
    def test_equilibrium_is_zero(self, mesh64, bc):
        state = equilibrium_state(mesh64)
        assert l2_dev(state, mesh64) == 0.0
        assert h1_dev(state, mesh64, bc) == 0.0

    def test_single_cell_bump(self, mesh64):
        # one interior cell at 1+c: midpoint sum has the single term c^2*dx
        state = equilibrium_state(mesh64)
        c = 0.37
        state.u[mesh64.n // 2] = 1.0 + c
        assert l2_dev(state, mesh64) == pytest.approx(abs(c) * np.sqrt(mesh64.dx))

    def test_h1_dominates_l2(self, mesh64, bc):
        rng = np.random.default_rng(5)
        for _ in range(10):
            state = random_valid_state(mesh64, rng)
            assert h1_dev(state, mesh64, bc) >= l2_dev(state, mesh64)

    def test_positive_away_from_equilibrium(self, mesh64):
        state = equilibrium_state(mesh64)
        state.theta[3] = 1.5
        assert l2_dev(state, mesh64) > 0.0

    def test_node_weights_sum_to_length(self, mesh64):
        assert node_weights(mesh64).sum() == pytest.approx(mesh64.x_hi - mesh64.x_lo)


class TestIntervalIntegral:
    def test_unit_field(self, mesh16):
        g = np.ones(mesh16.n)
        for k in interval_range(mesh16):
            assert interval_integral(g, k, mesh16) == pytest.approx(1.0)

    def test_constant_two(self, mesh16):
        g = np.full(mesh16.n, 2.0)
        assert interval_integral(g, 0, mesh16) == pytest.approx(2.0)

    def test_aligned_linear_exact(self, mesh16):
        # dx = 1: cells align with [k, k+1], midpoint rule exact for linear
        g = mesh16.cells.copy()
        for k in (-3, 0, 5):
            assert interval_integral(g, k, mesh16) == pytest.approx(k + 0.5)

    def test_straddling_prorata(self):
        # dx does not divide 1: straddle cells contribute fractionally;
        # a constant field must still integrate to the interval length
        mesh = Mesh(half_length=5.125, n=82)
        g = np.full(mesh.n, 3.0)
        assert interval_integral(g, 1, mesh) == pytest.approx(3.0, abs=1e-12)

    def test_out_of_range(self, mesh16):
        with pytest.raises(ValueError):
            interval_integral(np.ones(mesh16.n), 8, mesh16)

    def test_jensen_for_interval_averages(self, mesh64):
        # pure convexity: psi(mean) <= mean(psi); equality for constants
        rng = np.random.default_rng(23)
        psi = lambda s: s - 1.0 - np.log(s)
        for _ in range(20):
            u = np.exp(0.5 * rng.standard_normal(mesh64.n))
            for k in (-2, 0, 3):
                mean = interval_integral(u, k, mesh64)
                assert psi(mean) <= interval_integral(psi(u), k, mesh64) + 1e-12
        const = np.full(mesh64.n, 1.7)
        mean = interval_integral(const, 0, mesh64)
        assert psi(mean) == pytest.approx(interval_integral(psi(const), 0, mesh64))

    def test_interval_range_covers_domain(self):
        mesh = Mesh(half_length=3.0, n=12)
        assert list(interval_range(mesh)) == [-3, -2, -1, 0, 1, 2]
        half = Mesh(half_length=3.0, n=12, kind="half-line")
        assert list(interval_range(half)) == [0, 1, 2]


class TestState:
    def test_invariant_checks(self, mesh16):
        state = equilibrium_state(mesh16)
        state.check_invariants(mesh16)
        state.u[0] = -0.1
        with pytest.raises(ValueError):
            state.check_invariants(mesh16)

    def test_z_band_tolerance(self, mesh16):
        state = equilibrium_state(mesh16)
        state.z[:] = 1.0 + 5e-11  # inside tolerance
        state.check_invariants(mesh16)
        state.z[0] = 1.0 + 1e-9
        with pytest.raises(ValueError):
            state.check_invariants(mesh16)

    def test_copy_is_deep(self, mesh16):
        state = equilibrium_state(mesh16)
        other = state.copy()
        other.u[0] = 9.0
        assert state.u[0] == 1.0
