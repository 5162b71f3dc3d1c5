import numpy as np
import pytest

from combustion1d import config, oracle, solver
from combustion1d.grid import Mesh, h1_dev
from combustion1d.model import ReactionRate


@pytest.fixture(scope="module")
def cold_cfg():
    return config.scenario_config(
        "cold-bump", width=1.0, t_final=1.0, snapshot_every=0.25,
        mesh=Mesh(half_length=10.0, n=128))


@pytest.fixture(scope="module")
def cold_main(cold_cfg):
    return solver.run(cold_cfg)


@pytest.fixture(scope="module")
def cold_ref4(cold_cfg):
    return oracle.explicit_reference_run(cold_cfg, refine=4)


class TestExplicitReferenceRun:
    def test_equilibrium_stays_put(self):
        cfg = config.scenario_config(
            "equilibrium", t_final=0.5, snapshot_every=0.25,
            mesh=Mesh(half_length=10.0, n=64))
        traj = oracle.explicit_reference_run(cfg, refine=2)
        for s in traj.states:
            assert h1_dev(s, traj.mesh, traj.bc) <= 1e-12

    def test_rejects_small_refine(self, cold_cfg):
        with pytest.raises(ValueError):
            oracle.explicit_reference_run(cold_cfg, refine=1)

    def test_cold_diffusive_agreement(self, cold_main, cold_ref4):
        # the empirically recorded cross-scheme tolerance at T=1
        table = oracle.compare(cold_main, cold_ref4)
        assert table.final_combined_l2() <= 0.02

    def test_oracle_self_convergence(self, cold_cfg, cold_main, cold_ref4):
        # Richardson: the two oracle resolutions sit closer to each other
        # than the main solver sits to the finer oracle
        ref2 = oracle.explicit_reference_run(cold_cfg, refine=2)
        oracle_gap = oracle.compare(ref2, cold_ref4).final_combined_l2()
        main_gap = oracle.compare(cold_main, cold_ref4).final_combined_l2()
        assert oracle_gap < main_gap

    def test_abort_on_step_budget(self, cold_cfg):
        with pytest.raises(oracle.OracleAbort):
            oracle.explicit_reference_run(cold_cfg, refine=2,
                                          max_steps_per_chunk=3)

    def test_snapshot_times_match_config(self, cold_main, cold_ref4):
        assert np.allclose(cold_main.times, cold_ref4.times)


class TestCompare:
    def test_identical_trajectories_are_zero(self, cold_main):
        table = oracle.compare(cold_main, cold_main)
        for field in ("u", "v", "theta", "z"):
            assert np.all(table.l2[field] == 0.0)
            assert np.all(table.linf[field] == 0.0)

    def test_restriction_is_conservative(self):
        fine = np.arange(12.0)
        coarse = oracle._restrict_cells(fine, 3)
        assert np.allclose(coarse, [1.0, 4.0, 7.0, 10.0])
        nodes = np.arange(13.0)
        assert np.allclose(oracle._restrict_nodes(nodes, 3), [0, 3, 6, 9, 12])

    def test_incompatible_domains_rejected(self, cold_main):
        other_cfg = config.scenario_config(
            "cold-bump", width=1.0, t_final=1.0, snapshot_every=0.25,
            mesh=Mesh(half_length=12.0, n=128), support_radius=5.0)
        other = solver.run(other_cfg)
        with pytest.raises(ValueError, match="domain"):
            oracle.compare(cold_main, other)

    def test_incompatible_snapshots_rejected(self, cold_main, cold_cfg):
        from dataclasses import replace
        short = solver.run(replace(cold_cfg, t_final=0.5))
        with pytest.raises(ValueError, match="snapshot"):
            oracle.compare(cold_main, short)

    def test_non_nested_grids_rejected(self, cold_main, cold_cfg):
        from dataclasses import replace
        odd = solver.run(replace(cold_cfg, mesh=Mesh(half_length=10.0, n=80)))
        with pytest.raises(ValueError, match="nested"):
            oracle.compare(cold_main, odd)


class TestConvergenceOrder:
    def test_exact_first_order_synthetic(self):
        dxs = [0.1, 0.05, 0.025]
        errs = [0.7 * dx for dx in dxs]
        assert oracle.convergence_order(dxs, errs) == pytest.approx(1.0, abs=0.05)

    def test_second_order_synthetic(self):
        dxs = [0.1, 0.05, 0.025]
        errs = [3.0 * dx**2 for dx in dxs]
        assert oracle.convergence_order(dxs, errs) == pytest.approx(2.0, abs=0.05)

    def test_rejects_degenerate_input(self):
        with pytest.raises(ValueError):
            oracle.convergence_order([0.1], [0.1])
        with pytest.raises(ValueError):
            oracle.convergence_order([0.1, 0.05], [0.0, 0.0])


class TestMollificationStudy:
    def test_inactive_reaction_gives_identical_runs(self):
        # reactant is absent and the step-size caps bind away from the
        # reaction bound, so every run is bit-identical: differences all zero
        cfg = config.scenario_config(
            "cold-bump", width=1.0, t_final=0.4, snapshot_every=0.2,
            mesh=Mesh(half_length=10.0, n=64))
        from dataclasses import replace
        from combustion1d.grid import StepControl
        cfg = replace(cfg, ctrl=StepControl(dt_max=0.005))
        rows = oracle.mollification_study(cfg, etas=[0.1, 0.05])
        assert [r.eta for r in rows] == [0.1, 0.05, 0.0]
        for row in rows:
            assert row.diff_to_next == 0.0
            assert row.diff_to_raw == 0.0

    def test_rejects_bad_etas(self, cold_cfg):
        with pytest.raises(ValueError):
            oracle.mollification_study(cold_cfg, etas=[0.05, 0.1])
        with pytest.raises(ValueError):
            oracle.mollification_study(cold_cfg, etas=[0.1, -0.05])


def test_state_distance_zero_iff_equal(cold_main):
    s = cold_main.final
    assert oracle.state_distance(s, s, cold_main.mesh) == 0.0
    other = s.copy()
    other.theta[5] += 0.1
    assert oracle.state_distance(s, other, cold_main.mesh) > 0.0
