import numpy as np
import pytest

from combustion1d import config
from combustion1d.config import ConfigError, RunConfig, parse_config, render_config
from combustion1d.grid import Mesh


MINIMAL = """
[initial]
scenario = equilibrium
"""


class TestParsing:
    def test_minimal_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.scenario == "equilibrium"
        assert cfg.mesh.n == 256
        assert cfg.fluid.q == 0.5
        assert cfg.ctrl.safety == 0.5

    def test_roundtrip_identity(self):
        cfg = parse_config(MINIMAL)
        echoed = render_config(cfg)
        again = parse_config(echoed)
        assert again == cfg
        assert render_config(again) == echoed

    def test_roundtrip_hotspot_with_overrides(self):
        text = """
[fluid]
q = 0.75
[initial]
scenario = hot-spot
amp = 1.25
[mesh]
n = 128
half_length = 15.0
"""
        cfg = parse_config(text)
        assert cfg.fluid.q == 0.75
        assert cfg.amp == 1.25
        assert cfg.z_level == 1.0  # scenario fallback
        assert parse_config(render_config(cfg)) == cfg

    def test_unknown_section_and_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[fluid]\nviscosity = 2\n\n[turbo]\nboost = 1\n")
        msgs = "\n".join(err.value.errors)
        assert "turbo" in msgs
        assert "fluid.viscosity" in msgs

    def test_negative_q_names_the_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[fluid]\nq = -1\n")
        assert any("fluid.q" in e and "positive" in e for e in err.value.errors)

    def test_reactant_amplitude_cites_range(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[initial]\nscenario = hot-spot\nz_level = 1.5\n")
        assert any("[0, 1]" in e for e in err.value.errors)

    def test_reports_every_violation_at_once(self):
        bad = """
[fluid]
q = -1
mu = 0
[mesh]
n = 4
[step]
safety = 2
"""
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        msgs = err.value.errors
        assert len(msgs) >= 4
        joined = " ".join(msgs)
        for frag in ("fluid.q", "fluid.mu", "mesh.n", "step.safety"):
            assert frag in joined

    def test_boundary_mesh_consistency(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[boundary]\nkind = half-line-insulated\n")
        assert any("mesh.domain" in e for e in err.value.errors)
        cfg = parse_config("[boundary]\nkind = half-line-insulated\n"
                           "[mesh]\ndomain = half-line\n"
                           "[initial]\nscenario = equilibrium\n")
        assert cfg.bc.kind == "half-line-insulated"
        assert cfg.mesh.kind == "half-line"

    def test_syntax_error(self):
        with pytest.raises(ConfigError) as err:
            parse_config("not an ini file at all [")
        assert any("syntax" in e for e in err.value.errors)

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[initial]\nscenario = warp-core\n")
        assert any("scenario" in e for e in err.value.errors)

    def test_theta_cap_vs_ignition(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[reaction]\ntheta_ign = 3.0\ntheta_cap = 2.0\n")
        assert any("theta_cap" in e for e in err.value.errors)


class TestDictRoundtrip:
    def test_config_dict_reconstructs(self):
        cfg = config.scenario_config("hot-spot", amp=1.3,
                                     mesh=Mesh(half_length=15.0, n=128))
        clone = config.config_from_dict(config.config_dict(cfg))
        assert clone == cfg


class TestScenarios:
    def test_equilibrium(self, mesh64):
        cfg = config.scenario_config("equilibrium", mesh=mesh64)
        state = config.initial_state(cfg)
        assert np.all(state.u == 1.0)
        assert np.all(state.v == 0.0)
        assert np.all(state.theta == 1.0)
        assert np.all(state.z == 0.0)

    def test_cold_bump_stays_below_ignition(self, mesh64):
        cfg = config.scenario_config("cold-bump", width=1.0, mesh=mesh64)
        state = config.initial_state(cfg)
        assert state.theta.max() < cfg.rate.theta_ign
        assert np.all(state.z == 0.0)

    def test_cold_bump_rejects_hot_amplitude(self, mesh64):
        cfg = config.scenario_config("cold-bump", amp=0.5, width=1.0, mesh=mesh64)
        with pytest.raises(ConfigError, match="ignition"):
            config.initial_state(cfg)

    def test_hot_spot_crosses_ignition(self, mesh64):
        cfg = config.scenario_config("hot-spot", mesh=mesh64, support_radius=6.0)
        state = config.initial_state(cfg)
        assert state.theta.max() > cfg.rate.theta_ign
        assert 0.0 <= state.z.min() and state.z.max() <= 1.0
        assert state.z.max() == pytest.approx(cfg.z_level)

    def test_hot_spot_needs_crossing(self, mesh64):
        cfg = config.scenario_config("hot-spot", amp=0.1, mesh=mesh64)
        with pytest.raises(ConfigError, match="ignition"):
            config.initial_state(cfg)

    def test_compression_profile(self, mesh64):
        cfg = config.scenario_config("compression", width=1.0,
                                     support_radius=6.5, mesh=mesh64)
        state = config.initial_state(cfg)
        assert state.v[0] == 0.0 and state.v[-1] == 0.0
        mid = mesh64.n // 2
        assert state.v[mid - 5] > 0.0 > state.v[mid + 5]  # squeeze toward center

    def test_far_field_support_validation(self):
        mesh = Mesh(half_length=6.0, n=64)
        cfg = config.scenario_config("cold-bump", width=2.0, mesh=mesh)
        with pytest.raises(ConfigError, match="support radius"):
            config.initial_state(cfg)

    def test_file_scenario_roundtrip(self, tmp_path, mesh64):
        src = config.scenario_config("hot-spot", mesh=mesh64, support_radius=6.0)
        state = config.initial_state(src)
        path = tmp_path / "profile.npz"
        np.savez(path, u=state.u, v=state.v, theta=state.theta, z=state.z)
        cfg = config.scenario_config("file", profile_path=str(path), mesh=mesh64)
        loaded = config.initial_state(cfg)
        assert np.array_equal(loaded.u, state.u)
        assert np.array_equal(loaded.v, state.v)

    def test_file_scenario_resamples(self, tmp_path, mesh64):
        src = config.scenario_config("hot-spot", mesh=mesh64, support_radius=6.0)
        state = config.initial_state(src)
        path = tmp_path / "profile.npz"
        np.savez(path, u=state.u, v=state.v, theta=state.theta, z=state.z)
        fine = Mesh(half_length=10.0, n=128)
        cfg = config.scenario_config("file", profile_path=str(path), mesh=fine)
        loaded = config.initial_state(cfg)
        assert len(loaded.u) == 128
        assert loaded.theta.max() == pytest.approx(state.theta.max(), rel=1e-2)

    def test_file_scenario_requires_path(self):
        with pytest.raises(ConfigError, match="profile_path"):
            parse_config("[initial]\nscenario = file\n")

    def test_scenario_config_rejects_unknown(self):
        with pytest.raises(ConfigError):
            config.scenario_config("explosion")

    def test_scenario_help_lists_all(self):
        text = config.scenario_help()
        for name in config.SCENARIOS:
            assert name in text
