import json
import math
import os

import numpy as np
import pytest

from shearmhd import cli
from shearmhd.diagnostics import gevrey_norm
from shearmhd.experiments import (ConfigError, ExperimentConfig,
                                  build_initial_state, gevrey_random_data,
                                  run, single_mode_state)
from shearmhd.io import (config_hash, read_state_snapshot,
                         write_state_snapshot)
from shearmhd.spectral import Grid, l2_norm
from shearmhd.unknowns import divergence_residual, hminus1_norm
from shearmhd.weights import WeightParams

PAR = WeightParams(rho=0.004, lam0=1.1, s=0.6)


class TestConfig:
    def test_roundtrip_identity(self):
        cfg = ExperimentConfig.from_dict({"experiment": "resonance_chain",
                                          "chain": {"c0": 0.3}})
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg
        assert config_hash(again.to_dict()) == config_hash(cfg.to_dict())

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            ExperimentConfig.from_dict({"experimnet": "weights_audit"})
        with pytest.raises(ConfigError, match="unknown"):
            ExperimentConfig.from_dict({"grid": {"NX": 8}})

    def test_bad_experiment(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"experiment": "bogus"})

    def test_eps_below_c0_enforced(self):
        with pytest.raises(ConfigError, match="eps < c0"):
            ExperimentConfig.from_dict({
                "experiment": "nonlinear_ideal",
                "initial": {"eps": 0.2},
            })

    def test_dissipative_requires_dissipation(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"experiment": "dissipative"})


class TestInitialData:
    def test_gevrey_norm_exact(self):
        g = Grid(32, 32, 1.0)
        st = gevrey_random_data(g, PAR, seed=5, eps=1e-3, lam1=1.2)
        norm = gevrey_norm(g, [st.v[0], st.v[1], st.b[0], st.b[1]], 1.2,
                           PAR.s, PAR.N)
        assert abs(norm - 1e-3) <= 1e-15

    def test_divergence_and_mean_free(self):
        g = Grid(32, 32, 1.0)
        st = gevrey_random_data(g, PAR, seed=5, eps=1e-3, lam1=1.2)
        assert divergence_residual(st) <= 1e-12
        assert st.v[0][0, 0] == 0.0 and st.b[0][0, 0] == 0.0

    def test_deterministic(self):
        g = Grid(16, 16, 1.0)
        a = gevrey_random_data(g, PAR, seed=9, eps=1e-3, lam1=1.2)
        b = gevrey_random_data(g, PAR, seed=9, eps=1e-3, lam1=1.2)
        assert np.array_equal(a.v, b.v) and np.array_equal(a.b, b.b)

    def test_hminus1_gate_quantities(self):
        g = Grid(32, 32, 1.0)
        st = gevrey_random_data(g, PAR, seed=5, eps=1e-3, lam1=1.2)
        hm1 = hminus1_norm(g, st.v[0], st.v[1], st.b[0], st.b[1])
        assert 0 < hm1 < 1e-3  # below the Gevrey norm, above zero

    def test_single_mode(self):
        g = Grid(16, 16, 1.0)
        st = single_mode_state(g, 2, 1, 1e-4, "b")
        assert np.isclose(l2_norm(g, st.b[0], st.b[1]), 1e-4)
        assert np.all(st.v == 0)
        assert divergence_residual(st) <= 1e-12

    def test_file_kind(self, tmp_path):
        g = Grid(16, 16, 1.0)
        st = single_mode_state(g, 1, 0, 1e-3, "v")
        path = str(tmp_path / "snap.txt")
        write_state_snapshot(path, st)
        cfg = ExperimentConfig.from_dict({
            "experiment": "nl_partition",
            "grid": {"Nx": 16, "Ny": 16, "Ly": 1.0},
            "params": {"rho": 0.004, "lam0": 1.1},
            "initial": {"kind": "file", "path": path},
        })
        st2 = build_initial_state(cfg, g, PAR)
        assert np.allclose(st2.v, st.v)


class TestSnapshots:
    def test_roundtrip(self, tmp_path):
        g = Grid(16, 16, 2.0)
        st = gevrey_random_data(g, PAR, seed=1, eps=1e-3, lam1=1.2)
        st.t = 3.25
        path = str(tmp_path / "state.txt")
        write_state_snapshot(path, st, extra={"note": "test"})
        back = read_state_snapshot(path)
        assert back.t == 3.25
        assert back.grid.Ly == 2.0
        assert np.max(np.abs(back.v - st.v)) <= 1e-16
        assert np.max(np.abs(back.b - st.b)) <= 1e-16

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("nope\n")
        with pytest.raises(ValueError):
            read_state_snapshot(str(path))

    def test_physical_export(self, tmp_path):
        from shearmhd.io import export_physical_csv
        g = Grid(8, 8, 1.0)
        st = single_mode_state(g, 1, 0, 1e-3, "v")
        path = tmp_path / "phys.csv"
        export_physical_csv(str(path), st)
        lines = [l for l in path.read_text().splitlines()
                 if not l.startswith("#")]
        assert lines[0] == "x,y,v1,v2,b1,b2"
        assert len(lines) == 1 + 64


class TestRunner:
    def test_resonance_chain_artifacts(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "experiment": "resonance_chain",
            "chain": {"c0": 0.5, "etas": [50.0, 200.0], "bridge": False},
        })
        payload = run(cfg, str(tmp_path / "a"))
        assert payload["summary"]["fit"]["r_squared"] > 0.9
        for name in ("config.json", "diagnostics.csv", "summary.json"):
            assert (tmp_path / "a" / name).exists()
        with open(tmp_path / "a" / "config.json") as fh:
            stored = json.load(fh)
        assert stored["config_sha256"] == config_hash(cfg.to_dict())

    def test_byte_identical_outputs(self, tmp_path):
        data = {"experiment": "weights_audit",
                "params": {"rho": 0.05, "lam0": 13.5},
                "audit": {"eta_max": 500.0, "n_eta": 8, "seed": 3}}
        run(ExperimentConfig.from_dict(data), str(tmp_path / "r1"))
        run(ExperimentConfig.from_dict(data), str(tmp_path / "r2"))
        b1 = (tmp_path / "r1" / "diagnostics.csv").read_bytes()
        b2 = (tmp_path / "r2" / "diagnostics.csv").read_bytes()
        assert b1 == b2

    def test_nl_partition_runner(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "experiment": "nl_partition",
            "grid": {"Nx": 16, "Ny": 16, "Ly": 1.0},
            "params": {"rho": 0.004, "lam0": 1.1},
            "initial": {"kind": "gevrey_random", "seed": 2, "eps": 1e-2,
                        "lam1": 1.2},
        })
        payload = run(cfg, str(tmp_path / "p"))
        assert payload["summary"]["passes"]

    def test_trajectory_runner_small(self, tmp_path):
        cfg = ExperimentConfig.from_dict({
            "experiment": "nonlinear_ideal",
            "grid": {"Nx": 16, "Ny": 16, "Ly": 1.0},
            "evolution": {"dt": 0.02, "t_end": 6.0},
            "initial": {"kind": "gevrey_random", "seed": 2, "eps": 1e-3,
                        "lam1": 1.2},
            "monitor": {"lam2": 1.0, "sample_dt": 0.5, "hminus1_gate_K": 0.25},
            "output": {"snapshots": 5},
        })
        payload = run(cfg, str(tmp_path / "t"))
        # time column strictly increasing
        with open(tmp_path / "t" / "diagnostics.csv") as fh:
            lines = [l for l in fh if not l.startswith("#")][1:]
        times = [float(l.split(",")[0]) for l in lines]
        assert all(a < b for a, b in zip(times, times[1:]))
        assert any(name.startswith("snapshot_")
                   for name in os.listdir(tmp_path / "t"))
        assert payload["summary"]["growth_fit"]["r_squared"] > 0.0


class TestCLI:
    def test_validate_ok(self, tmp_path, capsys):
        cfile = tmp_path / "c.json"
        cfile.write_text(json.dumps({"experiment": "weights_audit"}))
        assert cli.main(["validate", "--config", str(cfile)]) == 0

    def test_validate_bad(self, tmp_path):
        cfile = tmp_path / "c.json"
        cfile.write_text(json.dumps({"experiment": "nope"}))
        assert cli.main(["validate", "--config", str(cfile)]) == 1

    def test_missing_file(self):
        assert cli.main(["validate", "--config", "/does/not/exist.json"]) == 1

    def test_run_resonance(self, tmp_path):
        cfile = tmp_path / "c.json"
        cfile.write_text(json.dumps({
            "experiment": "resonance_chain",
            "chain": {"c0": 0.5, "etas": [50.0, 200.0], "bridge": False}}))
        rc = cli.main(["run", "--config", str(cfile),
                       "--out", str(tmp_path / "out")])
        assert rc == 0
        assert (tmp_path / "out" / "summary.json").exists()

    def test_seed_override_changes_hash(self, tmp_path):
        cfile = tmp_path / "c.json"
        cfile.write_text(json.dumps({
            "experiment": "nl_partition",
            "grid": {"Nx": 16, "Ny": 16, "Ly": 1.0},
            "params": {"rho": 0.004, "lam0": 1.1},
            "initial": {"kind": "gevrey_random", "seed": 2, "eps": 1e-2,
                        "lam1": 1.2}}))
        assert cli.main(["run", "--config", str(cfile), "--seed", "5",
                         "--out", str(tmp_path / "s5")]) == 0
        with open(tmp_path / "s5" / "config.json") as fh:
            stored = json.load(fh)
        assert stored["config"]["initial"]["seed"] == 5

    def test_audit_subcommand(self, tmp_path):
        rc = cli.main(["audit", "--out", str(tmp_path / "aud"),
                       "--eta-max", "500", "--samples", "8"])
        assert rc == 0
        assert (tmp_path / "aud" / "diagnostics.csv").exists()
