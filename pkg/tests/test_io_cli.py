import json
import math

import numpy as np
import pytest

from kslearn.bspline import model_from_dict
from kslearn.cli import main
from kslearn.config import (
    PRESETS,
    SCALES,
    BasisSpec,
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    load_config,
    preset_config,
    save_config,
)
from kslearn.data import load_dataset


def write_config(path, **overrides):
    cfg = dict(
        mode="deterministic", d=1, chi=0.5, r_c=0.01, N=3, M=2, T=0.02,
        dt_obs=0.01, tau=1e-3, seed=0,
    )
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return cfg


class TestConfig:
    def test_defaults_mirror_common_parameters(self):
        cfg = ExperimentConfig()
        assert (cfg.T, cfg.dt_obs, cfg.tau) == (0.2, 0.01, 1e-4)
        assert (cfg.N, cfg.M, cfg.P) == (50, 500, 400)
        assert cfg.h == 0.01 and cfg.eta == 0.01
        assert cfg.basis.tol == 0.01 and cfg.basis.max_iter == 6

    def test_stochastic_default_epsilon(self):
        cfg = ExperimentConfig(mode="stochastic", d=2, r_c=None)
        assert cfg.eps == 0.01

    def test_round_trip(self, tmp_path):
        cfg = ExperimentConfig(mode="stochastic", d=2, r_c=None, chi=2.0,
                               basis=BasisSpec(kind="adaptive", initial_count=5))
        save_config(cfg, tmp_path / "c.json")
        back = load_config(tmp_path / "c.json")
        assert back == cfg

    def test_bad_mode_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"mode": "quantum"})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"modee": "deterministic"})

    def test_presets_match_reference_sweeps(self):
        assert PRESETS["1d"]["chis"] == (0.35, 0.55, 0.75)
        assert PRESETS["1d"]["r_c"] == 0.01 and PRESETS["1d"]["knots"] == 30
        assert PRESETS["2d"]["r_c"] == 0.05 and PRESETS["2d"]["knots"] == 20
        assert PRESETS["3d"]["knots"] == 25
        assert PRESETS["4d"]["chis"] == (1.0,)
        assert PRESETS["s2d"]["eps"] == 0.01 and PRESETS["s2d"]["knots"] == 30
        assert SCALES["desk"] == dict(M=50, N=20, T=0.1)
        assert SCALES["full"] == dict(M=500, N=50, T=0.2)

    def test_preset_config_desk(self):
        cfg = preset_config("2d", 2.0, "desk")
        assert cfg.M == 50 and cfg.N == 20 and cfg.T == 0.1
        assert cfg.chi == 2.0 and cfg.r_c == 0.05


class TestSimulateCommand:
    def test_writes_dataset(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        write_config(cfgfile)
        out = tmp_path / "data"
        assert main(["simulate", "--config", str(cfgfile), "--out", str(out)]) == 0
        ds = load_dataset(out)
        assert ds.frames.shape == (2, 3, 3, 1)

    def test_rerun_identical_files(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        write_config(cfgfile)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfgfile), "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(cfgfile), "--out", str(b)]) == 0
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()

    def test_bad_config_exits_2(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"mode": "nope"}))
        assert main(["simulate", "--config", str(cfgfile), "--out", str(tmp_path / "x")]) == 2

    def test_invalid_json_exits_2(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text("{not json")
        assert main(["simulate", "--config", str(cfgfile), "--out", str(tmp_path / "x")]) == 2


@pytest.fixture(scope="module")
def sde_data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfgfile = root / "cfg.json"
    cfgfile.write_text(json.dumps(dict(
        mode="stochastic", d=2, chi=1.0, eps=0.01, N=6, M=3, T=0.05,
        dt_obs=0.01, tau=1e-3, eta=0.01, seed=1,
    )))
    out = root / "data"
    assert main(["simulate", "--config", str(cfgfile), "--out", str(out)]) == 0
    return out


class TestLearnCommand:
    def test_uniform_knots(self, sde_data_dir, tmp_path):
        model_path = tmp_path / "model.json"
        code = main(["learn", "--data", str(sde_data_dir), "--knots", "8",
                     "--out", str(model_path)])
        assert code == 0
        model = model_from_dict(json.loads(model_path.read_text()))
        assert model.partition.breakpoints.size == 8
        ds = load_dataset(sde_data_dir)
        lo, hi = ds.distance_range()
        assert model.partition.a == pytest.approx(lo)
        assert model.partition.b == pytest.approx(hi)

    def test_adaptive_with_infinite_tol_returns_initial(self, sde_data_dir, tmp_path):
        model_path = tmp_path / "model.json"
        log_path = tmp_path / "refine.jsonl"
        code = main(["learn", "--data", str(sde_data_dir), "--knots", "adaptive",
                     "--tol", "inf", "--initial-count", "5",
                     "--out", str(model_path), "--log", str(log_path)])
        assert code == 0
        model = model_from_dict(json.loads(model_path.read_text()))
        assert model.partition.breakpoints.size == 5
        assert log_path.exists()

    def test_missing_data_dir_exits_4_no_output(self, tmp_path):
        model_path = tmp_path / "model.json"
        code = main(["learn", "--data", str(tmp_path / "missing"), "--knots", "8",
                     "--out", str(model_path)])
        assert code == 4
        assert not model_path.exists()

    def test_bad_knots_exits_2(self, sde_data_dir, tmp_path):
        code = main(["learn", "--data", str(sde_data_dir), "--knots", "many",
                     "--out", str(tmp_path / "m.json")])
        assert code == 2


class TestEvaluateCommand:
    def test_truth_model_has_tiny_error(self, sde_data_dir, tmp_path):
        model_path = tmp_path / "truth.json"
        model_path.write_text(json.dumps(
            {"profile": {"kind": "epsilon", "chi": 1.0, "eps": 0.01}}
        ))
        out = tmp_path / "eval"
        code = main(["evaluate", "--data", str(sde_data_dir), "--model", str(model_path),
                     "--out", str(out), "--bins", "50"])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["traj_err_rel"] <= 1e-10
        assert {"traj_err_rel", "profile_err_rel", "chi", "d", "mode",
                "n_breakpoints", "r_c_or_eps", "M", "N", "L", "seed"} <= set(report)

    def test_csv_bundle(self, sde_data_dir, tmp_path):
        model_path = tmp_path / "truth.json"
        model_path.write_text(json.dumps(
            {"profile": {"kind": "epsilon", "chi": 1.0, "eps": 0.01}}
        ))
        out = tmp_path / "eval"
        bins = 73
        assert main(["evaluate", "--data", str(sde_data_dir), "--model", str(model_path),
                     "--out", str(out), "--bins", str(bins)]) == 0
        curve = (out / "profile_curve.csv").read_text().strip().split("\n")
        assert curve[0] == "r,phi_true,phi_learned"
        assert len(curve) - 1 == bins + 1
        density = (out / "density.csv").read_text().strip().split("\n")
        assert density[0] == "r_left,r_right,mass"
        assert len(density) - 1 == bins
        masses = [float(row.split(",")[2]) for row in density[1:]]
        assert math.isclose(sum(masses), 1.0, abs_tol=1e-9)
        traj = (out / "recon_traj_0000.csv").read_text().strip().split("\n")
        ds = load_dataset(sde_data_dir)
        assert len(traj) - 1 == (ds.L + 1) * ds.N

    def test_report_json_path(self, sde_data_dir, tmp_path):
        model_path = tmp_path / "truth.json"
        model_path.write_text(json.dumps(
            {"profile": {"kind": "epsilon", "chi": 1.0, "eps": 0.01}}
        ))
        target = tmp_path / "res" / "myreport.json"
        assert main(["evaluate", "--data", str(sde_data_dir), "--model", str(model_path),
                     "--out", str(target), "--bins", "20"]) == 0
        assert target.exists()
        assert (tmp_path / "res" / "density.csv").exists()


class TestReproduceCommand:
    def test_mini_scale_sweep(self, tmp_path, capsys):
        out = tmp_path / "rep"
        code = main(["reproduce", "--table", "s2d", "--scale", "mini",
                     "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["table"] == "s2d"
        assert [e["chi"] for e in summary["entries"]] == [1.0, 2.0, 4.0]
        for e in summary["entries"]:
            assert "traj_err_rel" in e and "profile_err_rel" in e
        printed = capsys.readouterr().out
        assert "Err_traj_rel" in printed and "Err_phi_rel" in printed
        entry = out / "chi_1"
        for name in ("model.json", "report.json", "profile_curve.csv",
                     "density.csv", "recon_traj_0000.csv"):
            assert (entry / name).exists()
        assert (entry / "data" / "metadata.json").exists()

    def test_chi_filter(self, tmp_path):
        out = tmp_path / "rep"
        code = main(["reproduce", "--table", "1d", "--scale", "mini",
                     "--chi", "0.55", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert [e["chi"] for e in summary["entries"]] == [0.55]

    def test_unknown_chi_exits_2(self, tmp_path):
        assert main(["reproduce", "--table", "1d", "--scale", "mini",
                     "--chi", "9.9", "--out", str(tmp_path / "x")]) == 2


class TestNumericFailureExit:
    def test_corrupt_dataset_exits_3(self, tmp_path):
        # a non-finite coordinate in the stored data surfaces as a numeric
        # failure during reconstruction
        cfgfile = tmp_path / "cfg.json"
        write_config(cfgfile, mode="deterministic", d=1, r_c=0.01)
        data = tmp_path / "data"
        assert main(["simulate", "--config", str(cfgfile), "--out", str(data)]) == 0
        traj = data / "traj_0000.csv"
        lines = traj.read_text().split("\n")
        parts = lines[1].split(",")
        parts[-1] = "inf"
        lines[1] = ",".join(parts)
        traj.write_text("\n".join(lines))
        model_path = tmp_path / "truth.json"
        model_path.write_text(json.dumps(
            {"profile": {"kind": "cutoff", "d": 1, "chi": 0.5, "r_c": 0.01}}
        ))
        code = main(["evaluate", "--data", str(data), "--model", str(model_path),
                     "--out", str(tmp_path / "eval"), "--bins", "10"])
        assert code == 3


class TestDumpSystem:
    def test_learn_writes_diagnostic_system(self, sde_data_dir, tmp_path):
        sys_path = tmp_path / "system.json"
        code = main(["learn", "--data", str(sde_data_dir), "--knots", "6",
                     "--out", str(tmp_path / "m.json"),
                     "--dump-system", str(sys_path)])
        assert code == 0
        payload = json.loads(sys_path.read_text())
        n = payload["n"]
        assert n == 6 - 1 + 3
        assert len(payload["A"]) == n * n and len(payload["b"]) == n


class TestOutputRootOverride:
    def test_relative_out_redirected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("KSLEARN_OUT_ROOT", str(tmp_path / "root"))
        cfgfile = tmp_path / "cfg.json"
        write_config(cfgfile)
        assert main(["simulate", "--config", str(cfgfile), "--out", "rel/data"]) == 0
        assert (tmp_path / "root" / "rel" / "data" / "metadata.json").exists()
