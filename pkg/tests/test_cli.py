import json
import math
import os

import pytest

from levy_homogenize import cli

FLAT = {"medium": {"period": 1.0}, "phase": 0.0}
HET_MEDIUM = {"period": 1.0,
              "fourier_V": [[1, 0.3, 0.1]],
              "fourier_loga": [[1, 0.2, -0.1]]}
KERNEL = {"family": "linear", "C": 1.0, "alpha": 1.0}


def run(tmp_path, sub, cfg, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    return cli.main([sub, str(cfg_path), "--out", str(out), *extra]), out


class TestExitContract:
    def test_missing_config_file(self, tmp_path, capsys):
        rc = cli.main(["validate", str(tmp_path / "nope.json")])
        assert rc == 2
        assert "config error" in capsys.readouterr().err

    def test_invalid_json_reports_location(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"medium": }')
        rc = cli.main(["validate", str(p)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "bad.json:1:" in err

    def test_bad_medium_section(self, tmp_path, capsys):
        rc, _ = run(tmp_path, "validate",
                    {"medium": {"period": -1.0}})
        assert rc == 2

    def test_kernel_required(self, tmp_path):
        rc, _ = run(tmp_path, "simulate", FLAT)
        assert rc == 2

    def test_unknown_functional(self, tmp_path):
        cfg = {**FLAT, "kernel": KERNEL, "f": "nope",
               "eps_list": [0.4], "n_paths": 5, "t": 0.1}
        rc, _ = run(tmp_path, "ergodic", cfg)
        assert rc == 2

    def test_validate_passes_on_sound_config(self, tmp_path):
        rc, out = run(tmp_path, "validate",
                      {"medium": HET_MEDIUM, "kernel": KERNEL})
        assert rc == 0
        rep = json.loads((out / "validate.json").read_text())
        assert rep["passed"]


class TestCorrectorCommand:
    def test_effective_coefficient_cosine_profile(self, tmp_path, capsys):
        from levy_homogenize.medium import cosine_profile_log_coeffs
        cfg = {"medium": {"period": 1.0,
                          "fourier_loga": [list(h) for h in
                                           cosine_profile_log_coeffs(0.5)]},
               "phase": 0.0, "kernel": KERNEL,
               "eps_list": [0.4, 0.2], "grid_n": 512}
        rc, out = run(tmp_path, "corrector", cfg)
        assert rc == 0
        rep = json.loads((out / "corrector.json").read_text())
        assert abs(rep["A"] - math.sqrt(0.75)) < 1e-8
        assert "A = " in capsys.readouterr().out
        lines = (out / "corrector_sweep.csv").read_text().splitlines()
        assert lines[0] == "epsilon,lambda,A,e2u2,Bd,Bj,deviation"
        assert len(lines) == 3


class TestExponentCommand:
    def test_explicit_triplet(self, tmp_path):
        cfg = {"medium": {"period": 1.0},
               "triplet": {"A": 2.0, "theta_bar": 0.0, "alpha": 1.0},
               "u_grid": [-1.0, 1.0, 0.5]}
        rc, out = run(tmp_path, "exponent", cfg)
        assert rc == 0
        lines = (out / "exponent.csv").read_text().splitlines()
        assert lines[0] == "u,re_phi,im_phi"
        table = {float(r.split(",")[0]): float(r.split(",")[1])
                 for r in lines[1:]}
        assert table[1.0] == pytest.approx(-1.0)
        assert table[0.0] == 0.0
        rep = json.loads((out / "exponent.json").read_text())
        assert rep["compensator_slope"] == pytest.approx(2.0)


class TestEcfCommand:
    def test_brownian_limit_passes(self, tmp_path):
        cfg = {**FLAT, "kernel": {"family": "linear", "C": 1e-12,
                                  "alpha": 1.0},
               "t": 0.5, "n_paths": 500,
               "sim": {"eps": 0.5, "jump_floor": 1.0},
               "u_grid": [-2.0, 2.0, 0.5]}
        rc, out = run(tmp_path, "ecf", cfg)
        assert rc == 0
        rep = json.loads((out / "ecf.json").read_text())
        assert rep["passed"]
        lines = (out / "ecf.csv").read_text().splitlines()
        assert lines[0] == "u,ecf_re,ecf_im,theory_re,theory_im,se"


class TestDeterminism:
    CFG = {"medium": HET_MEDIUM, "kernel": KERNEL, "n_paths": 16,
           "sim": {"eps": 0.4, "t_max": 0.25}}

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        rc1, out1 = run(tmp_path / "w1", "simulate", self.CFG,
                        "--seed", "5", "--workers", "1")
        rc2, out2 = run(tmp_path / "w2", "simulate", self.CFG,
                        "--seed", "5", "--workers", "3")
        assert rc1 == rc2 == 0
        for name in ("ensemble.csv", "jumps_log.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        _, out1 = run(tmp_path / "s1", "simulate", self.CFG, "--seed", "1")
        _, out2 = run(tmp_path / "s2", "simulate", self.CFG, "--seed", "2")
        assert ((out1 / "ensemble.csv").read_bytes()
                != (out2 / "ensemble.csv").read_bytes())

    def test_env_var_sets_workers(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LEVY_HOMOGENIZE_WORKERS", "2")
        rc, out = run(tmp_path, "simulate", self.CFG, "--seed", "5")
        assert rc == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["workers"] == 2


class TestManifest:
    def test_fields_complete(self, tmp_path):
        rc, out = run(tmp_path, "validate",
                      {"medium": HET_MEDIUM, "kernel": KERNEL},
                      "--seed", "11")
        assert rc == 0
        man = json.loads((out / "manifest.json").read_text())
        assert man["subcommand"] == "validate"
        assert man["seed"] == 11
        assert man["passed"] is True
        assert set(man["versions"]) == {"python", "numpy", "scipy"}
        assert man["wall_time_s"] >= 0.0
        assert man["config"]["kernel"] == KERNEL
