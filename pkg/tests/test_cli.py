import json
import subprocess
import sys
from pathlib import Path

import pytest

from parawork.cli import main
from parawork.config import ConfigError, RunConfig, load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def prs_cfg(**grid):
    g = {"z0": 0.001, "zf": 1.0, "n": 1, "m": 1, "k_max": 6}
    g.update(grid)
    return {"mechanism": {"type": "prs3", "params": {"r_a": 0.62, "l": 1.0, "gamma": 0.0}}, "grid": g}


class TestConfig:
    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.name)
    def test_shipped_configs_round_trip(self, path):
        cfg = load_config(path)
        again = RunConfig.from_dict(json.loads(cfg.dumps()))
        assert again == cfg
        assert again.dumps() == cfg.dumps()
        cfg.build_mechanism()

    def test_rejects_gamma_above_right_angle(self, tmp_path):
        bad = prs_cfg()
        bad["mechanism"]["params"]["gamma"] = 1.6
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, bad))

    @pytest.mark.parametrize("mutate", [
        lambda d: d["grid"].pop("k_max"),
        lambda d: d["grid"].update(n=0),
        lambda d: d["grid"].update(zf=0.0),
        lambda d: d.update(extra=1),
        lambda d: d["mechanism"].update(type="hexapod"),
        lambda d: d["grid"].update(k_max="big"),
    ])
    def test_rejects_invalid(self, tmp_path, mutate):
        d = prs_cfg()
        mutate(d)
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, d))

    def test_tmech_rho_length(self, tmp_path):
        d = {"mechanism": {"type": "tmech", "params": {"rho": [1, 1, 1]}},
             "grid": {"z0": 0, "zf": 1, "n": 1, "m": 1, "k_max": 2}}
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, d))


class TestCli:
    def test_workspace_rows_and_determinism(self, tmp_path):
        cfg = write(tmp_path, prs_cfg())
        assert main(["workspace", "-c", cfg, "-o", str(tmp_path / "a"), "--jobs", "1"]) == 0
        assert main(["workspace", "-c", cfg, "-o", str(tmp_path / "b"), "--jobs", "2"]) == 0
        rows = (tmp_path / "a" / "boundary.csv").read_text().splitlines()
        assert rows[0] == "i,j,z,epsilon,psi,theta,cond"
        assert len(rows) == 1 + 4
        for name in ("boundary.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["volume"] > 0 and summary["mode"] == "cond"

    def test_config_error_exit(self, tmp_path):
        bad = prs_cfg()
        bad["mechanism"]["params"]["gamma"] = 2.0
        assert main(["workspace", "-c", write(tmp_path, bad)]) == 2
        assert main(["workspace", "-c", str(tmp_path / "missing.json")]) == 2

    def test_jacobian_stdout(self, tmp_path, capsys):
        assert main(["jacobian", "-c", write(tmp_path, prs_cfg()), "--pose", "0.5,0.1,-0.05"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["J_dh"]) == 3 and out["cond"] >= 1.0

    def test_jacobian_file_tmech_has_k(self, tmp_path):
        cfg = json.loads((CONFIGS / "tmech_home.json").read_text())
        path = write(tmp_path, cfg)
        assert main(["jacobian", "-c", path, "--pose", "0.6,0.2,0.1", "-o", str(tmp_path / "j")]) == 0
        out = json.loads((tmp_path / "j" / "jacobian.json").read_text())
        assert "k" in out and out["pose"]["z"] == pytest.approx(0.6 * 90.0)

    def test_jacobian_unreachable_and_singular(self, tmp_path):
        cfg = write(tmp_path, prs_cfg())
        assert main(["jacobian", "-c", cfg, "--pose", "3,0,0"]) == 4
        tm = write(tmp_path, json.loads((CONFIGS / "tmech_home.json").read_text()), "tm.json")
        assert main(["jacobian", "-c", tm, "--pose", "1,0,0"]) == 3
        assert main(["jacobian", "-c", cfg, "--pose", "a,b"]) == 2

    def test_optimize_outputs(self, tmp_path):
        d = prs_cfg(n=2, m=4)
        d["mechanism"]["params"].update(r_a=0.4, l=0.4)
        d["optimize"] = {"method": "full", "mesh0": 0.2, "mesh_tol": 0.1}
        assert main(["optimize", "-c", write(tmp_path, d), "-o", str(tmp_path / "o")]) == 0
        trace = (tmp_path / "o" / "opt_trace.csv").read_text().splitlines()
        assert trace[0] == "iter,evals,mesh,r_a,l,gamma,V"
        res = json.loads((tmp_path / "o" / "opt_result.json").read_text())
        assert res["V_opt"] >= float(trace[1].split(",")[-1])

    def test_optimize_needs_block(self, tmp_path):
        assert main(["optimize", "-c", write(tmp_path, prs_cfg())]) == 2

    def test_decoupled_requires_tmech(self, tmp_path):
        d = prs_cfg()
        d["optimize"] = {"method": "decoupled"}
        assert main(["optimize", "-c", write(tmp_path, d)]) == 2

    def test_check_exit_zero(self, capsys):
        assert main(["check", "-c", str(CONFIGS / "quick_tmech_det.json")]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert all(line.startswith("PASS") for line in lines[:-1]) and lines[-1] == "ALL PASS"

    def test_console_script(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "parawork.cli", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and "parawork" in proc.stdout
