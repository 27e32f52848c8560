import csv
from pathlib import Path

import pytest

from timealloc.cli import main
from timealloc.config import load_config, parse_config
from timealloc.env import ConfigurationError, GaussianNoise, Quadratic, Table, Uniform
from timealloc.harness import REPLICA_COLUMNS, SUMMARY_COLUMNS, sweep

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = """
[env]
lambda = 1
duration = uniform
duration_hi = 3
reward = affine
reward_a = 1
reward_b = -0.5
noise = uniform
noise_halfwidth = 1

[algo.bandit]
eta_scale = 0.1
xi_scale = 0.002
drop_bias_terms = true
M = auto

[sweep]
T = 100, 300
replicas = 3
replicas_naive = 2
seed = 10
algos = naive, bandit
"""


class TestConfig:
    def test_shipped_configs_load(self):
        for path in sorted(CONFIGS.glob("*.ini")):
            cfg = load_config(path)
            assert cfg.sweep.algos

    def test_parse(self):
        cfg = parse_config(SMALL)
        assert isinstance(cfg.env.duration, Uniform) and cfg.env.C == 3.0
        assert cfg.params("bandit") == dict(eta_scale=0.1, xi_scale=0.002,
                                            drop_bias_terms=True, M="auto")
        assert cfg.sweep.T == [100.0, 300.0]
        assert cfg.sweep.replicas_for("naive") == 2 and cfg.sweep.replicas_for("bandit") == 3

    def test_other_families(self):
        cfg = load_config(CONFIGS / "concave.ini")
        assert isinstance(cfg.env.reward, Quadratic)
        assert isinstance(cfg.env.noise, GaussianNoise)
        cfg = load_config(CONFIGS / "two_point.ini")
        assert isinstance(cfg.env.reward, Table) and cfg.env.is_discrete

    @pytest.mark.parametrize("bad,key", [
        (SMALL.replace("reward_a = 1", "reward_a = one"), "reward_a"),
        (SMALL.replace("duration_hi = 3\n", ""), "duration_hi"),
        (SMALL.replace("replicas = 3", "replicas = x"), "replicas"),
        (SMALL.replace("algos = naive, bandit", "algos = naive, magic"), "algos"),
        (SMALL.replace("seed = 10", "sede = 10"), "sede"),
        (SMALL.replace("noise = uniform", "noise = pink"), "noise"),
        (SMALL.replace("[algo.bandit]", "[algo.oracle]"), "algo.oracle"),
        (SMALL + "\nfoo = 1\n", "foo"),
    ])
    def test_errors_name_the_key(self, bad, key):
        with pytest.raises(ConfigurationError, match=key):
            parse_config(bad)

    def test_missing_env(self):
        with pytest.raises(ConfigurationError, match="env"):
            parse_config("[sweep]\nT = 10\n")


class TestSweep:
    def test_outputs(self, tmp_path):
        cfg = parse_config(SMALL)
        records, rows = sweep(cfg, tmp_path)
        assert len(records) == 2 * 2 + 2 * 3
        with open(tmp_path / "replicas.csv") as fh:
            reader = csv.reader(fh)
            assert tuple(next(reader)) == REPLICA_COLUMNS
            body = list(reader)
        assert [(r[0], float(r[1]), int(r[2])) for r in body][:3] == \
            [("naive", 100.0, 10), ("naive", 100.0, 11), ("naive", 300.0, 10)]
        with open(tmp_path / "summary.csv") as fh:
            reader = csv.reader(fh)
            assert tuple(next(reader)) == SUMMARY_COLUMNS
            assert [(r[0], float(r[1])) for r in reader] == \
                [("naive", 100.0), ("naive", 300.0), ("bandit", 100.0), ("bandit", 300.0)]

    def test_worker_count_does_not_change_results(self, tmp_path):
        cfg = parse_config(SMALL.replace("M = auto\n", ""))
        a, _ = sweep(cfg, workers=1)
        b, _ = sweep(cfg, workers=2)
        assert [r.row() for r in a] == [r.row() for r in b]


class TestCli:
    def write(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text(SMALL.replace("M = auto\n", ""))
        return p

    def test_oracle(self, tmp_path, capsys):
        assert main(["oracle", "--config", str(self.write(tmp_path)), "--T", "5", "--dt", "0.01"]) == 0
        head, row = capsys.readouterr().out.strip().splitlines()
        assert head == "c_star,v0,w0,lower_residual,upper_residual"
        assert float(row.split(",")[0]) == pytest.approx(0.4291987, abs=1e-6)

    def test_run(self, tmp_path, capsys):
        cfg = self.write(tmp_path)
        out = tmp_path / "d.csv"
        assert main(["run", "--config", str(cfg), "--algo", "bandit", "--T", "200", "--seed", "1",
                     "--emit-decisions", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("algo,T,seed,regret,reward,theta,elapsed")
        assert out.exists() and (tmp_path / "d_region.csv").exists()

    def test_sweep(self, tmp_path, capsys):
        assert main(["sweep", "--config", str(self.write(tmp_path)), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "summary.csv").exists()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[env]\nduration = uniform\n")
        assert main(["oracle", "--config", str(p)]) == 2
        assert "duration_hi" in capsys.readouterr().err
