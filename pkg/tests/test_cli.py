import subprocess
import sys

import pytest

from cgar.agent import load_checkpoint
from cgar.cli import main
from cgar.distill import read_csv
from cgar.harness import load_run, read_summary

TINY = ["--steps", "200", "--init-steps", "300", "--eval-interval", "250", "--eval-episodes", "1"]


def test_train_writes_run_directory(tmp_path, capsys):
    rc = main(["train", "--algo", "cgar-sac", "--env", "pointmass", "--seed", "3", "--k", "4",
               "--temperature", "0.5", "--out", str(tmp_path), *TINY])
    assert rc == 0
    run = tmp_path / "pointmass_cgar-sac_k4_T0.5_seed3"
    rec = load_run(run)
    assert rec.completed and rec.eval_steps == [250, 500]
    assert rec.config.k == 4 and rec.config.softmax_temperature == 0.5 and rec.config.n_train == 200
    agent, cfg = load_checkpoint(run / "agent.npz")
    assert cfg == rec.config and agent.action_dim == 2
    assert "average return" in capsys.readouterr().out


def test_sweep_then_summarize(tmp_path, capsys):
    rc = main(["sweep", "--algo", "sac", "cgar-sac", "--env", "pendulum", "--seeds", "2", "--k", "3",
               "--out", str(tmp_path), *TINY])
    assert rc == 0
    rows = read_summary(tmp_path / "summary.csv")
    assert [(r.algo, r.seeds) for r in rows] == [("cgar-sac[k=3,T=1]", 2), ("sac", 2)]
    capsys.readouterr()
    assert main(["summarize", str(tmp_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["algo", "env", "seeds", "mean_avg_return", "std_avg_return"] and len(out) == 3
    assert (tmp_path / "summary.csv").read_text().splitlines()[1].startswith('"cgar-sac[k=3,T=1]",pendulum,2,')


def test_summarize_empty_dir(tmp_path):
    assert main(["summarize", str(tmp_path)]) == 1


def test_distill_csv(tmp_path):
    assert main(["distill", "--variant", "ce", "mse", "--seeds", "2", "--epochs", "2", "--out", str(tmp_path)]) == 0
    for v in ("ce", "mse"):
        rows = read_csv(tmp_path / f"distill_{v}.csv")
        assert len(rows) == 2 * 3 and {r["variant"] for r in rows} == {v}


def test_contract_errors_exit_2(tmp_path, capsys):
    assert main(["train", "--k", "0", "--out", str(tmp_path), *TINY]) == 2
    assert "k must be" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["train", "--algo", "ppo", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cgar", "--help"], capture_output=True, text=True, check=True)
    for cmd in ("train", "sweep", "summarize", "distill"):
        assert cmd in res.stdout
