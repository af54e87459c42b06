"""Short SAC and CGAR-SAC runs on the point-mass task, then a summary table.

The acceptance comparison uses 5 seeds and 10k steps; this demo defaults to
2 seeds and 3k steps so it finishes in a few minutes on one core.

Run: python3 demos/03_train_and_compare.py [steps] [seeds]
"""

import sys
import tempfile
from pathlib import Path

from cgar.config import TrainConfig
from cgar.harness import learning_curve_export, load_run, run_sweep, summarize

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 2

configs = [
    TrainConfig(algo=algo, env="pointmass", seed=s, n_train=steps, eval_interval=500, eval_episodes=5)
    for algo in ("sac", "cgar-sac")
    for s in range(seeds)
]

with tempfile.TemporaryDirectory() as out:
    # Each run writes config.json, status.json and metrics.csv to its own directory.
    dirs = run_sweep(configs, out)
    print("run directories:", *[Path(d).name for d in dirs], sep="\n  ")
    records = [load_run(d) for d in dirs]

print("\nlearning curve (mean [min, max] over seeds)")
for row in learning_curve_export(records):
    print(f"  {row['algo']:<9} step {row['step']:>5}: {row['mean']:8.1f} [{row['min']:8.1f}, {row['max']:8.1f}]")

print("\naverage evaluation return over the whole run")
for row in summarize(records):
    print(f"  {row.algo:<9} {row.env}: {row.mean_avg_return:8.1f} +- {row.std_avg_return:.1f} ({row.seeds} seeds)")
