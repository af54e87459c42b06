import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parents[1] / "demos"


@pytest.mark.parametrize("script,args", [
    ("01_squashed_gaussian.py", []),
    ("02_critic_guided_selection.py", []),
    ("03_train_and_compare.py", ["300", "1"]),
    ("04_teacher_student_lag.py", []),
])
def test_demo_runs(script, args):
    res = subprocess.run([sys.executable, str(DEMOS / script), *args], capture_output=True, text=True, timeout=600)
    assert res.returncode == 0, res.stderr
    assert res.stdout.strip()
