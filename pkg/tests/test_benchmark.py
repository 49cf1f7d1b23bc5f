import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernel.py"


def test_benchmark_runs_small():
    out = subprocess.run(
        [sys.executable, str(BENCH), "--max-size", "4", "--repeat", "1"],
        capture_output=True, text=True, timeout=120,
    )
    assert out.returncode == 0, out.stderr
    assert "max size 4" in out.stdout
