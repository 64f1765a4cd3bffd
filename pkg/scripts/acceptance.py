"""Run the acceptance module and print only the per-criterion lines."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(ROOT / "tests" / "test_acceptance.py")],
        cwd=ROOT,
        capture_output=True,
        text=True,
    )
    lines = [l for l in proc.stdout.splitlines() if l.startswith("CRITERION")]
    seen = {}
    for l in lines:
        seen[l.split(":")[0]] = l
    print("\n".join(seen.values()))
    sys.exit(proc.returncode)
