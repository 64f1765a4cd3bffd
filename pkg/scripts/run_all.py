"""Run every registered experiment with its defaults, then replay each report."""

import argparse
import json
import time
from pathlib import Path

from prodsets import experiments as ex
from prodsets.verify import replay_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("reports"))
    ap.add_argument("--only", nargs="*", help="experiment names (default: all)")
    ap.add_argument("--no-replay", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    names = args.only or sorted(ex.REGISTRY)
    print(f"{'experiment':20s} {'status':6s} {'run s':>7s} {'replay':>8s} {'misses':>6s}")
    for name in names:
        rep = ex.run(ex.resolve(name))
        path = args.out / f"{name}.json"
        path.write_text(rep.dumps() + "\n")
        replay = "-"
        if not args.no_replay:
            t0 = time.perf_counter()
            errs = replay_report(json.loads(path.read_text()))
            replay = f"{'ok' if not errs else 'FAIL'} {time.perf_counter() - t0:.0f}s"
        misses = sum(not e["ok"] for e in rep.expectations)
        print(f"{name:20s} {'PASS' if rep.ok else 'FAIL':6s} {rep.wall_time:7.2f} {replay:>8s} {misses:6d}")


if __name__ == "__main__":
    main()
