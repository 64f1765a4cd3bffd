"""Command line: ``run <experiment>``, ``replay <report>``, ``list``.

Exit codes: 0 pass, 1 contract violation or failed replay, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import experiments as ex
from .sets import BudgetExceeded, SpecError

log = logging.getLogger("prodsets")


def _flag_pairs(extra: List[str]) -> Dict[str, str]:
    """``--key value`` and ``--key=value`` pairs for experiment parameters."""
    out: Dict[str, str] = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ex.ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ex.ConfigError(f"missing value for --{key}")
            i += 1
            val = extra[i]
        out[ex.norm_key(key)] = val
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodsets", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a named experiment; extra --key value pairs set parameters")
    r.add_argument("experiment")
    r.add_argument("--config", type=Path, help="flat key = value file")
    r.add_argument("--show-config", action="store_true", help="print the resolved config and exit")
    p = sub.add_parser("replay", help="re-verify the certificates and identities of a report")
    p.add_argument("report", type=Path)
    sub.add_parser("list", help="list experiments")
    return ap


def cmd_run(args, extra) -> int:
    file_params = ex.parse_config_text(args.config.read_text()) if args.config else None
    cfg = ex.resolve(args.experiment, file_params, _flag_pairs(extra))
    if args.show_config:
        for k, v in sorted(cfg.params.items()):
            print(f"{k} = {v}")
        return 0
    rep = ex.run(cfg)
    text = rep.dumps()
    out = cfg.out or f"{cfg.experiment}-report.json"
    if out == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n")
        print(f"report written to {out}")
    for e in rep.expectations:
        print(f"{'ok ' if e['ok'] else 'MISS'} {e['name']}: expected {e['expected']}, observed {e['observed']}")
    for v in rep.violations:
        print(f"VIOLATION {v}")
    print("PASS" if rep.ok else "FAIL")
    return 0 if rep.ok else 1


def cmd_replay(args) -> int:
    from .verify import ReplayError, replay_report

    try:
        report = json.loads(args.report.read_text())
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read report: {e}")
        return 1
    try:
        errs = replay_report(report)
    except (KeyError, TypeError, ValueError, ReplayError) as e:
        print(f"corrupted report: {type(e).__name__}: {e}")
        return 1
    n_cert = len(report.get("certificates", {}))
    n_chk = len(report.get("checks", []))
    for e in errs:
        print(f"FAIL {e}")
    print(f"{'PASS' if not errs else 'FAIL'} ({n_cert} certificates, {n_chk} checks)")
    return 0 if not errs else 1


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "list":
            if extra:
                ap.error(f"unexpected arguments {extra}")
            for line in ex.list_experiments():
                print(line)
            return 0
        if args.cmd == "replay":
            if extra:
                ap.error(f"unexpected arguments {extra}")
            return cmd_replay(args)
        return cmd_run(args, extra)
    except (ex.ConfigError, SpecError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
