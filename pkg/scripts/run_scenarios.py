#!/usr/bin/env python3
"""Run every bundled scenario config and emit one combined report."""
import argparse
import json
import sys
from pathlib import Path

from folsys.cli import ScenarioConfig, report_render, run

CONFIG_DIR = Path(__file__).parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/all-scenarios")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    all_reports = []
    for cfg_path in sorted(CONFIG_DIR.glob("*.json")):
        raw = json.loads(cfg_path.read_text())
        if args.seed is not None:
            raw["seed"] = args.seed
        raw["out"] = str(Path(args.out) / raw["model"])
        cfg = ScenarioConfig.from_dict(raw)
        print(f"== {cfg.model} ({cfg_path.name})")
        reports, _ = run(cfg)
        all_reports.extend(reports)
    report_render(all_reports, args.out)
    failed = [r for r in all_reports if r.status != "pass"]
    print(f"\n{len(all_reports) - len(failed)}/{len(all_reports)} checks passed")
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
