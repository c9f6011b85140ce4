"""Run every bundled and synthetic scenario and print one summary line per check.

    python3 scripts/run_scenarios.py [--json OUT]
"""

import argparse
import json
import time

from statgeom.checks import run_scenario
from statgeom.cli import report_to_dict
from statgeom.scenarios import BUNDLED_IDS, SYNTHETIC_IDS, bundled_scenario, synthetic_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", help="write all reports to this file")
    args = ap.parse_args()
    reports = {}
    for ident in BUNDLED_IDS + SYNTHETIC_IDS:
        sc = bundled_scenario(ident) if ident in BUNDLED_IDS else synthetic_scenario(ident)
        t0 = time.perf_counter()
        rep = run_scenario(sc)
        dt = time.perf_counter() - t0
        print(f"{ident:28s} {rep.overall.upper():5s} {dt:6.2f}s")
        for c in rep.checks:
            extra = f"  ({c.reason})" if c.reason else ""
            print(f"    {c.verdict:7s} {c.name:24s} {c.max_residual:.2e} / {c.tolerance:.0e}{extra}")
        reports[ident] = report_to_dict(rep)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(reports, fh, indent=1)


if __name__ == "__main__":
    main()
