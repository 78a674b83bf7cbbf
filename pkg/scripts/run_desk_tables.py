#!/usr/bin/env python3
"""Run every desk-scale table sweep and collect the summaries.

Usage: python scripts/run_desk_tables.py [OUT_DIR] [--workers N]
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

TABLES = ("1d", "2d", "3d", "4d", "s2d")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="desk_tables")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    out = Path(args.out)
    rows = []
    for table in TABLES:
        dest = out / table
        cmd = [
            sys.executable, "-m", "kslearn.cli", "reproduce",
            "--table", table, "--scale", "desk",
            "--out", str(dest), "--workers", str(args.workers),
        ]
        print("+", " ".join(cmd), flush=True)
        subprocess.run(cmd, check=True)
        rows.append(json.loads((dest / "summary.json").read_text()))
    print("\ndesk-scale summary")
    for row in rows:
        for e in row["entries"]:
            print(
                f"  {row['table']:>3} chi={e['chi']:<4g} "
                f"Err_traj={e['traj_err_rel']:.3e} Err_phi={e['profile_err_rel']:.3e}"
            )


if __name__ == "__main__":
    main()
