"""Full eps sweep: remainder scaling plus Green's function envelope fits.

    python3 scripts/run_sweep.py [--out sweep_out]

Writes sweep.json / sweep.csv through the CLI and prints a per-eps table.
"""

import argparse
import json
import sys
from pathlib import Path

from voigt_strip.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="sweep_out")
    ap.add_argument("problem", nargs="?")
    args = ap.parse_args()
    argv = ["sweep", "-o", args.out] + ([args.problem] if args.problem else [])
    code = cli_main(argv)
    doc = json.loads((Path(args.out) / "sweep.json").read_text())
    print(f"{'eps':>7} {'sup|r|':>11} {'||F||':>9} {'k_const':>9} {'A0':>9} {'M0':>9} {'C1':>10}")
    for r in doc["records"]:
        print(f"{r['epsilon']:7.3f} {r['sup_r']:11.4e} {r['norm_F']:9.4f} {r['k_const']:9.4f} "
              f"{r['a0']:9.4f} {r['m0']:9.4f} {r['c1']:10.3e}")
    print("slope of sup|r| vs eps:", round(doc["regression"]["slope"], 4))
    for name, v in doc["verdicts"].items():
        print(f"  {name:26s} {v}")
    return code


if __name__ == "__main__":
    sys.exit(main())
