"""Finite-difference vs modal solution on successive grid doublings (eps=0.1, f1 = sin x)."""

import sys

from voigt_strip.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "fd_out"
    code = main(["oracle-compare", "-o", out, "--nx", "17", "--levels", "5"])
    print(open(f"{out}/oracle_compare.csv").read())
    sys.exit(code)
