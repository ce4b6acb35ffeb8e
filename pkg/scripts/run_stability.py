"""Stability lab sweep: A(0) thresholds, rho grids for k=2..4, positivity and beta3.

    python3 scripts/run_stability.py [--theta 0.95] [--output-dir out]
"""

import argparse
import sys

from expadams.cli import main


def run(argv):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--theta", type=float, default=0.95)
    p.add_argument("--output-dir", default="out")
    p.add_argument("--workers", type=int, default=4)
    args = p.parse_args(argv)
    common = ["--output-dir", args.output_dir, "--workers", str(args.workers)]
    code = main(["a0-threshold", *common])
    for k in (2, 3, 4):
        code = code or main(["stability-grid", "--k", str(k), "--theta", str(args.theta), *common])
    return code or main(["positivity", *common])


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
