"""Observed convergence orders on Beeler-Reuter over one action potential."""

import sys

from expadams.cli import main

if __name__ == "__main__":
    sys.exit(main(["converge", *sys.argv[1:]]))
