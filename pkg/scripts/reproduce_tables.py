"""Critical-step and accuracy tables for Beeler-Reuter (several minutes)."""

import sys

from expadams.cli import main

if __name__ == "__main__":
    sys.exit(main(["tables", *sys.argv[1:]]))
