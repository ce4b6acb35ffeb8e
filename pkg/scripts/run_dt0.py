"""Critical time steps for the schemes listed in the config (configs/dt0.ini by default)."""

import sys
from pathlib import Path

from expadams.cli import main

DEFAULT = Path(__file__).resolve().parent.parent / "configs" / "dt0.ini"

if __name__ == "__main__":
    argv = sys.argv[1:]
    if "--config" not in argv and DEFAULT.exists():
        argv = ["--config", str(DEFAULT), *argv]
    sys.exit(main(["dt0", *argv]))
