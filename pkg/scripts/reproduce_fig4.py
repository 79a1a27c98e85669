"""Run the fig4 sweep with the bundled config and write CSV/JSON to results/fig4/.

Extra arguments are passed to the CLI, e.g. ``--threads 4`` or ``--n-values 2,3``.
"""

import sys
from pathlib import Path

from mcite import cli

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    argv = ["fig4", "--config", str(ROOT / "configs" / "fig4.cfg"), "--out", str(ROOT / "results" / "fig4")]
    sys.exit(cli.main(argv + sys.argv[1:]))
