"""Run the fig3 sweep with the bundled config and write CSV/JSON to results/fig3/.

Extra arguments are passed to the CLI, e.g. ``--threads 4`` or ``--n-values 2,3``.
"""

import sys
from pathlib import Path

from mcite import cli

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    argv = ["fig3", "--config", str(ROOT / "configs" / "fig3.cfg"), "--out", str(ROOT / "results" / "fig3")]
    sys.exit(cli.main(argv + sys.argv[1:]))
