"""Run the gate-scaling sweep with the bundled config and write CSV/JSON to results/gate_scaling/.

Extra arguments are passed to the CLI, e.g. ``--threads 4`` or ``--n-values 2,3``.
"""

import sys
from pathlib import Path

from mcite import cli

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    argv = ["gate-scaling", "--config", str(ROOT / "configs" / "gate_scaling.cfg"), "--out", str(ROOT / "results" / "gate_scaling")]
    sys.exit(cli.main(argv + sys.argv[1:]))
