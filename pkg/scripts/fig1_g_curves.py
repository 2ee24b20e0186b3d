"""Write g_d(t) for d = 2..8 on t in [0, 5] to results/g_curves.csv."""

import sys

from spherical_ensemble.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/g_curves.csv"
    sys.exit(main(["plot-g", "--d", "2:8", "--grid", "0:5:501", "--out", out]))
