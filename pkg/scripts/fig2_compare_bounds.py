"""Harmonic-ensemble vs generalized-ensemble energy bounds on S^8 with s = 6."""

import sys

from spherical_ensemble.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/compare_bounds.csv"
    sys.exit(main(["compare-bounds", "--d", "4", "--s", "6", "--grid", "1:12", "--out", out]))
