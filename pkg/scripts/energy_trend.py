"""Finite-N energy gap ratio across degrees L, next to the asymptotic coefficient.

    python3 scripts/energy_trend.py --d 2 --s 1 --replicates 200
"""

import argparse

from spherical_ensemble.ensemble_kernel import make_params
from spherical_ensemble.riesz_energy import bound_report, gap_ratio_trend


def run(d, s, L_max, replicates, seed):
    rows = gap_ratio_trend(d, s, range(2, L_max + 1), replicates, seed)
    coef = bound_report(make_params(d, 2), s).cor1_coefficient
    print(f"asymptotic coefficient {coef:.6g}")
    print(f"{'L':>3} {'N':>5} {'mean energy':>14} {'stderr':>9} {'gap ratio':>10} {'+-':>8}")
    for r in rows:
        print(f"{r['L']:>3} {r['N']:>5} {r['mean']:>14.6f} {r['stderr']:>9.4f} {r['ratio']:>10.5f} {r['ratio_stderr']:>8.5f}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--L-max", type=int, default=12)
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    a = ap.parse_args()
    run(a.d, a.s, a.L_max, a.replicates, a.seed)
