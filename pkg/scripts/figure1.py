"""Write the decrease band (minimum and maximum bits lost going from nH to the
pattern entropy) as CSV, ready for gnuplot or a spreadsheet.

    python3 scripts/figure1.py --out band.csv
"""
import argparse
import csv
import sys

from pattern_entropy.bounds import figure1_data, thm4_threshold
from pattern_entropy.distributions import AnalysisConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--k-max", type=float, default=1e6)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args(argv)

    cfg = AnalysisConfig(args.n, args.epsilon)
    k_min = int(thm4_threshold(cfg)) + 1
    rows = figure1_data(cfg, k_min, args.k_max, args.steps)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["k", "min_decrease_bits", "max_decrease_bits", "min_per_letter", "max_per_letter"])
    for k, lo, hi in rows:
        w.writerow([k, f"{lo:.12g}", f"{hi:.12g}", f"{lo / k:.6g}", f"{hi / k:.6g}"])
    if args.out:
        fh.close()
        print(f"{len(rows)} rows, k in [{rows[0][0]}, {rows[-1][0]}] -> {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
