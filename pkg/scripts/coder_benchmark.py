"""Measure the range coder against its ideal code length.

For each (family, n) pair, a few sequences are sampled, encoded and decoded;
the table reports ideal and actual payload bits, the per-symbol overhead,
throughput, and the Monte Carlo average code length with tuned and default
repeat probabilities.

    python3 scripts/coder_benchmark.py --n 1000 10000
"""
import argparse
import json
import math
import sys
import time

import numpy as np

from pattern_entropy import coder
from pattern_entropy.bounds import thm5_upper
from pattern_entropy.distributions import AnalysisConfig, load_distribution
from pattern_entropy.patterns import extract_pattern
from pattern_entropy.probability import sample_sequence

FAMILIES = ("uniform,k=500", "zipf,k=5000,s=1.1", "two_level,k_small=3000,k_large=20,mass_small=0.3")


def bench(d, cfg, reps, seed):
    rows = []
    for r in range(reps):
        x = sample_sequence(d, cfg.n, seed + r)
        t0 = time.perf_counter()
        blob = coder.encode(d, cfg, x)
        t1 = time.perf_counter()
        p, b = coder.decode(d, cfg, blob)
        t2 = time.perf_counter()
        if p != extract_pattern(x.tolist()):
            raise SystemExit("round trip failed")
        ideal = coder.ideal_code_length(d, cfg, p, b)
        actual = coder.payload_bits(blob)
        rows.append((ideal, actual, t1 - t0, t2 - t1))
    a = np.array(rows)
    return {
        "ideal_bits": float(a[:, 0].mean()),
        "actual_bits": float(a[:, 1].mean()),
        "overhead_bits_per_symbol": float(((a[:, 1] - a[:, 0]) / cfg.n).max()),
        "encode_symbols_per_s": cfg.n / float(a[:, 2].mean()),
        "decode_symbols_per_s": cfg.n / float(a[:, 3].mean()),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--family", nargs="+", default=list(FAMILIES))
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--samples", type=int, default=500, help="Monte Carlo samples for the average code length")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    results = []
    for fam in args.family:
        d = load_distribution("family:" + fam)
        for n in args.n:
            cfg = AnalysisConfig(n, args.epsilon)
            row = {"family": fam, "n": n, "k": d.k}
            row.update(bench(d, cfg, args.reps, args.seed))
            r0, r1 = coder.optimize_rho(d, cfg, args.samples, args.seed)
            tuned = dict(rho0=None if math.isnan(r0) else r0, rho1=None if math.isnan(r1) else r1)
            row["avg_code_bits_default"] = coder.expected_code_length(d, cfg, "mc", args.samples, args.seed + 1).value
            row["avg_code_bits_tuned"] = coder.expected_code_length(d, cfg, "mc", args.samples, args.seed + 1, **tuned).value
            row["upper_bound_bits"] = thm5_upper(d, cfg).value_bits
            results.append(row)
            print(f"{fam:<50} n={n:<7} overhead/sym={row['overhead_bits_per_symbol']:.2e}", file=sys.stderr)
    json.dump(results, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
