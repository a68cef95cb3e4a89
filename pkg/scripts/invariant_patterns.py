"""Quantum-invariant patterns along rays of fixed coupling angle.

One CSV per angle with columns Lambda, n, parity, index_within_parity,
energy, t1, t2, imag_residual; ready for scatter plots of t2 against energy.

    python3 scripts/invariant_patterns.py --alphas 0 0.3927 0.7854 --out results/
"""
import argparse
import csv
import math
from pathlib import Path

from drabi.invariants import pattern_motion_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2])
    ap.add_argument("--Lambda-max", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--mu", type=float, default=0.5)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for alpha in args.alphas:
        frames = pattern_motion_scan(alpha, (0.0, args.Lambda_max), args.steps, args.count, mu=args.mu)
        path = args.out / f"invariants_alpha_{alpha:.4f}.csv"
        worst = 0.0
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["Lambda", "n", "parity", "index_within_parity", "energy", "t1", "t2", "imag_residual"])
            for f in frames:
                if f.error:
                    print(f"alpha={alpha:.4f} Lambda={f.Lambda:.4f}: {f.error}")
                for pt in f.points:
                    worst = max(worst, pt.imag_residual)
                    w.writerow([f"{f.Lambda:.17g}", pt.n, pt.parity, pt.index_within_parity,
                                *(f"{x:.17g}" for x in (pt.energy, pt.t1, pt.t2, pt.imag_residual))])
        print(f"alpha={alpha:.4f}: {len(frames)} frames -> {path}, max imaginary residual {worst:.2e}")


if __name__ == "__main__":
    main()
