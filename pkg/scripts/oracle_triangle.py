"""Three routes to one spectrum: Dunkl blocks, FG-frame matrix and original-frame matrix.

Prints pairwise maximum deviations over a small grid of couplings.

    python3 scripts/oracle_triangle.py --count 15
"""
import argparse
import itertools

import numpy as np
from scipy import linalg

from drabi.dunkl import blocks
from drabi.models import GrmParams, build_grm_fg_full, build_grm_full
from drabi.spectra import converged_levels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=15)
    ap.add_argument("--mu", type=float, default=0.7)
    args = ap.parse_args()

    couplings = [0.2, 0.6, 1.0]
    print("k1     k2     |dunkl-full|  |fg-full|   n_max")
    for k1, k2 in itertools.product(couplings, couplings):
        p = GrmParams(1.0, args.mu, k1, k2)
        dunkl = converged_levels(blocks("grm", p), args.count)
        ref = converged_levels(lambda n: build_grm_full(p, n), args.count)
        n = ref.n_max_used
        fg = np.sort(linalg.eigvals(build_grm_fg_full(p, n).dense()).real)[: args.count]
        a = np.max(np.abs(dunkl.energies - ref.energies))
        b = np.max(np.abs(fg - ref.energies))
        print(f"{k1:<6} {k2:<6} {a:<13.2e} {b:<11.2e} {n}")


if __name__ == "__main__":
    main()
