"""Spectrum of the one-parametric family across a, with the smallest eigenvalue gap.

The gap closes at a = 0, 1, 2, where the index of cyclicity jumps to 2.
"""

from __future__ import annotations

import argparse
import itertools

import numpy as np

from stroboscopic.generators import parameter_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=41)
    args = ap.parse_args()

    a_values = np.linspace(0, 2, args.steps)
    print(f"{'a':>6} {'eta':>3} {'mu':>2} {'min gap':>9}  eigenvalues")
    for a, rep in parameter_sweep(args.gamma, a_values):
        eig = np.sort([c.eigenvalue.real for c in rep.clusters for _ in range(c.algebraic_mult)])
        gap = min(abs(x - y) for x, y in itertools.combinations(eig, 2))
        print(f"{a:>6.3f} {rep.eta:>3} {rep.mu:>2} {gap:>9.3e}  " + " ".join(f"{x:+.4f}" for x in eig))


if __name__ == "__main__":
    main()
