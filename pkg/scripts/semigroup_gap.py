"""Distance between each Kraus channel and the exponential of its generator.

For dephasing and depolarizing the two coincide. For the one-parametric
family the generator only matches the channel to first order in t, and the
gap grows with t.
"""

from __future__ import annotations

import argparse

import numpy as np

from stroboscopic import KrausFamilySpec, Model, kraus_at, matrix_exp, model_generator
from stroboscopic.channels import channel_superoperator


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--times", default="0.01,0.1,0.5,1,2,5,10")
    args = ap.parse_args()

    times = [float(t) for t in args.times.split(",")]
    specs = [
        KrausFamilySpec(Model.DEPHASING, args.gamma),
        KrausFamilySpec(Model.DEPOLARIZING, args.gamma),
        KrausFamilySpec(Model.ONE_PARAMETRIC, args.gamma, args.a),
    ]
    print(f"{'model':>15} " + " ".join(f"{t:>9g}" for t in times))
    for spec in specs:
        l = model_generator(spec).matrix
        gaps = [np.abs(channel_superoperator(kraus_at(spec, t)).matrix - matrix_exp(l, t)).max() for t in times]
        print(f"{spec.model.value:>15} " + " ".join(f"{g:>9.2e}" for g in gaps))


if __name__ == "__main__":
    main()
