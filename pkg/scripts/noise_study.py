"""Median reconstruction error versus noise level and number of instants.

Prints one row per (model, pipeline, grid size, sigma).
"""

from __future__ import annotations

import argparse

import numpy as np

from stroboscopic import KrausFamilySpec, Model, model_generator, suggest_observables
from stroboscopic.observability import AlphaFunctions
from stroboscopic.reconstruction import random_density_matrix, reconstruct_alpha, reconstruct_direct, simulate_measurements


def median_error(l, qs, times, sigma, trials, method, seed):
    rng = np.random.default_rng(seed)
    errs = []
    for trial in range(trials):
        rho = random_density_matrix(l.hilbert_dim, rng)
        rec = simulate_measurements(l, rho, qs, times, noise_sigma=sigma, seed=seed * 100_000 + trial)
        errs.append(np.linalg.norm(method(l, rec).rho0 - rho))
    return float(np.median(errs))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--sigmas", default="1e-4,1e-3,1e-2")
    ap.add_argument("--points", default="mu,10,20,50,100")
    ap.add_argument("--horizon", type=float, default=5.0, help="grid spans [0, horizon / gamma]")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sigmas = [float(s) for s in args.sigmas.split(",")]
    specs = [
        KrausFamilySpec(Model.DEPHASING, args.gamma),
        KrausFamilySpec(Model.DEPOLARIZING, args.gamma),
        KrausFamilySpec(Model.ONE_PARAMETRIC, args.gamma, args.a),
    ]
    print(f"{'model':>15} {'pipeline':>8} {'p':>4} {'sigma':>8} {'median err':>11}")
    for spec in specs:
        l = model_generator(spec)
        qs = suggest_observables(l, seed=0)
        mu = AlphaFunctions(l).mu
        for token in args.points.split(","):
            p = mu if token == "mu" else int(token)
            times = np.linspace(0, args.horizon / spec.gamma, p)
            for name, method in (("alpha", reconstruct_alpha), ("direct", reconstruct_direct)):
                for sigma in sigmas:
                    err = median_error(l, qs, times, sigma, args.trials, method, args.seed)
                    print(f"{spec.model.value:>15} {name:>8} {p:>4} {sigma:>8.0e} {err:>11.3e}")


if __name__ == "__main__":
    main()
