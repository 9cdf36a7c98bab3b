#!/usr/bin/env python3
"""Where does a hot Brownian particle decohere most slowly?

Every continuous monitoring of the particle's bath splits its steady state
into an ensemble of pure Gaussian states with a common covariance
``Omega = [[alpha, beta], [beta, gamma]] / 4``. Only ensembles inside the
physically realizable (PR) region can actually be produced. This script
finds the PR ensemble whose states keep their purity longest (the pointer
basis). It then shows how its mixing time falls with temperature.
"""
import math
import warnings

import numpy as np

from pointerlab import qbm

warnings.simplefilter("ignore", RuntimeWarning)   # T < 100 advisories

T, eps = 1000.0, 0.1
print(f"Brownian particle at T = {T:g}, purity threshold 1 - eps = {1 - eps:g}\n")

print("Mixing time along the upper edge of the PR region:")
print(f"{'beta':>8} {'gamma':>10} {'tau_mix':>12} {'tau_sur':>12}")
for beta in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0):
    g = qbm.boundary_gamma(beta, T)
    print(f"{beta:8.2f} {g:10.3f} {qbm.qbm_mixing_time(beta, g, T, eps):12.6g}"
          f" {qbm.survival_time_qbm(beta, g, T, eps):12.6g}")

res = qbm.qbm_pointer_basis(T, eps)
print(f"\npointer basis: beta* = {res.beta_star:.4f}, gamma* = {res.gamma_star:.3f} "
      f"(4 sqrt T = {4 * math.sqrt(T):.3f}), tau* = {res.tau_mix_star:.6g}")

print("\nMoving inside the region (smaller gamma) only shortens the mixing time:")
for frac in (1.0, 0.75, 0.5, 0.25):
    g = frac * res.gamma_star
    print(f"  gamma = {frac:4.2f} gamma*: tau_mix = {qbm.qbm_mixing_time(res.beta_star, g, T, eps):.6g}")

Ts = np.geomspace(1e2, 1e4, 20)
for eps in (0.1, 0.2):
    results = qbm.pointer_basis_sweep(Ts, eps)
    a, b, sa, sb = qbm.power_law_fit([(t, r.tau_mix_star) for t, r in zip(Ts, results)])
    print(f"\neps = {eps}: log10 tau* = ({b:.5f} +/- {sb:.1e}) log10 T + ({a:.5f} +/- {sa:.1e})")
    print(f"  beta* ranges over [{min(r.beta_star for r in results):.3f}, "
          f"{max(r.beta_star for r in results):.3f}] -- essentially independent of T")
