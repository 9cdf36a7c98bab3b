#!/usr/bin/env python3
"""A single long trajectory reproduces the ensemble statistics.

The controlled conditional mean is an ergodic Ornstein-Uhlenbeck process.
Its time-averaged covariance converges to the Lyapunov solution ``M``, and
the error shrinks like one over the square root of the simulated time.
"""
import numpy as np

from pointerlab import qbm
from pointerlab.control import FeedbackDesign, evaluate_feedback
from pointerlab.trajectories import (default_config, ergodic_stats, noise_factor,
                                     simulate_mean)

T, eps, k = 1000.0, 0.1, 10.0
model = qbm.qbm_model(T)
res = qbm.qbm_pointer_basis(T, eps)
out = evaluate_feedback(model, res.omega_star, FeedbackDesign(k, eps, res.tau_mix_star))
B = noise_factor(model, res.omega_star)
print("analytic M =\n", out.M)

for samples, seed in ((100_000, 1), (400_000, 1), (1_000_000, 12345)):
    cfg = default_config(out.N, res.tau_mix_star / 1000, samples, seed=seed)
    stats = ergodic_stats(simulate_mean(out.N, B, cfg), cfg.burn_in)
    err = np.linalg.norm(stats.empirical_cov - out.M) / np.linalg.norm(out.M)
    print(f"{samples:>9} steps (seed {seed}): relative error {err:.3%}")
print("With dt = tau*/1000 one million steps span only ~10^3 correlation times of")
print("the slow closed-loop mode, so errors of a few percent are expected.")
