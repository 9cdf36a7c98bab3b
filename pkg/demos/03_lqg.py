#!/usr/bin/env python3
"""The feedback gain as a limit of optimal (LQG) control.

With state cost ``P = k Omega^-1`` and control cost
``Q = tau*^2/(k eps^2) Omega^-1`` the Riccati gain ``Q^-1 Y`` tends to the
isotropic gain ``(k eps / tau*) I`` as ``k`` grows. For the strongly
squeezed pointer state the approach is slow: the drift's q-p coupling
leaves an off-diagonal gain that shrinks only like 1/k.
"""
from pointerlab import qbm
from pointerlab.control import FeedbackDesign, lqg_equivalence

T, eps = 1000.0, 0.01
model = qbm.qbm_model(T)
res = qbm.qbm_pointer_basis(T, eps)
print(f"pointer basis at eps = {eps}: beta* = {res.beta_star:.4f}, gamma* = {res.gamma_star:.2f}")
print(f"{'k':>8} {'gain deviation':>16} {'cheap-control residual':>24}")
for k in (10.0, 100.0, 1000.0, 1e4):
    eq = lqg_equivalence(model, res.omega_star, FeedbackDesign(k, eps, res.tau_mix_star))
    print(f"{k:8g} {eq.deviation:16.6g} {eq.cheap_control_residual:24.6g}")
    if k == 100.0:
        print("         K_lqg =", eq.K_lqg.round(3).tolist())
        print("         K     =", eq.K_design.round(3).tolist())
