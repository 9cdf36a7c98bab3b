"""Linear feedback onto the pointer state and its equivalence to LQG control.

With a conditioned ensemble ``Omega`` the filtered mean obeys

    dx = N x dt + F^T dw,        N = A - K,  F^T F = A Omega + Omega A^T + D

With the feedback gain ``K = (k eps / tau*) I``, ``N`` is Hurwitz. The
means then settle into a stationary spread ``M`` with
``N M + M N^T + F^T F = 0``, and the unconditioned state becomes
``V_ss = Omega + M``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .ensembles import (mixing_time_asymptotic, mixing_time_exact,
                        noise_covariance)
from .errors import InputError, NoRoot, NotHurwitz
from .lgmodel import check_quantum_cov, is_hurwitz
from .matops import (as_square, care_residual, is_psd, solve_care,
                     solve_lyapunov, symmetrize)

__all__ = [
    "FeedbackDesign",
    "FeedbackOutcome",
    "LQGEquivalence",
    "feedback_gain",
    "closed_loop_drift",
    "mean_covariance",
    "clip_psd",
    "measurement_noise_covariance",
    "evaluate_feedback",
    "lqg_equivalence",
]

CLIP_TOL = 1e-10


def feedback_gain(k, eps, tau_star, dim=2):
    """``(k eps / tau_star) I_dim``."""
    if not tau_star > 0:
        raise InputError("tau_star must be positive")
    if k < 0:
        raise InputError("feedback strength k must be non-negative")
    return (k * eps / tau_star) * np.eye(dim)


@dataclass(frozen=True)
class FeedbackDesign:
    """Feedback strength ``k`` measured against the pointer-basis mixing time."""

    k: float
    eps: float
    tau_star: float
    dim: int = 2

    def __post_init__(self):
        if self.k < 0:
            raise InputError("feedback strength k must be non-negative")
        if not 0 < self.eps < 1:
            raise InputError("eps must lie in (0, 1)")
        if not self.tau_star > 0:
            raise InputError("tau_star must be positive")

    @property
    def rate(self):
        return self.k * self.eps / self.tau_star

    @property
    def K(self):
        return feedback_gain(self.k, self.eps, self.tau_star, self.dim)


def closed_loop_drift(A, K):
    A = as_square(A, "A")
    K = as_square(K, "K")
    if A.shape != K.shape:
        raise InputError("A and K differ in shape")
    return A - K


def clip_psd(M, tol=CLIP_TOL):
    """Zero eigenvalues in ``[-tol * max(1, ||M||), 0)``; larger negatives are kept."""
    M = symmetrize(as_square(M))
    w, U = np.linalg.eigh(M)
    floor = -tol * max(1.0, float(np.abs(w).max()))
    w = np.where((w < 0) & (w >= floor), 0.0, w)
    return symmetrize((U * w) @ U.T)


def mean_covariance(N, noise_cov):
    """Stationary covariance of the conditional means, ``N M + M N^T + noise_cov = 0``.

    Raises
    ------
    NotHurwitz
        If ``N`` is not Hurwitz; there is no stationary spread then.
    """
    N = as_square(N, "N")
    if not is_hurwitz(N):
        raise NotHurwitz("closed-loop drift is not Hurwitz; no stationary mean spread")
    return solve_lyapunov(N, clip_psd(noise_cov))


def measurement_noise_covariance(model, omega, tol=1e-8):
    """``F^T F`` with ``F = C Omega + Gamma`` from the model's measurement data.

    Also checks it against ``A Omega + Omega A^T + D`` to relative ``tol``.
    Returns ``None`` when the model has no explicit measurement.
    """
    if model.C_meas is None or model.Gamma is None:
        return None
    F = np.atleast_2d(model.C_meas) @ omega + np.atleast_2d(model.Gamma)
    FtF = F.T @ F
    ref = noise_covariance(model, omega)
    if np.linalg.norm(FtF - ref) > tol * (1.0 + np.linalg.norm(ref)):
        raise InputError("C_meas/Gamma are inconsistent with A Omega + Omega A^T + D")
    return FtF


@dataclass(eq=False)
class FeedbackOutcome:
    N: np.ndarray
    M: np.ndarray
    V_ss: np.ndarray
    fidelity_exact: float
    fidelity_approx: float
    purity_exact: float
    purity_approx: float
    tau_asymptotic: float
    tau_exact: float
    design: FeedbackDesign = None

    @property
    def infidelity_exact(self):
        return 1.0 - self.fidelity_exact

    @property
    def infidelity_approx(self):
        return 1.0 - self.fidelity_approx

    def to_record(self):
        """Flat dict of plain floats, suitable for one CSV row or JSON object."""
        rec = {}
        if self.design is not None:
            rec.update(k=self.design.k, eps=self.design.eps, tau_star=self.design.tau_star)
        rec.update(
            fidelity_exact=self.fidelity_exact,
            fidelity_approx=self.fidelity_approx,
            infidelity_exact=self.infidelity_exact,
            infidelity_approx=self.infidelity_approx,
            purity_exact=self.purity_exact,
            purity_approx=self.purity_approx,
            tau_asymptotic=self.tau_asymptotic,
            tau_exact=self.tau_exact,
        )
        for name in ("N", "M", "V_ss"):
            mat = getattr(self, name)
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    rec[f"{name}_{i}{j}"] = float(mat[i, j])
        return rec


def evaluate_feedback(model, omega, design, exact_tau=True):
    """Steady state under feedback and its fidelity/purity, exact and approximate.

    The approximations ``F ~ 1 - tau*/(4 k tau)`` and ``P ~ 1 - tau*/(2 k tau)``
    use ``tau = 2 eps / omega_rate(Omega)``, the small-``eps`` mixing time of
    ``omega``, because that is the order to which they are expansions. The
    exact mixing time of ``omega`` is reported alongside (``nan`` when
    ``exact_tau`` is false or no root exists).

    Raises
    ------
    NotHurwitz
        If the closed loop is not stable (for example ``k = 0`` on QBM).
    """
    omega = symmetrize(as_square(omega, "omega"))
    if not design.k > 0:
        raise NotHurwitz("k = 0 leaves the open-loop drift, which has no stationary state")
    noise = measurement_noise_covariance(model, omega)
    if noise is None:
        noise = noise_covariance(model, omega)
    N = closed_loop_drift(model.A, design.K)
    M = mean_covariance(N, noise)
    V_ss = omega + M
    f_exact = 1.0 / math.sqrt(np.linalg.det(V_ss + omega))
    p_exact = 1.0 / math.sqrt(np.linalg.det(2.0 * V_ss))
    tau_a = mixing_time_asymptotic(model, omega, design.eps)
    ratio = design.tau_star / tau_a
    tau_e = math.nan
    if exact_tau:
        try:
            tau_e = mixing_time_exact(model, omega, design.eps)
        except NoRoot:
            pass
    return FeedbackOutcome(
        N=N, M=M, V_ss=V_ss,
        fidelity_exact=min(1.0, f_exact),
        fidelity_approx=1.0 - ratio / (4.0 * design.k),
        purity_exact=min(1.0, p_exact),
        purity_approx=1.0 - ratio / (2.0 * design.k),
        tau_asymptotic=tau_a, tau_exact=tau_e, design=design)


def controlled_state_is_physical(outcome, Z=None):
    return check_quantum_cov(outcome.V_ss, Z)


@dataclass(eq=False)
class LQGEquivalence:
    P_cost: np.ndarray
    Q_cost: np.ndarray
    Y: np.ndarray
    K_lqg: np.ndarray
    K_design: np.ndarray
    deviation: float
    cheap_control_residual: float
    care_residual: float
    Y_expected: np.ndarray

    def to_record(self):
        return {
            "deviation": self.deviation,
            "cheap_control_residual": self.cheap_control_residual,
            "care_residual": self.care_residual,
            "Y_deviation": float(np.linalg.norm(self.Y - self.Y_expected)
                                 / np.linalg.norm(self.Y_expected)),
            "K_lqg": self.K_lqg.tolist(),
            "K_design": self.K_design.tolist(),
        }


def lqg_equivalence(model, omega, design):
    """Compare the feedback gain with the LQG gain for matched cost weights.

    State weight ``P = k Omega^{-1}`` and control weight
    ``Q = (tau*^2 / (k eps^2)) Omega^{-1}``. The stabilising Riccati solution
    ``Y`` gives ``K_lqg = Q^{-1} Y``, which tends to ``(k eps / tau*) I`` when
    ``eps`` is small.

    ``deviation`` is ``||K_lqg - K|| / ||K||``. ``cheap_control_residual`` is
    ``||P - Y Q^{-1} Y|| / ||P||``, i.e. how far the solution is from the
    limit where the ``A`` terms of the Riccati equation are negligible.
    """
    omega = symmetrize(as_square(omega, "omega"))
    if not design.k > 0:
        raise InputError("LQG comparison needs k > 0")
    inv = np.linalg.inv(omega)
    P = design.k * inv
    Q = (design.tau_star ** 2 / (design.k * design.eps ** 2)) * inv
    if not (is_psd(symmetrize(P)) and np.linalg.eigvalsh(symmetrize(Q))[0] > 0):
        raise InputError("cost weights are not positive definite")
    Y = solve_care(model.A, symmetrize(P), symmetrize(Q))
    K_lqg = np.linalg.solve(Q, Y)
    K = design.K
    dev = float(np.linalg.norm(K_lqg - K) / np.linalg.norm(K))
    cheap = float(np.linalg.norm(P - Y @ np.linalg.solve(Q, Y)) / np.linalg.norm(P))
    return LQGEquivalence(
        P_cost=P, Q_cost=Q, Y=Y, K_lqg=K_lqg, K_design=K, deviation=dev,
        cheap_control_residual=cheap,
        care_residual=care_residual(model.A, P, Q, Y),
        Y_expected=(design.tau_star / design.eps) * inv)
