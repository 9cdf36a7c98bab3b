"""Quantum Brownian motion (QBM) in the high-temperature limit.

Scaled units (damping rate, mass, k_B, hbar all one). The moment equations
have drift ``A = [[0, 1], [0, -1]]`` and diffusion ``D = diag(1/(8T), 2T)``.
Pure conditioned states are labelled by ``(beta, gamma)``:

    Omega = (1/4) [[alpha, beta], [beta, gamma]],  alpha = (beta^2 + 4) / gamma

For this model ``A Omega + Omega A^T + D`` does not depend on ``alpha``, so
the physically realizable (PR) region is a convex set in the
``(beta, gamma)`` plane bounded above by a quadratic curve ``gamma(beta)``.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .ensembles import (PointerBasisResult, SearchConfig, find_pointer_basis,
                        first_crossing, pure_single_mode_omega)
from .errors import (DegenerateFit, InputError, NegativeDiscriminant,
                     NoRealRoot, NonpositiveGamma)
from .lgmodel import GaussianState, LGModel, check_quantum_cov
from .parallel import ordered_map

__all__ = [
    "QBMParams",
    "BoundaryPoint",
    "qbm_model",
    "pr_lmi_value",
    "pr_region_contains",
    "boundary_gamma",
    "beta_max",
    "omega_from_point",
    "qbm_omega_rate",
    "qbm_moments",
    "qbm_detM",
    "qbm_mixing_time",
    "survival_probability",
    "survival_time_qbm",
    "power_law_fit",
    "qbm_pointer_basis",
    "pointer_basis_sweep",
]

T_MIN = 10.0
T_WARN = 100.0
ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class QBMParams:
    """Bath temperature; the model needs ``T >> 1``."""

    T: float

    def __post_init__(self):
        T = float(self.T)
        if not math.isfinite(T) or T < T_MIN:
            raise InputError(f"QBM needs T >= {T_MIN:g} (high-temperature limit), got {T}")
        if T < T_WARN:
            warnings.warn(f"T = {T:g} is low for the high-temperature QBM model",
                          RuntimeWarning, stacklevel=3)
        object.__setattr__(self, "T", T)


@dataclass(frozen=True)
class BoundaryPoint:
    beta: float
    gamma: float
    on_boundary: bool = False


def qbm_model(T):
    """QBM model built from its Hamiltonian and Lindblad operator.

    ``H = p^2/2 + (qp + pq)/4`` and ``c = sqrt(2T) q + i p / sqrt(8T)``.
    """
    T = QBMParams(T).T
    G = np.array([[0.0, 0.5], [0.5, 1.0]])
    Ctilde = (np.array([[math.sqrt(2.0 * T), 0.0]]),
              np.array([[0.0, 1.0 / math.sqrt(8.0 * T)]]))
    return LGModel.from_hamiltonian(G, Ctilde, name=f"qbm(T={T:g})")


# ---------------------------------------------------------------------------
# PR region
# ---------------------------------------------------------------------------

def pr_lmi_value(beta, gamma, T):
    """Determinant of ``A Omega + Omega A^T + D`` (``>= 0`` inside the region).

    ``(1/(8T) + beta/2)(2T - gamma/2) - (gamma - beta)^2 / 16``.
    """
    return (1.0 / (8.0 * T) + 0.5 * beta) * (2.0 * T - 0.5 * gamma) \
        - (gamma - beta) ** 2 / 16.0


def _lmi_scale(beta, gamma, T):
    return abs(1.0 / (8.0 * T) + 0.5 * beta) * abs(2.0 * T - 0.5 * gamma) \
        + (gamma - beta) ** 2 / 16.0


def pr_region_contains(beta, gamma, T, tol=1e-12):
    """True iff the pure state at ``(beta, gamma)`` is physically realizable.

    Both diagonal entries and the determinant of the 2x2 LMI matrix must be
    non-negative (relative ``tol``), and the implied ``Omega`` must satisfy
    the uncertainty relation.
    """
    if not gamma > 0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    d1 = 1.0 / (8.0 * T) + 0.5 * beta
    d2 = 2.0 * T - 0.5 * gamma
    scale = max(_lmi_scale(beta, gamma, T), 1e-300)
    diag_scale = max(abs(d1), abs(d2), 1.0)
    if d1 < -tol * diag_scale or d2 < -tol * diag_scale:
        return False
    if pr_lmi_value(beta, gamma, T) < -tol * scale:
        return False
    return check_quantum_cov(omega_from_point(beta, gamma))


def beta_max(T):
    """Largest ``beta`` with a positive boundary ``gamma`` (about ``16 T``)."""
    return 8.0 * T + math.sqrt(64.0 * T * T + 4.0)


def boundary_gamma(beta, T):
    """Upper PR boundary: the larger root of

    ``gamma^2 + (2 beta + 1/T) gamma + beta^2 - 4 - 16 T beta = 0``,

    which is the equality case of :func:`pr_lmi_value`.

    Raises
    ------
    NoRealRoot
        If the quadratic has no positive root (``beta`` outside the region).
    """
    b = 2.0 * beta + 1.0 / T
    c = beta * beta - 4.0 - 16.0 * T * beta
    disc = b * b - 4.0 * c
    if disc < 0:
        raise NoRealRoot(f"no real boundary gamma for beta={beta}, T={T}")
    s = math.sqrt(disc)
    # larger root, written to avoid cancellation when b > 0
    g = -2.0 * c / (b + s) if b > 0 else 0.5 * (s - b)
    if not g > 0:
        raise NoRealRoot(f"no positive boundary gamma for beta={beta}, T={T}")
    return g


def omega_from_point(beta, gamma):
    """Pure conditioned covariance for ``(beta, gamma)``; ``det(2 Omega) = 1``."""
    return pure_single_mode_omega(beta, gamma)


def qbm_omega_rate(beta, gamma, T):
    """Decoherence rate ``-2 + gamma/(8T) + 2T alpha`` in closed form.

    Uses ``Omega^{-1} = [[gamma, -beta], [-beta, alpha]]``.
    """
    if not gamma > 0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    alpha = (beta * beta + 4.0) / gamma
    return -2.0 + gamma / (8.0 * T) + 2.0 * T * alpha


# ---------------------------------------------------------------------------
# closed-form unconditional dynamics
# ---------------------------------------------------------------------------

def qbm_moments(t, mean0, cov0, T):
    """Mean and covariance at time ``t`` of the unconditional QBM evolution.

    Closed forms, with ``E = exp(-t)``::

        q(t)   = q0 + p0 (1 - E),    p(t) = p0 E
        Vp(t)  = Vp0 E^2 + T (1 - E^2)
        Vq(t)  = Vq0 + t/(8T) + 2tT + 2 (Vqp0 + Vp0 - 2T)(1 - E) + (T - Vp0)(1 - E^2)
        Vqp(t) = Vqp0 E + Vp0 E (1 - E) + T (1 - E)^2
    """
    if t < 0:
        raise InputError("t must be non-negative")
    q0, p0 = np.asarray(mean0, dtype=float).reshape(2)
    cov0 = np.asarray(cov0, dtype=float)
    vq0, vqp0, vp0 = cov0[0, 0], 0.5 * (cov0[0, 1] + cov0[1, 0]), cov0[1, 1]
    E = math.exp(-t)
    om = -math.expm1(-t)          # 1 - E
    om2 = -math.expm1(-2.0 * t)   # 1 - E^2
    mean = np.array([q0 + p0 * om, p0 * E])
    vp = vp0 * E * E + T * om2
    vq = vq0 + t / (8.0 * T) + 2.0 * t * T \
        + 2.0 * (vqp0 + vp0 - 2.0 * T) * om + (T - vp0) * om2
    vqp = vqp0 * E + vp0 * E * om + T * om * om
    return GaussianState(mean, np.array([[vq, vqp], [vqp, vp]]))


def _h3(t):
    """``e^{2t} - 4 e^t + 3 + 2t``, accurate for small ``t`` (``~ 2t^3/3``)."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 2e-2
    ts = np.where(small, t, 0.0)
    # sum_{n>=3} (2^n - 4) t^n / n!
    series = sum((2.0 ** n - 4.0) * ts ** n / math.factorial(n) for n in range(3, 12))
    tl = np.where(small, 1.0, t)
    direct = np.expm1(2.0 * tl) - 4.0 * np.expm1(tl) + 2.0 * tl
    return np.where(small, series, direct)


def qbm_detM(t, beta, gamma, T):
    """Closed-form ``det(2 V(t))`` starting from the pure state ``(beta, gamma)``.

    ::

        det 2V = e^{-2t} / (8 gamma T) * { 8(4 + beta^2)(e^{2t} - 1) T^2
                 + gamma^2 [t + 8(3 - 4e^t + e^{2t} + 2t) T^2]
                 + 4 gamma T [2 + 4 beta (e^t - 1)^2 T - 32 (e^t - 1)^2 T^2
                              + (e^{2t} - 1)(1 + 16 T^2) t] }

    Accepts scalar or array ``t``.
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0):
        raise NonpositiveGamma("gamma must be positive")
    t = np.asarray(t, dtype=float)
    em = np.expm1(t)
    e2m = np.expm1(2.0 * t)
    T2 = T * T
    bracket = (8.0 * (4.0 + beta * beta) * e2m * T2
               + gamma * gamma * (t + 8.0 * _h3(t) * T2)
               + 4.0 * gamma * T * (2.0 + 4.0 * beta * em * em * T
                                    - 32.0 * em * em * T2
                                    + e2m * (1.0 + 16.0 * T2) * t))
    out = np.exp(-2.0 * t) / (8.0 * gamma * T) * bracket
    return float(out) if out.ndim == 0 else out


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps must lie in (0, 1), got {eps}")


def qbm_mixing_time(beta, gamma, T, eps, rtol=ROOT_RTOL):
    """Smallest ``tau`` with ``qbm_detM(tau) = (1 - eps)^-2``."""
    _check_eps(eps)
    threshold = 1.0 / (1.0 - eps) ** 2
    scale = 10.0 / abs(qbm_omega_rate(beta, gamma, T))

    def g(t):
        return qbm_detM(t, beta, gamma, T) - threshold

    return first_crossing(g, scale, rtol=rtol)


# ---------------------------------------------------------------------------
# survival
# ---------------------------------------------------------------------------

def _survival_G(tau, gamma, beta, T):
    # Grouped in powers of u = e^tau - 1 and tau so that G(0) = 16 T gamma is
    # exact; the three O(T^3 gamma) exponential terms otherwise cancel at
    # small tau and cost about log10(T^2) digits.
    u = math.expm1(tau)
    c = 16.0 * T * T + 1.0
    b2, g2 = beta * beta, gamma * gamma
    lin = 16.0 * T * (T * b2 - T * g2 + 4.0 * T + gamma)
    quad = -T * (64.0 * T * T * gamma - 16.0 * T * b2 - 16.0 * T * beta * gamma - 64.0 * T
                 + b2 * gamma + 2.0 * beta * g2 + g2 * gamma)
    return (16.0 * T * gamma + tau * g2 * c
            + u * (lin + tau * gamma * (4.0 * T + gamma) * c)
            + u * u * (quad + 4.0 * tau * T * gamma * c))


def survival_probability(tau, beta, gamma, T):
    """Average overlap of a conditioned state with its evolved image.

    ``S = 4 sqrt(R / G)`` with ``R = e^{2 tau} gamma T`` and ``G`` a
    polynomial-exponential expression in ``(tau, gamma, beta, T)``. The
    average is over initial momenta ``p0 ~ N(0, T - gamma/4)``.

    Raises
    ------
    NegativeDiscriminant
        If ``G <= 0``, which means the inputs are outside the model's regime.
    """
    if tau < 0:
        raise InputError("tau must be non-negative")
    if not gamma > 0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    G = _survival_G(tau, gamma, beta, T)
    if not G > 0:
        raise NegativeDiscriminant(f"G = {G:.6g} <= 0 at tau={tau}, beta={beta}, gamma={gamma}")
    R = math.exp(2.0 * tau) * gamma * T
    return 4.0 * math.sqrt(R / G)


def survival_time_qbm(beta, gamma, T, eps, rtol=ROOT_RTOL):
    """Smallest ``tau`` with ``survival_probability(tau) = 1 - eps``."""
    _check_eps(eps)
    target = 1.0 - eps
    scale = 10.0 / abs(qbm_omega_rate(beta, gamma, T))

    def g(t):
        return target - survival_probability(t, beta, gamma, T)

    return first_crossing(g, scale, rtol=rtol)


# ---------------------------------------------------------------------------
# pointer basis and the power law
# ---------------------------------------------------------------------------

DEFAULT_BETA_RANGE = (0.0, 20.0)


def qbm_pointer_basis(T, eps, objective="exact", beta_range=DEFAULT_BETA_RANGE,
                      grid_points=201, refine_tol=1e-10):
    """Pointer basis of QBM at temperature ``T``.

    Searches along the upper PR boundary using the closed-form boundary and
    mixing time. ``objective="exact"`` maximizes the exact mixing time;
    ``"asymptotic"`` minimizes the decoherence rate.
    """
    model = qbm_model(T)
    T = float(T)
    hi = min(beta_range[1], beta_max(T) * (1.0 - 1e-12))
    cfg = SearchConfig(beta_range=(beta_range[0], hi), boundary_only=True,
                       grid_points=grid_points, refine_tol=refine_tol,
                       objective=objective)
    return find_pointer_basis(
        model, eps, cfg,
        boundary=lambda b: boundary_gamma(b, T),
        mixing_time=lambda b, g: qbm_mixing_time(b, g, T, eps))


def _pointer_task(args):
    T, eps, objective, beta_range, grid_points = args
    return qbm_pointer_basis(T, eps, objective, beta_range, grid_points)


def pointer_basis_sweep(Ts, eps, objective="exact", beta_range=DEFAULT_BETA_RANGE,
                        grid_points=201, workers=None):
    """Pointer basis for each temperature, in input order."""
    tasks = [(float(T), eps, objective, tuple(beta_range), grid_points) for T in Ts]
    return ordered_map(_pointer_task, tasks, workers)


def power_law_fit(samples):
    """OLS fit of ``log10 tau = a + b log10 T``.

    Parameters
    ----------
    samples : sequence of (T, tau) pairs

    Returns
    -------
    a, b, stderr_a, stderr_b : float
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise InputError("power_law_fit needs at least three (T, tau) pairs")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise InputError("T and tau must be positive and finite")
    x, y = np.log10(data[:, 0]), np.log10(data[:, 1])
    if np.ptp(x) == 0:
        raise DegenerateFit("all temperatures are equal")
    res = stats.linregress(x, y)
    return (float(res.intercept), float(res.slope),
            float(res.intercept_stderr), float(res.stderr))
