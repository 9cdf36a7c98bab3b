"""Physically realizable ensembles, mixing/survival times and the pointer basis.

A uniform Gaussian ensemble is labelled by the conditioned covariance
``Omega``. It is physically realizable (PR) iff

    A Omega + Omega A^T + D >= 0      (some monitoring can produce it)
    Omega + (i/2) Z >= 0              (each member is a quantum state)

The pointer basis is the pure PR ensemble that decoheres most slowly.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.linalg import expm
from scipy.optimize import brentq, minimize_scalar

from .errors import (DimensionMismatch, EmptyFeasibleSet, ImpureInitial,
                     InputError, NoRealRoot, NonDecohering, NonpositiveGamma,
                     NoRoot, NumericalError, ParseError, SingularOmega,
                     SingularSum)
from .lgmodel import GaussianState, check_quantum_cov
from .matops import PSD_TOL, as_square, is_psd, propagate_covariance, symmetrize

__all__ = [
    "PRStatus",
    "UnravellingCandidate",
    "SearchConfig",
    "PointerBasisResult",
    "noise_covariance",
    "lmi_min_eigenvalue",
    "is_physically_realizable",
    "pure_single_mode_omega",
    "omega_rate",
    "mixing_time_exact",
    "mixing_time_asymptotic",
    "find_pointer_basis",
    "gaussian_overlap",
    "average_survival_probability",
    "survival_time",
    "first_crossing",
]

ROOT_RTOL = 1e-10
PURITY_TOL = 1e-6


class PRStatus(str, Enum):
    PR = "PR"
    VIOLATES_LMI = "violates_LMI"
    VIOLATES_UNCERTAINTY = "violates_uncertainty"
    UNKNOWN = "unknown"


def _omega_for(model, omega):
    omega = symmetrize(as_square(omega, "omega"))
    if omega.shape != model.A.shape:
        raise DimensionMismatch(
            f"omega is {omega.shape}, model is {model.A.shape}")
    return omega


def noise_covariance(model, omega):
    """``A Omega + Omega A^T + D``, i.e. ``F^T F`` of the long-time filter."""
    omega = _omega_for(model, omega)
    return symmetrize(model.A @ omega + omega @ model.A.T + model.D)


def lmi_min_eigenvalue(model, omega):
    return float(np.linalg.eigvalsh(noise_covariance(model, omega))[0])


def is_physically_realizable(model, omega, tol=PSD_TOL):
    """Classify ``omega`` as PR or by the first constraint it violates."""
    omega = _omega_for(model, omega)
    if not check_quantum_cov(omega, model.Z, tol=tol):
        return PRStatus.VIOLATES_UNCERTAINTY
    if not is_psd(noise_covariance(model, omega), tol=tol):
        return PRStatus.VIOLATES_LMI
    return PRStatus.PR


@dataclass(eq=False)
class UnravellingCandidate:
    omega: np.ndarray
    pr_status: PRStatus = PRStatus.UNKNOWN
    params: tuple = ()

    @classmethod
    def evaluate(cls, model, omega, params=(), tol=PSD_TOL):
        omega = _omega_for(model, omega)
        return cls(omega, is_physically_realizable(model, omega, tol), tuple(params))


def pure_single_mode_omega(beta, gamma):
    """Pure single-mode covariance ``(1/4) [[alpha, beta], [beta, gamma]]``.

    ``alpha = (beta^2 + 4) / gamma`` saturates the uncertainty relation, so
    ``det(2 Omega) = 1``.
    """
    if not gamma > 0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    alpha = (beta * beta + 4.0) / gamma
    return 0.25 * np.array([[alpha, beta], [beta, gamma]])


def omega_rate(model, omega):
    """Decoherence rate ``2 tr(A) + tr(D Omega^{-1})``."""
    omega = _omega_for(model, omega)
    try:
        inv = np.linalg.inv(omega)
    except np.linalg.LinAlgError as exc:
        raise SingularOmega("omega is singular") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularOmega("omega is singular")
    return float(2.0 * np.trace(model.A) + np.trace(model.D @ inv))


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps must lie in (0, 1), got {eps}")


def _check_pure(omega, tol):
    d = float(np.linalg.det(2.0 * omega))
    if abs(d - 1.0) > tol:
        raise ImpureInitial(f"det(2 Omega) = {d:.12g}, expected 1")


def first_crossing(g, t_scale, rtol=ROOT_RTOL, max_doublings=30):
    """Smallest ``t > 0`` with ``g(t) = 0`` for ``g(0) < 0``.

    The bracket is found by walking ``t = t_scale * 2**j`` upward from a
    point far below ``t_scale`` and stops at the first sign change, so an
    early crossing is not skipped by an over-wide initial bracket. The walk
    gives up at ``t_scale * 2**max_doublings``.
    """
    if not (t_scale > 0 and math.isfinite(t_scale)):
        t_scale = 1.0
    t_max = t_scale * 2.0 ** max_doublings
    lo = 0.0
    t = t_scale * 2.0 ** -24
    while t <= t_max:
        if g(t) >= 0:
            return brentq(g, lo, t, xtol=1e-300, rtol=rtol, maxiter=500)
        lo = t
        t *= 2.0
    raise NoRoot("threshold never reached", t_max=t_max)


def _time_scale(model, omega):
    try:
        w = abs(omega_rate(model, omega))
    except SingularOmega:
        w = 0.0
    return 10.0 / w if w > 1e-300 else 1.0


def mixing_time_exact(model, omega, eps, rtol=ROOT_RTOL, purity_tol=PURITY_TOL):
    """Smallest ``tau`` with ``det(2 V(tau)) = (1 - eps)^-2``, ``V(0) = Omega``.

    ``V`` evolves unconditionally, ``dV/dt = A V + V A^T + D``.
    """
    _check_eps(eps)
    omega = _omega_for(model, omega)
    _check_pure(omega, purity_tol)
    threshold = 1.0 / (1.0 - eps) ** 2
    A, D = model.A, model.D

    def g(t):
        return np.linalg.det(2.0 * propagate_covariance(A, D, omega, t)) - threshold

    return first_crossing(g, _time_scale(model, omega), rtol=rtol)


def mixing_time_asymptotic(model, omega, eps):
    """Small-``eps`` mixing time ``2 eps / omega_rate``."""
    _check_eps(eps)
    w = omega_rate(model, omega)
    if not w > 0:
        raise NonDecohering(f"decoherence rate {w:.6g} is not positive")
    return 2.0 * eps / w


# ---------------------------------------------------------------------------
# pointer-basis search
# ---------------------------------------------------------------------------

_OBJECTIVES = ("asymptotic", "exact")


@dataclass
class SearchConfig:
    """Search settings for :func:`find_pointer_basis`.

    The candidate family is the pure single-mode parametrisation
    ``Omega(beta, gamma)``. With ``boundary_only`` the search runs along the
    upper PR boundary ``gamma(beta)``; otherwise a ``beta x gamma`` grid over
    the feasible region is scanned first and the best point is then refined
    along the boundary.
    """

    beta_range: tuple = (0.0, 10.0)
    gamma_range: tuple = None
    boundary_only: bool = True
    grid_points: int = 201
    refine_tol: float = 1e-10
    objective: str = "asymptotic"
    spacing: str = "linear"

    def __post_init__(self):
        self.beta_range = tuple(float(x) for x in self.beta_range)
        if self.gamma_range is not None:
            self.gamma_range = tuple(float(x) for x in self.gamma_range)
        self.validate()

    def validate(self):
        lo, hi = self.beta_range
        if not lo < hi:
            raise InputError("beta_range must satisfy lo < hi")
        if self.gamma_range is not None:
            glo, ghi = self.gamma_range
            if not 0 <= glo < ghi:
                raise InputError("gamma_range must satisfy 0 <= lo < hi")
        elif not self.boundary_only:
            raise InputError("a 2-D search needs gamma_range")
        if int(self.grid_points) < 3:
            raise InputError("grid_points must be at least 3")
        if self.objective not in _OBJECTIVES:
            raise InputError(f"objective must be one of {_OBJECTIVES}")
        if self.spacing not in ("linear", "log"):
            raise InputError("spacing must be 'linear' or 'log'")
        if not self.refine_tol > 0:
            raise InputError("refine_tol must be positive")

    def beta_grid(self):
        lo, hi = self.beta_range
        n = int(self.grid_points)
        if self.spacing == "linear":
            return np.linspace(lo, hi, n)
        # log spacing over (lo, hi]; a zero lower end is kept as the first node
        start = lo if lo > 0 else hi * 1e-6
        grid = np.geomspace(start, hi, n - (lo <= 0))
        return np.concatenate([[lo], grid]) if lo <= 0 else grid

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown SearchConfig fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc


@dataclass(eq=False)
class PointerBasisResult:
    omega_star: np.ndarray
    tau_mix_star: float
    omega_rate: float
    beta_star: float
    gamma_star: float
    eps: float
    objective: str
    search_trace: list = field(default_factory=list, repr=False)

    @property
    def tau_mix_asymptotic(self):
        return 2.0 * self.eps / self.omega_rate

    def summary(self):
        return {
            "eps": self.eps,
            "objective": self.objective,
            "beta_star": self.beta_star,
            "gamma_star": self.gamma_star,
            "tau_mix_star": self.tau_mix_star,
            "omega_star": self.omega_rate,
            "tau_mix_asymptotic": self.tau_mix_asymptotic,
        }


def _numeric_upper_boundary(model, beta, gamma_range, n_scan=200):
    """Largest PR ``gamma`` at fixed ``beta`` found by scanning then bisecting."""
    glo, ghi = gamma_range
    gammas = np.geomspace(max(glo, ghi * 1e-9), ghi, n_scan)

    def lam(g):
        return lmi_min_eigenvalue(model, pure_single_mode_omega(beta, g))

    vals = np.array([lam(g) for g in gammas])
    ok = vals >= 0
    if not ok.any():
        raise NoRealRoot(f"no PR gamma for beta={beta}")
    last = np.nonzero(ok)[0][-1]
    if last == len(gammas) - 1:
        raise NoRealRoot("PR region reaches the end of gamma_range")
    return brentq(lam, gammas[last], gammas[last + 1], xtol=1e-14, rtol=1e-14)


def find_pointer_basis(model, eps, search=None, boundary=None, mixing_time=None):
    """Pure PR ensemble with the slowest decoherence.

    Parameters
    ----------
    model : LGModel
        Single-mode model.
    eps : float
        Purity threshold defining the mixing time.
    search : SearchConfig, optional
    boundary : callable, optional
        ``boundary(beta) -> gamma`` for the upper PR boundary. Defaults to a
        numerical boundary, which needs ``search.gamma_range``.
    mixing_time : callable, optional
        ``mixing_time(beta, gamma) -> tau`` replacing the generic
        propagator-based root find for the ``"exact"`` objective.

    Returns
    -------
    PointerBasisResult
        With ``objective="asymptotic"`` the decoherence rate ``omega_rate`` is
        minimised and ``tau_mix_star = 2 eps / omega_rate``. With
        ``objective="exact"`` the exact mixing time is maximised.

    Raises
    ------
    EmptyFeasibleSet
        If no grid candidate is PR.
    """
    _check_eps(eps)
    if model.n_modes != 1:
        raise InputError("pointer-basis search supports single-mode models only")
    search = search or SearchConfig()
    if boundary is None:
        if search.gamma_range is None:
            raise InputError("numerical boundary needs search.gamma_range")

        def boundary(beta):
            return _numeric_upper_boundary(model, beta, search.gamma_range)

    def exact_tau(beta, gamma):
        if mixing_time is not None:
            return mixing_time(beta, gamma)
        return mixing_time_exact(model, pure_single_mode_omega(beta, gamma), eps)

    def objective(beta, gamma):
        omega = pure_single_mode_omega(beta, gamma)
        if search.objective == "asymptotic":
            return omega_rate(model, omega)
        try:
            return -exact_tau(beta, gamma)
        except NumericalError:
            return math.inf

    def on_boundary(beta):
        try:
            return boundary(beta)
        except (NoRealRoot, NonpositiveGamma):
            return None

    trace = []
    best = None  # (objective, beta, gamma, grid index)

    def consider(beta, gamma, idx):
        nonlocal best
        cand = UnravellingCandidate.evaluate(
            model, pure_single_mode_omega(beta, gamma), params=(beta, gamma))
        if cand.pr_status is not PRStatus.PR:
            trace.append((cand, math.nan))
            return
        val = objective(beta, gamma)
        trace.append((cand, val))
        # strict '<' keeps the first (smallest beta, then gamma) among ties
        if math.isfinite(val) and (best is None or val < best[0]):
            best = (val, beta, gamma, idx)

    betas = search.beta_grid()
    if search.boundary_only:
        for i, b in enumerate(betas):
            g = on_boundary(b)
            if g is not None and g > 0:
                consider(b, g, i)
    else:
        gammas = np.linspace(*search.gamma_range, int(search.grid_points))
        for i, b in enumerate(betas):
            for g in gammas:
                if g > 0:
                    consider(b, g, i)
    if best is None:
        raise EmptyFeasibleSet("no physically realizable candidate on the grid")

    # refine along the boundary around the best grid beta
    i = best[3]
    lo = betas[max(i - 1, 0)]
    hi = betas[min(i + 1, len(betas) - 1)]

    def along(beta):
        g = on_boundary(beta)
        if g is None or not g > 0:
            return math.inf
        val = objective(beta, g)
        return val if math.isfinite(val) else math.inf

    if hi > lo:
        res = minimize_scalar(along, bounds=(lo, hi), method="bounded",
                              options={"xatol": search.refine_tol * max(1.0, abs(best[1]))})
        if res.fun <= best[0]:
            g = on_boundary(res.x)
            best = (res.fun, float(res.x), g, i)

    val, beta, gamma, _ = best
    omega = pure_single_mode_omega(beta, gamma)
    rate = omega_rate(model, omega)
    if search.objective == "asymptotic":
        tau = 2.0 * eps / rate
    else:
        tau = -val
    return PointerBasisResult(omega, float(tau), rate, float(beta), float(gamma),
                              eps, search.objective, trace)


# ---------------------------------------------------------------------------
# overlaps and survival
# ---------------------------------------------------------------------------

def gaussian_overlap(s1, s2):
    """``(2 pi)^n`` times the integral of the product of two Wigner functions.

    ``exp(-dmu^T (V1 + V2)^{-1} dmu / 2) / sqrt(det(V1 + V2))``; for pure
    states this is ``Tr(rho1 rho2)``.
    """
    S = s1.cov + s2.cov
    det = float(np.linalg.det(S))
    if not det > 0 or not np.isfinite(det):
        raise SingularSum("V1 + V2 is singular")
    dmu = s1.mean - s2.mean
    return float(np.exp(-0.5 * dmu @ np.linalg.solve(S, dmu)) / np.sqrt(det))


def _quadrature_nodes(mean_cov, n_points):
    """Nodes and weights for an expectation over ``N(0, mean_cov)``."""
    w, U = np.linalg.eigh(symmetrize(mean_cov))
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise InputError("mean_cov is not PSD")
    keep = w > 1e-14 * max(1.0, abs(w[-1]))
    dirs = U[:, keep] * np.sqrt(w[keep])
    r = dirs.shape[1]
    d = mean_cov.shape[0]
    if r == 0:
        return np.zeros((1, d)), np.ones(1)
    if r > 3:
        raise InputError("quadrature over more than three mean directions is not supported")
    z, wz = hermegauss(n_points)
    wz = wz / wz.sum()
    grids = np.meshgrid(*([z] * r), indexing="ij")
    wgrids = np.meshgrid(*([wz] * r), indexing="ij")
    Zs = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return Zs @ dirs.T, W


def average_survival_probability(model, omega, tau, mean_cov, n_points=21,
                                 adapt_tol=1e-8, max_points=1344):
    """Mean overlap between a conditioned state and its evolved image.

    The conditioned state has covariance ``omega`` and a random mean drawn
    from ``N(0, mean_cov)``; it evolves unconditionally for ``tau``. The
    average over means uses Gauss-Hermite quadrature, doubling the number of
    nodes until successive results differ by less than ``adapt_tol``.
    """
    omega = _omega_for(model, omega)
    mean_cov = as_square(mean_cov, "mean_cov")
    V = propagate_covariance(model.A, model.D, omega, tau)
    Phi = expm(model.A * tau)
    S = omega + V
    det = float(np.linalg.det(S))
    if not det > 0:
        raise SingularSum("Omega + V(tau) is singular")
    L = Phi - np.eye(model.dim)
    K = L.T @ np.linalg.solve(S, L)

    def average(n):
        nodes, weights = _quadrature_nodes(mean_cov, n)
        quad = np.einsum("ij,jk,ik->i", nodes, K, nodes)
        return float(weights @ np.exp(-0.5 * quad)) / math.sqrt(det)

    prev = average(n_points)
    n = n_points
    while n < max_points:
        n *= 2
        cur = average(n)
        if abs(cur - prev) < adapt_tol:
            return cur
        prev = cur
    return prev


def survival_time(model, omega, eps, mean_cov, rtol=ROOT_RTOL,
                  purity_tol=PURITY_TOL, n_points=21):
    """Smallest ``tau`` where the average survival probability reaches ``1 - eps``."""
    _check_eps(eps)
    omega = _omega_for(model, omega)
    _check_pure(omega, purity_tol)
    target = 1.0 - eps

    def g(t):
        return target - average_survival_probability(model, omega, t, mean_cov, n_points)

    return first_crossing(g, _time_scale(model, omega), rtol=rtol)
