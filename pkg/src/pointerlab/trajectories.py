"""Monte Carlo simulation of the long-time conditional mean.

The filtered mean obeys the linear SDE ``dx = N x dt + B dW`` with
``B B^T = A Omega + Omega A^T + D``. Paths are generated by Euler-Maruyama
from a counter-based generator (Philox 4x64 via ``numpy.random.Philox``).
Standard normals come from a Box-Muller transform of its uniform stream,
so a seed fixes the path bit for bit.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensembles import noise_covariance
from .errors import Divergence, InputError, InsufficientSamples
from .matops import (as_square, flow_and_gramian, psd_sqrt, solve_lyapunov,
                     symmetrize)

__all__ = [
    "TrajectoryConfig",
    "ErgodicStats",
    "noise_factor",
    "standard_normals",
    "simulate_mean",
    "simulate_exact_ou",
    "ergodic_stats",
    "default_config",
    "write_path_csv",
]

DIVERGENCE_NORM = 1e12
DT_WARN = 0.1
_CHUNK = 65536


@dataclass
class TrajectoryConfig:
    dt: float
    steps: int
    burn_in: int = 0
    seed: int = 0
    initial_mean: np.ndarray = None

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError("dt must be positive")
        self.steps = int(self.steps)
        self.burn_in = int(self.burn_in)
        if self.steps < 1 or self.burn_in < 0 or not self.steps > self.burn_in:
            raise InputError("need steps > burn_in >= 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InputError("seed must be an unsigned 64-bit integer")
        self.seed = int(self.seed)


@dataclass(eq=False)
class ErgodicStats:
    empirical_mean: np.ndarray
    empirical_cov: np.ndarray
    n_samples: int
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "empirical_mean": self.empirical_mean.tolist(),
            "empirical_cov": self.empirical_cov.tolist(),
            "n_samples": self.n_samples,
        }


def noise_factor(model, omega):
    """Square ``B`` with ``B B^T = A Omega + Omega A^T + D`` (PSD square root)."""
    return psd_sqrt(noise_covariance(model, omega), tol=1e-10)


def _generator(seed):
    return np.random.Generator(np.random.Philox(seed))


def standard_normals(gen, n):
    """``n`` standard normals by Box-Muller on ``gen``'s uniform stream."""
    m = (n + 1) // 2
    u = gen.random((m, 2))
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))   # 1 - u lies in (0, 1]
    theta = 2.0 * math.pi * u[:, 1]
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]


def _initial(cfg, d):
    if cfg.initial_mean is None:
        return np.zeros(d)
    x0 = np.asarray(cfg.initial_mean, dtype=float).reshape(-1)
    if x0.shape[0] != d:
        raise InputError("initial_mean has the wrong length")
    return x0


def simulate_mean(drift, B, cfg):
    """Euler-Maruyama path ``x_{n+1} = x_n + drift x_n dt + B sqrt(dt) xi_n``.

    Returns an array of shape ``(steps + 1, d)`` including the initial point.

    Raises
    ------
    Divergence
        If ``||x||`` exceeds ``1e12`` (the drift is not stable).
    """
    drift = as_square(drift, "drift")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = drift.shape[0]
    if B.shape[0] != d:
        raise InputError("B must have as many rows as drift")
    dt_norm = cfg.dt * np.linalg.norm(drift, 2)
    if dt_norm > DT_WARN:
        warnings.warn(f"dt * ||drift|| = {dt_norm:.3g} > {DT_WARN}; "
                      "Euler-Maruyama may be inaccurate", RuntimeWarning, stacklevel=2)
    step = np.eye(d) + drift * cfg.dt
    kick = B * math.sqrt(cfg.dt)
    r = B.shape[1]
    gen = _generator(cfg.seed)
    path = np.empty((cfg.steps + 1, d))
    x = _initial(cfg, d)
    path[0] = x
    n = 0
    while n < cfg.steps:
        m = min(_CHUNK, cfg.steps - n)
        noise = standard_normals(gen, m * r).reshape(m, r) @ kick.T
        # overflow inside a chunk is caught by the divergence check below
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(m):
                x = step @ x + noise[i]
                path[n + i + 1] = x
        n += m
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM:
            raise Divergence(f"trajectory diverged after {n} steps")
    with np.errstate(invalid="ignore"):
        bad = not np.all(np.abs(path) <= DIVERGENCE_NORM)
    if bad:
        raise Divergence("trajectory diverged")
    return path


def simulate_exact_ou(drift, B, dt, steps, n_traj=1, seed=0, initial_mean=None):
    """Exact-in-distribution samples of the linear SDE on a ``dt`` grid.

    ``x_{n+1} = expm(drift dt) x_n + L xi_n`` with ``L L^T`` the exact
    one-step covariance. Trajectory ``j`` uses seed ``seed + j``. Returns
    an array of shape ``(n_traj, steps + 1, d)``.
    """
    drift = as_square(drift, "drift")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = drift.shape[0]
    Phi, S = flow_and_gramian(drift, B @ B.T, dt)
    w, U = np.linalg.eigh(S)
    L = U * np.sqrt(np.clip(w, 0.0, None))
    x0 = np.zeros(d) if initial_mean is None else np.asarray(initial_mean, float).reshape(d)
    gens = [_generator(seed + j) for j in range(n_traj)]
    out = np.empty((n_traj, steps + 1, d))
    x = np.tile(x0, (n_traj, 1))
    out[:, 0] = x
    n = 0
    while n < steps:
        m = min(_CHUNK, steps - n)
        xi = np.stack([standard_normals(g, m * d).reshape(m, d) for g in gens]) @ L.T
        for i in range(m):
            x = x @ Phi.T + xi[:, i]
            out[:, n + i + 1] = x
        n += m
    return out


def ergodic_stats(path, burn_in=0):
    """Time-averaged mean and covariance of ``path[burn_in:]``."""
    path = np.asarray(path, dtype=float)
    if path.ndim == 1:
        path = path[:, None]
    tail = path[burn_in:]
    if tail.shape[0] < 2:
        raise InsufficientSamples("need at least two samples after burn-in")
    mean = tail.mean(axis=0)
    dev = tail - mean
    cov = symmetrize(dev.T @ dev / (tail.shape[0] - 1))
    return ErgodicStats(mean, cov, int(tail.shape[0]))


def default_config(drift, dt, samples, seed=0, initial_mean=None):
    """Config with burn-in spanning ten of the slowest relaxation times."""
    slow = float(np.min(np.abs(np.linalg.eigvals(as_square(drift)).real)))
    if not slow > 0:
        raise InputError("drift has a zero-rate mode; no stationary burn-in exists")
    burn = int(math.ceil(10.0 / (slow * dt)))
    return TrajectoryConfig(dt=dt, steps=burn + int(samples), burn_in=burn,
                            seed=seed, initial_mean=initial_mean)


def analytic_mean_covariance(drift, B):
    """Stationary covariance ``M`` of the SDE, for comparison with simulations."""
    return solve_lyapunov(drift, B @ B.T)


def write_path_csv(path, fh, digits=12):
    """Write ``step, q, p`` rows (or ``x0, x1, ...`` for more modes)."""
    d = path.shape[1]
    names = ["q", "p"] if d == 2 else [f"x{i}" for i in range(d)]
    fh.write(",".join(["step"] + names) + "\n")
    fmt = f"{{:.{digits}g}}"
    for i, row in enumerate(path):
        fh.write(",".join([str(i)] + [fmt.format(v) for v in row]) + "\n")
