"""Linear Gaussian (LG) models and Gaussian-state primitives.

Phase-space ordering is interleaved, ``x = (q1, p1, q2, p2, ...)``, and
``hbar = 1``. A model is specified either by a Hamiltonian matrix ``G``
(``H = x^T G x / 2``) plus complex Lindblad coefficients ``Ctilde``
(``c = Ctilde x``), or directly by its drift ``A`` and diffusion ``D``.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import block_diag

from .errors import DimensionMismatch, InvalidCovariance, ParseError
from .matops import PSD_TOL, as_square, is_psd, symmetrize

__all__ = [
    "LGModel",
    "GaussianState",
    "symplectic_form",
    "build_drift_diffusion",
    "purity",
    "fidelity_zero_mean",
    "check_quantum_cov",
    "is_hurwitz",
]


def symplectic_form(n):
    """``Z = diag([[0, 1], [-1, 0]], ...)`` for ``n`` modes."""
    if int(n) != n or n < 1:
        raise ValueError("number of modes must be a positive integer")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return block_diag(*([block] * int(n)))


def _split_ctilde(Ctilde):
    if isinstance(Ctilde, tuple):
        re, im = (np.atleast_2d(np.asarray(c, dtype=float)) for c in Ctilde)
    else:
        C = np.atleast_2d(np.asarray(Ctilde, dtype=complex))
        re, im = C.real.copy(), C.imag.copy()
    if re.shape != im.shape or re.ndim != 2:
        raise DimensionMismatch("real and imaginary parts of Ctilde differ in shape")
    return re, im


def build_drift_diffusion(G, Ctilde):
    """Drift and diffusion of the moment equations.

    ``A = Z (G + Cbar^T S Cbar)`` and ``D = Z Cbar^T Cbar Z^T`` with
    ``Cbar = [Re Ctilde; Im Ctilde]`` and ``S = [[0, I_l], [-I_l, 0]]``.

    Parameters
    ----------
    G : (2n, 2n) array_like
        Real symmetric Hamiltonian matrix.
    Ctilde : (l, 2n) complex array_like, or a ``(re, im)`` tuple

    Returns
    -------
    A, D : ndarray
    """
    G = as_square(G, "G")
    if G.shape[0] % 2:
        raise DimensionMismatch("G must be 2n x 2n")
    if np.abs(G - G.T).max() > 1e-12 * max(1.0, np.abs(G).max()):
        raise DimensionMismatch("G must be symmetric")
    re, im = _split_ctilde(Ctilde)
    if re.shape[1] != G.shape[0]:
        raise DimensionMismatch(
            f"Ctilde has {re.shape[1]} columns, G is {G.shape[0]} x {G.shape[0]}")
    l = re.shape[0]
    Z = symplectic_form(G.shape[0] // 2)
    Cbar = np.vstack([re, im])
    S = np.block([[np.zeros((l, l)), np.eye(l)], [-np.eye(l), np.zeros((l, l))]])
    A = Z @ (G + Cbar.T @ S @ Cbar)
    D = symmetrize(Z @ Cbar.T @ Cbar @ Z.T)
    return A, D


def _matrix_from_json(value, name):
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {name!r} is not a numeric matrix") from exc
    return np.atleast_2d(M)


@dataclass(frozen=True, eq=False)
class LGModel:
    """A linear Gaussian open quantum system.

    ``A`` and ``D`` are always present; ``G`` and the split ``Ctilde`` are kept
    when the model was built from Hamiltonian/Lindblad data so it can be
    written back out unchanged. ``C_meas`` and ``Gamma`` optionally describe
    an explicit measurement (output matrix and noise correlation).
    """

    A: np.ndarray
    D: np.ndarray
    G: np.ndarray = None
    Ctilde_re: np.ndarray = None
    Ctilde_im: np.ndarray = None
    C_meas: np.ndarray = None
    Gamma: np.ndarray = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        A = as_square(self.A, "A")
        D = as_square(self.D, "D")
        if A.shape != D.shape or A.shape[0] % 2:
            raise DimensionMismatch("A and D must both be 2n x 2n")
        if not is_psd(D, tol=PSD_TOL):
            raise InvalidCovariance("diffusion matrix D is not PSD")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "D", symmetrize(D))

    @classmethod
    def from_hamiltonian(cls, G, Ctilde, name="", C_meas=None, Gamma=None):
        A, D = build_drift_diffusion(G, Ctilde)
        re, im = _split_ctilde(Ctilde)
        return cls(A, D, G=as_square(G), Ctilde_re=re, Ctilde_im=im,
                   C_meas=C_meas, Gamma=Gamma, name=name)

    @property
    def n_modes(self):
        return self.A.shape[0] // 2

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def Z(self):
        return symplectic_form(self.n_modes)

    # -- serialisation ---------------------------------------------------

    def to_dict(self):
        out = {"n_modes": self.n_modes}
        if self.G is not None:
            out["G"] = self.G.tolist()
            out["Ctilde_re"] = self.Ctilde_re.tolist()
            out["Ctilde_im"] = self.Ctilde_im.tolist()
        else:
            out["A"] = self.A.tolist()
            out["D"] = self.D.tolist()
        if self.C_meas is not None:
            out["C_meas"] = np.asarray(self.C_meas).tolist()
        if self.Gamma is not None:
            out["Gamma"] = np.asarray(self.Gamma).tolist()
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ParseError("model document must be a JSON object")
        extra = {k: _matrix_from_json(data[k], k)
                 for k in ("C_meas", "Gamma") if k in data}
        name = str(data.get("name", ""))
        if "G" in data:
            missing = [k for k in ("Ctilde_re", "Ctilde_im") if k not in data]
            if missing:
                raise ParseError(f"model with G is missing {missing}")
            model = cls.from_hamiltonian(
                _matrix_from_json(data["G"], "G"),
                (_matrix_from_json(data["Ctilde_re"], "Ctilde_re"),
                 _matrix_from_json(data["Ctilde_im"], "Ctilde_im")),
                name=name, **extra)
        elif "A" in data and "D" in data:
            model = cls(_matrix_from_json(data["A"], "A"),
                        _matrix_from_json(data["D"], "D"), name=name, **extra)
        else:
            raise ParseError("model needs either {G, Ctilde_re, Ctilde_im} or {A, D}")
        if "n_modes" in data and int(data["n_modes"]) != model.n_modes:
            raise ParseError(
                f"n_modes={data['n_modes']} does not match matrix size")
        return model

    def to_json(self, **kwargs):
        # json writes floats with repr(), which round-trips float64 exactly
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text())

    def save(self, path):
        Path(path).write_text(self.to_json(indent=2) + "\n")


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Gaussian Wigner function ``g(x; mean, cov)``."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = as_square(self.cov, "cov")
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        if mean.shape[0] != cov.shape[0]:
            raise DimensionMismatch("mean and covariance sizes differ")
        object.__setattr__(self, "cov", symmetrize(cov))
        object.__setattr__(self, "mean", mean)

    @property
    def purity(self):
        return purity(self.cov)

    def is_physical(self, tol=PSD_TOL):
        return check_quantum_cov(self.cov, tol=tol)


def check_quantum_cov(V, Z=None, tol=PSD_TOL):
    """Uncertainty relation: is the Hermitian matrix ``V + (i/2) Z`` PSD?"""
    V = as_square(V, "V")
    if Z is None:
        if V.shape[0] % 2:
            raise DimensionMismatch("V must be 2n x 2n")
        Z = symplectic_form(V.shape[0] // 2)
    H = symmetrize(V) + 0.5j * Z
    w = np.linalg.eigvalsh(H)
    return bool(w[0] >= -tol * max(1.0, np.abs(w).max()))


def purity(V, tol=1e-10):
    """``1 / sqrt(det(2V))``; raises for unphysical ``det(2V) < 1``."""
    V = as_square(V, "V")
    d = float(np.linalg.det(2.0 * V))
    if not d >= 1.0 - tol:
        raise InvalidCovariance(f"det(2V) = {d:.6g} < 1: not a quantum state")
    return min(1.0, 1.0 / np.sqrt(d))


def fidelity_zero_mean(V1, V2, tol=1e-10):
    """``1 / sqrt(det(V1 + V2))`` for zero-mean Gaussian states.

    This is the Uhlmann fidelity when at least one of the two states is pure.
    """
    V1 = as_square(V1, "V1")
    V2 = as_square(V2, "V2")
    if V1.shape != V2.shape:
        raise DimensionMismatch("covariances differ in size")
    for name, V in (("V1", V1), ("V2", V2)):
        if not check_quantum_cov(V, tol=tol):
            raise InvalidCovariance(f"{name} violates the uncertainty relation")
    d = float(np.linalg.det(V1 + V2))
    if d <= 0:
        raise InvalidCovariance("V1 + V2 is not positive definite")
    return min(1.0, 1.0 / np.sqrt(d))


def is_hurwitz(A, tol=1e-12):
    """True iff every eigenvalue has real part ``< -tol``."""
    A = as_square(A, "A")
    return bool(np.max(np.linalg.eigvals(A).real) < -tol)
