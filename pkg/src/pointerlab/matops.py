"""Dense small-matrix kernels.

Everything here works on plain ``numpy`` arrays of shape ``(d, d)`` with
``d`` at most a few tens. Sizes are small enough that the vectorised
(Kronecker-sum) Lyapunov solve is the simplest exact option.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, schur

from .errors import (DimensionMismatch, NoStabilizingSolution, NotPSD,
                     NotSymmetric, SingularSystem)

__all__ = [
    "SolveReport",
    "as_square",
    "symmetrize",
    "solve_lyapunov",
    "lyapunov_residual",
    "solve_care",
    "care_residual",
    "propagate_covariance",
    "flow_and_gramian",
    "is_psd",
    "psd_sqrt",
    "det_first_order",
]

PSD_TOL = 1e-10
SYM_TOL = 1e-12
# smallest singular value of the Kronecker-sum operator relative to the largest
_SINGULAR_RCOND = 1e-12


@dataclass(frozen=True)
class SolveReport:
    residual_norm: float
    iterations: int
    converged: bool


def as_square(M, name="matrix"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return M


def symmetrize(M):
    return 0.5 * (M + M.T)


def _check_same_shape(*pairs):
    shape = pairs[0][1].shape
    for name, M in pairs[1:]:
        if M.shape != shape:
            raise DimensionMismatch(
                f"{name} has shape {M.shape}, expected {shape}")


def lyapunov_residual(A, X, Q):
    """Frobenius norm of ``A X + X A^T + Q``."""
    return float(np.linalg.norm(A @ X + X @ A.T + Q))


def solve_lyapunov(A, Q, tol=1e-10, full_output=False):
    """Solve ``A X + X A^T + Q = 0`` for ``X``.

    The equation is vectorised as ``(I kron A + A kron I) vec(X) = -vec(Q)``
    and solved directly.

    Parameters
    ----------
    A, Q : (d, d) array_like
        Drift and source matrices. ``Q`` should be symmetric, in which case
        the returned ``X`` is symmetrised.
    tol : float
        Relative residual bound, ``||AX + XA^T + Q||_F <= tol (1 + ||Q||_F)``.
    full_output : bool
        Also return a :class:`SolveReport`.

    Raises
    ------
    SingularSystem
        If two eigenvalues of ``A`` sum to (numerically) zero, e.g. when
        ``A`` is only marginally stable.
    """
    A = as_square(A, "A")
    Q = as_square(Q, "Q")
    _check_same_shape(("A", A), ("Q", Q))
    d = A.shape[0]
    eye = np.eye(d)
    L = np.kron(eye, A) + np.kron(A, eye)
    s = np.linalg.svd(L, compute_uv=False)
    if s[-1] <= _SINGULAR_RCOND * max(s[0], 1.0):
        raise SingularSystem(
            "Lyapunov operator is singular: A has eigenvalues summing to zero")
    x = np.linalg.solve(L, -Q.reshape(-1, order="F"))
    X = x.reshape((d, d), order="F")
    if np.allclose(Q, Q.T, rtol=0, atol=SYM_TOL * max(1.0, np.abs(Q).max())):
        X = symmetrize(X)
    res = lyapunov_residual(A, X, Q)
    ok = res <= tol * (1.0 + np.linalg.norm(Q))
    if not ok:
        raise SingularSystem(
            f"Lyapunov residual {res:.3e} exceeds tolerance; system is "
            "too ill-conditioned")
    if full_output:
        return X, SolveReport(res, 1, ok)
    return X


def care_residual(A, P, Q, Y):
    """Frobenius norm of ``A^T Y + Y A + P - Y Q^{-1} Y``."""
    return float(np.linalg.norm(A.T @ Y + Y @ A + P - Y @ np.linalg.solve(Q, Y)))


def solve_care(A, P, Q, tol=1e-10, max_newton=10, full_output=False):
    """Stabilising solution of ``A^T Y + Y A + P - Y Q^{-1} Y = 0``.

    The stable invariant subspace of the Hamiltonian matrix
    ``[[A, -Q^{-1}], [-P, -A^T]]`` is taken from an ordered real Schur form,
    giving ``Y = U2 U1^{-1}``. A few Newton-Kleinman steps then polish the
    result; each is a Lyapunov solve with the current closed-loop matrix.

    The closed loop ``A - Q^{-1} Y`` is Hurwitz on return.

    Raises
    ------
    NoStabilizingSolution
        If the Hamiltonian has eigenvalues on the imaginary axis, the stable
        subspace is not a graph, or the refined solution does not stabilise.
    """
    A = as_square(A, "A")
    P = as_square(P, "P")
    Q = as_square(Q, "Q")
    _check_same_shape(("A", A), ("P", P), ("Q", Q))
    d = A.shape[0]
    try:
        Qinv = np.linalg.inv(Q)
    except np.linalg.LinAlgError as exc:
        raise NoStabilizingSolution("control weight Q is singular") from exc

    H = np.block([[A, -Qinv], [-P, -A.T]])
    scale = max(1.0, np.abs(H).max())
    eigs = np.linalg.eigvals(H)
    if np.min(np.abs(eigs.real)) <= 1e-12 * scale:
        raise NoStabilizingSolution(
            "Hamiltonian matrix has eigenvalues on the imaginary axis")
    T, U, sdim = schur(H, output="real", sort="lhp")
    if sdim != d:
        raise NoStabilizingSolution(
            f"stable subspace has dimension {sdim}, expected {d}")
    U1, U2 = U[:d, :d], U[d:, :d]
    if np.linalg.cond(U1) > 1e12:
        raise NoStabilizingSolution("stable subspace is not a graph over U1")
    Y = symmetrize(np.linalg.solve(U1.T, U2.T).T)

    res = care_residual(A, P, Q, Y)
    iters = 0
    for _ in range(max_newton):
        if res <= 0.1 * tol * (1.0 + np.linalg.norm(P)):
            break
        Ac = A - Qinv @ Y
        try:
            Y_new = solve_lyapunov(Ac.T, P + Y @ Qinv @ Y, tol=1e-6)
        except SingularSystem:
            break
        res_new = care_residual(A, P, Q, Y_new)
        if not res_new < res:
            break
        Y, res = Y_new, res_new
        iters += 1

    closed = np.linalg.eigvals(A - Qinv @ Y)
    if np.max(closed.real) >= 0:
        raise NoStabilizingSolution("closed-loop matrix is not Hurwitz")
    ok = res <= tol * (1.0 + np.linalg.norm(P))
    if not ok:
        raise NoStabilizingSolution(
            f"Riccati residual {res:.3e} did not reach tolerance")
    if full_output:
        return Y, SolveReport(res, iters, ok)
    return Y


def propagate_covariance(A, D, V0, t):
    """Covariance at time ``t`` under ``dV/dt = A V + V A^T + D``.

    ``V(t) = F V0 F^T + W(t)`` with ``F = expm(A t)`` and
    ``W(t) = int_0^t expm(A s) D expm(A^T s) ds``. For a short step ``h``
    the block exponential identity (Van Loan) gives ``W(h) = G F^T`` from
    ``expm([[A, D], [0, -A^T]] h) = [[F, G], [0, *]]``. Longer times use
    ``W(2h) = W(h) + F(h) W(h) F(h)^T``: the ``-A^T`` block would otherwise
    grow like ``exp(|A| t)`` and destroy ``G F^T`` by cancellation.
    """
    A = as_square(A, "A")
    D = as_square(D, "D")
    V0 = as_square(V0, "V0")
    _check_same_shape(("A", A), ("D", D), ("V0", V0))
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return V0.copy()
    F, W = flow_and_gramian(A, D, t)
    return symmetrize(F @ V0 @ F.T + W)


def flow_and_gramian(A, D, t):
    """``expm(A t)`` and the Gramian ``int_0^t expm(A s) D expm(A^T s) ds``."""
    d = A.shape[0]
    norm = float(np.linalg.norm(A, 1)) * t
    m = max(0, int(np.ceil(np.log2(norm))) if norm > 1.0 else 0)
    h = t / 2.0 ** m
    H = np.zeros((2 * d, 2 * d))
    H[:d, :d] = A
    H[:d, d:] = D
    H[d:, d:] = -A.T
    E = expm(H * h)
    F = E[:d, :d]
    W = symmetrize(E[:d, d:] @ F.T)
    for _ in range(m):
        W = symmetrize(W + F @ W @ F.T)
        F = F @ F
    return F, W


def _check_symmetric(M, sym_tol):
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    if np.abs(M - M.T).max() > sym_tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")


def is_psd(M, tol=PSD_TOL, sym_tol=SYM_TOL):
    """True iff the smallest eigenvalue is ``>= -tol * max(1, ||M||_2)``."""
    M = as_square(M)
    _check_symmetric(M, sym_tol)
    w = np.linalg.eigvalsh(symmetrize(M))
    return bool(w[0] >= -tol * max(1.0, np.abs(w).max()))


def psd_sqrt(M, tol=PSD_TOL, sym_tol=SYM_TOL):
    """Principal square root of a symmetric PSD matrix.

    Eigenvalues in ``[-tol * max(1, ||M||_2), 0)`` are clipped to zero.
    """
    M = as_square(M)
    _check_symmetric(M, sym_tol)
    w, U = np.linalg.eigh(symmetrize(M))
    if w[0] < -tol * max(1.0, np.abs(w).max()):
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3e} < 0")
    w = np.clip(w, 0.0, None)
    return symmetrize((U * np.sqrt(w)) @ U.T)


def det_first_order(X, eps_scale):
    """First-order expansion ``det(I + s X) ~ 1 + s tr(X)``."""
    X = as_square(X)
    return 1.0 + eps_scale * float(np.trace(X))
