import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_are, solve_continuous_lyapunov

from pointerlab.errors import (DimensionMismatch, NoStabilizingSolution, NotPSD,
                               NotSymmetric, SingularSystem)
from pointerlab.matops import (care_residual, det_first_order, is_psd,
                               lyapunov_residual, propagate_covariance, psd_sqrt,
                               solve_care, solve_lyapunov)

from conftest import random_psd, random_stable


# --- Lyapunov ----------------------------------------------------------------

def test_lyapunov_matches_scipy(rng):
    for d in (1, 2, 4, 6):
        A = random_stable(rng, d)
        Q = random_psd(rng, d)
        X = solve_lyapunov(A, Q)
        ref = solve_continuous_lyapunov(A, -Q)
        assert np.allclose(X, ref, rtol=1e-9, atol=1e-12)
        assert np.allclose(X, X.T)


def test_lyapunov_scalar():
    assert solve_lyapunov([[-2.0]], [[4.0]])[0, 0] == pytest.approx(1.0)


def test_lyapunov_nonsymmetric_source(rng):
    A = random_stable(rng, 3)
    Q = rng.standard_normal((3, 3))
    X = solve_lyapunov(A, Q)
    assert lyapunov_residual(A, X, Q) < 1e-10


def test_lyapunov_marginal_drift_is_singular():
    A = np.array([[0.0, 1.0], [0.0, -1.0]])
    with pytest.raises(SingularSystem):
        solve_lyapunov(A, np.eye(2))


def test_lyapunov_report(rng):
    A = random_stable(rng, 2)
    X, rep = solve_lyapunov(A, np.eye(2), full_output=True)
    assert rep.converged and rep.residual_norm < 1e-12


def test_shape_checks():
    with pytest.raises(DimensionMismatch):
        solve_lyapunov(np.eye(2), np.eye(3))
    with pytest.raises(DimensionMismatch):
        solve_lyapunov(np.ones((2, 3)), np.eye(2))


# --- CARE ----------------------------------------------------------------------

def test_care_matches_scipy(rng):
    for d in (1, 2, 4):
        A = rng.standard_normal((d, d))
        P = random_psd(rng, d) + 0.1 * np.eye(d)
        Q = random_psd(rng, d) + 0.1 * np.eye(d)
        Y = solve_care(A, P, Q)
        ref = solve_continuous_are(A, np.eye(d), P, Q)
        assert np.allclose(Y, ref, rtol=1e-8, atol=1e-10)
        assert np.max(np.linalg.eigvals(A - np.linalg.solve(Q, Y)).real) < 0


def test_care_unstabilizable_raises():
    # a pure imaginary-axis mode with zero state weight
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(NoStabilizingSolution):
        solve_care(A, np.zeros((2, 2)), np.eye(2))


def test_care_singular_weight():
    with pytest.raises(NoStabilizingSolution):
        solve_care(np.eye(2), np.eye(2), np.zeros((2, 2)))


# --- propagation -------------------------------------------------------------------

def _rk_oracle(A, D, V0, t):
    d = A.shape[0]

    def rhs(_, v):
        V = v.reshape(d, d)
        return (A @ V + V @ A.T + D).ravel()

    sol = solve_ivp(rhs, (0, t), V0.ravel(), method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[:, -1].reshape(d, d)


def test_propagation_matches_ode_integrator(rng):
    for d in (2, 4):
        A = rng.standard_normal((d, d))
        D = random_psd(rng, d)
        V0 = random_psd(rng, d) + np.eye(d)
        for t in (0.1, 0.7):
            assert np.allclose(propagate_covariance(A, D, V0, t),
                               _rk_oracle(A, D, V0, t), rtol=1e-9, atol=1e-11)


def test_propagation_zero_time_and_negative():
    V0 = np.eye(2)
    assert np.array_equal(propagate_covariance(np.eye(2), np.eye(2), V0, 0.0), V0)
    with pytest.raises(ValueError):
        propagate_covariance(np.eye(2), np.eye(2), V0, -1.0)


def test_propagation_converges_to_lyapunov(rng):
    A = random_stable(rng, 2, margin=0.5)
    D = random_psd(rng, 2)
    V = propagate_covariance(A, D, np.eye(2), 200.0)
    assert np.allclose(V, solve_lyapunov(A, D), rtol=1e-8)


# --- PSD utilities -----------------------------------------------------------------

def test_is_psd_cases():
    assert is_psd(np.diag([1.0, 0.0]))
    assert not is_psd(np.diag([1.0, -1e-3]))
    assert is_psd(np.diag([1.0, -1e-12]))
    with pytest.raises(NotSymmetric):
        is_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_psd_sqrt(rng):
    M = random_psd(rng, 3, rank=2)
    R = psd_sqrt(M)
    assert np.allclose(R @ R.T, M, atol=1e-12)
    assert np.allclose(R, R.T)
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -1.0]))


def test_det_first_order():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    s = 1e-6
    assert det_first_order(X, s) == pytest.approx(np.linalg.det(np.eye(2) + s * X), rel=1e-11)


# --- properties ------------------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 5))
def test_property_lyapunov_residual(seed, d):
    rng = np.random.default_rng(seed)
    A = random_stable(rng, d)
    Q = random_psd(rng, d)
    X = solve_lyapunov(A, Q)
    assert lyapunov_residual(A, X, Q) <= 1e-10 * (1 + np.linalg.norm(Q))
    assert is_psd(X, tol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=st.integers(1, 4))
def test_property_care_residual(seed, d):
    rng = np.random.default_rng(seed)
    A = random_stable(rng, d)
    P = random_psd(rng, d) + 0.1 * np.eye(d)
    Q = random_psd(rng, d) + 0.1 * np.eye(d)
    Y = solve_care(A, P, Q)
    assert care_residual(A, P, Q, Y) <= 1e-10 * (1 + np.linalg.norm(P))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, s=st.floats(0.01, 1.0), u=st.floats(0.01, 1.0))
def test_property_semigroup(seed, s, u):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2, 2))
    D = random_psd(rng, 2)
    V0 = random_psd(rng, 2) + np.eye(2)
    two_step = propagate_covariance(A, D, propagate_covariance(A, D, V0, s), u)
    one_step = propagate_covariance(A, D, V0, s + u)
    assert np.allclose(two_step, one_step, rtol=1e-9, atol=1e-12)
