import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointerlab.ensembles import (PRStatus, SearchConfig, average_survival_probability,
                                  find_pointer_basis, gaussian_overlap,
                                  is_physically_realizable, mixing_time_asymptotic,
                                  mixing_time_exact, omega_rate, pure_single_mode_omega,
                                  survival_time)
from pointerlab.errors import (EmptyFeasibleSet, ImpureInitial, InputError,
                               NonDecohering, NonpositiveGamma, NoRoot, ParseError,
                               SingularOmega, SingularSum)
from pointerlab.lgmodel import GaussianState, LGModel
from pointerlab.qbm import (boundary_gamma, qbm_mixing_time, qbm_model,
                            qbm_omega_rate, survival_time_qbm)

from conftest import cached_pointer


@pytest.fixture(scope="module")
def qbm100():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return qbm_model(100.0)


# --- physical realizability ---------------------------------------------------

def test_interior_point_is_pr(qbm100):
    assert is_physically_realizable(qbm100, pure_single_mode_omega(8.0, 100.0)) is PRStatus.PR


def test_gamma_above_4T_violates_lmi(qbm100):
    for beta in (0.0, 8.0, 400.0, 1000.0):
        status = is_physically_realizable(qbm100, pure_single_mode_omega(beta, 401.0))
        assert status is PRStatus.VIOLATES_LMI


def test_sub_heisenberg_violates_uncertainty(qbm100):
    status = is_physically_realizable(qbm100, np.eye(2) / 4)
    assert status is PRStatus.VIOLATES_UNCERTAINTY


def test_pr_dimension_check(qbm100):
    with pytest.raises(Exception):
        is_physically_realizable(qbm100, np.eye(4))


def test_pure_parametrization():
    Om = pure_single_mode_omega(0.0, 2.0)
    assert np.allclose(Om, np.eye(2) / 2)
    Om = pure_single_mode_omega(1.0, 4 * math.sqrt(1000))
    assert np.linalg.det(2 * Om) == pytest.approx(1.0, abs=1e-12)
    w = np.linalg.eigvalsh(Om + 0.5j * np.array([[0, 1], [-1, 0]]))
    assert abs(w[0]) < 1e-12
    with pytest.raises(NonpositiveGamma):
        pure_single_mode_omega(1.0, 0.0)


# --- decoherence rate and mixing times -------------------------------------------

def test_omega_rate_closed_form(qbm1000):
    T = 1000.0
    g = 4 * math.sqrt(T)
    Om = pure_single_mode_omega(1.0, g)
    direct = 2 * np.trace(qbm1000.A) + np.trace(qbm1000.D @ np.linalg.inv(Om))
    assert omega_rate(qbm1000, Om) == pytest.approx(direct, rel=1e-13)
    assert omega_rate(qbm1000, Om) == pytest.approx(qbm_omega_rate(1.0, g, T), rel=1e-12)


def test_omega_rate_trace_only_and_scaling():
    m = LGModel(-np.eye(2), np.zeros((2, 2)))
    assert omega_rate(m, np.diag([3.0, 0.2])) == pytest.approx(-4.0)
    m = LGModel(np.array([[0.0, 1.0], [0.0, -1.0]]), np.diag([0.3, 2.0]))
    Om = np.array([[1.0, 0.2], [0.2, 0.5]])
    base = omega_rate(m, Om) - 2 * np.trace(m.A)
    for c in (0.5, 3.0):
        assert omega_rate(m, c * Om) == pytest.approx(2 * np.trace(m.A) + base / c)
    with pytest.raises(SingularOmega):
        omega_rate(m, np.zeros((2, 2)))


def test_asymptotic_formula():
    m = LGModel(np.zeros((2, 2)), np.eye(2) / 2)
    Om = np.eye(2) / 2
    assert omega_rate(m, Om) == pytest.approx(2.0)
    assert mixing_time_asymptotic(m, Om, 0.1) == pytest.approx(0.1)
    with pytest.raises(NonDecohering):
        mixing_time_asymptotic(LGModel(-np.eye(2), np.zeros((2, 2))), Om, 0.1)


def test_purity_preserving_flow_has_no_mixing_time():
    rot = LGModel(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.zeros((2, 2)))
    with pytest.raises(NoRoot) as info:
        mixing_time_exact(rot, np.eye(2) / 2, 0.1)
    assert info.value.t_max > 0


def test_mixing_time_rejects_bad_input(qbm1000):
    with pytest.raises(ImpureInitial):
        mixing_time_exact(qbm1000, np.eye(2), 0.1)
    with pytest.raises(InputError):
        mixing_time_exact(qbm1000, np.eye(2) / 2, 1.5)


def test_exact_mixing_time_hits_threshold(qbm1000):
    from pointerlab.matops import propagate_covariance
    Om = pure_single_mode_omega(1.0, boundary_gamma(1.0, 1000.0))
    tau = mixing_time_exact(qbm1000, Om, 0.1)
    V = propagate_covariance(qbm1000.A, qbm1000.D, Om, tau)
    assert np.linalg.det(2 * V) == pytest.approx(1 / 0.81, rel=1e-9)
    assert tau == pytest.approx(qbm_mixing_time(1.0, boundary_gamma(1.0, 1000.0), 1000.0, 0.1),
                                rel=1e-8)


def test_small_eps_agrees_with_asymptotic(qbm1000, rng):
    T = 1000.0
    for _ in range(10):
        b = rng.uniform(0.0, 10.0)
        g = boundary_gamma(b, T) * rng.uniform(0.3, 1.0)
        Om = pure_single_mode_omega(b, g)
        exact = mixing_time_exact(qbm1000, Om, 0.01)
        assert exact == pytest.approx(mixing_time_asymptotic(qbm1000, Om, 0.01), rel=0.05)


def test_ratio_to_asymptotic_tends_to_one(qbm1000):
    Om = pure_single_mode_omega(1.0, boundary_gamma(1.0, 1000.0))
    ratios = [mixing_time_exact(qbm1000, Om, e) / mixing_time_asymptotic(qbm1000, Om, e)
              for e in (0.2, 0.1, 0.05, 0.01, 0.001)]
    dev = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(dev) < 0)
    assert dev[-1] < 1e-3


def test_large_eps_differs_from_asymptotic(qbm1000):
    Om = pure_single_mode_omega(1.0, boundary_gamma(1.0, 1000.0))
    r = mixing_time_exact(qbm1000, Om, 0.5) / mixing_time_asymptotic(qbm1000, Om, 0.5)
    assert abs(r - 1) > 0.2


def test_mixing_time_symplectic_rotation_invariance(rng):
    m = LGModel(np.array([[-0.1, 1.0], [-0.5, -0.3]]), np.diag([0.4, 0.9]))
    Om = pure_single_mode_omega(0.3, 1.7)
    tau = mixing_time_exact(m, Om, 0.1)
    for theta in rng.uniform(0, 2 * np.pi, 5):
        R = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
        m2 = LGModel(R @ m.A @ R.T, R @ m.D @ R.T)
        assert mixing_time_exact(m2, R @ Om @ R.T, 0.1) == pytest.approx(tau, rel=1e-9)


# --- pointer-basis search ----------------------------------------------------------

def test_numeric_boundary_search_matches_closed_form(qbm1000):
    T = 1000.0
    cfg = SearchConfig(beta_range=(0.0, 5.0), gamma_range=(1e-3, 4 * T),
                       grid_points=41, objective="asymptotic")
    res = find_pointer_basis(qbm1000, 0.1, cfg)
    ref = cached_pointer(T, 0.1, "asymptotic")
    assert res.beta_star == pytest.approx(ref.beta_star, rel=1e-4)
    assert res.gamma_star == pytest.approx(ref.gamma_star, rel=1e-6)
    assert is_physically_realizable(qbm1000, res.omega_star, tol=1e-8) is PRStatus.PR
    assert res.tau_mix_star == pytest.approx(2 * 0.1 / res.omega_rate)
    assert res.tau_mix_asymptotic == pytest.approx(res.tau_mix_star)
    rates = [v for _, v in res.search_trace if np.isfinite(v)]
    assert res.omega_rate <= min(rates) + 1e-12


def test_two_dimensional_search_lands_on_boundary(qbm1000):
    T = 1000.0
    cfg = SearchConfig(beta_range=(0.0, 4.0), gamma_range=(1.0, 200.0), boundary_only=False,
                       grid_points=21, objective="asymptotic")
    res = find_pointer_basis(qbm1000, 0.1, cfg, boundary=lambda b: boundary_gamma(b, T))
    assert res.gamma_star == pytest.approx(boundary_gamma(res.beta_star, T), rel=1e-12)


def test_pointer_basis_is_local_optimum(qbm1000):
    T = 1000.0
    res = cached_pointer(T, 0.1, "asymptotic")
    step = 20.0 / 200
    for db in (-step, -step / 2, step / 2, step):
        b = res.beta_star + db
        for frac in (1.0, 0.99, 0.9):
            g = boundary_gamma(b, T) * frac
            assert qbm_omega_rate(b, g, T) >= res.omega_rate


def test_large_eps_optimum_moves(qbm1000):
    small = cached_pointer(1000.0, 0.1, "asymptotic")
    large = cached_pointer(1000.0, 0.5, "exact")
    assert abs(large.beta_star - small.beta_star) > 0.3


def test_empty_feasible_set(qbm1000):
    cfg = SearchConfig(beta_range=(-50.0, -40.0), grid_points=11)
    with pytest.raises(EmptyFeasibleSet):
        find_pointer_basis(qbm1000, 0.1, cfg, boundary=lambda b: boundary_gamma(b, 1000.0))


def test_multimode_search_rejected():
    m = LGModel(-np.eye(4), np.eye(4))
    with pytest.raises(InputError):
        find_pointer_basis(m, 0.1, SearchConfig(gamma_range=(0.1, 1.0)))


def test_search_config_json():
    cfg = SearchConfig(beta_range=(0, 3), gamma_range=(0.1, 9), grid_points=11,
                       objective="exact", boundary_only=False)
    import json
    back = SearchConfig.from_json(json.dumps(cfg.to_dict()))
    assert back == cfg
    with pytest.raises(ParseError):
        SearchConfig.from_json('{"beta_range": [0, 1], "colour": 3}')
    with pytest.raises(ParseError):
        SearchConfig.from_json('{"beta_range": [0, 1],')
    with pytest.raises(InputError):
        SearchConfig(beta_range=(1, 0))
    with pytest.raises(InputError):
        SearchConfig(objective="fastest")
    with pytest.raises(InputError):
        SearchConfig(boundary_only=False)
    log = SearchConfig(beta_range=(0, 10), grid_points=5, spacing="log").beta_grid()
    assert log[0] == 0 and log[-1] == pytest.approx(10) and len(log) == 5


# --- overlaps and survival -----------------------------------------------------------

def test_overlap_identical_pure_states():
    s = GaussianState([0.3, -1.0], pure_single_mode_omega(0.7, 2.5))
    assert gaussian_overlap(s, s) == pytest.approx(1.0)


def test_overlap_displaced_vacua():
    for dq in (0.1, 1.0, 2.5):
        a = GaussianState([0.0, 0.0], np.eye(2) / 2)
        b = GaussianState([dq, 0.0], np.eye(2) / 2)
        assert gaussian_overlap(a, b) == pytest.approx(math.exp(-dq * dq / 2))


def test_overlap_singular_sum():
    a = GaussianState([0.0, 0.0], np.diag([1.0, 0.0]))
    b = GaussianState([0.0, 0.0], np.diag([1.0, 0.0]))
    with pytest.raises(SingularSum):
        gaussian_overlap(a, b)


def test_static_dynamics_never_decay():
    m = LGModel(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(NoRoot):
        survival_time(m, np.eye(2) / 2, 0.1, np.eye(2))


def test_average_survival_matches_closed_form(qbm1000):
    from pointerlab.qbm import survival_probability
    T = 1000.0
    b, g = 1.0, boundary_gamma(1.0, T)
    Om = pure_single_mode_omega(b, g)
    for tau in (0.0, 1e-4, 1e-3, 5e-3):
        S = average_survival_probability(qbm1000, Om, tau, np.diag([0.0, T - g / 4]))
        assert S == pytest.approx(survival_probability(tau, b, g, T), rel=1e-9)


def test_generic_survival_time_matches_closed_form(qbm1000):
    T = 1000.0
    for b in (0.5, 1.0, 3.0):
        g = boundary_gamma(b, T)
        Om = pure_single_mode_omega(b, g)
        generic = survival_time(qbm1000, Om, 0.1, np.diag([0.0, T - g / 4]))
        assert generic == pytest.approx(survival_time_qbm(b, g, T, 0.1), rel=1e-6)


@pytest.mark.parametrize("T", [100.0, 1000.0])
def test_survival_shorter_than_mixing_near_pointer_basis(T):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for b in np.linspace(0.7, 2.5, 19):
            g = boundary_gamma(b, T)
            assert survival_time_qbm(b, g, T, 0.1) <= qbm_mixing_time(b, g, T, 0.1)


def test_survival_outlasts_mixing_without_displacement():
    # At beta = 0 the boundary state barely moves in position, so only the
    # covariance change matters; purity then decays twice as fast as overlap.
    T = 1000.0
    g = boundary_gamma(0.0, T)
    ratio = survival_time_qbm(0.0, g, T, 0.01) / qbm_mixing_time(0.0, g, T, 0.01)
    assert ratio == pytest.approx(2.0, rel=0.02)


@settings(max_examples=25, deadline=None)
@given(b=st.floats(0.0, 20.0), frac=st.floats(0.2, 0.95))
def test_property_mixing_time_increases_towards_boundary(b, frac):
    T = 1000.0
    g = boundary_gamma(b, T) * frac
    h = 1e-4 * g
    up = qbm_mixing_time(b, g + h, T, 0.1)
    down = qbm_mixing_time(b, g - h, T, 0.1)
    assert up > down
