import functools
import warnings

import numpy as np
import pytest

from pointerlab.qbm import qbm_model, qbm_pointer_basis

ACCEPTANCE_RESULTS = []


def record_criterion(number, title, passed, detail=""):
    """Register one acceptance-criterion outcome for the terminal summary."""
    ACCEPTANCE_RESULTS.append((number, title, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        tr.write_line(f"[{status}] criterion {number:>2}: {title} -- {detail}")


@functools.lru_cache(maxsize=None)
def cached_pointer(T, eps, objective="exact"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return qbm_pointer_basis(T, eps, objective)


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture(scope="session")
def qbm1000():
    return qbm_model(1000.0)


def random_stable(rng, d, margin=0.1):
    """Random matrix shifted so every eigenvalue has real part <= -margin."""
    A = rng.standard_normal((d, d))
    shift = np.max(np.linalg.eigvals(A).real) + margin + rng.uniform(0, 1)
    return A - shift * np.eye(d)


def random_psd(rng, d, rank=None):
    rank = d if rank is None else rank
    X = rng.standard_normal((d, rank))
    return X @ X.T
