import time

import numpy as np
import pytest

from confined_elastica import disksolver, linesolver

ALPHAS = (0.0, 1.0, 10.0, 100.0, 1e4)
SWEEP_DELTAS = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)

# wall-clock seconds of the shared expensive fixtures
TIMINGS = {}
# (criterion, ok, detail) rows reported by the acceptance module
ACCEPTANCE = []


def _timed(name, func):
    t0 = time.perf_counter()
    value = func()
    TIMINGS[name] = time.perf_counter() - t0
    return value


@pytest.fixture(scope="session")
def theta_solve():
    return linesolver.minimize_theta()


@pytest.fixture(scope="session")
def theta_alpha_solves():
    return _timed("theta_alpha", lambda: {a: linesolver.minimize_theta_alpha(a) for a in ALPHAS})


@pytest.fixture(scope="session")
def disk_solve():
    return disksolver.minimize_disk(disksolver.DiskSolveConfig(delta=1e-3))


@pytest.fixture(scope="session")
def sweep():
    return _timed("sweep", lambda: disksolver.scaling_sweep(SWEEP_DELTAS))


HELIX_ETAS = (0.02, 0.04, 0.06, 0.08, 0.1)


def eta2_coefficient(etas, values, constant):
    """Least-squares ``eta^2`` coefficient of ``values - constant`` on ``[eta^2, eta^4]``."""
    etas = np.asarray(etas)
    design = np.column_stack([etas**2, etas**4])
    coef, *_ = np.linalg.lstsq(design, np.asarray(values) - constant, rcond=None)
    return float(coef[0])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
