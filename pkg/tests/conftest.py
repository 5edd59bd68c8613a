import numpy as np
import pytest

from olgnk.calibration import Calibration, PreferenceKind, baseline_ghh, baseline_loglog
from olgnk.experiments import calibrate_shock
from olgnk.simulation import solve_path


@pytest.fixture(scope="session")
def loglog():
    return baseline_loglog()


@pytest.fixture(scope="session")
def ghh():
    return baseline_ghh()


@pytest.fixture(scope="session")
def severe_shock_loglog(loglog):
    """Preference shock sized to a 4% impact output drop (log-log baseline)."""
    return calibrate_shock(loglog, 0.04)


@pytest.fixture(scope="session")
def severe_base_loglog(loglog, severe_shock_loglog):
    """No-plan severe-recession path (log-log baseline)."""
    return solve_path(loglog, severe_shock_loglog)


def random_calibration(rng: np.random.Generator, pref=None) -> Calibration:
    """A random valid calibration with eta pinned (may raise on infeasible
    debt; callers skip those draws)."""
    if pref is None:
        pref = PreferenceKind.LOG_LOG if rng.random() < 0.5 else PreferenceKind.GHH
    return Calibration(
        beta=rng.uniform(0.95, 0.999),
        q=rng.uniform(0.9, 1.0),
        theta=rng.uniform(2.0, 10.0),
        epsilon=rng.uniform(1.2, 4.0),
        alpha=rng.uniform(0.0, 0.9),
        sigma=rng.uniform(0.3, 1.0),
        phi_pi=rng.uniform(1.1, 3.0),
        phi_y=rng.uniform(0.0, 1.0),
        debt_to_gdp=rng.uniform(0.0, 6.0),
        L_bar=rng.uniform(0.1, 0.6),
        pref=pref,
    ).with_eta_pinned()
