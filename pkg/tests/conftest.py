"""Shared fixtures for the percolab test suite.

The ODE integration and critical-constant search are comparatively expensive
(a few hundred ms each), so they are computed once per session and shared.
"""

import pytest
from hypothesis import HealthCheck, settings

import percolab

settings.register_profile(
    "percolab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("percolab")


@pytest.fixture(scope="session")
def constants():
    """Critical constants at the default tolerance."""
    return percolab.find_tc()


@pytest.fixture(scope="session")
def traj():
    """Transformed-system trajectory integrated through the critical time."""
    return percolab.integrate("transformed", t_end=1.4, tol=1e-12)


@pytest.fixture(scope="session")
def raw_traj():
    """Raw-system trajectory on the subcritical side only."""
    return percolab.integrate("raw", t_end=1.1, tol=1e-12)
