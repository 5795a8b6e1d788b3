import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "pkg", deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("pkg")

from contshield.geometry import RobotGeometry, precompute_turn_thresholds


@pytest.fixture(scope="session")
def geom():
    return RobotGeometry()


@pytest.fixture(scope="session")
def thresholds(geom):
    return precompute_turn_thresholds(geom)
