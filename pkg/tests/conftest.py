import pytest
from hypothesis import HealthCheck, settings

from heavyset.cf import parse_theta

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def golden():
    """sqrt(2) - 1 = [2, 2, 2, ...]"""
    return parse_theta("[(2)]")


@pytest.fixture
def half_root2():
    """sqrt(2)/2 = [1, 2, 2, ...]"""
    return parse_theta("[1;(2)]")


@pytest.fixture
def odd_tail():
    """1/(2 + sqrt(2)) = [3, 2, 2, ...]"""
    return parse_theta("[3;(2)]")
