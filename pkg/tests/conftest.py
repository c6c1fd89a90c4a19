"""Shared fixtures and hypothesis configuration for the test suite."""

import pytest
from hypothesis import HealthCheck, settings

import exdev

settings.register_profile(
    "exdev",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exdev")


@pytest.fixture(scope="session")
def weibull2():
    return exdev.weibull(2.0)


@pytest.fixture(scope="session")
def weibull25():
    return exdev.weibull(2.5)


@pytest.fixture(scope="session")
def weibull3():
    return exdev.weibull(3.0)


@pytest.fixture(scope="session")
def dexp():
    return exdev.double_exp()
