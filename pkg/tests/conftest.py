import pytest

from scmkit import bundled


@pytest.fixture(scope="session")
def icecream():
    return bundled.load("icecream")


@pytest.fixture(scope="session")
def appendix_b():
    return bundled.load("appendix_b_q3_10")


@pytest.fixture(scope="session")
def confounded_xor():
    return bundled.load("confounded_xor")
