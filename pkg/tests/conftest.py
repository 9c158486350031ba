import pytest

from ecsieve.census import CensusConfig, run_census
from ecsieve.ec_reduction import parse_curve
from ecsieve.gl2 import GaloisImageSpec

CURVE_37A = "0,0,1,-1,0"  # y^2 + y = x^3 - x


def census_config(x, **kw):
    return CensusConfig(parse_curve(CURVE_37A), GaloisImageSpec.full(1), x, **kw)


@pytest.fixture(scope="session")
def census_1e3():
    return run_census(census_config(1000))


@pytest.fixture(scope="session")
def census_1e6():
    return run_census(census_config(10**6))
