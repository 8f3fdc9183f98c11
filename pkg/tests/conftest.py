import pytest

from ensemble_importance import parse_forecast_table, parse_oracle_table

from helpers import EXAMPLE_FORECASTS, EXAMPLE_ORACLE


@pytest.fixture(scope="session")
def example_forecasts():
    return parse_forecast_table(EXAMPLE_FORECASTS.read_bytes())


@pytest.fixture(scope="session")
def example_oracle():
    return parse_oracle_table(EXAMPLE_ORACLE.read_bytes())
