import pytest

from secinvest.defender import Scenario
from secinvest.model import BreachModel

# gamma(s) = 7/8 + 3s/4 - s^2/2: below 1 and rising, crosses 1 once
SINGLE_CROSSOVER = (0.875, 0.75, -0.5)


@pytest.fixture
def attacker_example():
    """GL class I, alpha = beta = 1, L = G = 10, c = d = 1."""
    return Scenario.build(BreachModel.gl1(1.0, 1.0), 10, 10, 1, 1)


@pytest.fixture
def class1_r5000():
    """GL class I, alpha = 1e-4, beta = 1.1, R = 5000."""
    return Scenario.build(BreachModel.gl1(1e-4, 1.1), 5000, 1, 1, 1)


@pytest.fixture
def class2_example():
    """GL class II, alpha = 1e-4, L = G = 1e5, c = 1e4, d = 1 (R = 1e4)."""
    return Scenario.build(BreachModel.gl2(1e-4), 1e5, 1e5, 1e4, 1)


@pytest.fixture
def class1_example():
    """GL class I, alpha = 1e-4, beta = 1.1, L = 1e5, G = 7e4, c = 3500, d = 1 (R = 5000)."""
    return Scenario.build(BreachModel.gl1(1e-4, 1.1), 1e5, 7e4, 3500, 1)


@pytest.fixture
def crossover_model():
    return BreachModel.polynomial(1e-4, SINGLE_CROSSOVER)
