import hypothesis
import pytest

from flexfor.feeder import standard_feeder

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=100
)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def feeder1():
    return standard_feeder(1)


@pytest.fixture(scope="session")
def feeder3():
    return standard_feeder(3)


@pytest.fixture(scope="session")
def feeder9():
    return standard_feeder(9)


@pytest.fixture(scope="session")
def feeder27():
    return standard_feeder(27)
