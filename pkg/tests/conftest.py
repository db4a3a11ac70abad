import pytest

from corrbb84.validation import reference_channel, reference_config, reference_intensities


@pytest.fixture
def intensity_set():
    return reference_intensities()


@pytest.fixture
def config_1e6():
    return reference_config(10**6)


@pytest.fixture
def config_1e9():
    return reference_config(10**9)


@pytest.fixture
def channel_10km():
    return reference_channel(10.0)
