import pytest

from amctd_sim.model import NetworkConfig


@pytest.fixture
def config():
    return NetworkConfig()


@pytest.fixture
def desk_config():
    """Small scenario that runs in well under a second."""
    return NetworkConfig(region_x=200.0, region_y=200.0, water_depth=200.0, node_count=20,
                         sink_count=2, courier_count=2, initial_energy=5.0, rounds_max=500)
