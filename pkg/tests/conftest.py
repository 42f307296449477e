from pathlib import Path

import pytest

from arcplant import CircuitParams, PlantLTI

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def circuit500():
    """Secondary-side circuit pinned to E2' = 500 V, primary reactances folded into X2."""
    return CircuitParams.from_referred(500.0)


@pytest.fixture
def lti15():
    """The shipped identified plant: K = 15 mm/(s*V), T = 0.1 s."""
    return PlantLTI(K=15.0, T=0.1)


@pytest.fixture
def config_dir():
    return CONFIG_DIR
