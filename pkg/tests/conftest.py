import numpy as np
import pytest

from asvplan.dynamics import VesselParams
from asvplan.world import CircleObstacle, RectObstacle, WorldMap


@pytest.fixture(scope="session")
def reference_world() -> WorldMap:
    """20 x 20 m arena: two 5 x 4 cuboids and one cylinder."""
    return WorldMap(
        x_bounds=(0.0, 20.0),
        y_bounds=(0.0, 20.0),
        obstacles=(
            RectObstacle(4.7, 8.0, 5.0, 4.0),
            RectObstacle(15.0, 6.0, 5.0, 4.0),
            CircleObstacle(14.0, 12.0, 1.5),
        ),
        margin=0.0,
    )


@pytest.fixture(scope="session")
def reference_params() -> VesselParams:
    return VesselParams()


@pytest.fixture(scope="session")
def reference_start() -> np.ndarray:
    return np.array([2.0, 15.0])


@pytest.fixture(scope="session")
def reference_goal() -> np.ndarray:
    return np.array([18.0, 1.0])
