"""Trajectory planning toolkit for a two-thruster under-actuated surface vessel.

Front-end RRT* path search over known obstacle maps, automatic sailing-corridor
extraction, trapezoidal direct-collocation optimization of each sub-trajectory
(minimum control input or minimum acceleration), and an RK4 validation
simulator.  See the README for the scenario file format and the CLI.
"""

from .dynamics import (
    BodyAcceleration,
    BodyVelocity,
    ControlInput,
    Pose,
    ThrusterForces,
    VesselParams,
    VesselState,
)
from .world import (
    CircleObstacle,
    Corridor,
    RectObstacle,
    SeedBoxBlocked,
    WorldMap,
    clearance,
    compute_corridor,
    is_free,
    min_trajectory_clearance,
    segment_free,
)
__version__ = "0.1.0"
