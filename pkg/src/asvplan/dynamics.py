"""3-DOF model of a two-thruster under-actuated surface vessel.

Earth-fixed pose eta = [x, y, psi] and body-frame velocity nu = [u, v, r]
evolve as

    eta_dot = R(psi) * nu
    M * nu_dot = tau - C(nu) * nu - D * nu

with M = diag(m, m, Iz), linear damping D = diag(Xu, Yv, Nr) and the
Coriolis/centripetal matrix

    C(nu) = [[0, 0, m*v], [0, 0, -m*u], [m*v, -m*u, 0]]

whose power nu . C(nu) nu is identically zero.  The two propellers provide
surge force and yaw moment only (no direct sway force):

    tau_u = F1 + F2,    tau_r = b * (F1 - F2),    tau_v = 0.

Componentwise the accelerations are

    u_dot = tau_u/m - v*r - (Xu/m)*u
    v_dot = u*r - (Yv/m)*v
    r_dot = tau_r/Iz - (Nr/Iz)*r

All angles are in radians, anticlockwise from the earth-fixed x axis; the
heading is kept in (-pi, pi] by `wrap_angle`.  Every function here is pure
and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VesselParams:
    """Mass, damping and geometry constants of the vessel.

    m           mass [kg]
    Iz          yaw inertia [kg*m^2]
    Xu, Yv, Nr  linear damping in surge/sway/yaw [kg/s, kg/s, kg*m^2/s]
    b           half distance between the two thrusters [m]
    hull_radius bounding-circle radius of the hull, used for clearance [m]
    """

    m: float = 29.0
    Iz: float = 2.8
    Xu: float = 20.0
    Yv: float = 20.0
    Nr: float = 20.0
    b: float = 0.35
    hull_radius: float = 0.7

    def __post_init__(self):
        if self.m <= 0 or self.Iz <= 0:
            raise ValueError("mass and yaw inertia must be positive")
        if min(self.Xu, self.Yv, self.Nr) < 0:
            raise ValueError("damping coefficients must be non-negative")
        if self.b <= 0 or self.hull_radius <= 0:
            raise ValueError("b and hull_radius must be positive")


@dataclass(frozen=True)
class Pose:
    """Earth-fixed position [m] and heading [rad]."""

    x: float
    y: float
    psi: float


@dataclass(frozen=True)
class BodyVelocity:
    """Body-frame surge u [m/s], sway v [m/s] and yaw rate r [rad/s]."""

    u: float
    v: float
    r: float


@dataclass(frozen=True)
class BodyAcceleration:
    du: float
    dv: float
    dr: float


@dataclass(frozen=True)
class BodyJerk:
    ddu: float
    ddv: float
    ddr: float


@dataclass(frozen=True)
class PoseRate:
    """Earth-frame velocity [m/s] and heading rate [rad/s]."""

    dx: float
    dy: float
    dpsi: float


@dataclass(frozen=True)
class ControlInput:
    """Surge force tau_u [N] and yaw moment tau_r [N*m]; sway force is zero."""

    tau_u: float
    tau_r: float


@dataclass(frozen=True)
class ThrusterForces:
    """Port (F1) and starboard (F2) thrust [N]."""

    F1: float
    F2: float


@dataclass(frozen=True)
class VesselState:
    """Pose, velocity and the acceleration consistent with the control in force.

    Construct via `from_control` so that `acc` always equals
    `acceleration(vel, tau, params)` for the instantaneous control.
    """

    pose: Pose
    vel: BodyVelocity
    acc: BodyAcceleration

    @classmethod
    def from_control(cls, pose: Pose, vel: BodyVelocity, tau: ControlInput,
                     params: VesselParams) -> "VesselState":
        return cls(pose=pose, vel=vel, acc=acceleration(vel, tau, params))


def wrap_angle(psi: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - psi) % (2.0 * math.pi)


def rotation_apply(psi: float, vel: BodyVelocity) -> PoseRate:
    """Rotate a body velocity into the earth frame: eta_dot = R(psi) nu."""
    c, s = math.cos(psi), math.sin(psi)
    return PoseRate(dx=vel.u * c - vel.v * s,
                    dy=vel.u * s + vel.v * c,
                    dpsi=vel.r)


def acceleration(vel: BodyVelocity, tau: ControlInput,
                 params: VesselParams) -> BodyAcceleration:
    """Body acceleration nu_dot = M^-1 (tau - C(nu) nu - D nu)."""
    u, v, r = vel.u, vel.v, vel.r
    return BodyAcceleration(
        du=tau.tau_u / params.m - v * r - (params.Xu / params.m) * u,
        dv=u * r - (params.Yv / params.m) * v,
        dr=tau.tau_r / params.Iz - (params.Nr / params.Iz) * r,
    )


def jerk(vel: BodyVelocity, acc: BodyAcceleration, tau_rate: tuple[float, float],
         params: VesselParams) -> BodyJerk:
    """Time derivative of the acceleration for given control rates [N/s, N*m/s]."""
    dtau_u, dtau_r = tau_rate
    return BodyJerk(
        ddu=dtau_u / params.m - vel.v * acc.dr - acc.dv * vel.r
            - (params.Xu / params.m) * acc.du,
        ddv=acc.du * vel.r + vel.u * acc.dr - (params.Yv / params.m) * acc.dv,
        ddr=dtau_r / params.Iz - (params.Nr / params.Iz) * acc.dr,
    )


def allocate_thrusters(tau: ControlInput, params: VesselParams) -> ThrusterForces:
    """Split a (surge force, yaw moment) command into the two thruster forces."""
    half_diff = tau.tau_r / params.b
    return ThrusterForces(F1=0.5 * (tau.tau_u + half_diff),
                          F2=0.5 * (tau.tau_u - half_diff))


def thrust_to_tau(forces: ThrusterForces, params: VesselParams) -> ControlInput:
    """Combine thruster forces into the surge force and yaw moment."""
    return ControlInput(tau_u=forces.F1 + forces.F2,
                        tau_r=params.b * (forces.F1 - forces.F2))


def state_derivative(pose: Pose, vel: BodyVelocity, tau: ControlInput,
                     params: VesselParams) -> tuple[PoseRate, BodyAcceleration]:
    """Full 6-dimensional ODE right-hand side (pose rate, body acceleration)."""
    return rotation_apply(pose.psi, vel), acceleration(vel, tau, params)


# Array forms used by the transcription and the simulator.  States are rows
# (x, y, psi, u, v, r), controls are rows (tau_u, tau_r).

def state_derivative_array(states: np.ndarray, controls: np.ndarray,
                           params: VesselParams) -> np.ndarray:
    """Vectorized ODE right-hand side for (n, 6) states and (n, 2) controls."""
    states = np.atleast_2d(states)
    controls = np.atleast_2d(controls)
    psi, u, v, r = states[:, 2], states[:, 3], states[:, 4], states[:, 5]
    c, s = np.cos(psi), np.sin(psi)
    out = np.empty_like(states)
    out[:, 0] = u * c - v * s
    out[:, 1] = u * s + v * c
    out[:, 2] = r
    out[:, 3] = controls[:, 0] / params.m - v * r - (params.Xu / params.m) * u
    out[:, 4] = u * r - (params.Yv / params.m) * v
    out[:, 5] = controls[:, 1] / params.Iz - (params.Nr / params.Iz) * r
    return out


def acceleration_array(states: np.ndarray, controls: np.ndarray,
                       params: VesselParams) -> np.ndarray:
    """Vectorized body acceleration (n, 3) from (n, 6) states and (n, 2) controls."""
    states = np.atleast_2d(states)
    controls = np.atleast_2d(controls)
    u, v, r = states[:, 3], states[:, 4], states[:, 5]
    out = np.empty((states.shape[0], 3))
    out[:, 0] = controls[:, 0] / params.m - v * r - (params.Xu / params.m) * u
    out[:, 1] = u * r - (params.Yv / params.m) * v
    out[:, 2] = controls[:, 1] / params.Iz - (params.Nr / params.Iz) * r
    return out


def derivative_jacobians(states: np.ndarray, controls: np.ndarray,
                         params: VesselParams) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians of the ODE right-hand side w.r.t. state and control.

    Returns (A, B) with A of shape (n, 6, 6) and B of shape (n, 6, 2).
    """
    states = np.atleast_2d(states)
    n = states.shape[0]
    psi, u, v, r = states[:, 2], states[:, 3], states[:, 4], states[:, 5]
    c, s = np.cos(psi), np.sin(psi)
    A = np.zeros((n, 6, 6))
    A[:, 0, 2] = -u * s - v * c
    A[:, 0, 3] = c
    A[:, 0, 4] = -s
    A[:, 1, 2] = u * c - v * s
    A[:, 1, 3] = s
    A[:, 1, 4] = c
    A[:, 2, 5] = 1.0
    A[:, 3, 3] = -params.Xu / params.m
    A[:, 3, 4] = -r
    A[:, 3, 5] = -v
    A[:, 4, 3] = r
    A[:, 4, 4] = -params.Yv / params.m
    A[:, 4, 5] = u
    A[:, 5, 5] = -params.Nr / params.Iz
    B = np.zeros((n, 6, 2))
    B[:, 3, 0] = 1.0 / params.m
    B[:, 5, 1] = 1.0 / params.Iz
    return A, B


def acceleration_jacobians(states: np.ndarray, controls: np.ndarray,
                           params: VesselParams) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians of the body acceleration w.r.t. (u, v, r) and (tau_u, tau_r).

    Returns (Av, Bt) with Av of shape (n, 3, 3) and Bt of shape (n, 3, 2).
    """
    states = np.atleast_2d(states)
    n = states.shape[0]
    u, v, r = states[:, 3], states[:, 4], states[:, 5]
    Av = np.zeros((n, 3, 3))
    Av[:, 0, 0] = -params.Xu / params.m
    Av[:, 0, 1] = -r
    Av[:, 0, 2] = -v
    Av[:, 1, 0] = r
    Av[:, 1, 1] = -params.Yv / params.m
    Av[:, 1, 2] = u
    Av[:, 2, 2] = -params.Nr / params.Iz
    Bt = np.zeros((n, 3, 2))
    Bt[:, 0, 0] = 1.0 / params.m
    Bt[:, 2, 1] = 1.0 / params.Iz
    return Av, Bt


def surge_step_response(tau_u: float, u0: float, t: float,
                        params: VesselParams) -> float:
    """Closed-form surge speed under constant tau_u with v = r = 0.

    With v = r = 0 the surge ODE is linear and

        u(t) = (tau_u/Xu) (1 - exp(-Xu t / m)) + u0 exp(-Xu t / m).

    Used as an integration oracle by the simulator tests.
    """
    decay = math.exp(-params.Xu * t / params.m)
    return (tau_u / params.Xu) * (1.0 - decay) + u0 * decay
