"""Time-domain integration of the closed-loop platoon in physical coordinates.

The simulator works directly with positions Z_i(t) and velocities V_i(t):
each vehicle applies the bidirectional control law against its neighbors,
with the fictitious lead (and, with pinned ends, follow) vehicle tracking
the desired trajectory exactly.  Desired trajectories are
Z_i^d(t) = V_d t - i*Delta.

Integration is classic fixed-step fourth-order Runge-Kutta; the systems of
interest have |eigenvalue| well inside the stability region for the default
step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GainSchedule, PlatoonConfig, Scenario
from .statespace import NumericalError

DIVERGENCE_LIMIT = 1e6


class DivergenceError(NumericalError):
    """Raised when the integration blows up (closed loop unstable)."""

    def __init__(self, time: float):
        super().__init__(f"trajectory diverged at t = {time:.6g}")
        self.time = time


@dataclass(frozen=True)
class SimulationSetup:
    config: PlatoonConfig
    delta_phys: float = 1.0
    v_desired: float = 5.0
    t_final: float = 300.0
    dt: float = 0.01
    initial_perturbation: float = 0.5

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least one step")
        if not self.delta_phys > 0:
            raise ValueError("desired gap must be positive")


@dataclass(frozen=True)
class TrajectoryResult:
    """Sampled trajectories: rows index vehicles, columns index times."""

    times: np.ndarray
    abs_error: np.ndarray
    rel_error: np.ndarray
    velocities: np.ndarray


def simulate(setup: SimulationSetup, schedule: GainSchedule) -> TrajectoryResult:
    """Integrate the platoon from the standard initial condition.

    All vehicles start on their desired trajectory at the desired velocity
    except the first, which starts ``initial_perturbation`` behind (a pure
    spacing error against the fictitious leader).
    """
    if schedule.scenario is not setup.config.scenario:
        raise ValueError("schedule and setup scenarios disagree")
    n = schedule.n_vehicles
    if n != setup.config.n_vehicles:
        raise ValueError("schedule and setup platoon sizes disagree")
    kf = schedule.k_front
    kb = schedule.k_back
    b = schedule.damping
    delta = setup.delta_phys
    v_d = setup.v_desired
    idx = np.arange(1, n + 1, dtype=float)

    def accel(t, z, v):
        z_front = np.empty(n)
        z_front[0] = v_d * t                      # fictitious leader
        z_front[1:] = z[:-1]
        z_back = np.empty(n)
        z_back[:-1] = z[1:]
        # In scenario II k_back[-1] = 0, so the follower value is inert.
        z_back[-1] = v_d * t - (n + 1) * delta
        return kf * (z_front - z - delta) - kb * (z - z_back - delta) - b * (v - v_d)

    steps = int(round(setup.t_final / setup.dt))
    dt = setup.dt
    times = np.arange(steps + 1) * dt

    z = v_d * 0.0 - idx * delta                  # Z_i^d(0)
    z[0] -= setup.initial_perturbation
    v = np.full(n, v_d)

    abs_err = np.empty((n, steps + 1))
    vel = np.empty((n, steps + 1))
    abs_err[:, 0] = (v_d * 0.0 - idx * delta) - z
    vel[:, 0] = v

    t = 0.0
    for k in range(steps):
        a1 = accel(t, z, v)
        z2 = z + 0.5 * dt * v
        v2 = v + 0.5 * dt * a1
        a2 = accel(t + 0.5 * dt, z2, v2)
        z3 = z + 0.5 * dt * v2
        v3 = v + 0.5 * dt * a2
        a3 = accel(t + 0.5 * dt, z3, v3)
        z4 = z + dt * v3
        v4 = v + dt * a3
        a4 = accel(t + dt, z4, v4)
        z = z + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        t = times[k + 1]
        err = (v_d * t - idx * delta) - z
        if np.any(np.abs(err) > DIVERGENCE_LIMIT):
            raise DivergenceError(t)
        abs_err[:, k + 1] = err
        vel[:, k + 1] = v

    # rel_error[i] = abs_error[i] - abs_error[i-1], leader error identically 0
    rel_err = np.empty_like(abs_err)
    rel_err[0] = abs_err[0]
    rel_err[1:] = abs_err[1:] - abs_err[:-1]
    return TrajectoryResult(times, abs_err, rel_err, vel)


def error_norms(result: TrajectoryResult, ord=None) -> np.ndarray:
    """Norm of the absolute-error vector at each sample time."""
    return np.linalg.norm(result.abs_error, ord=ord, axis=0)


def tail_log_slope(result: TrajectoryResult, lower: float = 1e-8, upper: float = 1e-3) -> float:
    """Log-slope of the decaying error norm fitted on the window where the
    norm lies in [lower, upper] (past the transient, above roundoff)."""
    norms = error_norms(result)
    mask = (norms > lower) & (norms < upper)
    if mask.sum() < 10:
        raise ValueError("decay window too short to fit a slope")
    coeffs = np.polyfit(result.times[mask], np.log(norms[mask]), 1)
    return float(coeffs[0])


def time_to_threshold(result: TrajectoryResult, threshold: float) -> float:
    """First time max_i |abs_error_i(t)| falls below the threshold."""
    peak = np.abs(result.abs_error).max(axis=0)
    below = np.nonzero(peak < threshold)[0]
    if len(below) == 0:
        raise ValueError(f"error never fell below {threshold!r}")
    return float(result.times[below[0]])


def trajectory_to_csv(result: TrajectoryResult, max_rows_per_vehicle: int = 2000,
                      digits: int = 12) -> str:
    """Long-format CSV ``t,vehicle,abs_error,rel_error,velocity``; the time
    axis is downsampled to at most ``max_rows_per_vehicle`` samples."""
    n, t_count = result.abs_error.shape
    stride = max(1, -(-t_count // max_rows_per_vehicle))  # ceil division
    sel = np.arange(0, t_count, stride)
    lines = ["t,vehicle,abs_error,rel_error,velocity"]
    for j in sel:
        t = result.times[j]
        for i in range(n):
            lines.append(
                f"{t:.{digits}g},{i + 1},"
                f"{result.abs_error[i, j]:.{digits}g},"
                f"{result.rel_error[i, j]:.{digits}g},"
                f"{result.velocities[i, j]:.{digits}g}"
            )
    return "\n".join(lines) + "\n"
