"""Bezier smoothing of DP waypoint paths and off-grid re-evaluation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import radio
from .pathloss import LinkModels
from .radio import AntennaSetup
from .planner import Trajectory
from .scenario import Scenario, rect_contains


def bernstein(i: int, n: int, t: float) -> float:
    """Bernstein weight C(n,i) (1-t)^(n-i) t^i; closed form, small n only."""
    if not 0 <= i <= n:
        raise ValueError(f"index i={i} outside 0..{n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    return math.comb(n, i) * (1.0 - t) ** (n - i) * t ** i


def de_casteljau(control: np.ndarray, t: float) -> np.ndarray:
    """Numerically stable curve point by repeated linear interpolation."""
    pts = np.array(control, dtype=float)
    while pts.shape[0] > 1:
        pts = (1.0 - t) * pts[:-1] + t * pts[1:]
    return pts[0]


@dataclass(eq=False)
class BezierCurve:
    control: np.ndarray  # (n+1, 2)

    def __post_init__(self) -> None:
        self.control = np.asarray(self.control, dtype=float).reshape(-1, 2)
        if self.control.shape[0] < 2:
            raise ValueError("a Bezier curve needs at least 2 control points")

    @property
    def degree(self) -> int:
        return self.control.shape[0] - 1

    def point(self, t: float) -> np.ndarray:
        return de_casteljau(self.control, t)

    def points(self, ts) -> np.ndarray:
        return np.array([de_casteljau(self.control, t) for t in np.asarray(ts, dtype=float)])


@dataclass(eq=False)
class SmoothedTrajectory:
    """A DP path smoothed by one global Bezier of the same degree.

    Curve parameter maps linearly to mission time, so clusters of hover
    waypoints compress arc length and the UAV slows down near them. Samples
    are taken at the N+1 stage times; speeds implied between samples are
    reported (speed_violations) but never repaired here.
    """

    source: Trajectory
    curve: BezierCurve
    sample_ts: np.ndarray      # (N+1,) curve parameters
    positions: np.ndarray      # (N+1, 2) meters
    speeds: np.ndarray         # (N,) m/s between consecutive samples
    speed_violations: list[int]
    stage_dt: float

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_s", "x_m", "y_m", "v_mps"])
            for j, (x, y) in enumerate(self.positions):
                v = self.speeds[j] if j < self.speeds.size else 0.0
                w.writerow([repr(j * self.stage_dt), repr(float(x)), repr(float(y)),
                            repr(float(v))])


def smooth(traj: Trajectory, v_max: float | None = None) -> SmoothedTrajectory:
    """Fit one Bezier with the DP waypoints as control points and resample.

    Endpoints interpolate the mission start/finish exactly; interior samples
    live in the convex hull of the waypoints.
    """
    waypoints = np.asarray(traj.positions, dtype=float)
    if waypoints.shape[0] < 2:
        raise ValueError("need at least 2 waypoints to smooth")
    curve = BezierCurve(waypoints)
    n = waypoints.shape[0] - 1
    ts = np.arange(n + 1) / n
    positions = curve.points(ts)
    # exact endpoint interpolation regardless of rounding in de Casteljau
    positions[0] = waypoints[0]
    positions[-1] = waypoints[-1]
    speeds = np.linalg.norm(np.diff(positions, axis=0), axis=1) / traj.stage_dt
    violations = []
    if v_max is not None:
        violations = [int(j) for j in np.nonzero(speeds > v_max + 1e-9)[0]]
    return SmoothedTrajectory(source=traj, curve=curve, sample_ts=ts,
                              positions=positions, speeds=speeds,
                              speed_violations=violations, stage_dt=traj.stage_dt)


def evaluate_smoothed(smoothed: SmoothedTrajectory, scn: Scenario, criterion: str,
                      mode: str, models: LinkModels, ants: AntennaSetup,
                      relay_rule: str = "best_direct"):
    """Re-associate at every sampled position; returns (stage_rewards, rates).

    Positions are taken at the start of each stage interval, matching the
    discrete-path convention, with no grid snapping.
    """
    if not rect_contains(scn.mission.area_uav, smoothed.positions):
        raise ValueError("smoothed trajectory leaves the flight area")
    stage_positions = smoothed.positions[:-1]
    rates = radio.stage_rates(stage_positions, scn, mode, models, ants, relay_rule)
    rewards = np.array([radio.criterion_reward(r, criterion) for r in rates])
    return rewards, rates
