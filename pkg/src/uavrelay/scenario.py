"""Network realizations: node placement, mission geometry, physical constants."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

# (xmin, ymin, xmax, ymax) in meters
Rect = tuple[float, float, float, float]

# Rejection-resample guard for the zero-MBS case; at the default densities a
# single redraw is already rare.
_MAX_MBS_REDRAWS = 100_000


def area_km2(rect: Rect) -> float:
    xmin, ymin, xmax, ymax = rect
    return (xmax - xmin) * (ymax - ymin) / 1e6


def rect_contains(rect: Rect, xy, tol: float = 1e-9) -> bool:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    xmin, ymin, xmax, ymax = rect
    return bool(
        np.all(xy[:, 0] >= xmin - tol)
        and np.all(xy[:, 0] <= xmax + tol)
        and np.all(xy[:, 1] >= ymin - tol)
        and np.all(xy[:, 1] <= ymax + tol)
    )


def _check_rect(rect: Rect, name: str) -> None:
    xmin, ymin, xmax, ymax = rect
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"{name} must have positive extent, got {rect}")


@dataclass(frozen=True)
class PhysicalConfig:
    """Transmit powers, geometry heights and densities (downlink defaults)."""

    p_mbs_dbm: float = 46.0
    p_uav_dbm: float = 30.0
    v_max: float = 17.7          # m/s
    h_uav: float = 120.0         # m
    h_bs: float = 30.0           # m
    h_ue: float = 2.0            # m
    f_c_mhz: float = 1500.0
    alpha_los: float = 2.09
    alpha_nlos: float = 3.75
    lambda_mbs: float = 4.0      # nodes per km^2
    lambda_ue: float = 100.0     # nodes per km^2
    outage_threshold: float = 0.05  # bps/Hz

    def __post_init__(self) -> None:
        for name in ("p_mbs_dbm", "p_uav_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if not (self.h_uav > self.h_bs > self.h_ue > 0):
            raise ValueError("heights must satisfy h_uav > h_bs > h_ue > 0")
        if self.f_c_mhz <= 0:
            raise ValueError("f_c_mhz must be positive")
        if self.lambda_mbs <= 0 or self.lambda_ue < 0:
            raise ValueError("densities must be positive (lambda_ue may be 0)")
        if self.alpha_los <= 0 or self.alpha_nlos <= 0:
            raise ValueError("path-loss exponents must be positive")
        if self.outage_threshold <= 0:
            raise ValueError("outage_threshold must be positive")


@dataclass(frozen=True)
class Mission:
    """Start/finish points, timing discretization and the two flight areas.

    The node area (area_ue) sits centered inside the larger UAV flight
    area (area_uav) by default, so the planner may overshoot the node
    square by one grid cell on every side.
    """

    start: tuple[float, float] = (0.0, 0.0)
    finish: tuple[float, float] = (1000.0, 1000.0)
    duration_t: float = 240.0    # s
    stage_dt: float = 8.0        # s
    area_ue: Rect = (0.0, 0.0, 1000.0, 1000.0)
    area_uav: Rect = (-100.0, -100.0, 1100.0, 1100.0)

    def __post_init__(self) -> None:
        if self.stage_dt <= 0:
            raise ValueError("stage_dt must be positive")
        if self.duration_t <= 0:
            raise ValueError("duration_t must be positive")
        n = self.duration_t / self.stage_dt
        if abs(n - round(n)) > 1e-9:
            raise ValueError(
                f"duration_t={self.duration_t} is not an integer multiple of "
                f"stage_dt={self.stage_dt}"
            )
        _check_rect(self.area_ue, "area_ue")
        _check_rect(self.area_uav, "area_uav")

    @property
    def n_stages(self) -> int:
        return round(self.duration_t / self.stage_dt)


def t_min(start, finish, v_max: float) -> float:
    """Minimum mission time: straight-line distance at top speed."""
    if v_max <= 0:
        raise ValueError("v_max must be positive")
    dx = finish[0] - start[0]
    dy = finish[1] - start[1]
    return math.hypot(dx, dy) / v_max


@dataclass(eq=False)
class Scenario:
    """One frozen network realization. Treated as immutable once built."""

    config: PhysicalConfig
    mission: Mission
    mbs_xy: np.ndarray   # (M, 2) meters
    ue_xy: np.ndarray    # (K, 2) meters
    seed: int
    mbs_rejections: int = 0

    @property
    def n_mbs(self) -> int:
        return self.mbs_xy.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue_xy.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "mission": asdict(self.mission),
            "seed": self.seed,
            "mbs_rejections": self.mbs_rejections,
            "mbs_xy": self.mbs_xy.tolist(),
            "ue_xy": self.ue_xy.tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, d: dict) -> "Scenario":
        mission = d["mission"]
        mission = Mission(
            start=tuple(mission["start"]),
            finish=tuple(mission["finish"]),
            duration_t=mission["duration_t"],
            stage_dt=mission["stage_dt"],
            area_ue=tuple(mission["area_ue"]),
            area_uav=tuple(mission["area_uav"]),
        )
        return cls(
            config=PhysicalConfig(**d["config"]),
            mission=mission,
            mbs_xy=np.asarray(d["mbs_xy"], dtype=float).reshape(-1, 2),
            ue_xy=np.asarray(d["ue_xy"], dtype=float).reshape(-1, 2),
            seed=d["seed"],
            mbs_rejections=d.get("mbs_rejections", 0),
        )

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _uniform_in_rect(rng: np.random.Generator, rect: Rect, n: int) -> np.ndarray:
    xmin, ymin, xmax, ymax = rect
    return rng.uniform((xmin, ymin), (xmax, ymax), size=(n, 2))


def _poisson_icdf(mean: float, u: float) -> int:
    """Smallest k with Poisson(mean) CDF >= u, by direct summation."""
    if mean > 700.0:
        raise ValueError("Poisson inversion supports means up to 700")
    pmf = math.exp(-mean)
    cdf = pmf
    k = 0
    while cdf < u:
        k += 1
        pmf *= mean / k
        cdf += pmf
        if k > 1_000_000:  # unreachable for u < 1; guards degenerate input
            raise RuntimeError("Poisson inversion failed to converge")
    return k


def generate_scenario(config: PhysicalConfig, mission: Mission, seed: int,
                      min_mbs: int = 1) -> Scenario:
    """Draw one homogeneous-PPP realization of MBS and UE positions.

    Counts are Poisson with mean density * area (drawn by inverse-CDF from
    one uniform each), positions are uniform given the count. Randomness
    comes from four documented jumped() substreams of numpy's PCG64 keyed by
    the 64-bit seed (MBS count, MBS positions, UE count, UE positions), so a
    given seed reproduces the realization bit for bit on any platform, and
    two scenarios with the same seed but different densities are coupled:
    the sparser node set is a prefix of the denser one and the UE layout is
    shared, which keeps density comparisons paired. A draw with fewer than
    min_mbs MBSs leaves the interference-limited model undefined and is
    redrawn (count recorded in mbs_rejections); relay pipelines need
    min_mbs=2 so the backhaul keeps an interferer. A zero-UE draw is kept.
    """
    _check_rect(mission.area_ue, "area_ue")
    _check_rect(mission.area_uav, "area_uav")
    if min_mbs < 1:
        raise ValueError("min_mbs must be >= 1")
    need = t_min(mission.start, mission.finish, config.v_max)
    if mission.duration_t < need:
        raise ValueError(
            f"duration_t={mission.duration_t:.3f}s is below the minimum "
            f"{need:.3f}s required at v_max={config.v_max} m/s"
        )

    root = np.random.PCG64(seed)
    rng_mbs_count = np.random.Generator(root)
    rng_mbs_pos = np.random.Generator(root.jumped(1))
    rng_ue_count = np.random.Generator(root.jumped(2))
    rng_ue_pos = np.random.Generator(root.jumped(3))
    area = area_km2(mission.area_ue)

    rejections = 0
    n_mbs = _poisson_icdf(config.lambda_mbs * area, rng_mbs_count.random())
    while n_mbs < min_mbs:
        rejections += 1
        if rejections > _MAX_MBS_REDRAWS:
            raise RuntimeError("could not draw an acceptable MBS realization")
        n_mbs = _poisson_icdf(config.lambda_mbs * area, rng_mbs_count.random())
    mbs_xy = _uniform_in_rect(rng_mbs_pos, mission.area_ue, n_mbs)

    n_ue = _poisson_icdf(config.lambda_ue * area, rng_ue_count.random())
    ue_xy = _uniform_in_rect(rng_ue_pos, mission.area_ue, n_ue)

    return Scenario(
        config=config,
        mission=mission,
        mbs_xy=mbs_xy,
        ue_xy=ue_xy,
        seed=int(seed),
        mbs_rejections=rejections,
    )
