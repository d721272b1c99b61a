"""Planar three-lane driving environment (reward objective).

The ego car follows unicycle dynamics among fixed lanes with another
vehicle on a precomputed trajectory. Optimal paths are found over a
pre-sampled candidate library (lane keeps, lane changes, speed
profiles, perturbations) followed by a deterministic coordinate-wise
hill-climb refinement, so the returned path is never worse than any
candidate under the queried weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    REGRET_SHIFT_EPS,
    ContractError,
    Environment,
    ObjectiveMode,
    Path,
    WeightBounds,
    as_weight,
)

__all__ = [
    "DriverScene",
    "Trajectory",
    "DriverEnvironment",
    "rollout",
    "driver_features",
    "sample_candidates",
    "driver_optimal_path",
    "scene_to_dict",
    "scene_from_dict",
    "load_scene",
]

BASE_FEATURES = 4
EXTENDED_FEATURES = 12

HILL_CLIMB_ITERS = 50
HILL_CLIMB_STEP = 0.15


@dataclass(frozen=True, eq=False)
class Trajectory(Path):
    """A rolled-out control sequence; identity is the control sequence."""

    controls: tuple = ()

    def identity(self):
        return self.controls


@dataclass(frozen=True)
class DriverScene:
    """Road geometry, dynamics constants and the other vehicle's motion."""

    lane_centers: tuple
    dt: float
    horizon: int
    ego_start: tuple  # (x, y, heading, speed)
    other_vehicle: tuple  # ((x, y), ...) with one entry per step
    target_speed: float
    bounds: WeightBounds
    extended: bool = False
    road_heading: float = 0.0
    steer_max: float = 1.0
    accel_max: float = 2.0
    lane_sharpness: float = 4.0
    dist_sharpness: float = 1.0
    feature_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lane_centers", tuple(float(c) for c in self.lane_centers))
        object.__setattr__(self, "ego_start", tuple(float(v) for v in self.ego_start))
        object.__setattr__(
            self, "other_vehicle", tuple((float(x), float(y)) for x, y in self.other_vehicle)
        )
        if self.horizon < 2:
            raise ContractError("horizon must be at least 2")
        if self.dt <= 0:
            raise ContractError("dt must be positive")
        if len(self.other_vehicle) != self.horizon:
            raise ContractError("other_vehicle trajectory length must equal horizon")
        if len(self.ego_start) != 4:
            raise ContractError("ego_start must be (x, y, heading, speed)")
        if not self.lane_centers:
            raise ContractError("need at least one lane")
        if self.target_speed <= 0:
            raise ContractError("target_speed must be positive")
        if self.bounds.dim != self.feature_dim:
            raise ContractError(
                f"bounds dimension {self.bounds.dim} != feature dim {self.feature_dim}"
            )

    @property
    def feature_dim(self) -> int:
        return EXTENDED_FEATURES if self.extended else BASE_FEATURES

    @property
    def n_controls(self) -> int:
        return self.horizon - 1


def rollout(scene: DriverScene, controls) -> Trajectory:
    """Integrate unicycle dynamics from the ego start state.

    Per step: x += v cos(h) dt, y += v sin(h) dt, h += steer dt,
    v += accel dt with v clamped at zero.
    """
    ctrl = tuple((float(s), float(a)) for s, a in controls)
    if len(ctrl) != scene.n_controls:
        raise ContractError(
            f"expected {scene.n_controls} controls, got {len(ctrl)}"
        )
    for s, a in ctrl:
        if abs(s) > scene.steer_max + 1e-9 or abs(a) > scene.accel_max + 1e-9:
            raise ContractError(f"control ({s}, {a}) outside actuation bounds")
    x, y, th, v = scene.ego_start
    dt = scene.dt
    states = [(x, y, th, v)]
    for s, a in ctrl:
        x += v * math.cos(th) * dt
        y += v * math.sin(th) * dt
        th += s * dt
        v = max(0.0, v + a * dt)
        states.append((x, y, th, v))
    states = tuple(states)
    return Trajectory(
        states=states, features=driver_features(scene, states), controls=ctrl
    )


def driver_features(scene: DriverScene, traj, extended: bool | None = None) -> np.ndarray:
    """Feature vector of a trajectory, computed from its states.

    Base features (horizon means): heading alignment cos(h - road),
    lane centering exp(-beta d_lane^2), negative squared speed deviation
    (relative to target), negative proximity exp(-gamma d_other^2).
    The extended set adds distance along the road, lateral movement,
    mean/max lateral and angular acceleration, minimum speed and
    minimum distance to the other vehicle, each scaled to order one.
    """
    states = traj.states if isinstance(traj, Path) else tuple(traj)
    if extended is None:
        extended = scene.extended
    arr = np.asarray(states, dtype=float)
    xs, ys, ths, vs = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    centers = np.asarray(scene.lane_centers)
    other = np.asarray(scene.other_vehicle)[: len(states)]

    d_lane = np.min(np.abs(ys[:, None] - centers[None, :]), axis=1)
    d_other = np.hypot(xs - other[:, 0], ys - other[:, 1])
    vt = scene.target_speed

    heading = float(np.mean(np.cos(ths - scene.road_heading)))
    lane = float(np.mean(np.exp(-scene.lane_sharpness * d_lane**2)))
    speed = float(np.mean(-(((vs - vt) / vt) ** 2)))
    proximity = float(np.mean(-np.exp(-scene.dist_sharpness * d_other**2)))
    feats = [heading, lane, speed, proximity]

    if extended:
        dt = scene.dt
        nominal = vt * dt * (len(states) - 1)
        span = max(centers) - min(centers) or 1.0
        omega = np.diff(ths) / dt
        a_lat = vs[:-1] * omega
        a_ang = np.diff(omega) / dt if len(omega) > 1 else np.zeros(1)
        a_lat_ref = vt * scene.steer_max
        a_ang_ref = 2.0 * scene.steer_max / dt
        feats += [
            float((xs[-1] - xs[0]) / nominal),
            float(np.sum(np.abs(np.diff(ys))) / span),
            float(np.mean(np.abs(a_lat)) / a_lat_ref),
            float(np.max(np.abs(a_lat)) / a_lat_ref),
            float(np.mean(np.abs(a_ang)) / a_ang_ref),
            float(np.max(np.abs(a_ang)) / a_ang_ref),
            float(np.min(vs) / vt),
            float(np.min(d_other) / nominal),
        ]
    return np.asarray(feats) * scene.feature_scale


def _lane_change_controls(scene: DriverScene, direction: int, start: int, accel: float):
    """S-curve steering pulse shifting roughly one lane laterally."""
    n = scene.n_controls
    centers = sorted(scene.lane_centers)
    spacing = centers[1] - centers[0] if len(centers) > 1 else 1.0
    m = min(6, max(1, (n - start) // 2))
    v0 = max(scene.ego_start[3], 1e-6)
    sigma = min(scene.steer_max, spacing / (v0 * m**2 * scene.dt**2))
    ctrl = [[0.0, accel] for _ in range(n)]
    for k in range(m):
        if start + k < n:
            ctrl[start + k][0] = direction * sigma
        if start + m + k < n:
            ctrl[start + m + k][0] = -direction * sigma
    return [tuple(c) for c in ctrl]


def _control_library(scene: DriverScene) -> list:
    n = scene.n_controls
    zero = [(0.0, 0.0)] * n
    lib = [zero]
    starts = [s for s in (0, 3, 6, 9, 12) if s < n]
    for direction in (1, -1):
        for start in starts:
            lib.append(_lane_change_controls(scene, direction, start, 0.0))
    amax = scene.accel_max
    for a in (-amax, -amax / 2, amax / 2, amax):
        lib.append([(0.0, a)] * n)
    half = n // 2
    lib.append([(0.0, -amax)] * half + [(0.0, 0.0)] * (n - half))
    lib.append([(0.0, amax)] * half + [(0.0, 0.0)] * (n - half))
    for direction in (1, -1):
        for start in (0, 6):
            if start < n:
                for a in (-amax / 2, amax / 2):
                    lib.append(_lane_change_controls(scene, direction, start, a))
    return lib


def sample_candidates(scene: DriverScene, n: int, seed) -> tuple:
    """Pre-sampled path lookup table: control library plus perturbations."""
    if n < 1:
        raise ContractError("need at least one candidate")
    rng = np.random.default_rng(seed)
    lib = _control_library(scene)
    controls: list = [np.asarray(c) for c in lib[:n]]
    scale = np.array([HILL_CLIMB_STEP * scene.steer_max * 2, HILL_CLIMB_STEP * scene.accel_max * 2])
    hi = np.array([scene.steer_max, scene.accel_max])
    k = len(controls)
    while len(controls) < n:
        if k % 3 == 2:
            ctrl = rng.uniform(-hi, hi, size=(scene.n_controls, 2))
        else:
            base = np.asarray(lib[k % len(lib)])
            ctrl = base + rng.normal(0.0, scale, size=base.shape)
        controls.append(np.clip(ctrl, -hi, hi))
        k += 1
    return tuple(rollout(scene, c) for c in controls)


def _reward(scene: DriverScene, controls: np.ndarray, w: np.ndarray) -> tuple:
    traj = rollout(scene, controls)
    return float(np.dot(traj.features, w)), traj


def driver_optimal_path(
    scene: DriverScene,
    w,
    candidates: Sequence[Trajectory],
    refine: bool = True,
    candidate_features: np.ndarray | None = None,
) -> Trajectory:
    """Best-reward candidate, optionally improved by local hill-climb.

    The refinement perturbs one control coordinate at a time (fixed
    iteration budget, deterministic order), accepting only strict
    improvements, so its result never scores below the best candidate.
    """
    if not candidates:
        raise ContractError("empty candidate set")
    w = as_weight(w, dim=scene.feature_dim)
    if candidate_features is None:
        candidate_features = np.array([t.features for t in candidates])
    rewards = candidate_features @ w
    best_idx = int(np.argmax(rewards))
    best = candidates[best_idx]
    if not refine:
        return Trajectory(
            states=best.states,
            features=best.features,
            controls=best.controls,
            optimal_for=np.array(w),
        )
    ctrl = np.array(best.controls)
    best_r = float(rewards[best_idx])
    steps = (HILL_CLIMB_STEP * scene.steer_max, HILL_CLIMB_STEP * scene.accel_max)
    hi = (scene.steer_max, scene.accel_max)
    n_coords = ctrl.size
    for it in range(HILL_CLIMB_ITERS):
        row, col = divmod(it % n_coords, 2)
        for sign in (1.0, -1.0):
            trial = ctrl.copy()
            trial[row, col] = float(
                np.clip(trial[row, col] + sign * steps[col], -hi[col], hi[col])
            )
            r, _ = _reward(scene, trial, w)
            if r > best_r:
                ctrl = trial
                best_r = r
                break
    final = rollout(scene, ctrl)
    return Trajectory(
        states=final.states,
        features=final.features,
        controls=final.controls,
        optimal_for=np.array(w),
    )


class DriverEnvironment(Environment):
    """Environment facade over a DriverScene plus its candidate table."""

    mode = ObjectiveMode.REWARD

    def __init__(self, scene: DriverScene, n_candidates: int = 500, seed: int = 0, refine: bool = True):
        self.scene = scene
        self.bounds = scene.bounds
        self.refine = refine
        self.candidates = sample_candidates(scene, n_candidates, seed)
        self.candidate_features = np.array([t.features for t in self.candidates])

    def path_features(self, path: Path) -> np.ndarray:
        return driver_features(self.scene, path.states)

    def optimal_path(self, w) -> Trajectory:
        return driver_optimal_path(
            self.scene,
            w,
            self.candidates,
            refine=self.refine,
            candidate_features=self.candidate_features,
        )

    def cost_offset(self, w) -> float:
        w = as_weight(w, dim=self.scene.feature_dim)
        low = float(np.min(self.candidate_features @ w))
        return max(0.0, REGRET_SHIFT_EPS - low)


def scene_to_dict(scene: DriverScene) -> dict:
    return {
        "lanes": list(scene.lane_centers),
        "dt": scene.dt,
        "horizon": scene.horizon,
        "ego_start": list(scene.ego_start),
        "other_vehicle": [list(p) for p in scene.other_vehicle],
        "target_speed": scene.target_speed,
        "bounds": {
            "lower": scene.bounds.lower.tolist(),
            "upper": scene.bounds.upper.tolist(),
        },
        "extended": scene.extended,
        "road_heading": scene.road_heading,
        "steer_max": scene.steer_max,
        "accel_max": scene.accel_max,
        "lane_sharpness": scene.lane_sharpness,
        "dist_sharpness": scene.dist_sharpness,
        "feature_scale": scene.feature_scale,
    }


def scene_from_dict(doc: dict) -> DriverScene:
    try:
        return DriverScene(
            lane_centers=tuple(doc["lanes"]),
            dt=float(doc["dt"]),
            horizon=int(doc["horizon"]),
            ego_start=tuple(doc["ego_start"]),
            other_vehicle=tuple(tuple(p) for p in doc["other_vehicle"]),
            target_speed=float(doc["target_speed"]),
            bounds=WeightBounds(
                lower=doc["bounds"]["lower"], upper=doc["bounds"]["upper"]
            ),
            extended=bool(doc.get("extended", False)),
            road_heading=float(doc.get("road_heading", 0.0)),
            steer_max=float(doc.get("steer_max", 1.0)),
            accel_max=float(doc.get("accel_max", 2.0)),
            lane_sharpness=float(doc.get("lane_sharpness", 4.0)),
            dist_sharpness=float(doc.get("dist_sharpness", 1.0)),
            feature_scale=float(doc.get("feature_scale", 1.0)),
        )
    except KeyError as exc:
        raise ContractError(f"scene document missing field {exc}") from exc


def load_scene(path) -> DriverScene:
    """Load and validate a scene JSON document."""
    with open(path) as fh:
        return scene_from_dict(json.load(fh))
