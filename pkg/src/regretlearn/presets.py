"""Canonical environments used by the experiment reproductions and CLI.

The mobile world is a fixed 12x12 lattice with 18 disjoint rectangular
regions between opposite corners; region weights may be negative
(desired areas) while the bounds keep every stage cost positive. The
driver scenes share one road and vary the other vehicle's start state.
"""

from __future__ import annotations

from .core import ContractError, Environment, WeightBounds
from .driver import DriverEnvironment, DriverScene, scene_from_dict
from .gridworld import GridEnvironment, GridMap, Region, map_from_dict

__all__ = [
    "mobile_map",
    "mobile_tasks",
    "driver_scene",
    "build_env",
]

# (x0, y0, width, height) of each region rectangle. The layout is three
# wall-like barrier rows with two door gaps each (most wall segments are
# two stacked regions, so their effective weight is a two-term sum) plus
# two free-standing blocks. This keeps the set of optimal paths small
# (a few dozen equivalence classes) while spanning 19 weight dimensions.
_MOBILE_RECTS = (
    (0, 2, 1, 1),
    (0, 2, 1, 1),
    (3, 2, 3, 1),
    (3, 2, 3, 1),
    (8, 2, 4, 1),
    (8, 2, 4, 1),
    (0, 5, 4, 1),
    (0, 5, 4, 1),
    (6, 5, 3, 1),
    (6, 5, 3, 1),
    (11, 5, 1, 1),
    (11, 5, 1, 1),
    (0, 8, 2, 1),
    (0, 8, 2, 1),
    (4, 8, 3, 1),
    (4, 8, 3, 1),
    (4, 10, 2, 2),
    (8, 0, 2, 2),
)

MOBILE_REGION_BOUNDS = (-0.2, 1.0)
MOBILE_TIME_BOUNDS = (0.45, 1.0)
MOBILE_STEP_TIME = 12.0


def mobile_map(start=(0, 0), goal=(11, 11)) -> GridMap:
    """The fixed 18-region lattice world (19 weight dimensions)."""
    regions = tuple(
        Region(
            id=i,
            cells=frozenset(
                (x0 + dx, y0 + dy) for dx in range(w) for dy in range(h)
            ),
        )
        for i, (x0, y0, w, h) in enumerate(_MOBILE_RECTS)
    )
    n = len(regions)
    lower = [MOBILE_REGION_BOUNDS[0]] * n + [MOBILE_TIME_BOUNDS[0]]
    upper = [MOBILE_REGION_BOUNDS[1]] * n + [MOBILE_TIME_BOUNDS[1]]
    return GridMap(
        width=12,
        height=12,
        regions=regions,
        start=start,
        goal=goal,
        step_time=MOBILE_STEP_TIME,
        bounds=WeightBounds(lower=lower, upper=upper),
    )


def mobile_tasks() -> tuple:
    """Three start-goal tasks sharing the mobile world's regions."""
    base = mobile_map()
    return (
        base,
        base.with_task((11, 0), (0, 11)),
        base.with_task((0, 5), (11, 6)),
    )


_DRIVER_VARIANTS = (
    (6.0, 0.0),
    (3.0, 0.0),
    (9.0, 0.0),
    (5.0, 3.0),
    (7.0, -3.0),
    (12.0, 0.0),
)

DRIVER_FEATURE_SCALE = 4.0


def driver_scene(
    extended: bool = False, variant: int = 0, feature_scale: float = DRIVER_FEATURE_SCALE
) -> DriverScene:
    """Three-lane road scene; variants move the other vehicle's start."""
    if not 0 <= variant < len(_DRIVER_VARIANTS):
        raise ContractError(f"unknown driver variant {variant}")
    x0, y0 = _DRIVER_VARIANTS[variant]
    horizon = 25
    dt = 0.1
    other_speed = 6.0
    other = tuple((x0 + other_speed * dt * t, y0) for t in range(horizon))
    dim = 12 if extended else 4
    return DriverScene(
        lane_centers=(-3.0, 0.0, 3.0),
        dt=dt,
        horizon=horizon,
        ego_start=(0.0, 0.0, 0.0, 8.0),
        other_vehicle=other,
        target_speed=8.0,
        bounds=WeightBounds(lower=[-1.0] * dim, upper=[1.0] * dim),
        extended=extended,
        feature_scale=feature_scale,
    )


def build_env(spec) -> Environment:
    """Build an environment from a preset name or a config document."""
    if isinstance(spec, str):
        if spec == "mobile":
            return GridEnvironment(mobile_map())
        if spec == "driver":
            return DriverEnvironment(driver_scene(extended=False))
        if spec == "driver-extended":
            return DriverEnvironment(driver_scene(extended=True))
        raise ContractError(f"unknown environment preset {spec!r}")
    if not isinstance(spec, dict) or "type" not in spec:
        raise ContractError("environment spec must be a preset name or a dict with 'type'")
    kind = spec["type"]
    if kind == "gridworld":
        return GridEnvironment(map_from_dict(spec["map"]))
    if kind == "driver":
        return DriverEnvironment(
            scene_from_dict(spec["scene"]),
            n_candidates=int(spec.get("candidates", 500)),
            seed=int(spec.get("candidate_seed", 0)),
            refine=bool(spec.get("refine", True)),
        )
    raise ContractError(f"unknown environment type {kind!r}")
