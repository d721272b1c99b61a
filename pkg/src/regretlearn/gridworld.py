"""2-D lattice world with user-marked regions as soft constraints.

Cells are (x, y) integer pairs, 4-connected with unit moves. A path's
features are the per-region traversal lengths plus total execution
time; the exact planner is Dijkstra over per-cell stage costs, which
the bounds validation keeps strictly positive.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import (
    ContractError,
    Environment,
    ObjectiveMode,
    Path,
    PlannerError,
    WeightBounds,
    as_weight,
)

__all__ = [
    "OracleScaleError",
    "Region",
    "GridMap",
    "LatticePath",
    "GridEnvironment",
    "grid_features",
    "grid_optimal_path",
    "enumerate_paths",
    "load_map",
    "map_to_dict",
]

# Lower bound required of the time-feature weight; keeps every stage
# cost positive for all in-bounds weights together with the region check.
TIME_WEIGHT_FLOOR = 0.05

_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


class OracleScaleError(RuntimeError):
    """The enumeration oracle was asked for more paths than its cap."""


@dataclass(frozen=True)
class Region:
    """A user-marked area: id plus the set of cells it covers."""

    id: int
    cells: frozenset

    def __post_init__(self):
        object.__setattr__(self, "cells", frozenset(tuple(c) for c in self.cells))
        if not self.cells:
            raise ContractError(f"region {self.id} has no cells")


class LatticePath(Path):
    """A simple 4-connected cell path; identity is the cell sequence."""


@dataclass(frozen=True)
class GridMap:
    """Lattice world: dimensions, regions, one start-goal task and bounds."""

    width: int
    height: int
    regions: tuple
    start: tuple
    goal: tuple
    step_time: float
    bounds: WeightBounds

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        if self.width < 1 or self.height < 1:
            raise ContractError("map dimensions must be positive")
        if self.step_time <= 0:
            raise ContractError("step_time must be positive")
        if not self._in_bounds(self.start) or not self._in_bounds(self.goal):
            raise ContractError("start/goal outside the map")
        if self.start == self.goal:
            raise ContractError("start equals goal")
        ids = [r.id for r in self.regions]
        if sorted(ids) != list(range(len(ids))):
            raise ContractError("region ids must be 0..n-1")
        for r in self.regions:
            if not all(self._in_bounds(c) for c in r.cells):
                raise ContractError(f"region {r.id} has out-of-bounds cells")
        if self.bounds.dim != len(self.regions) + 1:
            raise ContractError(
                f"bounds dimension {self.bounds.dim} != {len(self.regions) + 1}"
            )
        if self.bounds.lower[-1] < TIME_WEIGHT_FLOOR:
            raise ContractError(
                f"time-weight lower bound must be >= {TIME_WEIGHT_FLOOR}"
            )
        cover: dict = {}
        for i, r in enumerate(self.regions):
            for cell in r.cells:
                cover.setdefault(cell, []).append(i)
        object.__setattr__(
            self, "_cover", {c: tuple(ix) for c, ix in cover.items()}
        )
        # Worst-case stage cost over the weight box must stay positive.
        worst = min(self._stage_weight_sums(np.minimum(self.bounds.lower[:-1], 0.0)))
        if self.bounds.lower[-1] + worst <= 0.0:
            raise ContractError(
                "bounds admit a nonpositive stage cost; tighten region lower bounds"
            )

    def _in_bounds(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def _stage_weight_sums(self, region_weights):
        """Sum of region weights covering each cell, including uncovered ones."""
        sums = [
            sum(region_weights[i] for i in ix) for ix in self._cover.values()
        ]
        sums.append(0.0)  # cells outside every region
        return sums

    @property
    def feature_dim(self) -> int:
        return len(self.regions) + 1

    def region_weight_sum(self, cell, region_weights) -> float:
        ix = self._cover.get(cell)
        if ix is None:
            return 0.0
        return float(sum(region_weights[i] for i in ix))

    def neighbors(self, cell) -> Iterator[tuple]:
        x, y = cell
        for dx, dy in _MOVES:
            nxt = (x + dx, y + dy)
            if self._in_bounds(nxt):
                yield nxt

    def with_task(self, start, goal) -> "GridMap":
        """Same world and bounds, different start-goal planning problem."""
        return GridMap(
            width=self.width,
            height=self.height,
            regions=self.regions,
            start=tuple(start),
            goal=tuple(goal),
            step_time=self.step_time,
            bounds=self.bounds,
        )

    def stage_positive(self, w, margin: float = 0.0) -> bool:
        """True if every per-cell stage cost is strictly positive under `w`."""
        w = as_weight(w, dim=self.feature_dim)
        worst = min(self._stage_weight_sums(w[:-1]))
        return w[-1] + worst > margin


def _validate_cells(grid: GridMap, cells: Sequence) -> tuple:
    cells = tuple(tuple(c) for c in cells)
    if not cells:
        raise ContractError("empty cell sequence")
    if cells[0] != grid.start or cells[-1] != grid.goal:
        raise ContractError("path must run from start to goal")
    if len(set(cells)) != len(cells):
        raise ContractError("path revisits a cell")
    for a, b in zip(cells, cells[1:]):
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            raise ContractError(f"cells {a} and {b} are not 4-adjacent")
        if not grid._in_bounds(b):
            raise ContractError(f"cell {b} outside the map")
    return cells


def grid_features(grid: GridMap, cells: Sequence) -> np.ndarray:
    """Feature vector of a cell path: per-region traversal then time.

    Entry i < n counts cells of the path inside region i (start cell
    included) scaled by step_time; the last entry is the execution time
    (moves * step_time).
    """
    cells = tuple(tuple(c) for c in cells)
    phi = np.empty(grid.feature_dim)
    cellset = set(cells)
    for i, region in enumerate(grid.regions):
        phi[i] = grid.step_time * len(cellset & region.cells)
    phi[-1] = grid.step_time * (len(cells) - 1)
    return phi


def make_path(grid: GridMap, cells: Sequence, optimal_for=None) -> LatticePath:
    cells = _validate_cells(grid, cells)
    return LatticePath(
        states=cells, features=grid_features(grid, cells), optimal_for=optimal_for
    )


def grid_optimal_path(grid: GridMap, w) -> LatticePath:
    """Exact minimum-cost start-goal path under weight `w` (Dijkstra).

    Stage costs are strictly positive under the bounds guard, so the
    optimal walk is automatically a simple path.
    """
    w = as_weight(w, dim=grid.feature_dim)
    if not grid.stage_positive(w):
        raise PlannerError("weight yields a nonpositive stage cost")
    region_w = w[:-1].tolist()
    time_w = float(w[-1]) * grid.step_time
    step = grid.step_time
    cover = grid._cover

    def enter_cost(cell) -> float:
        ix = cover.get(cell)
        if ix is None:
            return 0.0
        return step * sum(region_w[i] for i in ix)

    start, goal = grid.start, grid.goal
    dist = {start: enter_cost(start)}
    prev: dict = {}
    seen = set()
    heap = [(dist[start], start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in seen:
            continue
        seen.add(cell)
        if cell == goal:
            break
        for nxt in grid.neighbors(cell):
            if nxt in seen:
                continue
            nd = d + time_w + enter_cost(nxt)
            if nxt not in dist or nd < dist[nxt]:
                dist[nxt] = nd
                prev[nxt] = cell
                heapq.heappush(heap, (nd, nxt))
    if goal not in seen:
        raise PlannerError(f"goal {goal} unreachable from {start}")
    cells = [goal]
    while cells[-1] != start:
        cells.append(prev[cells[-1]])
    cells.reverse()
    return make_path(grid, cells, optimal_for=np.array(w))


def enumerate_paths(grid: GridMap, cap: int) -> list:
    """All simple start-goal paths, for oracle use on small maps.

    Raises OracleScaleError as soon as more than `cap` paths exist.
    """
    out: list = []
    cells = [grid.start]
    on_path = {grid.start}

    def recurse():
        cur = cells[-1]
        if cur == grid.goal:
            if len(out) >= cap:
                raise OracleScaleError(f"more than {cap} simple paths")
            out.append(make_path(grid, tuple(cells)))
            return
        for nxt in grid.neighbors(cur):
            if nxt in on_path:
                continue
            cells.append(nxt)
            on_path.add(nxt)
            recurse()
            cells.pop()
            on_path.remove(nxt)

    recurse()
    return out


class GridEnvironment(Environment):
    """Environment facade over a GridMap (cost objective)."""

    mode = ObjectiveMode.COST

    def __init__(self, grid: GridMap):
        self.grid = grid
        self.bounds = grid.bounds

    def path_features(self, path: Path) -> np.ndarray:
        return grid_features(self.grid, path.states)

    def optimal_path(self, w) -> LatticePath:
        return grid_optimal_path(self.grid, w)

    def supports_weight(self, w) -> bool:
        return self.grid.stage_positive(w, margin=1e-9)


def map_to_dict(grid: GridMap) -> dict:
    return {
        "width": grid.width,
        "height": grid.height,
        "step_time": grid.step_time,
        "start": list(grid.start),
        "goal": list(grid.goal),
        "regions": [
            {"id": r.id, "cells": sorted([list(c) for c in r.cells])}
            for r in grid.regions
        ],
        "bounds": {
            "lower": grid.bounds.lower.tolist(),
            "upper": grid.bounds.upper.tolist(),
        },
    }


def map_from_dict(doc: dict) -> GridMap:
    try:
        regions = tuple(
            Region(id=int(r["id"]), cells=frozenset(tuple(c) for c in r["cells"]))
            for r in doc["regions"]
        )
        return GridMap(
            width=int(doc["width"]),
            height=int(doc["height"]),
            regions=regions,
            start=tuple(doc["start"]),
            goal=tuple(doc["goal"]),
            step_time=float(doc["step_time"]),
            bounds=WeightBounds(
                lower=doc["bounds"]["lower"], upper=doc["bounds"]["upper"]
            ),
        )
    except KeyError as exc:
        raise ContractError(f"map document missing field {exc}") from exc


def load_map(path) -> GridMap:
    """Load and validate a map JSON document."""
    with open(path) as fh:
        return map_from_dict(json.load(fh))
