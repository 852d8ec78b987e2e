"""State features for the linear value function.

Core features (both search directions): Targets, Distance, Gamma1, Gamma2,
optionally Connectivity. Hint features (forward direction only) relate a
state to a backward trajectory: Overlap and Perm. Every value lies in [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from .board import State, free_regions
from .levels import Level, Square, reading_order

Mode = Literal["forward", "backward"]
FeatureVector = dict[str, float]

TARGETS = "Targets"
DISTANCE = "Distance"
GAMMA1 = "Gamma1"
GAMMA2 = "Gamma2"
CONNECTIVITY = "Connectivity"
OVERLAP = "Overlap"
PERM = "Perm"
ALL_FEATURES = (TARGETS, DISTANCE, GAMMA1, GAMMA2, CONNECTIVITY, OVERLAP, PERM)
HINT_FEATURES = (OVERLAP, PERM)

DEFAULT_GAMMA = 0.95


class InfiniteDistance(ValueError):
    """No box-to-target assignment with finite push distance exists."""


@dataclass(frozen=True)
class FeatureConfig:
    connectivity: bool = True
    overlap: bool = True
    perm: bool = True

    @property
    def hints(self) -> bool:
        return self.overlap or self.perm

    def names(self, mode: Mode = "forward") -> tuple[str, ...]:
        names = [TARGETS, DISTANCE, GAMMA1, GAMMA2]
        if self.connectivity:
            names.append(CONNECTIVITY)
        if mode == "forward":
            if self.overlap:
                names.append(OVERLAP)
            if self.perm:
                names.append(PERM)
        return tuple(names)

    @classmethod
    def from_names(cls, names: Sequence[str]) -> FeatureConfig:
        unknown = set(names) - set(ALL_FEATURES)
        if unknown:
            raise ValueError(f"unknown features: {sorted(unknown)}")
        return cls(CONNECTIVITY in names, OVERLAP in names, PERM in names)

    @property
    def label(self) -> str:
        flags = [("overlap", self.overlap), ("perm", self.perm), ("connect", self.connectivity)]
        on = [name for name, enabled in flags if enabled]
        return "+".join(on) if on else "core"


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """Lower-bound push counts for a lone box, square by target."""

    level: Level
    table: np.ndarray  # int64[squares, targets], _kernels.INF when unreachable

    def distance(self, square: Square, target: Square) -> float:
        grid = self.level.grid
        col = int(np.searchsorted(grid.targets, grid.index(target)))
        if grid.targets[col] != grid.index(target):
            raise KeyError(target)
        d = int(self.table[grid.index(square), col])
        return math.inf if d >= _kernels.INF else d


def build_distance_table(level: Level) -> DistanceTable:
    grid = level.grid
    return DistanceTable(level, _kernels.distance_table(grid.floor, grid.dirs, grid.targets))


def distance_lower_bound(level: Level, state: State, table: DistanceTable) -> float:
    """Minimum-cost perfect matching of boxes to targets under ``table``."""
    grid = level.grid
    boxes = np.array(sorted(grid.index(b) for b in state.boxes), dtype=np.int32)
    n = boxes.size
    raw = _kernels.matching_distance(table.table, boxes, np.empty((n, n), np.int64))
    return math.inf if raw < 0 else float(raw)


def targets_feature(level: Level, state: State) -> float:
    n = len(state.boxes)
    return len(state.boxes & level.targets) / n if n else 1.0


def gamma1(level: Level, gamma: float = DEFAULT_GAMMA) -> float:
    return gamma ** level.n_boxes


def gamma2(level: Level, state: State, gamma: float = DEFAULT_GAMMA, mode: Mode = "forward") -> float:
    n = len(state.boxes)
    packed = len(state.boxes & level.targets)
    if mode == "backward":
        # backward progress is the number of boxes already off their targets
        packed = n - packed
    return gamma ** (n - packed)


def region_count(level: Level, state: State) -> int:
    return len(free_regions(level, state.boxes))


def normalize_connectivity(level: Level, regions: int) -> float:
    scale = max(1.0, len(level.floor) / 4)
    return min(1.0, max(0.0, (regions - 1) / scale))


def connectivity(level: Level, state: State) -> float:
    return normalize_connectivity(level, region_count(level, state))


def normalize_distance(level: Level, raw: float) -> float:
    n = max(level.n_boxes, 1)
    return min(1.0, raw / (n * (level.width + level.height)))


@dataclass(frozen=True, eq=False)
class BackwardTrajectory:
    """Box sets visited by the backward agent, starting from the packed goal."""

    states: list[frozenset[Square]]
    packing_order: list[Square]
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_states(cls, states: Sequence[frozenset[Square]]) -> BackwardTrajectory:
        """Derive the forward packing order implied by a backward run.

        Targets never emptied come first (they are packed when the forward
        plan starts), then emptied targets, most recently emptied first.
        """
        targets = states[0]
        last_vacated: dict[Square, int] = {}
        for t in range(1, len(states)):
            for sq in states[t - 1] - states[t]:
                if sq in targets:
                    last_vacated[sq] = t
        final = states[-1]
        still = sorted((t for t in targets if t in final), key=reading_order)
        emptied = sorted(
            (t for t in targets if t not in final),
            key=lambda t: (-last_vacated[t], reading_order(t)),
        )
        return cls(list(states), still + emptied)

    def arrays(self, level: Level) -> tuple[np.ndarray, np.ndarray]:
        """(states as uint8[T, squares] masks, packing order as square indices)."""
        cached = self._cache.get(level)
        if cached is None:
            grid = level.grid
            masks = np.zeros((len(self.states), grid.width * grid.height), np.uint8)
            for t, boxes in enumerate(self.states):
                for b in boxes:
                    masks[t, grid.index(b)] = 1
            order = np.array([grid.index(t) for t in self.packing_order], np.int32)
            cached = self._cache[level] = (masks, order)
        return cached


def overlap(state: State, trajectory: BackwardTrajectory) -> float:
    n = len(state.boxes)
    if not n:
        return 1.0
    return max(len(state.boxes & t) for t in trajectory.states) / n


def perm(state: State, trajectory: BackwardTrajectory) -> float:
    """Longest packed prefix of the packing order, as a fraction of the boxes."""
    n = len(state.boxes)
    if not n:
        return 1.0
    prefix = 0
    for target in trajectory.packing_order:
        if target not in state.boxes:
            break
        prefix += 1
    return prefix / n


def extract(
    level: Level,
    state: State,
    mode: Mode = "forward",
    trajectory: BackwardTrajectory | None = None,
    config: FeatureConfig | None = None,
    gamma: float = DEFAULT_GAMMA,
    table: DistanceTable | None = None,
) -> FeatureVector:
    """Feature vector over exactly the enabled features, in canonical order.

    Raises InfiniteDistance for states that cannot be solved by any
    assignment of boxes to targets; the search prunes those.
    """
    config = config or FeatureConfig()
    names = config.names(mode)
    wants_hints = any(name in HINT_FEATURES for name in names)
    if wants_hints and trajectory is None:
        raise ValueError("hint features need a backward trajectory")
    if table is None:
        table = build_distance_table(level)
    raw = distance_lower_bound(level, state, table)
    if math.isinf(raw):
        raise InfiniteDistance(str(sorted(state.boxes)))
    values = {
        TARGETS: lambda: targets_feature(level, state),
        DISTANCE: lambda: normalize_distance(level, raw),
        GAMMA1: lambda: gamma1(level, gamma),
        GAMMA2: lambda: gamma2(level, state, gamma, mode),
        CONNECTIVITY: lambda: connectivity(level, state),
        OVERLAP: lambda: overlap(state, trajectory),
        PERM: lambda: perm(state, trajectory),
    }
    return {name: values[name]() for name in names}
