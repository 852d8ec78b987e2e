"""Epsilon-greedy tree search with TD(0) backups.

Each iteration descends from the root, expands one leaf, scores its children
with the linear value function, and stores the best child target as the
leaf's new value. With ``alpha > 0`` the weights are pulled toward that
target as well (off-policy: the best child is used whichever child the
exploration later follows).
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .board import Move, State, dead_squares
from .features import (
    CONNECTIVITY,
    DEFAULT_GAMMA,
    OVERLAP,
    PERM,
    BackwardTrajectory,
    FeatureConfig,
    Mode,
)
from .levels import DIRECTION_ORDER, DIRECTIONS, Level, Square
from .value import FeatureMismatch, Weights

_RANDOM_BLOCK = 1 << 14


@dataclass(frozen=True)
class SearchConfig:
    mode: Mode = "forward"
    node_cap: int = 50_000
    epsilon: float = 0.1
    gamma: float = DEFAULT_GAMMA
    alpha: float = 0.0
    rng_seed: int = 0
    dead_square_pruning: bool = True
    transposition: bool = True
    features: FeatureConfig = field(default_factory=FeatureConfig)
    time_limit: float | None = None
    refresh_on_descent: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("forward", "backward"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.features.names(self.mode)

    @property
    def uses_hints(self) -> bool:
        return self.mode == "forward" and self.features.hints


class _LevelData:
    """Per-level arrays and scratch buffers shared by all searches on a level."""

    def __init__(self, level: Level):
        grid = level.grid
        size = grid.width * grid.height
        self.grid = grid
        self.dist = _kernels.distance_table(grid.floor, grid.dirs, grid.targets)
        self.dead = np.zeros(size, np.uint8)
        for sq in dead_squares(level):
            self.dead[grid.index(sq)] = 1
        self.span = float(grid.width + grid.height)
        n = grid.targets.size
        self.occ = np.zeros(size, np.uint8)
        self.mark = np.zeros(size, np.uint8)
        self.labels = np.empty(size, np.int32)
        self.region_min = np.empty(size, np.int32)
        self.stack = np.empty(size, np.int32)
        self.cost = np.empty((n, n), np.int64)
        cap = max(4 * n, size)
        self.child_boxes = np.empty((cap, n), np.int32)
        self.child_player = np.empty(cap, np.int32)
        self.child_move = np.empty(cap, np.int32)
        self.child_region = np.empty(cap, np.int32)
        self.child_reward = np.empty(cap, np.bool_)
        self.child_valid = np.empty(cap, np.bool_)


@lru_cache(maxsize=512)
def _level_data(level: Level) -> _LevelData:
    return _LevelData(level)


class SearchTree:
    """Search nodes stored column-wise; node 0 is the root.

    Children of a node occupy the contiguous index range
    ``first_child .. first_child + n_children``. ``n_children`` is -1 until
    the node is expanded. ``move`` is ``box_square * 4 + direction`` or -1
    for the root and for the player-placement children of a backward root.
    """

    def __init__(self, level: Level, mode: Mode, n_features: int, capacity: int = 1024):
        self.level = level
        self.mode = mode
        self.size = 0
        self.goal = -1
        n = level.n_boxes
        self.boxes = np.empty((capacity, n), np.int32)
        self.player = np.empty(capacity, np.int32)
        self.parent = np.empty(capacity, np.int32)
        self.move = np.empty(capacity, np.int32)
        self.first_child = np.empty(capacity, np.int32)
        self.n_children = np.empty(capacity, np.int32)
        self.value = np.empty(capacity, np.float64)
        self.features = np.empty((capacity, n_features), np.float64)
        self.reward = np.empty(capacity, np.bool_)
        self.excluded = np.empty(capacity, np.bool_)
        self.depth = np.empty(capacity, np.int32)

    _COLUMNS = (
        "boxes", "player", "parent", "move", "first_child", "n_children",
        "value", "features", "reward", "excluded", "depth",
    )

    def _reserve(self, extra: int) -> None:
        needed = self.size + extra
        capacity = self.player.shape[0]
        if needed <= capacity:
            return
        while capacity < needed:
            capacity *= 2
        for name in self._COLUMNS:
            old = getattr(self, name)
            new = np.empty((capacity,) + old.shape[1:], old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, parent, boxes, player, move, features, reward, value) -> int:
        """Append ``len(player)`` sibling nodes; returns the first new index."""
        m = len(player)
        self._reserve(m)
        lo, hi = self.size, self.size + m
        self.boxes[lo:hi] = boxes
        self.player[lo:hi] = player
        self.parent[lo:hi] = parent
        self.move[lo:hi] = move
        self.first_child[lo:hi] = -1
        self.n_children[lo:hi] = -1
        self.value[lo:hi] = value
        self.features[lo:hi] = features
        self.reward[lo:hi] = reward
        self.excluded[lo:hi] = False
        self.depth[lo:hi] = self.depth[parent] + 1 if parent >= 0 else 0
        self.size = hi
        return lo

    def path(self, node: int) -> list[int]:
        out = [node]
        while node > 0:
            node = int(self.parent[node])
            out.append(node)
        return out[::-1]

    def state(self, node: int) -> State:
        grid = self.level.grid
        player = int(self.player[node])
        return State(
            frozenset(grid.square(b) for b in self.boxes[node]),
            grid.square(player) if player >= 0 else None,
        )

    def move_of(self, node: int) -> Move | None:
        code = int(self.move[node])
        if code < 0:
            return None
        kind = "push" if self.mode == "forward" else "pull"
        return Move(kind, self.level.grid.square(code // 4), DIRECTION_ORDER[code % 4])

    def leaves(self) -> np.ndarray:
        mask = self.n_children[: self.size] <= 0
        mask[0] = False
        return np.flatnonzero(mask)


@dataclass
class SearchResult:
    solved: bool
    solution_moves: list[Move] | None
    expansions: int
    nodes: int
    max_depth: int
    best_leaf: int
    tree: SearchTree = field(repr=False)
    seed: int = 0
    elapsed: float = 0.0
    exhausted: bool = False


def _column(names: tuple[str, ...], name: str) -> int:
    return names.index(name) if name in names else -1


def run_search(
    level: Level,
    weights: Weights,
    config: SearchConfig,
    hint_trajectory: BackwardTrajectory | None = None,
) -> SearchResult:
    """Grow a search tree until a reward, the node cap, or the time limit.

    ``node_cap`` counts expansions. When ``config.alpha > 0`` the weights
    are updated in place.
    """
    names = config.feature_names
    if tuple(weights.names) != names:
        raise FeatureMismatch(f"weights carry {weights.names}, search needs {names}")
    if config.uses_hints != (hint_trajectory is not None):
        raise ValueError("a hint trajectory is required exactly when forward hints are enabled")
    if config.node_cap <= 0:
        raise ValueError("node_cap must be positive")

    started = time.perf_counter()
    deadline = started + config.time_limit if config.time_limit else None
    backward = config.mode == "backward"
    data = _level_data(level)
    grid = data.grid
    w = weights.values
    gamma = config.gamma
    k = len(names)
    col_conn = _column(names, CONNECTIVITY)
    col_overlap = _column(names, OVERLAP)
    col_perm = _column(names, PERM)
    if hint_trajectory is not None:
        traj, order = hint_trajectory.arrays(level)
    else:
        traj, order = np.zeros((1, grid.floor.size), np.uint8), np.zeros(0, np.int32)
    feat_buf = np.empty((data.child_player.size, k), np.float64)

    def score(boxes, players, count):
        _kernels.features_batch(
            grid.floor, grid.target_mask, grid.dirs, data.dist, grid.n_floor, data.span,
            gamma, backward, col_conn, col_overlap, col_perm, traj, order,
            boxes, players, count,
            feat_buf, data.child_region, data.child_reward, data.child_valid,
            data.occ, data.labels, data.region_min, data.stack, data.cost,
        )

    tree = SearchTree(level, config.mode, k)
    seen: set[tuple[bytes, int]] = set()

    root_boxes = grid.targets if backward else grid.initial_boxes
    root_player = -1 if backward else grid.initial_player
    score(root_boxes[None, :], np.array([root_player], np.int32), 1)
    root_valid = bool(data.child_valid[0])
    tree.add(-1, root_boxes, [root_player], -1, feat_buf[:1] if root_valid else 0.0,
             data.child_reward[:1], float(w @ feat_buf[0]) if root_valid else 0.0)
    if config.transposition and not backward:
        seen.add((root_boxes.tobytes(), int(data.child_region[0])))

    def finish(solved: bool, expansions: int, exhausted: bool = False) -> SearchResult:
        moves = None
        if solved:
            moves = [m for m in (tree.move_of(i) for i in tree.path(tree.goal)) if m is not None]
        leaves = tree.leaves()
        best = int(leaves[np.argmax(tree.value[leaves])]) if leaves.size else 0
        return SearchResult(
            solved=solved,
            solution_moves=moves,
            expansions=expansions,
            nodes=tree.size,
            max_depth=int(tree.depth[: tree.size].max()),
            best_leaf=tree.goal if solved else best,
            tree=tree,
            seed=config.rng_seed,
            elapsed=time.perf_counter() - started,
            exhausted=exhausted,
        )

    if data.child_reward[0]:
        tree.goal = 0
        return finish(True, 0)
    if not root_valid:
        tree.excluded[0] = True
        return finish(False, 0, exhausted=True)

    rng = np.random.default_rng(config.rng_seed)
    rand = rng.random(_RANDOM_BLOCK)
    pos = 0
    longest = 1
    expansions = 0
    while expansions < config.node_cap:
        if tree.excluded[0]:
            return finish(False, expansions, exhausted=True)
        if deadline is not None and time.perf_counter() > deadline:
            break
        if config.epsilon > 0 and pos + 2 * longest + 4 > rand.size:
            rand = rng.random(max(_RANDOM_BLOCK, 4 * longest + 8))
            pos = 0
        leaf, pos, depth = _kernels.descend(
            tree.first_child, tree.n_children, tree.value, tree.excluded, tree.reward,
            config.epsilon, gamma, config.refresh_on_descent, rand, pos,
        )
        longest = max(longest, depth + 1)

        if backward and leaf == 0:
            m = _region_children(data, root_boxes)
        else:
            m = _kernels.generate_moves(
                grid.floor, data.dead, config.dead_square_pruning and not backward, grid.dirs,
                tree.boxes[leaf], int(tree.player[leaf]), backward,
                data.occ, data.mark, data.stack,
                data.child_boxes, data.child_player, data.child_move,
            )
        if m:
            score(data.child_boxes, data.child_player, m)
        keep = []
        for c in range(m):
            if not data.child_valid[c]:
                continue
            if config.transposition:
                key = (data.child_boxes[c].tobytes(), int(data.child_region[c]))
                if key in seen:
                    continue
                seen.add(key)
            keep.append(c)

        expansions += 1
        if keep:
            feats = feat_buf[keep]
            rewards = data.child_reward[keep]
            values = feats @ w
            child_targets = np.where(rewards, 1.0, gamma * values)
            target = float(child_targets.max())
            first = tree.add(
                leaf, data.child_boxes[keep], data.child_player[keep], data.child_move[keep],
                feats, rewards, np.where(rewards, 1.0, values),
            )
            tree.first_child[leaf] = first
            tree.n_children[leaf] = len(keep)
        else:
            target = 0.0
            tree.n_children[leaf] = 0
            _exclude(tree, leaf)

        if config.alpha > 0:
            f = tree.features[leaf]
            w += config.alpha * (target - float(w @ f)) * f
        tree.value[leaf] = target

        if keep and rewards.any():
            tree.goal = first + int(np.argmax(rewards))
            return finish(True, expansions)

    return finish(False, expansions)


def _region_children(data: _LevelData, boxes: np.ndarray) -> int:
    """Player placements for a backward root: one per free region, at its first square."""
    grid = data.grid
    data.occ[boxes] = 1
    data.labels[:] = -1
    count = _kernels.label_regions(
        grid.floor, data.occ, grid.dirs, data.labels, data.region_min, data.stack
    )
    data.occ[boxes] = 0
    data.child_boxes[:count] = boxes
    data.child_player[:count] = data.region_min[:count]
    data.child_move[:count] = -1
    return count


def _exclude(tree: SearchTree, node: int) -> None:
    """Retire a dead-end node and any ancestor left with only dead-end children."""
    tree.excluded[node] = True
    while node > 0:
        parent = int(tree.parent[node])
        lo = tree.first_child[parent]
        if not tree.excluded[lo : lo + tree.n_children[parent]].all():
            return
        tree.excluded[parent] = True
        node = parent


def extract_backward_trajectory(level: Level, tree: SearchTree) -> BackwardTrajectory:
    """Branch to the rewarded node, else to the highest-valued leaf (earliest on ties)."""
    if tree.goal >= 0:
        node = tree.goal
    else:
        leaves = tree.leaves()
        node = int(leaves[np.argmax(tree.value[leaves])]) if leaves.size else 0
    grid = level.grid
    states = [level.targets]
    for i in tree.path(node)[1:]:
        if tree.move[i] >= 0:
            states.append(frozenset(grid.square(b) for b in tree.boxes[i]))
    return BackwardTrajectory.from_states(states)


def _walk(level: Level, boxes: set[Square], start: Square, goal: Square) -> str:
    """Shortest player walk avoiding boxes, neighbours tried in U, D, L, R order."""
    if start == goal:
        return ""
    parent: dict[Square, tuple[Square, str]] = {start: (start, "")}
    queue = deque([start])
    while queue:
        sq = queue.popleft()
        for d in DIRECTION_ORDER:
            dx, dy = DIRECTIONS[d]
            nxt = (sq[0] + dx, sq[1] + dy)
            if nxt in parent or nxt not in level.floor or nxt in boxes:
                continue
            parent[nxt] = (sq, d)
            if nxt == goal:
                steps = []
                while nxt != start:
                    nxt, d = parent[nxt]
                    steps.append(d.lower())
                return "".join(reversed(steps))
            queue.append(nxt)
    raise ValueError(f"player cannot walk from {start} to {goal}")


def reconstruct_lurd(level: Level, solution_moves: list[Move]) -> str:
    """Expand a push sequence into a LURD string (lowercase walks, uppercase pushes)."""
    boxes = set(level.initial_boxes)
    player = level.initial_player
    out = []
    for move in solution_moves:
        if move.kind != "push" or move.box_from not in boxes:
            raise ValueError(f"not a push of an existing box: {move}")
        dx, dy = DIRECTIONS[move.direction]
        behind = (move.box_from[0] - dx, move.box_from[1] - dy)
        out.append(_walk(level, boxes, player, behind))
        out.append(move.direction)
        boxes.remove(move.box_from)
        boxes.add(move.box_to)
        player = move.box_from
    return "".join(out)
