"""Backward training, forward training with hint features, and inference."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import DEFAULT_GAMMA, BackwardTrajectory, FeatureConfig, Mode
from .levels import Level
from .search import (
    SearchConfig,
    SearchResult,
    extract_backward_trajectory,
    reconstruct_lurd,
    run_search,
)
from .value import FeatureMismatch, Weights

log = logging.getLogger(__name__)

_SEED_BOUND = 2**63


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 100
    alpha0: float = 0.01
    alpha_decay: float = 0.98
    backward_cap: int = 50
    forward_cap: int = 100
    # search budget for the training levels' backward trajectories
    hint_cap: int = 50
    epsilon: float = 0.1
    gamma: float = DEFAULT_GAMMA
    features: FeatureConfig = field(default_factory=FeatureConfig)
    seed: int = 0
    dead_square_pruning: bool = True
    transposition: bool = True

    def alpha(self, iteration: int) -> float:
        return self.alpha0 * self.alpha_decay**iteration

    def search(self, mode: Mode, cap: int, alpha: float, seed: int) -> SearchConfig:
        return SearchConfig(
            mode=mode,
            node_cap=cap,
            epsilon=self.epsilon,
            gamma=self.gamma,
            alpha=alpha,
            rng_seed=seed,
            dead_square_pruning=self.dead_square_pruning,
            transposition=self.transposition,
            features=self.features,
        )


@dataclass
class TrainReport:
    feature_names: tuple[str, ...]
    n_levels: int
    alphas: list[float] = field(default_factory=list)
    solved: list[int] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)
    expansions: list[int] = field(default_factory=list)

    def record(self, alpha: float, solved: int, expansions: int, weights: Weights) -> None:
        self.alphas.append(alpha)
        self.solved.append(solved)
        self.expansions.append(expansions)
        self.snapshots.append(weights.values.copy())

    def rows(self) -> list[dict]:
        out = []
        for i, (alpha, solved, expanded, snap) in enumerate(
            zip(self.alphas, self.solved, self.expansions, self.snapshots)
        ):
            row = {"iteration": i, "alpha": repr(alpha), "solved": solved,
                   "levels": self.n_levels, "expansions": expanded}
            row.update({name: repr(float(v)) for name, v in zip(self.feature_names, snap)})
            out.append(row)
        return out

    def write_csv(self, path: str | Path) -> None:
        fields = ["iteration", "alpha", "solved", "levels", "expansions", *self.feature_names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.rows())


def _seeds(rng: np.random.Generator, count: int) -> list[int]:
    return [int(s) for s in rng.integers(_SEED_BOUND, size=count)]


def _train(
    levels: Sequence[Level],
    weights: Weights,
    config: TrainConfig,
    mode: Mode,
    cap: int,
    rng: np.random.Generator,
    trajectories: Sequence[BackwardTrajectory | None],
) -> TrainReport:
    report = TrainReport(weights.names, len(levels))
    for iteration in range(config.iterations):
        alpha = config.alpha(iteration)
        order = rng.permutation(len(levels))
        seeds = _seeds(rng, len(levels))
        solved = expanded = 0
        for i, seed in zip(order, seeds):
            result = run_search(
                levels[i], weights, config.search(mode, cap, alpha, seed), trajectories[i]
            )
            solved += result.solved
            expanded += result.expansions
        weights.iterations += 1
        report.record(alpha, solved, expanded, weights)
        log.info("%s iteration %d: alpha=%.5f solved %d/%d", mode, iteration, alpha, solved,
                 len(levels))
    return report


def train_backward(levels: Sequence[Level], config: TrainConfig) -> tuple[Weights, TrainReport]:
    """Learn the value function of the relaxed reverse task (pull every box off its target)."""
    if not levels:
        raise ValueError("no training levels")
    rng = np.random.default_rng([config.seed, 0])
    weights = Weights.zeros(config.features.names("backward"), config.gamma)
    report = _train(levels, weights, config, "backward", config.backward_cap, rng,
                    [None] * len(levels))
    return weights, report


def build_hint_context(
    level: Level,
    backward_weights: Weights,
    cap: int,
    config: TrainConfig | None = None,
    seed: int = 0,
) -> BackwardTrajectory:
    """Run the frozen backward agent from the packed goal and keep its best branch.

    A trajectory is returned even when the relaxed goal is not reached.
    """
    config = config or TrainConfig(features=FeatureConfig.from_names(backward_weights.names))
    search = config.search("backward", cap, 0.0, seed)
    result = run_search(level, backward_weights, search)
    return extract_backward_trajectory(level, result.tree)


def train_forward(
    levels: Sequence[Level], backward_weights: Weights | None, config: TrainConfig
) -> tuple[Weights, TrainReport]:
    """Learn the forward value function over core plus hint features.

    Each training level's backward trajectory is computed once, up front.
    ``backward_weights`` may be None when the config has no hint features.
    """
    if not levels:
        raise ValueError("no training levels")
    rng = np.random.default_rng([config.seed, 1])
    if config.features.hints:
        if backward_weights is None:
            raise ValueError("hint features need backward weights")
        seeds = _seeds(rng, len(levels))
        trajectories = [
            build_hint_context(level, backward_weights, config.hint_cap, config, seed)
            for level, seed in zip(levels, seeds)
        ]
    else:
        trajectories = [None] * len(levels)
    weights = Weights.zeros(config.features.names("forward"), config.gamma)
    report = _train(levels, weights, config, "forward", config.forward_cap, rng, trajectories)
    return weights, report


@dataclass
class SolveOutcome:
    result: SearchResult
    lurd: str | None
    trajectory: BackwardTrajectory | None
    backward: SearchResult | None

    @property
    def solved(self) -> bool:
        return self.result.solved


def solve(
    level: Level,
    backward_weights: Weights | None,
    forward_weights: Weights,
    backward_cap: int = 10_000,
    forward_cap: int = 50_000,
    epsilon: float = 0.1,
    seed: int = 0,
    time_limit: float | None = None,
    dead_square_pruning: bool = True,
) -> SolveOutcome:
    """Inference on one level with frozen weights.

    The backward agent runs only when the forward weights use hint features.
    ``time_limit`` (seconds) bounds both searches together.
    """
    features = FeatureConfig.from_names(forward_weights.names)
    if forward_weights.names != features.names("forward"):
        raise FeatureMismatch(f"forward weights out of canonical order: {forward_weights.names}")
    base = TrainConfig(
        epsilon=epsilon,
        gamma=forward_weights.gamma,
        features=features,
        dead_square_pruning=dead_square_pruning,
    )
    back_seed, fwd_seed = np.random.SeedSequence(seed).generate_state(2, np.uint64).tolist()
    trajectory = backward = None
    remaining = time_limit
    if features.hints:
        if backward_weights is None or backward_weights.names != features.names("backward"):
            raise FeatureMismatch("backward weights do not match the forward feature set")
        search = replace(base.search("backward", backward_cap, 0.0, back_seed),
                         gamma=backward_weights.gamma, time_limit=time_limit)
        backward = run_search(level, backward_weights, search)
        trajectory = extract_backward_trajectory(level, backward.tree)
        if time_limit is not None:
            # the wall-clock budget covers both searches
            remaining = max(time_limit - backward.elapsed, 1e-9)
    search = replace(base.search("forward", forward_cap, 0.0, fwd_seed), time_limit=remaining)
    result = run_search(level, forward_weights, search, trajectory)
    lurd = reconstruct_lurd(level, result.solution_moves) if result.solved else None
    return SolveOutcome(result, lurd, trajectory, backward)
