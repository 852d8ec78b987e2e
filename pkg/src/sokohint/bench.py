"""Benchmark and ablation runners behind the command line.

Per-level seeds are derived from ``(seed, level position)`` so results do
not depend on worker count or scheduling.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .features import FeatureConfig
from .levels import Level
from .pipeline import TrainConfig, solve, train_backward, train_forward
from .value import Weights, save_weights

BENCHMARK_FIELDS = (
    "level", "name", "solved", "backward_nodes", "forward_nodes", "forward_created",
    "pushes", "solution",
)

# Table 1 rows, top to bottom: (overlap, perm, connectivity)
ABLATION_GRID = (
    FeatureConfig(connectivity=False, overlap=False, perm=False),
    FeatureConfig(connectivity=True, overlap=False, perm=False),
    FeatureConfig(connectivity=False, overlap=True, perm=False),
    FeatureConfig(connectivity=True, overlap=True, perm=False),
    FeatureConfig(connectivity=False, overlap=True, perm=True),
    FeatureConfig(connectivity=True, overlap=True, perm=True),
)


@dataclass(frozen=True)
class BenchmarkSettings:
    backward_cap: int = 10_000
    forward_cap: int = 50_000
    epsilon: float = 0.1
    seed: int = 0
    time_limit: float | None = 600.0
    dead_square_pruning: bool = True


@dataclass
class LevelResult:
    number: int
    name: str
    solved: bool
    backward_nodes: int
    forward_nodes: int
    forward_created: int
    pushes: int
    solution: str
    wall_time: float

    def row(self, wall_time: bool = False) -> dict:
        out = {
            "level": self.number,
            "name": self.name,
            "solved": int(self.solved),
            "backward_nodes": self.backward_nodes,
            "forward_nodes": self.forward_nodes,
            "forward_created": self.forward_created,
            "pushes": self.pushes,
            "solution": self.solution,
        }
        if wall_time:
            out["wall_time"] = f"{self.wall_time:.3f}"
        return out


def level_seed(seed: int, position: int) -> int:
    return int(np.random.SeedSequence([seed, position]).generate_state(1, np.uint64)[0])


def _solve_one(job) -> LevelResult:
    number, level, backward, forward, settings = job
    started = time.perf_counter()
    outcome = solve(
        level, backward, forward,
        backward_cap=settings.backward_cap,
        forward_cap=settings.forward_cap,
        epsilon=settings.epsilon,
        seed=level_seed(settings.seed, number),
        time_limit=settings.time_limit,
        dead_square_pruning=settings.dead_square_pruning,
    )
    result = outcome.result
    return LevelResult(
        number=number,
        name=level.name or "",
        solved=result.solved,
        backward_nodes=outcome.backward.expansions if outcome.backward else 0,
        forward_nodes=result.expansions,
        forward_created=result.nodes,
        pushes=len(result.solution_moves) if result.solved else 0,
        solution=outcome.lurd or "",
        wall_time=time.perf_counter() - started,
    )


def run_benchmark(
    levels: Sequence[tuple[int, Level]],
    backward: Weights | None,
    forward: Weights,
    settings: BenchmarkSettings,
    workers: int = 1,
) -> list[LevelResult]:
    """Solve each ``(number, level)`` with frozen weights; results keep input order."""
    jobs = [(number, level, backward, forward, settings) for number, level in levels]
    if workers <= 1:
        return [_solve_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_one, jobs))


def benchmark_csv(results: Iterable[LevelResult], wall_time: bool = False) -> str:
    fields = list(BENCHMARK_FIELDS) + (["wall_time"] if wall_time else [])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row(wall_time))
    return buf.getvalue()


def cap_sweep(results: Sequence[LevelResult], caps: Sequence[int]) -> list[tuple[int, int]]:
    """Solved count at each forward cap, read off one run at the largest cap.

    A capped search is the exact prefix of a longer one with the same seed,
    so a level counts as solved at cap c when it was solved within c
    expansions.
    """
    return [(c, sum(r.solved and r.forward_nodes <= c for r in results)) for c in caps]


@dataclass
class AblationRow:
    features: FeatureConfig
    solved: int
    levels: int
    results: list[LevelResult]

    @property
    def hints(self) -> bool:
        return self.features.hints

    def row(self) -> dict:
        f = self.features
        return {
            "group": "with_hints" if f.hints else "no_hints",
            "overlap": "yes" if f.overlap else "no",
            "perm": "yes" if f.perm else "no",
            "connect": "yes" if f.connectivity else "no",
            "solved": self.solved,
            "levels": self.levels,
        }


ABLATION_FIELDS = ("group", "overlap", "perm", "connect", "solved", "levels")


def train_variant(
    training: Sequence[Level],
    features: FeatureConfig,
    config: TrainConfig,
    backward_cache: dict[bool, Weights] | None = None,
) -> tuple[Weights | None, Weights]:
    """Train one feature configuration; backward models are shared per connectivity flag."""
    config = replace(config, features=features)
    backward = None
    if features.hints:
        cache = backward_cache if backward_cache is not None else {}
        backward = cache.get(features.connectivity)
        if backward is None:
            backward, _ = train_backward(training, config)
            cache[features.connectivity] = backward
    # backward weights are only read when hints are on
    forward, _ = train_forward(training, backward, config)
    return backward, forward


def run_ablation(
    training: Sequence[Level],
    testing: Sequence[tuple[int, Level]],
    config: TrainConfig,
    settings: BenchmarkSettings,
    grid: Sequence[FeatureConfig] = ABLATION_GRID,
    workers: int = 1,
    out_dir: str | Path | None = None,
) -> list[AblationRow]:
    backward_cache: dict[bool, Weights] = {}
    rows = []
    for features in grid:
        backward, forward = train_variant(training, features, config, backward_cache)
        if out_dir is not None:
            out = Path(out_dir) / features.label
            out.mkdir(parents=True, exist_ok=True)
            if backward is not None:
                save_weights(backward, out / "backward.weights")
            save_weights(forward, out / "forward.weights")
        results = run_benchmark(testing, backward, forward, settings, workers)
        rows.append(AblationRow(features, sum(r.solved for r in results), len(results), results))
    return rows


def ablation_csv(rows: Iterable[AblationRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(ABLATION_FIELDS), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r.row())
    return buf.getvalue()
