"""Command line: train, solve, benchmark, ablate, replay.

Exit status is 0 on success (or a solved level), 1 when a level is not
solved or a replay is illegal, and 2 on usage, file or format errors.
Collections are given as a path, a file name under ``$SOKOHINT_DATA``, or
one of the bundled names ``microban`` and ``xsokoban``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .bench import (
    ABLATION_GRID,
    BenchmarkSettings,
    ablation_csv,
    benchmark_csv,
    cap_sweep,
    run_ablation,
    run_benchmark,
)
from .features import DEFAULT_GAMMA, FeatureConfig
from .levels import BUNDLED, Level, LevelError, load_collection
from .pipeline import TrainConfig, solve, train_backward, train_forward
from .replay import ReplayError, replay
from .value import FeatureMismatch, Weights, load_weights, save_weights

EXIT_OK = 0
EXIT_UNSOLVED = 1
EXIT_USAGE = 2

DATA_ENV = "SOKOHINT_DATA"

log = logging.getLogger("sokohint")


class UsageError(Exception):
    pass


def resolve_collection(spec: str) -> list[Level]:
    if spec.lower() in BUNDLED:
        return BUNDLED[spec.lower()]()
    path = Path(spec)
    if not path.exists() and os.environ.get(DATA_ENV):
        path = Path(os.environ[DATA_ENV]) / spec
    if not path.exists():
        raise UsageError(f"no such collection: {spec}")
    return load_collection(path)


def select(levels: list[Level], only: str | None, stride: int | None) -> list[tuple[int, Level]]:
    """(1-based number, level) pairs picked by --only or --stride."""
    numbered = list(enumerate(levels, start=1))
    if only:
        try:
            wanted = [int(tok) for tok in only.split(",") if tok.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --only list: {only}") from exc
        bad = [n for n in wanted if not 1 <= n <= len(levels)]
        if bad:
            raise UsageError(f"level numbers out of range 1..{len(levels)}: {bad}")
        return [numbered[n - 1] for n in wanted]
    if stride:
        return numbered[::stride]
    return numbered


def _caps(text: str) -> list[int]:
    try:
        caps = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad cap list: {text}") from exc
    if not caps or min(caps) <= 0:
        raise UsageError("caps must be positive integers")
    return caps


def _features(args) -> FeatureConfig:
    hints = not args.no_hints
    return FeatureConfig(
        connectivity=not args.no_connectivity,
        overlap=hints and not args.no_overlap,
        perm=hints and not args.no_perm,
    )


def _train_config(args, features: FeatureConfig | None = None) -> TrainConfig:
    return TrainConfig(
        iterations=args.iterations,
        alpha0=args.alpha0,
        alpha_decay=args.alpha_decay,
        backward_cap=args.train_backward_cap,
        forward_cap=args.train_forward_cap,
        hint_cap=args.hint_cap,
        epsilon=args.epsilon,
        gamma=args.gamma,
        features=features or FeatureConfig(),
        seed=args.seed,
        dead_square_pruning=not args.no_dead_squares,
    )


def _settings(args) -> BenchmarkSettings:
    return BenchmarkSettings(
        backward_cap=args.backward_cap,
        forward_cap=args.forward_cap,
        epsilon=args.epsilon,
        seed=args.seed,
        time_limit=args.time_limit if args.time_limit > 0 else None,
        dead_square_pruning=not args.no_dead_squares,
    )


def _load_models(args) -> tuple[Weights | None, Weights]:
    folder = Path(args.weights_dir) if args.weights_dir else None
    forward_path = args.forward_weights or (folder / "forward.weights" if folder else None)
    if forward_path is None:
        raise UsageError("give --weights-dir or --forward-weights")
    backward_path = args.backward_weights or (folder / "backward.weights" if folder else None)
    forward = load_weights(forward_path)
    backward = None
    if FeatureConfig.from_names(forward.names).hints:
        if backward_path is None or not Path(backward_path).exists():
            raise UsageError("hint features need backward weights")
        backward = load_weights(backward_path)
    return backward, forward


def cmd_train(args) -> int:
    levels = resolve_collection(args.levels)
    config = _train_config(args, _features(args))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    backward, back_report = train_backward(levels, config)
    forward, fwd_report = train_forward(levels, backward, config)
    save_weights(backward, out / "backward.weights")
    save_weights(forward, out / "forward.weights")
    back_report.write_csv(out / "backward_report.csv")
    fwd_report.write_csv(out / "forward_report.csv")
    print(f"trained on {len(levels)} levels in {time.perf_counter() - started:.1f}s; "
          f"last iteration solved {fwd_report.solved[-1]}/{len(levels)} forward")
    return EXIT_OK


def cmd_solve(args) -> int:
    levels = resolve_collection(args.levels)
    if not 1 <= args.level <= len(levels):
        raise UsageError(f"--level must lie in 1..{len(levels)}")
    backward, forward = _load_models(args)
    level = levels[args.level - 1]
    outcome = solve(
        level, backward, forward,
        backward_cap=args.backward_cap,
        forward_cap=args.forward_cap,
        epsilon=args.epsilon,
        seed=args.seed,
        time_limit=args.time_limit if args.time_limit > 0 else None,
        dead_square_pruning=not args.no_dead_squares,
    )
    back_nodes = outcome.backward.expansions if outcome.backward else 0
    print(outcome.lurd if outcome.solved else "FAILED")
    print(f"backward_nodes={back_nodes} forward_nodes={outcome.result.expansions} "
          f"forward_created={outcome.result.nodes}")
    return EXIT_OK if outcome.solved else EXIT_UNSOLVED


def cmd_benchmark(args) -> int:
    levels = select(resolve_collection(args.levels), args.only, args.stride)
    backward, forward = _load_models(args)
    settings = _settings(args)
    sweep = _caps(args.cap_sweep) if args.cap_sweep else None
    if sweep:
        settings = replace(settings, forward_cap=max(sweep))
    results = run_benchmark(levels, backward, forward, settings, args.workers)
    text = benchmark_csv(results, wall_time=args.wall_time)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if sweep:
        lines = ["cap,solved,levels"] + [f"{c},{k},{len(results)}" for c, k in cap_sweep(results, sweep)]
        if args.sweep_out:
            Path(args.sweep_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        else:
            print("\n".join(lines), file=sys.stderr)
    print(f"solved {sum(r.solved for r in results)}/{len(results)}", file=sys.stderr)
    return EXIT_OK


def cmd_ablate(args) -> int:
    training = resolve_collection(args.train_levels)
    testing = select(resolve_collection(args.levels), args.only, args.stride)
    rows = run_ablation(
        training, testing, _train_config(args), _settings(args),
        ABLATION_GRID, args.workers, args.out_dir,
    )
    text = ablation_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_replay(args) -> int:
    levels = resolve_collection(args.levels)
    if not 1 <= args.level <= len(levels):
        raise UsageError(f"--level must lie in 1..{len(levels)}")
    level = levels[args.level - 1]
    try:
        run = replay(level, args.lurd, require_solution=args.solution)
    except ReplayError as exc:
        print(f"illegal: {exc}", file=sys.stderr)
        return EXIT_UNSOLVED
    for i, frame in enumerate(run.frames):
        label = "start" if i == 0 else f"step {i}: {args.lurd[i - 1]}"
        print(f"; {label}\n{frame}\n", flush=True)
        if args.delay > 0 and i + 1 < len(run.frames):
            time.sleep(args.delay)
    print(f"; pushes={run.pushes} solved={'yes' if run.solved else 'no'}")
    return EXIT_OK


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--iterations", type=int, default=100)
    g.add_argument("--alpha0", type=float, default=0.01)
    g.add_argument("--alpha-decay", type=float, default=0.98)
    g.add_argument("--train-backward-cap", type=int, default=50)
    g.add_argument("--train-forward-cap", type=int, default=100)
    g.add_argument("--hint-cap", type=int, default=50,
                   help="backward budget for training levels' hint trajectories")
    g.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)


def _add_search_flags(p: argparse.ArgumentParser, *, caps: bool) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--no-dead-squares", action="store_true",
                   help="disable static dead-square pruning")
    if caps:
        p.add_argument("--backward-cap", type=int, default=10_000)
        p.add_argument("--forward-cap", type=int, default=50_000)
        p.add_argument("--time-limit", type=float, default=600.0,
                       help="seconds per level, 0 for none")


def _add_weight_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weights-dir", help="folder holding backward.weights and forward.weights")
    p.add_argument("--backward-weights")
    p.add_argument("--forward-weights")


def _add_subset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--only", help="comma-separated 1-based level numbers")
    p.add_argument("--stride", type=int, help="every k-th level starting at level 1")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sokohint", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-iteration progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train backward and forward value functions")
    p.add_argument("--levels", default="microban")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-hints", action="store_true", help="forward agent without Overlap/Perm")
    p.add_argument("--no-overlap", action="store_true")
    p.add_argument("--no-perm", action="store_true")
    p.add_argument("--no-connectivity", action="store_true")
    _add_training_flags(p)
    _add_search_flags(p, caps=False)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("solve", help="solve one level with trained weights")
    p.add_argument("levels", help="collection or single-level file")
    p.add_argument("--level", type=int, default=1, help="1-based level number")
    _add_weight_flags(p)
    _add_search_flags(p, caps=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="solve a collection and write a CSV")
    p.add_argument("levels")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--cap-sweep", help="comma-separated forward caps, e.g. 1000,5000,50000")
    p.add_argument("--sweep-out", help="CSV path for the cap sweep (default stderr)")
    p.add_argument("--wall-time", action="store_true",
                   help="add a wall_time column (makes the CSV run-dependent)")
    _add_weight_flags(p)
    _add_subset_flags(p)
    _add_search_flags(p, caps=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("ablate", help="train and benchmark the six feature variants")
    p.add_argument("levels", nargs="?", default="xsokoban", help="test collection")
    p.add_argument("--train-levels", default="microban")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--out-dir", help="keep each variant's weights here")
    _add_subset_flags(p)
    _add_training_flags(p)
    _add_search_flags(p, caps=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("replay", help="step through a LURD string")
    p.add_argument("levels")
    p.add_argument("lurd")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--delay", type=float, default=0.0, help="seconds between frames")
    p.add_argument("--solution", action="store_true",
                   help="fail unless the final frame has every box on a target")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, LevelError, FeatureMismatch, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
