"""
Train on part of Microban, then solve a held-out level
======================================================

A short schedule keeps this to seconds. The full schedule (all 155
levels, 100 iterations) is what ``sokohint train`` runs by default.
"""
import time

from sokohint.levels import microban
from sokohint.pipeline import TrainConfig, solve, train_backward, train_forward
from sokohint.replay import replay

levels = microban()
train, held_out = levels[:60], levels[60:70]
config = TrainConfig(iterations=20)

t = time.perf_counter()
backward, back_report = train_backward(train, config)
forward, fwd_report = train_forward(train, backward, config)
print(f"trained in {time.perf_counter() - t:.0f}s")
print("backward solved per iteration:", back_report.solved[::4])
print("forward solved per iteration: ", fwd_report.solved[::4])

for name in forward.names:
    print(f"  {name:<13}{forward[name]:+.4f}")

# frozen weights, larger caps, no learning
for number, level in enumerate(held_out, start=61):
    out = solve(level, backward, forward, backward_cap=2000, forward_cap=5000, seed=number)
    if out.solved:
        check = replay(level, out.lurd, require_solution=True)
        print(f"level {number}: {check.pushes} pushes, {out.result.expansions} expansions")
    else:
        print(f"level {number}: unsolved after {out.result.expansions} expansions")
