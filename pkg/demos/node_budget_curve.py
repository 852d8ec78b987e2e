"""
Solved levels as a function of the node budget
===============================================

One benchmark run at the largest cap gives the whole curve: a capped search
with the same seed is a prefix of the longer one.
"""
import sys

from sokohint.bench import BenchmarkSettings, cap_sweep, run_benchmark
from sokohint.levels import microban
from sokohint.pipeline import TrainConfig, train_backward, train_forward

levels = microban()
config = TrainConfig(iterations=15)
backward, _ = train_backward(levels, config)
forward, _ = train_forward(levels, backward, config)

caps = [10, 30, 100, 300, 1000, 3000]
settings = BenchmarkSettings(backward_cap=2000, forward_cap=max(caps))
numbered = list(enumerate(levels, start=1))[::3]
results = run_benchmark(numbered, backward, forward, settings)

width = 50
for cap, solved in cap_sweep(results, caps):
    bar = "#" * round(width * solved / len(results))
    print(f"{cap:>6} {solved:>3}/{len(results)} {bar}")

if "--csv" in sys.argv:
    from sokohint.bench import benchmark_csv
    sys.stdout.write(benchmark_csv(results))
