"""
What the value function sees
============================

Parse a Microban level, mark its dead squares, and print the feature
vector of the start position for both agents. The backward agent starts
from the packed goal and pulls; its best branch becomes the hint for the
forward agent.
"""
import numpy as np

from sokohint.board import State, dead_squares, goal_state
from sokohint.features import (BackwardTrajectory, build_distance_table,
                               distance_lower_bound, extract)
from sokohint.levels import microban, render

level = microban()[3]
print(render(level, level.initial_boxes, level.initial_player))

# dead squares: a box there can never reach any target
dead = dead_squares(level)
rows = [list(line) for line in render(level, level.initial_boxes, level.initial_player).splitlines()]
for x, y in dead:
    rows[y][x] = "x"
print("\ndead squares marked x")
print("\n".join("".join(r) for r in rows))

table = build_distance_table(level)
start = State.initial(level)
print("\nmatching lower bound on pushes:", distance_lower_bound(level, start, table))

# a trajectory of just the goal still defines a packing order
trajectory = BackwardTrajectory.from_states([goal_state(level).boxes])
print("packing order:", trajectory.packing_order)

for mode in ("forward", "backward"):
    state = start if mode == "forward" else goal_state(level)
    hint = trajectory if mode == "forward" else None
    vec = extract(level, state, mode, hint, table=table)
    print(f"\n{mode} features")
    for name, value in vec.items():
        print(f"  {name:<13}{value: .4f}")

print("\nbackward vector as an array:", np.round(np.array(list(vec.values())), 3))
