"""Brute-force ground truth for small levels.

Breadth-first search over push states deduplicated by StateKey, written
against the pure-Python rules in ``board`` so it shares no code with the
compiled search.
"""
from __future__ import annotations

from collections import deque

from .board import State, StateKey, apply_push, is_forward_goal, legal_pushes, state_key
from .levels import Level


class StateCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"more than {cap} distinct states")
        self.cap = cap


def _canonical(level: Level, state: State) -> tuple[StateKey, State]:
    key = state_key(level, state)
    # the player's exact square inside its region is irrelevant, so pin it
    return key, State(state.boxes, key.region)


def optimal_push_count(level: Level, state_cap: int = 200_000) -> int | None:
    """Fewest pushes that solve ``level``; None when no push sequence does."""
    key, start = _canonical(level, State.initial(level))
    if is_forward_goal(level, start):
        return 0
    seen = {key}
    frontier = deque([(start, 0)])
    while frontier:
        state, depth = frontier.popleft()
        for move in legal_pushes(level, state):
            key, child = _canonical(level, apply_push(level, state, move))
            if key in seen:
                continue
            if is_forward_goal(level, child):
                return depth + 1
            seen.add(key)
            if len(seen) > state_cap:
                raise StateCapExceeded(state_cap)
            frontier.append((child, depth + 1))
    return None


def enumerate_states(level: Level, state_cap: int = 200_000) -> set[StateKey]:
    """Every StateKey reachable from the initial state by pushes."""
    key, start = _canonical(level, State.initial(level))
    seen = {key}
    stack = [start]
    while stack:
        state = stack.pop()
        for move in legal_pushes(level, state):
            key, child = _canonical(level, apply_push(level, state, move))
            if key not in seen:
                seen.add(key)
                if len(seen) > state_cap:
                    raise StateCapExceeded(state_cap)
                stack.append(child)
    return seen
