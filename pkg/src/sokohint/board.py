"""Sokoban rules on ``(x, y)`` squares.

Moves are box pushes (forward play) or box pulls (reverse play); the player's
walk between them is implicit and only constrained by reachability.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cache
from typing import Iterable, Literal, NamedTuple

from .levels import DIRECTION_ORDER, DIRECTIONS, Level, Square, reading_order

OPPOSITE = {"U": "D", "D": "U", "L": "R", "R": "L"}


class IllegalMove(ValueError):
    pass


@dataclass(frozen=True)
class State:
    boxes: frozenset[Square]
    player: Square | None

    @classmethod
    def initial(cls, level: Level) -> State:
        return cls(level.initial_boxes, level.initial_player)


@dataclass(frozen=True)
class Move:
    kind: Literal["push", "pull"]
    box_from: Square
    direction: str

    @property
    def box_to(self) -> Square:
        dx, dy = DIRECTIONS[self.direction]
        return (self.box_from[0] + dx, self.box_from[1] + dy)

    def mirrored(self) -> Move:
        """The reverse-mode move that undoes this one."""
        kind = "pull" if self.kind == "push" else "push"
        return Move(kind, self.box_to, OPPOSITE[self.direction])

    def __str__(self) -> str:
        return f"{self.kind} {self.box_from} {self.direction}"


class StateKey(NamedTuple):
    boxes: tuple[Square, ...]
    region: Square


def step(square: Square, direction: str, times: int = 1) -> Square:
    dx, dy = DIRECTIONS[direction]
    return (square[0] + dx * times, square[1] + dy * times)


def _flood(floor: frozenset[Square], blocked: Iterable[Square], start: Square) -> set[Square]:
    blocked = set(blocked)
    seen = {start}
    queue = deque([start])
    while queue:
        sq = queue.popleft()
        for d in DIRECTION_ORDER:
            nxt = step(sq, d)
            if nxt in floor and nxt not in blocked and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def player_reachable(level: Level, state: State) -> set[Square]:
    return _flood(level.floor, state.boxes, state.player)


def free_regions(level: Level, boxes: Iterable[Square]) -> list[set[Square]]:
    """Connected components of the box-free floor, in reading order of their first square."""
    boxes = set(boxes)
    remaining = sorted(level.floor - boxes, key=reading_order)
    regions: list[set[Square]] = []
    claimed: set[Square] = set()
    for sq in remaining:
        if sq in claimed:
            continue
        region = _flood(level.floor, boxes, sq)
        claimed |= region
        regions.append(region)
    return regions


def _is_free(level: Level, boxes: frozenset[Square], sq: Square) -> bool:
    return sq in level.floor and sq not in boxes


def legal_pushes(level: Level, state: State) -> list[Move]:
    reach = player_reachable(level, state)
    moves = []
    for box in sorted(state.boxes, key=reading_order):
        for d in DIRECTION_ORDER:
            if step(box, d, -1) in reach and _is_free(level, state.boxes, step(box, d)):
                moves.append(Move("push", box, d))
    return moves


def legal_pulls(level: Level, state: State) -> list[Move]:
    reach = player_reachable(level, state)
    moves = []
    for box in sorted(state.boxes, key=reading_order):
        for d in DIRECTION_ORDER:
            if step(box, d) in reach and _is_free(level, state.boxes, step(box, d, 2)):
                moves.append(Move("pull", box, d))
    return moves


def apply_push(level: Level, state: State, move: Move) -> State:
    if move.kind != "push" or move not in legal_pushes(level, state):
        raise IllegalMove(str(move))
    return State((state.boxes - {move.box_from}) | {move.box_to}, move.box_from)


def apply_pull(level: Level, state: State, move: Move) -> State:
    if move.kind != "pull" or move not in legal_pulls(level, state):
        raise IllegalMove(str(move))
    return State(
        (state.boxes - {move.box_from}) | {move.box_to}, step(move.box_from, move.direction, 2)
    )


def apply_move(level: Level, state: State, move: Move) -> State:
    return apply_push(level, state, move) if move.kind == "push" else apply_pull(level, state, move)


def goal_state(level: Level) -> State:
    """All boxes packed; the player is placed later by the backward search."""
    return State(level.targets, None)


def is_forward_goal(level: Level, state: State) -> bool:
    return state.boxes == level.targets


def is_backward_goal(level: Level, state: State) -> bool:
    return not (state.boxes & level.targets)


@cache
def dead_squares(level: Level) -> frozenset[Square]:
    """Squares from which a lone box can never be pushed onto any target.

    Computed as the complement of the squares a box can be pulled to from
    some target on the empty board.
    """
    alive = set(level.targets)
    queue = deque(level.targets)
    while queue:
        sq = queue.popleft()
        for d in DIRECTION_ORDER:
            # box at sq pulled one square in direction d: player needs sq+d and sq+2d
            dest, retreat = step(sq, d), step(sq, d, 2)
            if dest in level.floor and retreat in level.floor and dest not in alive:
                alive.add(dest)
                queue.append(dest)
    return level.floor - alive


def state_key(level: Level, state: State) -> StateKey:
    region = player_reachable(level, state)
    return StateKey(
        tuple(sorted(state.boxes, key=reading_order)), min(region, key=reading_order)
    )
