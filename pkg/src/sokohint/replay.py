"""Step-by-step LURD interpreter.

Deliberately independent of ``board``: it walks the player one square per
character on a plain set of walls and boxes, so solutions from the search
are checked by code that never saw the macro-move generator.
"""
from __future__ import annotations

from dataclasses import dataclass

from .levels import Level, render

_STEPS = {"u": (0, -1), "d": (0, 1), "l": (-1, 0), "r": (1, 0)}


class ReplayError(ValueError):
    def __init__(self, index: int, char: str, reason: str):
        super().__init__(f"step {index} ({char!r}): {reason}")
        self.index = index
        self.char = char
        self.reason = reason


@dataclass
class Replay:
    frames: list[str]
    pushes: int
    solved: bool


def replay(level: Level, lurd: str, require_solution: bool = False) -> Replay:
    """Execute ``lurd`` from the initial state, one frame per step plus the start.

    Lowercase letters walk, uppercase letters push. Walking into a box or a
    push without a movable box is an error. With ``require_solution`` the
    final position must have every box on a target.
    """
    walls = level.walls
    boxes = set(level.initial_boxes)
    x, y = level.initial_player
    frames = [render(level, boxes, (x, y))]
    pushes = 0
    for i, ch in enumerate(lurd):
        step = _STEPS.get(ch.lower())
        if step is None:
            raise ReplayError(i, ch, "not a LURD character")
        dx, dy = step
        ahead = (x + dx, y + dy)
        if ahead in walls:
            raise ReplayError(i, ch, "walks into a wall")
        if ch.isupper():
            if ahead not in boxes:
                raise ReplayError(i, ch, "push with no box ahead")
            beyond = (x + 2 * dx, y + 2 * dy)
            if beyond in walls or beyond in boxes:
                raise ReplayError(i, ch, "box is blocked")
            boxes.remove(ahead)
            boxes.add(beyond)
            pushes += 1
        elif ahead in boxes:
            raise ReplayError(i, ch, "walks into a box without pushing")
        x, y = ahead
        frames.append(render(level, boxes, (x, y)))
    solved = boxes == set(level.targets)
    if require_solution and not solved:
        raise ReplayError(len(lurd), "", "boxes are not all on targets at the end")
    return Replay(frames, pushes, solved)
