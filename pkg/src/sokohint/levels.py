"""Sokoban levels in XSB notation.

Squares are ``(x, y)`` tuples, ``x`` the column and ``y`` the row, origin at
the top-left character of the level text.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

Square = tuple[int, int]

WALL = "#"
FLOOR = " "
PLAYER = "@"
PLAYER_ON_TARGET = "+"
BOX = "$"
BOX_ON_TARGET = "*"
TARGET = "."
XSB_SYMBOLS = frozenset("#@+$*. ")

# reading-order offsets: up, down, left, right
DIRECTIONS: dict[str, Square] = {"U": (0, -1), "D": (0, 1), "L": (-1, 0), "R": (1, 0)}
DIRECTION_ORDER = ("U", "D", "L", "R")


class LevelError(ValueError):
    """Malformed or inconsistent level text."""


class CollectionError(LevelError):
    def __init__(self, index: int, name: str | None, cause: LevelError):
        self.index = index
        self.name = name
        self.cause = cause
        label = f"level {index}" + (f" ({name})" if name else "")
        super().__init__(f"{label}: {cause}")


def reading_order(square: Square) -> tuple[int, int]:
    """Sort key placing squares in row-major (reading) order."""
    x, y = square
    return (y, x)


@dataclass(frozen=True, eq=False)
class Grid:
    """Flat-array view of a level used by the search kernels.

    Square ``(x, y)`` maps to index ``y * width + x``.
    """

    width: int
    height: int
    floor: np.ndarray  # uint8[N]
    target_mask: np.ndarray  # uint8[N]
    targets: np.ndarray  # int32[n], reading order
    initial_boxes: np.ndarray  # int32[n], reading order
    initial_player: int
    dirs: np.ndarray  # int32[4], U D L R
    n_floor: int

    def index(self, square: Square) -> int:
        return square[1] * self.width + square[0]

    def square(self, index: int) -> Square:
        return (int(index) % self.width, int(index) // self.width)


@dataclass(frozen=True)
class Level:
    width: int
    height: int
    walls: frozenset[Square]
    targets: frozenset[Square]
    initial_boxes: frozenset[Square]
    initial_player: Square
    name: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.initial_boxes) != len(self.targets):
            raise LevelError(
                f"{len(self.initial_boxes)} boxes but {len(self.targets)} targets"
            )
        if self.initial_player in self.walls:
            raise LevelError("player stands on a wall")
        if self.initial_boxes & self.walls:
            raise LevelError("box placed on a wall")
        if self.targets & self.walls:
            raise LevelError("target placed on a wall")
        if self.initial_player in self.initial_boxes:
            raise LevelError("player and box share a square")
        # computing the interior raises on a border leak
        if not self.floor >= self.initial_boxes | self.targets:
            raise LevelError("box or target outside the playable interior")

    @cached_property
    def floor(self) -> frozenset[Square]:
        """Interior squares reachable by the player when boxes are ignored."""
        return frozenset(_interior(self.width, self.height, self.walls, self.initial_player))

    @cached_property
    def grid(self) -> Grid:
        w, h = self.width, self.height
        floor = np.zeros(w * h, dtype=np.uint8)
        for x, y in self.floor:
            floor[y * w + x] = 1
        target_mask = np.zeros(w * h, dtype=np.uint8)
        for x, y in self.targets:
            target_mask[y * w + x] = 1
        return Grid(
            width=w,
            height=h,
            floor=floor,
            target_mask=target_mask,
            targets=np.array(sorted(y * w + x for x, y in self.targets), dtype=np.int32),
            initial_boxes=np.array(
                sorted(y * w + x for x, y in self.initial_boxes), dtype=np.int32
            ),
            initial_player=self.initial_player[1] * w + self.initial_player[0],
            dirs=np.array([-w, w, -1, 1], dtype=np.int32),
            n_floor=len(self.floor),
        )

    @property
    def n_boxes(self) -> int:
        return len(self.targets)

    def __str__(self) -> str:
        return serialize_xsb(self)


def _interior(width: int, height: int, walls: Iterable[Square], start: Square) -> set[Square]:
    walls = set(walls)
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in DIRECTIONS.values():
            nxt = (x + dx, y + dy)
            if nxt in seen or nxt in walls:
                continue
            if not (0 <= nxt[0] < width and 0 <= nxt[1] < height):
                raise LevelError(f"interior leaks to the grid border at {(x, y)}")
            seen.add(nxt)
            queue.append(nxt)
    return seen


def parse_xsb(text: str, name: str | None = None) -> Level:
    """Parse one level.

    Ragged rows are padded with wall. Every square the player cannot reach
    (boxes treated as passable) becomes wall; a box-on-target sealed in such
    a pocket therefore disappears together with its target. The grid is
    cropped to the interior plus a one-square wall ring, which makes
    ``parse_xsb(serialize_xsb(level)) == level``.
    """
    rows = [line.rstrip("\r\n") for line in text.split("\n")]
    while rows and not rows[0].strip():
        rows.pop(0)
    while rows and not rows[-1].strip():
        rows.pop()
    if not rows:
        raise LevelError("empty level")
    height = len(rows)
    width = max(len(r) for r in rows)

    walls: set[Square] = set()
    targets: set[Square] = set()
    boxes: set[Square] = set()
    players: list[Square] = []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row.ljust(width, WALL)):
            sq = (x, y)
            if ch not in XSB_SYMBOLS:
                raise LevelError(f"unknown symbol {ch!r} at {sq}")
            if ch == WALL:
                walls.add(sq)
            if ch in "@+":
                players.append(sq)
            if ch in "$*":
                boxes.add(sq)
            if ch in ".+*":
                targets.add(sq)
    if len(players) != 1:
        raise LevelError(f"expected exactly one player, found {len(players)}")
    player = players[0]

    interior = _interior(width, height, walls, player)
    boxes &= interior
    targets &= interior
    if len(boxes) != len(targets):
        raise LevelError(f"{len(boxes)} boxes but {len(targets)} targets")

    # crop to the interior's bounding box plus one ring of wall
    x0 = min(x for x, _ in interior) - 1
    y0 = min(y for _, y in interior) - 1
    width = max(x for x, _ in interior) - x0 + 2
    height = max(y for _, y in interior) - y0 + 2

    def shift(squares):
        return frozenset((x - x0, y - y0) for x, y in squares)

    interior = shift(interior)
    all_squares = {(x, y) for y in range(height) for x in range(width)}
    return Level(
        width=width,
        height=height,
        walls=frozenset(all_squares - interior),
        targets=shift(targets),
        initial_boxes=shift(boxes),
        initial_player=(player[0] - x0, player[1] - y0),
        name=name,
    )


def render(
    level: Level, boxes: Iterable[Square], player: Square | None
) -> str:
    """Draw a board configuration in XSB symbols.

    Wall squares with no interior square among their eight neighbours are
    drawn as blank exterior, and trailing blanks are stripped.
    """
    boxes = set(boxes)
    floor = level.floor
    lines = []
    for y in range(level.height):
        chars = []
        for x in range(level.width):
            sq = (x, y)
            if sq in level.walls:
                near = any(
                    (x + dx, y + dy) in floor for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                )
                chars.append(WALL if near else FLOOR)
            elif sq in boxes:
                chars.append(BOX_ON_TARGET if sq in level.targets else BOX)
            elif sq == player:
                chars.append(PLAYER_ON_TARGET if sq in level.targets else PLAYER)
            elif sq in level.targets:
                chars.append(TARGET)
            else:
                chars.append(FLOOR)
        lines.append("".join(chars).rstrip())
    return "\n".join(lines)


def serialize_xsb(level: Level) -> str:
    return render(level, level.initial_boxes, level.initial_player)


def _is_board_line(line: str) -> bool:
    return bool(line.strip()) and not line.startswith(";") and set(line) <= XSB_SYMBOLS


def parse_collection(text: str) -> list[Level]:
    """Split a multi-level file into levels.

    Blank lines separate levels. Lines starting with ``;`` and free-text
    lines (for example quoted titles) seen before a board belong to the
    next board; the last of them names it.
    """
    levels: list[Level] = []
    block: list[str] = []
    notes: list[str] = []

    def flush() -> None:
        if not block:
            return
        name = notes[-1] if notes else None
        try:
            levels.append(parse_xsb("\n".join(block), name=name))
        except LevelError as exc:
            raise CollectionError(len(levels), name, exc) from exc
        block.clear()
        notes.clear()

    for raw in text.splitlines():
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
        elif block:
            # anything inside a board block is board text, bad symbols included
            if line.startswith(";"):
                flush()
                notes.append(line.lstrip(";").strip())
            else:
                block.append(line)
        elif _is_board_line(line):
            block.append(line)
        else:
            notes.append(line.lstrip(";").strip().strip("'").strip())
    flush()
    return levels


def serialize_collection(levels: Iterable[Level]) -> str:
    chunks = []
    for level in levels:
        head = f"; {level.name}\n\n" if level.name else ""
        chunks.append(head + serialize_xsb(level))
    return "\n\n".join(chunks) + "\n"


def load_collection(path: str | Path) -> list[Level]:
    return parse_collection(Path(path).read_text(encoding="utf-8"))


def _bundled(filename: str) -> list[Level]:
    text = resources.files("sokohint.data").joinpath(filename).read_text(encoding="utf-8")
    return parse_collection(text)


def microban() -> list[Level]:
    """The 155 Microban training levels (David W. Skinner)."""
    return _bundled("Microban_155.xsb")


def xsokoban() -> list[Level]:
    """The 90 original XSokoban levels."""
    return _bundled("XSokoban_90.xsb")


BUNDLED = {"microban": microban, "xsokoban": xsokoban}
