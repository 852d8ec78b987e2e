from __future__ import annotations

from collections import deque

import numpy as np
import pytest
from hypothesis import strategies as st

from sokohint.levels import Level, microban, parse_xsb, xsokoban

CORRIDOR = "#####\n#@$.#\n#####"


def level(text: str) -> Level:
    return parse_xsb(text.strip("\n"))


def _neighbours(sq):
    x, y = sq
    return ((x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y))


def connected(cells: set) -> bool:
    if not cells:
        return True
    start = next(iter(cells))
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in _neighbours(queue.popleft()):
            if nxt in cells and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(cells)


def articulation_free(cells: set) -> bool:
    """True when removing any single cell leaves the rest connected."""
    return connected(cells) and all(connected(cells - {c}) for c in cells)


def build(width: int, height: int, floor: set, boxes, targets, player) -> Level:
    """XSB text for an interior of ``width`` x ``height`` inside a wall ring."""
    rows = []
    for y in range(height + 2):
        row = []
        for x in range(width + 2):
            sq = (x, y)
            if sq not in floor:
                row.append("#")
            elif sq == player:
                row.append("+" if sq in targets else "@")
            elif sq in boxes:
                row.append("*" if sq in targets else "$")
            else:
                row.append("." if sq in targets else " ")
        rows.append("".join(row))
    return parse_xsb("\n".join(rows))


def random_level(rng: np.random.Generator, max_side: int = 6, n_boxes: int = 1,
                 wall_fraction: float = 0.2, two_connected: bool = False) -> Level | None:
    width = int(rng.integers(3, max_side + 1))
    height = int(rng.integers(3, max_side + 1))
    cells = {(x, y) for x in range(1, width + 1) for y in range(1, height + 1)}
    floor = {c for c in cells if rng.random() >= wall_fraction}
    if len(floor) < 2 * n_boxes + 2 or not connected(floor):
        return None
    if two_connected and not articulation_free(floor):
        return None
    squares = sorted(floor)
    pick = rng.permutation(len(squares))
    boxes = {squares[i] for i in pick[:n_boxes]}
    player = squares[pick[n_boxes]]
    tpick = rng.permutation(len(squares))
    targets = {squares[i] for i in tpick[:n_boxes]}
    return build(width, height, floor, boxes, targets, player)


def scrambled_level(rng: np.random.Generator, max_side: int, n_boxes: int,
                    wall_fraction: float, two_connected: bool, pulls: int = 12) -> Level | None:
    """A level made solvable by pulling boxes at random away from packed targets."""
    from sokohint.board import State, apply_pull, legal_pulls

    base = random_level(rng, max_side, n_boxes, wall_fraction, two_connected)
    if base is None:
        return None
    free = sorted(base.floor - base.targets)
    if not free:
        return None
    state = State(base.targets, free[rng.integers(len(free))])
    for _ in range(pulls):
        moves = legal_pulls(base, state)
        if not moves:
            break
        state = apply_pull(base, state, moves[rng.integers(len(moves))])
    width, height = base.width - 2, base.height - 2
    return build(width, height, set(base.floor), state.boxes, base.targets, state.player)


def oracle_suite(count: int = 60, seed: int = 2024) -> list[Level]:
    """Small solvable levels: a third with one box on articulation-free floors."""
    rng = np.random.default_rng(seed)
    out: list[Level] = []
    plan = [(1, True), (2, False), (3, False)]
    while len(out) < count:
        boxes, two = plan[len(out) % 3]
        side = 6 if boxes < 3 else 5
        lv = scrambled_level(rng, side, boxes, wall_fraction=0.12 if two else 0.2,
                             two_connected=two)
        if lv is not None and lv.initial_boxes != lv.targets:
            out.append(lv)
    return out


@st.composite
def small_levels(draw, max_side: int = 5, max_boxes: int = 2):
    seed = draw(st.integers(0, 2**32 - 1))
    boxes = draw(st.integers(1, max_boxes))
    rng = np.random.default_rng(seed)
    for _ in range(50):
        lv = random_level(rng, max_side, boxes)
        if lv is not None:
            return lv
    return level(CORRIDOR)


@pytest.fixture(scope="session")
def micro() -> list[Level]:
    return microban()


@pytest.fixture(scope="session")
def xsok() -> list[Level]:
    return xsokoban()


_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one ``criterion: PASS|FAIL|WARN detail`` line for the summary."""
    def record(criterion: str, status: str, detail: str = "") -> None:
        line = f"{criterion}: {status}" + (f"  {detail}" if detail else "")
        _VERDICTS.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
