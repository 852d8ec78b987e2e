from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sokohint import _kernels
from sokohint.board import (
    IllegalMove,
    Move,
    State,
    apply_pull,
    apply_push,
    dead_squares,
    free_regions,
    goal_state,
    is_backward_goal,
    is_forward_goal,
    legal_pulls,
    legal_pushes,
    player_reachable,
    state_key,
)
from sokohint.levels import DIRECTIONS
from sokohint.search import _level_data

from conftest import CORRIDOR, level, small_levels

SPLIT = """
#######
#@ ...#
#     #
#$$$$$#
#  .. #
#######
"""


def flood(floor, blocked, start):
    seen, queue = {start}, deque([start])
    while queue:
        x, y = queue.popleft()
        for dx, dy in DIRECTIONS.values():
            nxt = (x + dx, y + dy)
            if nxt in floor and nxt not in blocked and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def random_state(lv, rng):
    squares = sorted(lv.floor)
    pick = rng.permutation(len(squares))
    boxes = frozenset(squares[i] for i in pick[: lv.n_boxes])
    return State(boxes, squares[pick[lv.n_boxes]])


def test_reachable_corridor():
    lv = level(CORRIDOR)
    assert player_reachable(lv, State.initial(lv)) == {(1, 1)}


def test_reachable_open_room():
    lv = level("#####\n#@  #\n#   #\n# $.#\n#####")
    assert len(player_reachable(lv, State(frozenset(), (1, 1)))) == 9


def test_reachable_split_by_box_wall():
    lv = level(SPLIT)
    reach = player_reachable(lv, State.initial(lv))
    assert reach == {(x, y) for x in range(1, 6) for y in (1, 2)}
    assert len(free_regions(lv, lv.initial_boxes)) == 2


def test_corridor_moves():
    lv = level(CORRIDOR)
    assert legal_pushes(lv, State.initial(lv)) == [Move("push", (2, 1), "R")]
    after = apply_push(lv, State.initial(lv), Move("push", (2, 1), "R"))
    assert after == State(frozenset({(3, 1)}), (2, 1))
    assert is_forward_goal(lv, after)
    assert legal_pulls(lv, after) == [Move("pull", (3, 1), "L")]


def test_corner_box_pushes():
    # walls above and left of the box also block the squares a push right
    # or down would need the player on
    lv = level("#####\n#$ .#\n#  @#\n#####")
    assert legal_pushes(lv, State.initial(lv)) == []
    lv = level("######\n#    #\n# $ .#\n#   @#\n######")
    moves = legal_pushes(lv, State.initial(lv))
    assert [m.direction for m in moves] == ["U", "D", "L", "R"]


def test_pull_needs_retreat_square():
    # player stands left of the box with a wall behind, so no pull left
    lv = level("#####\n#@$.#\n#####")
    goal = State(frozenset({(2, 1)}), (1, 1))
    assert all(m.direction != "L" for m in legal_pulls(lv, goal))


def test_illegal_move_rejected():
    lv = level(CORRIDOR)
    with pytest.raises(IllegalMove):
        apply_push(lv, State.initial(lv), Move("push", (2, 1), "L"))
    with pytest.raises(IllegalMove):
        apply_pull(lv, State.initial(lv), Move("push", (2, 1), "R"))


def brute_pushes(lv, state):
    reach = flood(lv.floor, state.boxes, state.player)
    out = set()
    for b in state.boxes:
        for d, (dx, dy) in DIRECTIONS.items():
            behind, ahead = (b[0] - dx, b[1] - dy), (b[0] + dx, b[1] + dy)
            if behind in reach and ahead in lv.floor and ahead not in state.boxes:
                out.add(Move("push", b, d))
    return out


def brute_pulls(lv, state):
    reach = flood(lv.floor, state.boxes, state.player)
    out = set()
    for b in state.boxes:
        for d, (dx, dy) in DIRECTIONS.items():
            stand, retreat = (b[0] + dx, b[1] + dy), (b[0] + 2 * dx, b[1] + 2 * dy)
            if stand in reach and retreat in lv.floor and retreat not in state.boxes:
                out.add(Move("pull", b, d))
    return out


@given(small_levels(max_boxes=3), st.integers(0, 2**31))
@settings(max_examples=80, deadline=None)
def test_moves_match_candidate_check(lv, seed):
    state = random_state(lv, np.random.default_rng(seed))
    pushes, pulls = legal_pushes(lv, state), legal_pulls(lv, state)
    assert set(pushes) == brute_pushes(lv, state) and len(pushes) == len(set(pushes))
    assert set(pulls) == brute_pulls(lv, state) and len(pulls) == len(set(pulls))
    assert pushes == legal_pushes(lv, state)


def test_two_box_exhaustive():
    lv = level("######\n#    #\n# $$ #\n#@ ..#\n######")
    state = State.initial(lv)
    assert set(legal_pushes(lv, state)) == brute_pushes(lv, state)
    assert len(brute_pushes(lv, state)) < 8


@given(small_levels(max_boxes=3), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_push_pull_inversion(lv, seed):
    state = random_state(lv, np.random.default_rng(seed))
    for m in legal_pushes(lv, state):
        after = apply_push(lv, state, m)
        back = apply_pull(lv, after, m.mirrored())
        assert back.boxes == state.boxes
    for m in legal_pulls(lv, state):
        after = apply_pull(lv, state, m)
        assert apply_push(lv, after, m.mirrored()).boxes == state.boxes


def test_random_walk_keeps_invariants(micro):
    rng = np.random.default_rng(5)
    for lv in micro[:30]:
        state = State.initial(lv)
        for _ in range(20):
            moves = legal_pushes(lv, state)
            if not moves:
                break
            state = apply_push(lv, state, moves[rng.integers(len(moves))])
            assert len(state.boxes) == lv.n_boxes
            assert state.boxes <= lv.floor
            assert state.player in lv.floor and state.player not in state.boxes


def test_goal_predicates():
    lv = level("#######\n#@$$$ #\n#.  ..#\n#######")
    assert goal_state(lv).boxes == lv.targets
    assert is_forward_goal(lv, goal_state(lv)) and not is_backward_goal(lv, goal_state(lv))
    one = State(frozenset({(1, 2), (2, 1), (3, 1)}), (5, 1))
    assert not is_forward_goal(lv, one) and not is_backward_goal(lv, one)
    assert is_backward_goal(lv, State.initial(lv))


def test_goal_state_of_solved_level():
    lv = level("#####\n#@* #\n#####")
    assert goal_state(lv).boxes == lv.initial_boxes


def test_dead_squares_basics():
    lv = level("######\n#@   #\n# $. #\n#    #\n######")
    dead = dead_squares(lv)
    assert {(1, 1), (4, 1), (1, 3), (4, 3)} <= dead
    assert not dead & lv.targets


def single_box_can_solve(lv, start):
    """Push BFS with the player tracked, on the otherwise empty board."""
    seen = set()
    queue = deque()
    for p in lv.floor - {start}:
        key = (start, min(flood(lv.floor, {start}, p)))
        if key not in seen:
            seen.add(key)
            queue.append((start, p))
    while queue:
        box, player = queue.popleft()
        if box in lv.targets:
            return True
        state = State(frozenset({box}), player)
        for m in legal_pushes(lv, state):
            nxt = apply_push(lv, state, m)
            (b,) = nxt.boxes
            key = (b, min(flood(lv.floor, {b}, nxt.player)))
            if key not in seen:
                seen.add(key)
                queue.append((b, nxt.player))
    return False


def test_dead_squares_match_single_box_oracle():
    lv = level("######\n#@   #\n#  . #\n#    #\n# $  #\n######")
    expected = {sq for sq in lv.floor if not single_box_can_solve(lv, sq)}
    assert dead_squares(lv) == expected


@given(small_levels(max_boxes=2))
@settings(max_examples=40, deadline=None)
def test_dead_squares_never_targets(lv):
    assert not dead_squares(lv) & lv.targets


def test_state_key_regions():
    lv = level(SPLIT)
    boxes = lv.initial_boxes
    a = state_key(lv, State(boxes, (1, 1)))
    b = state_key(lv, State(boxes, (5, 2)))
    c = state_key(lv, State(boxes, (1, 4)))
    assert a == b and a != c
    assert a.region == (1, 1)


def test_state_key_partitions_enumeration():
    lv = level("######\n#@   #\n# $$ #\n#  ..#\n######")
    squares = sorted(lv.floor)
    states = [State(frozenset({p, q}), r) for p in squares for q in squares if p < q
              for r in squares if r not in (p, q)]
    classes = {}
    for s in states:
        classes.setdefault(state_key(lv, s), []).append(s)
    for members in classes.values():
        ref = members[0]
        region = flood(lv.floor, ref.boxes, ref.player)
        assert all(m.boxes == ref.boxes and m.player in region for m in members)
    keyed = {(s.boxes, frozenset(flood(lv.floor, s.boxes, s.player))) for s in states}
    assert len(keyed) == len(classes)


@given(small_levels(max_boxes=3), st.integers(0, 2**31), st.booleans())
@settings(max_examples=80, deadline=None)
def test_kernel_moves_match_reference(lv, seed, pull):
    state = random_state(lv, np.random.default_rng(seed))
    data = _level_data(lv)
    grid = data.grid
    boxes = np.array(sorted(grid.index(b) for b in state.boxes), np.int32)
    m = _kernels.generate_moves(
        grid.floor, data.dead, False, grid.dirs, boxes, grid.index(state.player), pull,
        data.occ, data.mark, data.stack, data.child_boxes, data.child_player, data.child_move,
    )
    assert not data.occ.any() and not data.mark.any()
    reference = legal_pulls(lv, state) if pull else legal_pushes(lv, state)
    got = []
    for c in range(m):
        code = int(data.child_move[c])
        got.append(Move("pull" if pull else "push", grid.square(code // 4), "UDLR"[code % 4]))
        after = apply_pull(lv, state, got[-1]) if pull else apply_push(lv, state, got[-1])
        assert {grid.square(b) for b in data.child_boxes[c]} == after.boxes
        assert grid.square(data.child_player[c]) == after.player
        assert list(data.child_boxes[c]) == sorted(data.child_boxes[c])
    assert got == reference
