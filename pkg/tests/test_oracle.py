import pytest
from hypothesis import given, settings

from sokohint.board import State, state_key
from sokohint.features import build_distance_table, distance_lower_bound
from sokohint.oracle import StateCapExceeded, enumerate_states, optimal_push_count

from conftest import CORRIDOR, level, oracle_suite, small_levels


def test_corridor_and_trivial_levels():
    assert optimal_push_count(level(CORRIDOR)) == 1
    assert optimal_push_count(level("######\n#@$ .#\n######")) == 2
    assert optimal_push_count(level("#####\n#@* #\n#####")) == 0
    assert optimal_push_count(level("#####\n#$ .#\n# @ #\n#####")) is None


def test_enumerate_corridor():
    keys = enumerate_states(level(CORRIDOR))
    assert len(keys) == 2


def test_player_start_within_region_irrelevant():
    text = "#######\n#     #\n# $ . #\n#     #\n#######"
    counts = set()
    for x, y in [(1, 1), (5, 3), (3, 1)]:
        rows = [list(r) for r in text.splitlines()]
        rows[y][x] = "@"
        counts.add(optimal_push_count(level("\n".join("".join(r) for r in rows))))
    assert counts == {2}


def test_state_cap():
    lv = level("########\n#      #\n# $$ $ #\n#  ... #\n#@     #\n########")
    with pytest.raises(StateCapExceeded):
        optimal_push_count(lv, state_cap=5)
    with pytest.raises(StateCapExceeded):
        enumerate_states(lv, state_cap=5)


@given(small_levels(max_boxes=2))
@settings(max_examples=40, deadline=None)
def test_enumerated_keys_are_well_formed(lv):
    for key in enumerate_states(lv):
        assert len(key.boxes) == lv.n_boxes
        assert set(key.boxes) <= lv.floor
        assert key.region in lv.floor and key.region not in key.boxes
        assert state_key(lv, State(frozenset(key.boxes), key.region)) == key


def test_lower_bound_never_exceeds_optimum():
    suite = oracle_suite()
    assert len(suite) >= 50
    for lv in suite:
        optimum = optimal_push_count(lv)
        bound = distance_lower_bound(lv, State.initial(lv), build_distance_table(lv))
        if optimum is None:
            continue
        assert bound <= optimum
        if lv.n_boxes == 1:
            assert bound == optimum
