import pytest
from hypothesis import given, settings

from sokohint.levels import (
    CollectionError,
    LevelError,
    load_collection,
    parse_collection,
    parse_xsb,
    serialize_collection,
    serialize_xsb,
)

from conftest import CORRIDOR, level, small_levels


def test_minimal_level():
    lv = parse_xsb(CORRIDOR)
    assert lv.initial_boxes == {(2, 1)}
    assert lv.targets == {(3, 1)}
    assert lv.initial_player == (1, 1)
    assert (lv.width, lv.height) == (5, 3)


def test_count_mismatch_rejected():
    with pytest.raises(LevelError, match="2 boxes but 1 targets"):
        parse_xsb("######\n#@$$.#\n######")


def test_box_on_target_counts_for_both():
    with pytest.raises(LevelError, match="1 boxes but 2 targets"):
        parse_xsb("#####\n#@*.#\n#####")


@pytest.mark.parametrize("text, message", [
    ("#####\n#$.#\n#####", "exactly one player"),
    ("######\n#@@$.#\n######", "exactly one player"),
    ("#####\n#@$.x#\n#####", "unknown symbol"),
    ("#####\n#@$. \n#####", "leaks"),
])
def test_malformed(text, message):
    with pytest.raises(LevelError, match=message):
        parse_xsb(text)


def test_ragged_rows_padded_with_wall():
    lv = parse_xsb("####\n#@$.#\n#####")
    assert lv.initial_boxes == {(2, 1)}
    assert (4, 0) in lv.walls


def test_unreachable_squares_become_wall():
    # the right-hand pocket is sealed off, so its box and target vanish together
    lv = parse_xsb("#########\n#@$.#*  #\n#########")
    assert lv.n_boxes == 1
    assert (5, 1) not in lv.floor


def test_symbols_round_trip():
    lv = parse_xsb("#####\n#+$ #\n# * #\n#####")
    assert lv.targets == {(1, 1), (2, 2)}
    assert lv.initial_boxes == {(2, 1), (2, 2)}
    out = serialize_xsb(lv)
    assert out.splitlines()[1] == "#+$ #"
    assert out.splitlines()[2] == "# * #"
    assert parse_xsb(out) == lv


@given(small_levels())
@settings(max_examples=60, deadline=None)
def test_round_trip_fixed_point(lv):
    once = parse_xsb(serialize_xsb(lv))
    assert once == lv
    assert parse_xsb(serialize_xsb(once)) == once


@given(small_levels())
@settings(max_examples=40, deadline=None)
def test_wall_normalisation_idempotent(lv):
    text = serialize_xsb(lv)
    assert serialize_xsb(parse_xsb(text)) == text


def test_collection_two_levels():
    text = CORRIDOR + "\n\n" + "######\n#@$ .#\n######\n"
    assert len(parse_collection(text)) == 2


def test_collection_names_and_comments():
    text = "; first\n" + CORRIDOR + "\n\n'Quoted'\n" + CORRIDOR + "\n"
    a, b = parse_collection(text)
    assert a.name == "first"
    assert b.name == "Quoted"


def test_collection_error_names_index():
    text = CORRIDOR + "\n\n#####\n#@$$#\n#####\n"
    with pytest.raises(CollectionError) as info:
        parse_collection(text)
    assert info.value.index == 1


@given(small_levels())
@settings(max_examples=20, deadline=None)
def test_collection_serialize_length(lv):
    levels = [lv, level(CORRIDOR), lv]
    assert parse_collection(serialize_collection(levels)) == levels


def test_microban_count_and_round_trip(micro):
    assert len(micro) == 155
    assert all(parse_xsb(serialize_xsb(lv)) == lv for lv in micro)


def test_xsokoban_count_and_round_trip(xsok):
    assert len(xsok) == 90
    assert all(parse_xsb(serialize_xsb(lv)) == lv for lv in xsok)


def test_load_collection_from_disk(tmp_path, micro):
    path = tmp_path / "m.xsb"
    path.write_text(serialize_collection(micro[:5]))
    assert load_collection(path) == micro[:5]


def test_level_invariants_hold(micro):
    for lv in micro:
        assert len(lv.initial_boxes) == len(lv.targets)
        assert lv.initial_player in lv.floor
        assert lv.initial_boxes <= lv.floor
        border = {(x, y) for x in range(lv.width) for y in range(lv.height)
                  if x in (0, lv.width - 1) or y in (0, lv.height - 1)}
        assert not border & lv.floor
