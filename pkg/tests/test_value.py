import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sokohint.value import FeatureMismatch, Weights, evaluate, load_weights, save_weights, td_update

NAMES = ("Targets", "Distance", "Gamma1")
unit = st.floats(0.0, 1.0, allow_nan=False)
real = st.floats(-5.0, 5.0, allow_nan=False)


def fv(values):
    return dict(zip(NAMES, values))


def test_evaluate_basics():
    assert evaluate(Weights.zeros(NAMES), fv([0.3, 0.2, 0.9])) == 0.0
    assert evaluate(Weights(("a",), [0.5]), {"a": 1.0}) == 0.5


def test_evaluate_name_mismatch():
    with pytest.raises(FeatureMismatch):
        evaluate(Weights.zeros(NAMES), {"Targets": 1.0})


def test_evaluate_matches_naive_sum():
    rng = np.random.default_rng(0)
    for _ in range(100):
        w = Weights(NAMES, rng.normal(size=3))
        f = fv(rng.random(3))
        naive = 0.0
        for name in NAMES:
            naive += w[name] * f[name]
        assert evaluate(w, f) == pytest.approx(naive, abs=1e-14)


@given(st.lists(real, min_size=3, max_size=3), st.lists(unit, min_size=3, max_size=3),
       st.lists(unit, min_size=3, max_size=3), real, real)
def test_evaluate_linear(w, f1, f2, a, b):
    weights = Weights(NAMES, w)
    combo = fv([a * x + b * y for x, y in zip(f1, f2)])
    expected = a * evaluate(weights, fv(f1)) + b * evaluate(weights, fv(f2))
    assert evaluate(weights, combo) == pytest.approx(expected, abs=1e-9)


def test_td_single_step_arithmetic():
    out = td_update(Weights(("f",), [0.5]), {"f": 1.0}, target=1.0, alpha=0.01)
    assert out["f"] == pytest.approx(0.505, abs=1e-15)


def test_td_fixed_point_and_zero_alpha():
    w = Weights(NAMES, [0.2, -0.4, 0.1])
    f = fv([0.5, 0.25, 1.0])
    same = td_update(w, f, evaluate(w, f), 0.3)
    np.testing.assert_array_equal(same.values, w.values)
    np.testing.assert_array_equal(td_update(w, f, 7.0, 0.0).values, w.values)


def test_td_does_not_mutate_input():
    w = Weights(NAMES, [0.2, -0.4, 0.1])
    td_update(w, fv([1, 1, 1]), 3.0, 0.1)
    assert w.values.tolist() == [0.2, -0.4, 0.1]


def test_td_negative_alpha_rejected():
    with pytest.raises(ValueError):
        td_update(Weights.zeros(NAMES), fv([1, 1, 1]), 1.0, -0.1)


@given(st.lists(real, min_size=3, max_size=3), st.lists(unit, min_size=3, max_size=3),
       real, st.floats(0.0, 0.5))
def test_td_change_closed_form(w, f, target, alpha):
    weights = Weights(NAMES, w)
    before = evaluate(weights, fv(f))
    after = evaluate(td_update(weights, fv(f), target, alpha), fv(f))
    expected = alpha * (target - before) * sum(x * x for x in f)
    assert after - before == pytest.approx(expected, abs=1e-12)


def test_td_converges():
    w = Weights(NAMES, [0.0, 0.0, 0.0])
    f = fv([0.4, 0.8, 0.2])
    for _ in range(5000):
        w = td_update(w, f, 0.7, 0.5)
    assert abs(evaluate(w, f) - 0.7) < 1e-6


def test_save_load_round_trip(tmp_path):
    w = Weights(NAMES, [0.1, -1 / 3, math.pi], gamma=0.95, iterations=100)
    path = tmp_path / "w.weights"
    save_weights(w, path)
    back = load_weights(path)
    assert back.names == w.names and back.gamma == 0.95 and back.iterations == 100
    assert back.values.tobytes() == w.values.tobytes()
    text = path.read_text().splitlines()
    assert text[:3] == ["gamma 0.95", "iterations 100", "features Targets,Distance,Gamma1"]
    assert text[4] == f"Distance\t{-1 / 3!r}"


def test_load_mismatch(tmp_path):
    path = tmp_path / "w.weights"
    save_weights(Weights.zeros(NAMES), path)
    with pytest.raises(FeatureMismatch):
        load_weights(path, expected=("Targets", "Distance"))


def test_weights_validation():
    with pytest.raises(FeatureMismatch):
        Weights(NAMES, [1.0])
    with pytest.raises(ValueError):
        Weights(("a",), [math.inf])
