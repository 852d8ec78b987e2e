"""Linear value function V(s) = w . f(s) and its TD(0) update."""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import DEFAULT_GAMMA


class FeatureMismatch(ValueError):
    pass


@dataclass
class Weights:
    names: tuple[str, ...]
    values: np.ndarray
    gamma: float = DEFAULT_GAMMA
    iterations: int = 0

    def __post_init__(self) -> None:
        self.names = tuple(self.names)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.names),):
            raise FeatureMismatch("one weight per feature name required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("weights must be finite")

    @classmethod
    def zeros(cls, names: Sequence[str], gamma: float = DEFAULT_GAMMA) -> Weights:
        return cls(tuple(names), np.zeros(len(names)), gamma)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def copy(self) -> Weights:
        return Weights(self.names, self.values.copy(), self.gamma, self.iterations)

    def vector(self, fv: Mapping[str, float]) -> np.ndarray:
        """Feature values aligned with ``names``."""
        if set(fv) != set(self.names):
            raise FeatureMismatch(f"features {sorted(fv)} vs weights {sorted(self.names)}")
        return np.array([fv[name] for name in self.names])


def evaluate(weights: Weights, fv: Mapping[str, float]) -> float:
    return float(weights.values @ weights.vector(fv))


def td_update(weights: Weights, fv: Mapping[str, float], target: float, alpha: float) -> Weights:
    """One TD(0) step: w <- w + alpha * (target - w.f) * f.

    ``target`` is r + gamma * V(s'), with V = 0 past a terminal state.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    f = weights.vector(fv)
    out = weights.copy()
    out.values += alpha * (target - weights.values @ f) * f
    return out


def save_weights(weights: Weights, destination: str | Path) -> None:
    lines = [
        f"gamma {weights.gamma!r}",
        f"iterations {weights.iterations}",
        f"features {','.join(weights.names)}",
    ]
    lines += [f"{name}\t{value!r}" for name, value in weights.as_dict().items()]
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_weights(source: str | Path, expected: Sequence[str] | None = None) -> Weights:
    """Read a weights file; ``expected`` names the feature set the run needs."""
    header: dict[str, str] = {}
    values: dict[str, float] = {}
    for line in Path(source).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if "\t" in line:
            name, value = line.split("\t", 1)
            values[name] = float(value)
        else:
            key, _, rest = line.partition(" ")
            header[key] = rest
    try:
        names = tuple(n for n in header["features"].split(",") if n)
        gamma = float(header["gamma"])
        iterations = int(header["iterations"])
    except KeyError as exc:
        raise ValueError(f"{source}: missing header {exc}") from None
    if set(values) != set(names):
        raise FeatureMismatch(f"{source}: weight lines do not match the features header")
    if expected is not None and set(expected) != set(names):
        raise FeatureMismatch(
            f"{source}: file has features {list(names)}, run needs {list(expected)}"
        )
    if not all(math.isfinite(v) for v in values.values()):
        raise ValueError(f"{source}: non-finite weight")
    return Weights(names, np.array([values[n] for n in names]), gamma, iterations)
