"""Time grids, survival curves, and their CSV/JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = ["TimeGrid", "SurvivalCurve", "curve_to_csv", "curve_from_csv", "curves_to_json"]

_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, non-negative evaluation times."""

    points: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("time grid must be non-empty")
        if self.points[0] < 0.0:
            raise ValueError("time grid must start at t >= 0")
        for a, b in zip(self.points, self.points[1:]):
            if not b > a:
                raise ValueError(f"time grid must be strictly increasing ({a} -> {b})")

    @classmethod
    def from_points(cls, points: Iterable[float]) -> "TimeGrid":
        return cls(tuple(float(p) for p in points))

    @classmethod
    def regular(cls, start: float, stop: float, step: float) -> "TimeGrid":
        """Inclusive arithmetic grid start, start+step, ..., stop."""
        if step <= 0.0:
            raise ValueError("step must be positive")
        if stop < start:
            raise ValueError("stop must be >= start")
        n = int(math.floor((stop - start) / step + 1e-9))
        return cls.from_points(start + k * step for k in range(n + 1))

    @classmethod
    def parse(cls, spec: str) -> "TimeGrid":
        """Parse a ``start:stop:step`` grid specification."""
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be start:stop:step, got {spec!r}")
        return cls.regular(float(parts[0]), float(parts[1]), float(parts[2]))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class SurvivalCurve:
    """A survival function evaluated on a grid: values in [0, 1], non-increasing."""

    grid: TimeGrid
    values: tuple[float, ...]
    label: str
    model_tag: str

    def __post_init__(self):
        if len(self.values) != len(self.grid):
            raise ValueError("values and grid length mismatch")
        for v in self.values:
            if not (-_MONOTONE_SLACK <= v <= 1.0 + _MONOTONE_SLACK):
                raise ValueError(f"survival value outside [0, 1]: {v}")
        for a, b in zip(self.values, self.values[1:]):
            if b > a + _MONOTONE_SLACK:
                raise ValueError(f"survival curve must be non-increasing ({a} -> {b})")

    @classmethod
    def evaluate(cls, fn, grid: TimeGrid, label: str, model_tag: str) -> "SurvivalCurve":
        return cls(grid, tuple(fn(t) for t in grid), label, model_tag)


def curve_to_csv(times: Sequence[float], values: Sequence[float],
                 std_err: Sequence[float] | None = None) -> str:
    """Render one curve as CSV (``t,value`` plus ``stderr`` for Monte Carlo output).

    Floats are written with repr so a written-then-parsed curve is
    bit-identical to the original.
    """
    lines = ["t,value,stderr" if std_err is not None else "t,value"]
    if std_err is not None:
        for t, v, s in zip(times, values, std_err):
            lines.append(f"{float(t)!r},{float(v)!r},{float(s)!r}")
    else:
        for t, v in zip(times, values):
            lines.append(f"{float(t)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> dict[str, tuple[float, ...]]:
    """Parse CSV produced by :func:`curve_to_csv`; returns column -> values."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    cols: dict[str, list[float]] = {h: [] for h in header}
    for ln in lines[1:]:
        for h, field in zip(header, ln.split(",")):
            cols[h].append(float(field))
    return {h: tuple(v) for h, v in cols.items()}


def curves_to_json(model: str, parameters: dict, curves: list[dict], version: str) -> str:
    """JSON document mirroring the CSV schema with a metadata block."""
    doc = {
        "metadata": {"model": model, "parameters": parameters, "version": version},
        "curves": curves,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
