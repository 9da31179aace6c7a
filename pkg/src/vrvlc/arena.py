"""VR arena scene: room, ceiling transmitters, users and head-orientation input."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .channel import DEFAULT_DIVERGENCE, DEFAULT_TX_POWER, Transmitter
from .headset import Orientation, format_number

DEFAULT_TX_POSITIONS = (
    (1.25, 1.25, 3.0),
    (1.25, 3.75, 3.0),
    (3.75, 1.25, 3.0),
    (3.75, 3.75, 3.0),
)
DEFAULT_DIMENSIONS = (5.0, 5.0, 3.0)
DEFAULT_USER_HEIGHT = 1.33


class TraceError(ValueError):
    """Malformed or inconsistent orientation trace."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Arena:
    dimensions: tuple[float, float, float]
    transmitters: tuple[Transmitter, ...]
    user_height: float = DEFAULT_USER_HEIGHT

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(float(v) for v in self.dimensions))
        object.__setattr__(self, "transmitters", tuple(self.transmitters))
        if len(self.dimensions) != 3 or min(self.dimensions) <= 0:
            raise ValueError("arena dimensions must be three positive lengths")
        if not self.transmitters:
            raise ValueError("arena needs at least one transmitter")
        for k, tx in enumerate(self.transmitters):
            if not self.contains(tx.position):
                raise ValueError(f"transmitter {k} at {tx.position} lies outside the arena")
        if not 0 < self.user_height < self.dimensions[2]:
            raise ValueError("user_height must lie strictly between floor and ceiling")

    def contains(self, position: Sequence[float]) -> bool:
        return all(0.0 <= p <= d for p, d in zip(position, self.dimensions))

    def tx_positions(self) -> np.ndarray:
        return np.array([tx.position for tx in self.transmitters], dtype=float)


@dataclass(frozen=True)
class UserState:
    position: tuple[float, float, float]
    orientation: Orientation
    assigned_tx: int


@dataclass(frozen=True)
class OrientationTrace:
    times: tuple[float, ...]
    orientations: tuple[Orientation, ...]

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.orientations))

    def as_array(self) -> np.ndarray:
        if not self.orientations:
            return np.zeros((0, 3))
        return np.array([o.as_array() for o in self.orientations])


def default_arena(
    power_t: float = DEFAULT_TX_POWER, divergence: float = DEFAULT_DIVERGENCE
) -> Arena:
    txs = tuple(Transmitter(p, power_t, divergence) for p in DEFAULT_TX_POSITIONS)
    return Arena(DEFAULT_DIMENSIONS, txs, DEFAULT_USER_HEIGHT)


def assign_transmitter(position: Sequence[float], arena: Arena) -> int:
    """Index of the nearest transmitter; lowest index wins ties."""
    if not arena.contains(position):
        raise ValueError(f"position {tuple(position)} lies outside the arena")
    d2 = np.sum((arena.tx_positions() - np.asarray(position, float)) ** 2, axis=1)
    return int(np.argmin(d2))


def make_user(position: Sequence[float], orientation: Orientation, arena: Arena) -> UserState:
    return UserState(tuple(float(v) for v in position), orientation, assign_transmitter(position, arena))


def user_grid(arena: Arena, per_side: int, margin: float = 0.0) -> list[tuple[float, float, float]]:
    """per_side x per_side floor grid at user height, wall to wall by default.

    A single-point grid degenerates to the arena center.
    """
    if per_side < 1:
        raise ValueError("per_side must be at least 1")
    w, l, _ = arena.dimensions
    if not 0 <= margin < min(w, l) / 2:
        raise ValueError("margin must be non-negative and smaller than half the floor")
    h = arena.user_height
    if per_side == 1:
        return [(w / 2, l / 2, h)]
    xs = np.linspace(margin, w - margin, per_side)
    ys = np.linspace(margin, l - margin, per_side)
    return [(float(x), float(y), h) for x in xs for y in ys]


def _axis_values(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def sample_orientations(
    yaw: tuple[float, float],
    pitch: tuple[float, float],
    roll: tuple[float, float],
    *,
    step: float | tuple[float, float, float] | None = None,
    count: int | None = None,
    mode: str = "grid",
    seed: int | None = None,
) -> np.ndarray:
    """Orientation samples as a (K, 3) array of (yaw, pitch, roll) degrees.

    Grid mode walks yaw slowest and roll fastest. Random mode draws `count`
    independent uniform triples from a generator seeded with `seed`.
    """
    ranges = [yaw, pitch, roll]
    for lo, hi in ranges:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"invalid angle range [{lo}, {hi}]")
    if mode == "grid":
        if step is None:
            raise ValueError("grid mode needs a step")
        steps = (step,) * 3 if np.isscalar(step) else tuple(step)
        if any(s <= 0 for s in steps):
            raise ValueError("step must be positive")
        axes = [_axis_values(lo, hi, s) for (lo, hi), s in zip(ranges, steps)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)
    if mode == "random":
        if count is None or count <= 0:
            raise ValueError("random mode needs a positive count")
        rng = np.random.default_rng(seed)
        lo = np.array([r[0] for r in ranges], dtype=float)
        hi = np.array([r[1] for r in ranges], dtype=float)
        return rng.uniform(lo, hi, size=(count, 3))
    raise ValueError(f"unknown sampling mode {mode!r}")


def load_orientation_trace(lines: Iterable[str]) -> OrientationTrace:
    """Parse `time_s,yaw_deg,pitch_deg,roll_deg` lines; `#` starts a comment line."""
    times: list[float] = []
    orients: list[Orientation] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise TraceError(f"expected 4 fields, found {len(parts)}", lineno)
        try:
            t, y, p, r = (float(v) for v in parts)
        except ValueError:
            raise TraceError(f"non-numeric field in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in (t, y, p, r)):
            raise TraceError("non-finite value", lineno)
        if times and t <= times[-1]:
            raise TraceError(f"time {t} does not increase (previous {times[-1]})", lineno)
        times.append(t)
        orients.append(Orientation(y, p, r))
    return OrientationTrace(tuple(times), tuple(orients))


def write_orientation_trace(trace: OrientationTrace, out: TextIO) -> None:
    for t, o in trace:
        out.write(",".join(format_number(v) for v in (t, o.yaw, o.pitch, o.roll)) + "\n")
