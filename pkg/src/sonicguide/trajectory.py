"""Timestamped trajectories: CSV parsing, serialization, resampling,
and JSON-lines session logs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Literal

import numpy as np

from .mapping import DisplacementVector, MappingError

__all__ = [
    "TrajectoryError",
    "Trajectory",
    "parse_trajectory",
    "serialize_trajectory",
    "load_trajectory",
    "resample",
    "SessionLogWriter",
    "read_session_log",
]

_HEADER = ("t", "x", "y", "z")

Mode = Literal["2d", "3d"]


class TrajectoryError(ValueError):
    """Malformed trajectory data."""


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[tuple[float, DisplacementVector], ...]
    mode: Mode = "3d"

    def __post_init__(self) -> None:
        if len(self.samples) < 1:
            raise TrajectoryError("trajectory needs at least one sample")
        times = [t for t, _ in self.samples]
        for a, b in zip(times, times[1:]):
            if b <= a:
                raise TrajectoryError(f"timestamps must be strictly increasing ({a} -> {b})")
        if self.mode == "2d" and any(d.z != 0.0 for _, d in self.samples):
            raise TrajectoryError("2d trajectory has nonzero z")

    @property
    def duration(self) -> float:
        return self.samples[-1][0] - self.samples[0][0]

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def points(self) -> np.ndarray:
        return np.array([[d.x, d.y, d.z] for _, d in self.samples])

    def at(self, t: float) -> DisplacementVector:
        """Linear interpolation, endpoints held."""
        times = self.times()
        pts = self.points()
        return DisplacementVector(
            float(np.interp(t, times, pts[:, 0])),
            float(np.interp(t, times, pts[:, 1])),
            float(np.interp(t, times, pts[:, 2])),
        )

    def before(self, t: float, strict: bool = False) -> DisplacementVector:
        """Latest sample at or before t (strictly before with ``strict``);
        first sample if t precedes all."""
        times = self.times()
        side = "left" if strict else "right"
        idx = int(np.searchsorted(times, t, side=side)) - 1
        return self.samples[max(idx, 0)][1]


def parse_trajectory(text: str, mode: Mode | None = None) -> Trajectory:
    """Parse CSV with header ``t,x,y,z``; ``#`` lines are comments.

    Coordinates outside [-1, 1] are accepted (they clamp downstream).
    Errors name the offending 1-based line.
    """
    samples: list[tuple[float, DisplacementVector]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if tuple(col.strip() for col in line.split(",")) != _HEADER:
                raise TrajectoryError(f"line {lineno}: expected header 't,x,y,z', got {line!r}")
            header_seen = True
            continue
        cols = line.split(",")
        if len(cols) != 4:
            raise TrajectoryError(f"line {lineno}: expected 4 columns, got {len(cols)}")
        try:
            t, x, y, z = (float(c) for c in cols)
        except ValueError as exc:
            raise TrajectoryError(f"line {lineno}: {exc}") from None
        try:
            d = DisplacementVector(x, y, z)
        except MappingError as exc:
            raise TrajectoryError(f"line {lineno}: {exc}") from None
        if samples and t <= samples[-1][0]:
            raise TrajectoryError(
                f"line {lineno}: timestamp {t} not after previous {samples[-1][0]}"
            )
        samples.append((t, d))
    if not header_seen:
        raise TrajectoryError("missing header 't,x,y,z'")
    if not samples:
        raise TrajectoryError("trajectory has no samples")
    if mode is None:
        mode = "2d" if all(d.z == 0.0 for _, d in samples) else "3d"
    return Trajectory(tuple(samples), mode)


def serialize_trajectory(traj: Trajectory) -> str:
    lines = ["t,x,y,z"]
    for t, d in traj.samples:
        lines.append(f"{t!r},{d.x!r},{d.y!r},{d.z!r}")
    return "\n".join(lines) + "\n"


def load_trajectory(path: str | Path, mode: Mode | None = None) -> Trajectory:
    return parse_trajectory(Path(path).read_text(), mode)


def resample(traj: Trajectory, rate: float) -> list[DisplacementVector]:
    """Sample the trajectory on a uniform grid by linear interpolation.

    Output has ceil(duration * rate) + 1 points starting at the first
    timestamp; endpoints are held beyond the data.
    """
    if rate <= 0.0:
        raise TrajectoryError(f"rate must be positive, got {rate}")
    t0 = traj.samples[0][0]
    count = int(np.ceil(traj.duration * rate)) + 1
    times = t0 + np.arange(count) / rate
    src_t = traj.times()
    pts = traj.points()
    xs = np.interp(times, src_t, pts[:, 0])
    ys = np.interp(times, src_t, pts[:, 1])
    zs = np.interp(times, src_t, pts[:, 2])
    return [DisplacementVector(float(x), float(y), float(z)) for x, y, z in zip(xs, ys, zs)]


# ---------------------------------------------------------------------------
# session logs: one JSON record per line, streamed appends
# ---------------------------------------------------------------------------

class SessionLogWriter:
    """Appends session records ({"pos"|"event"|"trial_start"|"trial_end"})
    as JSON lines; safe to tail while a session runs."""

    def __init__(self, sink: IO[str] | str | Path):
        if isinstance(sink, (str, Path)):
            self._fh: IO[str] = open(sink, "a", encoding="utf-8")
            self._owns = True
        else:
            self._fh = sink
            self._owns = False

    def write(self, record: dict) -> None:
        if "type" not in record:
            raise ValueError("session log records need a 'type' field")
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._owns:
            self._fh.close()

    def __enter__(self) -> "SessionLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_session_log(source: str | Path | Iterable[str]) -> list[dict]:
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text().splitlines()
    else:
        lines = source
    records = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TrajectoryError(f"log line {lineno}: {exc}") from None
    return records
