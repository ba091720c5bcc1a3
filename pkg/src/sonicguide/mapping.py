"""Displacement-to-sound-parameter mapping and its exact inverse.

This module owns every mapping constant.  The forward map turns a
target-relative displacement into a frame of perceptual control values
(chroma velocity, beats, roughness, brightness, fullness, zone noise);
the inverse recovers the displacement from such a frame.

Axis conventions:
    x > 0  falling pitch, x < 0 rising pitch, speed grows with |x|
    y > 0  roughness intensity, y < 0 beat speed
    z > 0  brightness, z < 0 fullness
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MappingError",
    "DisplacementVector",
    "SonificationParams",
    "MappingConfig",
    "NEUTRAL_PARAMS",
    "map_position",
    "invert_params",
    "in_target_zone",
]


class MappingError(ValueError):
    """A vector or parameter frame violates its invariants."""


def _quantize(value: float) -> float:
    """Round a coordinate to float32 precision (24-bit mantissa).

    Coordinates come from pointing devices and sensors, which never carry
    more than single precision.  Keeping them on the float32 grid makes
    every scale factor in the mapping survive a multiply/divide round
    trip bit-exactly, which full-precision doubles cannot do (the x1.5
    chroma scaling collides adjacent doubles).
    """
    return float(np.float32(value))


def _clamp(value: float, lo: float = -1.0, hi: float = 1.0) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True)
class DisplacementVector:
    """Target-relative position, as dimensionless fractions of the
    workspace half-extent.  (0, 0, 0) is exact target coincidence."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise MappingError(f"non-finite displacement {name}={value!r}")
            object.__setattr__(self, name, _quantize(value))

    def norm(self) -> float:
        # float32 components square exactly in double precision
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def clamped(self) -> "DisplacementVector":
        return DisplacementVector(_clamp(self.x), _clamp(self.y), _clamp(self.z))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class SonificationParams:
    """Perceptual control frame produced by :func:`map_position`.

    The two y-axis qualities (beats, roughness) and the two z-axis
    qualities (brightness, fullness) are mutually exclusive: at most one
    of each pair is nonzero in a valid frame.
    """

    chroma_velocity: float = 0.0  # octaves/second, signed
    beat_rate: float = 0.0        # Hz, >= 0
    beat_depth: float = 0.0       # [0, 1]
    roughness_depth: float = 0.0  # [0, 1]
    brightness: float = 0.0       # [0, 1]
    fullness: float = 0.0         # [0, 1]
    noise_gain: float = 0.0       # linear amplitude, [0, 1]

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise MappingError(f"non-finite parameter {name}={value!r}")
        if self.beat_rate < 0.0:
            raise MappingError(f"beat_rate must be >= 0, got {self.beat_rate}")
        for name in ("beat_depth", "roughness_depth", "brightness", "fullness", "noise_gain"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise MappingError(f"{name} out of [0, 1]: {value}")
        if self.beat_rate > 0.0 and self.roughness_depth > 0.0:
            raise MappingError("beats and roughness are mutually exclusive")
        if self.brightness > 0.0 and self.fullness > 0.0:
            raise MappingError("brightness and fullness are mutually exclusive")

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.chroma_velocity,
                self.beat_rate,
                self.beat_depth,
                self.roughness_depth,
                self.brightness,
                self.fullness,
                self.noise_gain,
            ],
            dtype=np.float64,
        )


NEUTRAL_PARAMS = SonificationParams()


@dataclass(frozen=True)
class MappingConfig:
    """All tunable constants of the displacement-to-sound mapping."""

    v_max: float = 1.5                     # oct/s at |x| = 1
    beat_rate_max: float = 8.0             # Hz at y = -1
    beat_depth_ramp: float = 0.05          # |y| over which beat depth ramps to 1
    roughness_rate: float = 70.0           # Hz, fixed roughness modulation rate
    roughness_depth_max: float = 0.9       # modulation depth at y = +1
    brightness_octave_shift_max: float = 2.0   # envelope shift at z = +1
    fullness_bandwidth_max: float = 2.5        # extra half-width at z = -1
    target_radius: float = 0.05            # L2 radius of the noise zone
    hysteresis: float = 0.02               # re-arm excursion for crossing cues
    noise_gain_in_zone: float = 0.03       # linear gain of the zone noise bed

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not (math.isfinite(value) and value > 0.0):
                raise MappingError(f"{name} must be finite and positive, got {value!r}")
        if self.hysteresis >= self.target_radius:
            raise MappingError(
                f"hysteresis ({self.hysteresis}) must be smaller than "
                f"target_radius ({self.target_radius})"
            )


def in_target_zone(d: DisplacementVector, cfg: MappingConfig) -> bool:
    """True iff ``d`` lies inside the noise zone (boundary inclusive).

    The radius is compared on the same float32 grid the coordinates live
    on, so a vector constructed exactly on the boundary tests inside.
    """
    return d.norm() <= _quantize(cfg.target_radius)


def map_position(d: DisplacementVector, cfg: MappingConfig) -> SonificationParams:
    """Translate a displacement into a sonification parameter frame.

    Magnitudes scale linearly on every axis; coordinates are clamped to
    [-1, 1] so out-of-workspace positions saturate at maximum urgency
    instead of failing.  The map is continuous everywhere, including
    across the y = 0 and z = 0 seams.
    """
    x = _clamp(d.x)
    y = _clamp(d.y)
    z = _clamp(d.z)

    chroma_velocity = -cfg.v_max * x

    if y > 0.0:
        beat_rate = 0.0
        beat_depth = 0.0
        roughness_depth = cfg.roughness_depth_max * y
    elif y < 0.0:
        beat_rate = cfg.beat_rate_max * -y
        beat_depth = min(1.0, -y / cfg.beat_depth_ramp)
        roughness_depth = 0.0
    else:
        beat_rate = beat_depth = roughness_depth = 0.0

    if z > 0.0:
        brightness, fullness = z, 0.0
    elif z < 0.0:
        brightness, fullness = 0.0, -z
    else:
        brightness = fullness = 0.0

    noise_gain = cfg.noise_gain_in_zone if in_target_zone(d, cfg) else 0.0

    return SonificationParams(
        chroma_velocity=chroma_velocity,
        beat_rate=beat_rate,
        beat_depth=beat_depth,
        roughness_depth=roughness_depth,
        brightness=brightness,
        fullness=fullness,
        noise_gain=noise_gain,
    )


def invert_params(p: SonificationParams, cfg: MappingConfig) -> DisplacementVector:
    """Exact algebraic inverse of :func:`map_position` on [-1, 1]^3.

    ``noise_gain`` is ignored.  Inside the beat-depth ramp the distance
    is recovered from the beat rate alone (the rate is injective there,
    the depth is not once it saturates).
    """
    x = -(p.chroma_velocity / cfg.v_max)

    if p.roughness_depth > 0.0:
        y = p.roughness_depth / cfg.roughness_depth_max
    elif p.beat_rate > 0.0:
        y = -(p.beat_rate / cfg.beat_rate_max)
    else:
        y = 0.0

    if p.brightness > 0.0:
        z = p.brightness
    elif p.fullness > 0.0:
        z = -p.fullness
    else:
        z = 0.0

    return DisplacementVector(x, y, z)
