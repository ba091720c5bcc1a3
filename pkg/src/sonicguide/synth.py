"""Block-based synthesis of the monophonic guidance tone.

A Shepard-style bank of octave-spaced partials under a raised-cosine
log-frequency envelope cycles in chroma at the commanded velocity;
beats or roughness amplitude-modulate the sum; brightness shifts the
envelope up, fullness widens it; a pink-noise bed marks the target
zone.  All control values move through one-pole smoothers so parameter
steps never click.

The render path works entirely in preallocated scratch buffers owned by
the state; after :func:`init_synth` a block render performs no Python-
level allocation beyond constant-size numpy bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .mapping import MappingConfig, SonificationParams

__all__ = [
    "SynthError",
    "SynthConfig",
    "SynthState",
    "AudioBlock",
    "init_synth",
    "render_block",
    "render_into",
]

_DEFAULT_MAPPING = MappingConfig()

# smoothed-register indices, one per continuous SonificationParams field
_R_CHROMA, _R_BRATE, _R_BDEPTH, _R_RDEPTH, _R_BRIGHT, _R_FULL, _R_NOISE = range(7)

_NOISE_LOOP_LEN = 1 << 18  # ~5.5 s at 48 kHz
_CLIP_KNEE = 0.95


class SynthError(ValueError):
    """Invalid synthesis configuration or stream input."""


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: int = 48000
    block_size: int = 256
    partial_count: int = 7
    base_frequency: float = 65.406      # pitch class C
    envelope_center: float = 523.25     # Hz
    envelope_width: float = 2.5         # octaves, half-width of the window
    smoothing_time: float = 0.030       # seconds, one-pole time constant
    master_gain: float = 0.5
    noise_seed: int = 0                 # fixed per session for reproducibility

    def __post_init__(self) -> None:
        if self.sample_rate < 8000:
            raise SynthError(f"sample_rate must be >= 8000, got {self.sample_rate}")
        b = self.block_size
        if b < 32 or b > 4096 or (b & (b - 1)) != 0:
            raise SynthError(f"block_size must be a power of two in [32, 4096], got {b}")
        if self.partial_count < 3:
            raise SynthError(f"partial_count must be >= 3, got {self.partial_count}")
        for name in ("base_frequency", "envelope_center", "envelope_width",
                     "smoothing_time", "master_gain"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise SynthError(f"{name} must be finite and positive, got {value!r}")


@dataclass
class AudioBlock:
    """Mono audio, float32 samples in [-1, 1]."""

    sample_rate: int
    frames: np.ndarray

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=np.float32)

    @property
    def duration(self) -> float:
        return len(self.frames) / self.sample_rate


@dataclass
class SynthState:
    """Mutable render-path state.  Single-owner: exactly one render
    context may mutate it; hand the whole object between threads, never
    share it."""

    chroma_phase: float                 # fraction of octave in [0, 1)
    chroma_span_phase: float            # same phase modulo the bank span
    partial_phases: np.ndarray          # (P,), fraction of cycle in [0, 1)
    beat_phase: float
    roughness_phase: float
    smoothed: np.ndarray                # (7,) one-pole register values
    noise_loop: np.ndarray              # unit-RMS pink noise, looped
    noise_pos: int
    scratch: dict = field(repr=False, default_factory=dict)


@lru_cache(maxsize=4)
def _pink_noise_loop(n: int, seed: int) -> np.ndarray:
    """Seamless pink-noise loop with a -3 dB/octave power slope,
    generated by shaping a white spectrum by 1/sqrt(f).

    Cached across states (generation costs a long FFT); the render path
    only ever reads it.
    """
    rng = np.random.default_rng(seed)
    bins = n // 2 + 1
    spectrum = rng.standard_normal(bins) + 1j * rng.standard_normal(bins)
    f = np.arange(bins, dtype=np.float64)
    f[0] = 1.0
    scale = 1.0 / np.sqrt(f)
    scale[0] = 0.0                      # no DC
    scale[1:4] = scale[4]               # flatten the lowest bins (sub-audio)
    noise = np.fft.irfft(spectrum * scale, n)
    return noise / np.sqrt(np.mean(noise**2))


def init_synth(cfg: SynthConfig) -> SynthState:
    """Fresh state: zero phases, neutral smoothed registers, seeded noise."""
    p, n = cfg.partial_count, cfg.block_size
    sr = float(cfg.sample_rate)
    alpha = math.exp(-1.0 / (cfg.smoothing_time * sr))
    scratch = {
        "decay": alpha ** np.arange(1, n + 1, dtype=np.float64),
        "ramp": np.arange(1, n + 1, dtype=np.float64),
        "slots": np.arange(p, dtype=np.float64),
        "paths": np.empty((7, n)),
        "targets": np.empty(7),
        "phi": np.empty(n),
        "exps": np.empty((p, n)),
        "freq": np.empty((p, n)),
        "pphase": np.empty((p, n)),
        "amp": np.empty((p, n)),
        "sines": np.empty((p, n)),
        "ampsum": np.empty(n),
        "tone": np.empty(n),
        "bphase": np.empty(n),
        "rphase": np.empty(n),
        "mod": np.empty(n),
        "mix": np.empty(n),
        "noise": np.empty(n),
        "center": np.empty(n),
        "width": np.empty(n),
    }
    return SynthState(
        chroma_phase=0.0,
        chroma_span_phase=0.0,
        partial_phases=np.zeros(p),
        beat_phase=0.0,
        roughness_phase=0.0,
        smoothed=np.zeros(7),
        noise_loop=_pink_noise_loop(_NOISE_LOOP_LEN, cfg.noise_seed),
        noise_pos=0,
        scratch=scratch,
    )


def _soft_clip(buf: np.ndarray) -> None:
    """In place: identity below the knee, tanh-shaped above it, so the
    output never leaves [-1, 1] and the knee is slope-continuous."""
    a = np.abs(buf)
    over = a > _CLIP_KNEE
    if over.any():
        margin = 1.0 - _CLIP_KNEE
        buf[over] = np.sign(buf[over]) * (
            _CLIP_KNEE + margin * np.tanh((a[over] - _CLIP_KNEE) / margin)
        )


def render_into(
    state: SynthState,
    target_params: SonificationParams,
    cfg: SynthConfig,
    out: np.ndarray,
    mapping_cfg: MappingConfig | None = None,
) -> None:
    """Render one block into ``out`` (float32, length block_size).

    Deterministic: the same state, params, config and seed produce a
    bit-identical block.  Must not fail at render time; all inputs are
    validated at construction.
    """
    m = mapping_cfg if mapping_cfg is not None else _DEFAULT_MAPPING
    s = state.scratch
    n = cfg.block_size
    inv_sr = 1.0 / cfg.sample_rate

    # 1. one-pole smoothing toward the commanded frame, exact per sample:
    #    reg[i] = target + (reg0 - target) * alpha^(i+1)
    targets = s["targets"]
    targets[0] = target_params.chroma_velocity
    targets[1] = target_params.beat_rate
    targets[2] = target_params.beat_depth
    targets[3] = target_params.roughness_depth
    targets[4] = target_params.brightness
    targets[5] = target_params.fullness
    targets[6] = target_params.noise_gain
    paths = s["paths"]
    np.subtract(state.smoothed[:, None], targets[:, None], out=paths)
    paths *= s["decay"][None, :]
    paths += targets[:, None]
    state.smoothed[:] = paths[:, -1]

    # 2. chroma phase integrates the smoothed velocity; the span phase
    #    tracks it modulo the bank width in octaves
    span = float(cfg.partial_count)
    phi = s["phi"]
    np.cumsum(paths[_R_CHROMA], out=phi)
    phi *= inv_sr
    phi += state.chroma_span_phase
    state.chroma_span_phase = float(phi[-1] % span)
    state.chroma_phase = state.chroma_span_phase % 1.0

    # 3. partial bank: each oscillator's octave exponent is
    #    (slot + phase) mod span, so an oscillator only ever wraps at the
    #    top of the bank where the raised-cosine window has faded it out;
    #    per frame the bank still sounds slots {k + chroma_phase}
    exps = s["exps"]
    np.add(s["slots"][:, None], phi[None, :], out=exps)
    np.mod(exps, span, out=exps)

    freq = s["freq"]
    np.exp2(exps, out=freq)
    freq *= cfg.base_frequency

    pphase = s["pphase"]
    np.cumsum(freq, axis=1, out=pphase)
    pphase *= inv_sr
    pphase += state.partial_phases[:, None]
    np.mod(pphase[:, -1], 1.0, out=state.partial_phases)

    center = s["center"]
    np.multiply(paths[_R_BRIGHT], m.brightness_octave_shift_max, out=center)
    center += math.log2(cfg.envelope_center)
    width = s["width"]
    np.multiply(paths[_R_FULL], m.fullness_bandwidth_max, out=width)
    width += cfg.envelope_width

    amp = s["amp"]
    np.add(exps, math.log2(cfg.base_frequency), out=amp)      # log2 freq
    amp -= center[None, :]
    amp /= width[None, :]
    np.clip(amp, -1.0, 1.0, out=amp)                          # zero outside window
    amp *= math.pi
    np.cos(amp, out=amp)
    amp += 1.0
    amp *= 0.5

    sines = s["sines"]
    pphase *= 2.0 * math.pi
    np.sin(pphase, out=sines)
    sines *= amp
    tone = s["tone"]
    np.sum(sines, axis=0, out=tone)
    ampsum = s["ampsum"]
    np.sum(amp, axis=0, out=ampsum)
    np.maximum(ampsum, 1e-12, out=ampsum)
    tone /= ampsum                                            # constant loudness

    # 4. amplitude modulation; both factors are neutral at zero depth, so
    #    smoothing transients across y = 0 stay continuous
    bphase = s["bphase"]
    np.cumsum(paths[_R_BRATE], out=bphase)
    bphase *= inv_sr
    bphase += state.beat_phase
    state.beat_phase = float(bphase[-1] % 1.0)
    bphase *= 2.0 * math.pi
    np.cos(bphase, out=bphase)
    bphase -= 1.0
    bphase *= -0.5                                            # (1 - cos)/2
    bphase *= paths[_R_BDEPTH]
    np.subtract(1.0, bphase, out=bphase)

    rphase = s["rphase"]
    np.multiply(s["ramp"], m.roughness_rate * inv_sr, out=rphase)
    rphase += state.roughness_phase
    state.roughness_phase = float(rphase[-1] % 1.0)
    rphase *= 2.0 * math.pi
    np.cos(rphase, out=rphase)
    rphase -= 1.0
    rphase *= -0.5
    rphase *= paths[_R_RDEPTH]
    np.subtract(1.0, rphase, out=rphase)

    mod = s["mod"]
    np.multiply(bphase, rphase, out=mod)
    tone *= mod

    # 5. pink-noise bed at the smoothed zone gain
    noise = s["noise"]
    pos = state.noise_pos
    loop = state.noise_loop
    first = min(n, len(loop) - pos)
    noise[:first] = loop[pos:pos + first]
    if first < n:
        noise[first:] = loop[:n - first]
    state.noise_pos = (pos + n) % len(loop)
    noise *= paths[_R_NOISE]

    # 6. master gain, then the soft-clip guard
    mix = s["mix"]
    np.add(tone, noise, out=mix)
    mix *= cfg.master_gain
    _soft_clip(mix)
    out[:] = mix


def render_block(
    state: SynthState,
    target_params: SonificationParams,
    cfg: SynthConfig,
    mapping_cfg: MappingConfig | None = None,
) -> AudioBlock:
    """Render one block and return it as a fresh :class:`AudioBlock`."""
    out = np.empty(cfg.block_size, dtype=np.float32)
    render_into(state, target_params, cfg, out, mapping_cfg)
    return AudioBlock(sample_rate=cfg.sample_rate, frames=out)
