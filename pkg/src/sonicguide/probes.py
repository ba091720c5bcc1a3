"""Offline audio analysis: the independent measuring instruments for
every perceptual claim the synthesis makes, plus a full audio-to-
position decoder.

The estimators only look at rendered samples; they share no code with
the render path.  Where the render and the mapping promise a physical
correlate (chroma drift rate, modulation rate and depth, spectral
centroid and spread), the estimator here measures it from scratch:

* chroma rate: normalized cross-correlation of log-frequency STFT
  frames a fixed time apart, tracking the best log-frequency shift.
* amplitude modulation: bandpass, rectify, low-pass, then a least-
  squares sinusoid fit over a dense rate grid.  On the modulator model
  ``1 - depth*(1 - cos)/2`` the fitted amplitude-over-mean equals the
  classical (max - min)/(max + min) depth, but survives the noise bed
  and census ripple that raw extrema chase.
* spectral balance: per-frame centroid and spread of the thresholded
  power spectrum in log2 frequency, median-aggregated so a gliding
  chroma does not smear the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np
from scipy import signal

from .mapping import DisplacementVector, MappingConfig, SonificationParams, invert_params
from .synth import AudioBlock, SynthConfig

__all__ = [
    "ProbeError",
    "NoSignalError",
    "AmbiguityError",
    "FeatureFrame",
    "AmEstimate",
    "SpectralBalance",
    "estimate_chroma_rate",
    "estimate_am",
    "estimate_spectral_balance",
    "extract_features",
    "decode_position",
]

ModulationBand = Literal["beats", "roughness", "none"]

# STFT: resolution/latency compromise for 48 kHz guidance tones
_NFFT = 4096
_HOP = 1024
_BINS_PER_OCTAVE = 96
_GRID_LO_HZ = 30.0
_GRID_HI_HZ = 18000.0

_SILENCE_RMS = 1e-3            # -60 dBFS
_MIN_SECONDS = 1.0

# AM envelope chain: the band sits in the gaps of the default partial
# comb so band edges do not chop modulation sidebands, and the gentle
# order keeps edge response symmetric for gliding partials
_AM_BAND_HZ = (370.0, 2960.0)
_AM_BAND_ORDER = 2
_AM_LOWPASS_HZ = 120.0
_AM_ENV_RATE = 2000
_AM_HEAD_TRIM_S = 0.15
_AM_TAIL_TRIM_S = 0.04
_BEAT_BAND_HZ = 12.0
_ROUGHNESS_BAND_HZ = (40.0, 100.0)
# census ripple of the band-filtered comb under a chroma glide shows up
# as a phantom line at |v| <= 1.5 Hz with depth up to ~0.07 at extreme
# fullness, while true beats measure >= ~0.8 even at the dead-band edge
# (the depth ramp saturates by |y| = 0.05), so the beat band gets a much
# higher acceptance floor than the roughness band
_BEAT_MIN_DEPTH = 0.25
_ROUGHNESS_MIN_DEPTH = 0.012

_SPECTRAL_THRESH_DB = -35.0    # per-frame bin floor relative to the peak bin
_FRAME_POWER_FLOOR_DB = -45.0  # frames quieter than this (beat troughs) are skipped


class ProbeError(ValueError):
    """Analysis could not run on the given audio."""


class NoSignalError(ProbeError):
    """Input is silence (below -60 dBFS RMS)."""


class AmbiguityError(ProbeError):
    """Features are mutually inconsistent (e.g. both modulation bands)."""


class AmEstimate(NamedTuple):
    rate: float
    depth: float
    band: ModulationBand


class SpectralBalance(NamedTuple):
    centroid: float    # log2 Hz
    bandwidth: float   # octaves (spectral spread)


@dataclass(frozen=True)
class FeatureFrame:
    """Measured correlates of one analysis window."""

    chroma_rate: float          # octaves/second, signed
    am_rate: float              # Hz
    am_depth: float             # [0, 1]
    spectral_centroid: float    # log2 Hz
    envelope_bandwidth: float   # octaves
    modulation_band: ModulationBand

    def as_dict(self) -> dict:
        return {
            "chroma_rate": self.chroma_rate,
            "am_rate": self.am_rate,
            "am_depth": self.am_depth,
            "spectral_centroid": self.spectral_centroid,
            "envelope_bandwidth": self.envelope_bandwidth,
            "modulation_band": self.modulation_band,
        }


def _samples(audio: AudioBlock) -> np.ndarray:
    x = np.asarray(audio.frames, dtype=np.float64)
    if x.size < _MIN_SECONDS * audio.sample_rate:
        raise ProbeError(
            f"need at least {_MIN_SECONDS:.0f} s of audio, got {x.size / audio.sample_rate:.3f} s"
        )
    if math.sqrt(float(np.mean(x * x))) < _SILENCE_RMS:
        raise NoSignalError("input below -60 dBFS RMS")
    return x


def _stft_power(x: np.ndarray, sr: int) -> tuple[np.ndarray, np.ndarray]:
    """Hann STFT power frames and their bin frequencies."""
    window = np.hanning(_NFFT)
    n_frames = (x.size - _NFFT) // _HOP + 1
    if n_frames < 2:
        raise ProbeError("audio too short for STFT analysis")
    frames = np.lib.stride_tricks.sliding_window_view(x, _NFFT)[::_HOP][:n_frames]
    spec = np.fft.rfft(frames * window, axis=1)
    power = spec.real**2 + spec.imag**2
    freqs = np.fft.rfftfreq(_NFFT, 1.0 / sr)
    return power, freqs


def _log_spectra(x: np.ndarray, sr: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-magnitude frames on a uniform log2-frequency grid, plus the
    per-frame broadband power."""
    power, freqs = _stft_power(x, sr)
    lo = math.log2(_GRID_LO_HZ)
    hi = math.log2(min(_GRID_HI_HZ, 0.95 * sr / 2))
    grid = np.arange(lo, hi, 1.0 / _BINS_PER_OCTAVE)
    log_f = np.log2(np.maximum(freqs, 1e-9))
    out = np.empty((power.shape[0], grid.size))
    for i in range(power.shape[0]):
        out[i] = np.interp(grid, log_f, power[i])
    frame_power = power.sum(axis=1)
    out = 10.0 * np.log10(np.maximum(out, 1e-24))
    return np.maximum(out, out.max() - 80.0), frame_power


def _flatten_beats(x: np.ndarray, sr: int) -> tuple[np.ndarray, np.ndarray]:
    """Divide out slow amplitude modulation (zero-phase, <= 16 Hz) so a
    beating envelope cannot tilt the energy centroid of STFT frames,
    which would otherwise bias the measured drift rate.  Returns the
    flattened signal and the slow envelope itself."""
    sos = signal.butter(4, 16.0, btype="lowpass", fs=sr, output="sos")
    env = signal.sosfiltfilt(sos, np.abs(x))
    floor = 0.1 * max(float(env.max()), 1e-9)
    return x / np.maximum(env, floor), env


def estimate_chroma_rate(audio: AudioBlock) -> float:
    """Signed chroma drift rate in octaves/second.

    Beats are divided out first (they tilt the effective timestamp of a
    frame), then pairs of STFT frames ~0.15 s apart are cross-correlated
    along the log-frequency axis (normalized per lag so finite-support
    edges do not bias the peak toward zero), the peak lag is refined
    parabolically, and the per-pair rates are median-combined.  Frames
    centered in deep beat troughs carry only noise and are skipped.
    Accurate to about +-3 % for drift magnitudes in [0.1, 1.5] oct/s.
    """
    x = _samples(audio)
    sr = audio.sample_rate
    flat, env = _flatten_beats(x, sr)
    spectra, _ = _log_spectra(flat, sr)
    hop_t = _HOP / sr
    pair = max(1, round(0.15 / hop_t))
    if spectra.shape[0] <= pair:
        raise ProbeError("audio too short for chroma-rate analysis")
    max_lag = int(0.45 * _BINS_PER_OCTAVE)

    centers = np.arange(spectra.shape[0]) * _HOP + _NFFT // 2
    frame_env = env[np.minimum(centers, env.size - 1)]
    loud = frame_env > frame_env.max() * 10.0 ** (-14.0 / 20.0)
    good_pairs = loud[:-pair] & loud[pair:]
    if good_pairs.sum() < 4:
        good_pairs = np.ones_like(good_pairs)
    a_frames = spectra[:-pair][good_pairs]
    b_frames = spectra[pair:][good_pairs]
    n_pairs, n_bins = a_frames.shape
    corr = np.empty((n_pairs, 2 * max_lag + 1))
    for idx, lag in enumerate(range(-max_lag, max_lag + 1)):
        if lag >= 0:
            a = a_frames[:, : n_bins - lag] if lag else a_frames
            b = b_frames[:, lag:]
        else:
            a = a_frames[:, -lag:]
            b = b_frames[:, : n_bins + lag]
        am = a - a.mean(axis=1, keepdims=True)
        bm = b - b.mean(axis=1, keepdims=True)
        denom = np.sqrt((am * am).sum(axis=1) * (bm * bm).sum(axis=1))
        corr[:, idx] = (am * bm).sum(axis=1) / np.maximum(denom, 1e-12)

    peaks = np.argmax(corr, axis=1)
    shifts = np.empty(n_pairs)
    for i, k in enumerate(peaks):
        frac = 0.0
        if 0 < k < corr.shape[1] - 1:
            c0, c1, c2 = corr[i, k - 1], corr[i, k], corr[i, k + 1]
            denom = c0 - 2.0 * c1 + c2
            if denom != 0.0:
                frac = 0.5 * (c0 - c2) / denom
        shifts[i] = (k - max_lag + frac) / _BINS_PER_OCTAVE
    return float(np.median(shifts) / (pair * hop_t))


def _am_envelope(x: np.ndarray, sr: int) -> np.ndarray:
    """ rectified, band-limited amplitude envelope at _AM_ENV_RATE Hz."""
    sos_band = signal.butter(_AM_BAND_ORDER, _AM_BAND_HZ, btype="bandpass", fs=sr, output="sos")
    sos_low = signal.butter(6, _AM_LOWPASS_HZ, btype="lowpass", fs=sr, output="sos")
    env = signal.sosfilt(sos_low, np.abs(signal.sosfilt(sos_band, x)))
    env = env[:: max(1, round(sr / _AM_ENV_RATE))]
    head = int(_AM_HEAD_TRIM_S * _AM_ENV_RATE)
    tail = max(1, int(_AM_TAIL_TRIM_S * _AM_ENV_RATE))
    env = env[head:-tail]
    if env.size < _AM_ENV_RATE // 2:
        raise ProbeError("audio too short for AM analysis")
    return env


def _fit_lines(
    env: np.ndarray, rates: np.ndarray, mean: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares cosine fits of the mean-removed envelope at each
    candidate rate: (explained power, depth, cos coeff, sin coeff)."""
    t = np.arange(env.size) / _AM_ENV_RATE
    e = env - env.mean()
    phases = 2.0 * math.pi * np.outer(rates, t)
    c = np.cos(phases)
    s = np.sin(phases)
    c -= c.mean(axis=1, keepdims=True)
    s -= s.mean(axis=1, keepdims=True)
    a11 = (c * c).sum(axis=1)
    a12 = (c * s).sum(axis=1)
    a22 = (s * s).sum(axis=1)
    v1 = c @ e
    v2 = s @ e
    det = np.maximum(a11 * a22 - a12 * a12, 1e-12)
    alpha = (a22 * v1 - a12 * v2) / det
    beta = (a11 * v2 - a12 * v1) / det
    power = alpha * v1 + beta * v2
    depth = np.hypot(alpha, beta) / max(mean, 1e-12)
    return power, depth, alpha, beta


def _best_line(env: np.ndarray, lo: float, hi: float, mean: float) -> tuple[float, float, float]:
    """Strongest modulation line in [lo, hi] Hz: (rate, depth, power)."""
    coarse = np.geomspace(lo, hi, max(16, int(120 * math.log(hi / lo))))
    power, depth, _, _ = _fit_lines(env, coarse, mean)
    k = int(np.argmax(power))
    fine = np.linspace(coarse[k] * 0.975, coarse[k] * 1.025, 31)
    fine = fine[(fine >= lo) & (fine <= hi)]
    f_power, f_depth, _, _ = _fit_lines(env, fine, mean)
    j = int(np.argmax(f_power))
    if f_power[j] >= power[k]:
        return float(fine[j]), float(min(1.0, f_depth[j])), float(f_power[j])
    return float(coarse[k]), float(min(1.0, depth[k])), float(power[k])


def _subtract_line(env: np.ndarray, rate: float) -> np.ndarray:
    """Remove the fitted sinusoid at ``rate`` from the envelope."""
    _, _, alpha, beta = _fit_lines(env, np.array([rate]), 1.0)
    t = np.arange(env.size) / _AM_ENV_RATE
    phase = 2.0 * math.pi * rate * t
    c = np.cos(phase)
    s = np.sin(phase)
    return env - alpha[0] * (c - c.mean()) - beta[0] * (s - s.mean())


def _am_candidates(audio: AudioBlock) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Best beat-band and roughness-band lines, matching-pursuit style:
    the weaker band is re-fit on the residual after subtracting the
    dominant line, so a strong modulation in one band cannot leak a
    phantom line into the other."""
    x = _samples(audio)
    env = _am_envelope(x, audio.sample_rate)
    mean = float(env.mean())
    beat = _best_line(env, 0.25, _BEAT_BAND_HZ, mean)
    rough = _best_line(env, *_ROUGHNESS_BAND_HZ, mean)
    if beat[2] >= rough[2]:
        rough = _best_line(_subtract_line(env, beat[0]), *_ROUGHNESS_BAND_HZ, mean)
    else:
        beat = _best_line(_subtract_line(env, rough[0]), 0.25, _BEAT_BAND_HZ, mean)
    return beat, rough


def estimate_am(audio: AudioBlock) -> AmEstimate:
    """Amplitude-modulation rate, depth and band of the strongest
    accepted modulation line.

    Lines must clear a per-band depth floor to count; below both floors
    the strongest raw line is reported with band "none".
    """
    (b_rate, b_depth, b_power), (r_rate, r_depth, r_power) = _am_candidates(audio)
    beat_ok = b_depth >= _BEAT_MIN_DEPTH
    rough_ok = r_depth >= _ROUGHNESS_MIN_DEPTH
    if beat_ok and rough_ok:
        return (
            AmEstimate(b_rate, b_depth, "beats")
            if b_power >= r_power
            else AmEstimate(r_rate, r_depth, "roughness")
        )
    if beat_ok:
        return AmEstimate(b_rate, b_depth, "beats")
    if rough_ok:
        return AmEstimate(r_rate, r_depth, "roughness")
    raw = (b_rate, b_depth) if b_power >= r_power else (r_rate, r_depth)
    return AmEstimate(raw[0], raw[1], "none")


def estimate_spectral_balance(audio: AudioBlock) -> SpectralBalance:
    """Median per-frame spectral centroid (log2 Hz) and spread (octaves).

    Per-frame measurement keeps a gliding chroma from inflating the
    spread; bins below the per-frame threshold and frames in deep beat
    troughs are excluded, which also keeps the subtle noise bed from
    biasing either statistic.
    """
    x = _samples(audio)
    power, freqs = _stft_power(x, audio.sample_rate)
    sel = (freqs >= 40.0) & (freqs <= 20000.0)
    power = power[:, sel]
    log_f = np.log2(freqs[sel])

    frame_power = power.sum(axis=1)
    keep = frame_power > frame_power.max() * 10.0 ** (_FRAME_POWER_FLOOR_DB / 10.0)
    power = power[keep]
    if power.shape[0] == 0:
        raise NoSignalError("no frames above the power floor")

    floor = power.max(axis=1, keepdims=True) * 10.0 ** (_SPECTRAL_THRESH_DB / 10.0)
    masked = np.where(power > floor, power, 0.0)
    total = masked.sum(axis=1)
    centroids = (masked * log_f).sum(axis=1) / total
    spreads = np.sqrt((masked * (log_f - centroids[:, None]) ** 2).sum(axis=1) / total)
    return SpectralBalance(float(np.median(centroids)), float(np.median(spreads)))


def extract_features(audio: AudioBlock) -> FeatureFrame:
    """Run all three estimators over one window."""
    chroma = estimate_chroma_rate(audio)
    am = estimate_am(audio)
    balance = estimate_spectral_balance(audio)
    return FeatureFrame(
        chroma_rate=chroma,
        am_rate=am.rate,
        am_depth=am.depth,
        spectral_centroid=balance.centroid,
        envelope_bandwidth=balance.bandwidth,
        modulation_band=am.band,
    )


def measure_axis_features(
    audio: AudioBlock,
    cfg: MappingConfig,
    synth_cfg: SynthConfig | None = None,
) -> dict[str, float]:
    """The five axis-owned physical features, calibrated for comparison
    across positions:

    chroma_rate (oct/s), beat_rate (Hz, zero unless the beat band is
    accepted), roughness_depth (modulator depth, zero unless the
    roughness band is accepted), spectral_centroid (log2 Hz), and
    envelope_bandwidth (octaves) projected to the frozen-phase reference
    frame.  The projection removes the comb-census dependence a chroma
    glide imposes on the raw spread at extreme fullness, so the feature
    answers "how wide is the commanded envelope" regardless of x.
    """
    scfg = synth_cfg if synth_cfg is not None else SynthConfig()
    chroma = estimate_chroma_rate(audio)
    (b_rate, b_depth, _), (r_rate, r_depth, _) = _am_candidates(audio)
    balance = estimate_spectral_balance(audio)

    beat_rate = b_rate if b_depth >= _BEAT_MIN_DEPTH else 0.0
    roughness = 2.0 * r_depth / (1.0 + r_depth) if r_depth >= _ROUGHNESS_MIN_DEPTH else 0.0

    duration = len(audio.frames) / audio.sample_rate
    grid, _, _, full_s, _ = _comb_model(scfg, cfg, chroma, duration)
    f_est = float(np.interp(balance.bandwidth, full_s, grid))
    _, _, _, full_s0, _ = _comb_model(scfg, cfg, 0.0, duration)
    bandwidth = float(np.interp(f_est, grid, full_s0))

    return {
        "chroma_rate": chroma,
        "beat_rate": beat_rate,
        "roughness_depth": roughness,
        "spectral_centroid": balance.centroid,
        "envelope_bandwidth": bandwidth,
    }


# ---------------------------------------------------------------------------
# audio -> position decoding
# ---------------------------------------------------------------------------

_ARC_RATE_FLOOR = 0.02  # oct/s below which the chroma phase is treated as frozen


def _arc_phases(chroma_rate: float, duration: float) -> np.ndarray:
    """Chroma phases covered by a fresh-state render over one window.

    The phase starts at zero and integrates the velocity, so a falling
    pitch (negative rate) covers [1 - span, 1) and a rising one covers
    [0, span].  Below the estimator noise floor the phase is frozen at
    zero.  The comb statistics are not phase-periodic once the envelope
    support exceeds the partial bank, which is why the arc matters.
    """
    span = min(1.0, abs(chroma_rate) * duration)
    if abs(chroma_rate) < _ARC_RATE_FLOOR or span < 1e-3:
        return np.array([0.0])
    if span >= 1.0:
        return np.linspace(0.0, 1.0, 33, endpoint=False)
    grid = np.linspace(0.0, span, 17)
    return (1.0 - grid) % 1.0 if chroma_rate < 0.0 else grid


@lru_cache(maxsize=64)
def _comb_curves(
    synth_cfg: SynthConfig, mapping_cfg: MappingConfig, phases: tuple[float, ...]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic comb model over the given chroma-phase arc.

    Octave-spaced partials under the raised-cosine window; returns the
    z grid in [0, 1] with the arc-median (centroid, spread) curves for
    the brightness branch and the spread curve for the fullness branch:
    (grid, bright_centroids, bright_spreads, full_spreads, full_centroids).
    """
    slots = math.log2(synth_cfg.base_frequency) + np.arange(synth_cfg.partial_count)
    center0 = math.log2(synth_cfg.envelope_center)
    phi = np.asarray(phases)
    log_f = slots[None, :] + phi[:, None]          # (n_phases, n_slots)

    def stats(brightness: float, fullness: float) -> tuple[float, float]:
        center = center0 + brightness * mapping_cfg.brightness_octave_shift_max
        width = synth_cfg.envelope_width + fullness * mapping_cfg.fullness_bandwidth_max
        u = (log_f - center) / width
        amp = np.where(np.abs(u) < 1.0, 0.5 * (1.0 + np.cos(math.pi * u)), 0.0)
        p = amp**2
        tot = np.maximum(p.sum(axis=1), 1e-12)
        mean = (p * log_f).sum(axis=1) / tot
        spread = np.sqrt((p * (log_f - mean[:, None]) ** 2).sum(axis=1) / tot)
        return float(np.median(mean)), float(np.median(spread))

    grid = np.linspace(0.0, 1.0, 41)
    bright_c = np.empty_like(grid)
    bright_s = np.empty_like(grid)
    full_s = np.empty_like(grid)
    full_c = np.empty_like(grid)
    for i, g in enumerate(grid):
        bright_c[i], bright_s[i] = stats(g, 0.0)
        full_c[i], full_s[i] = stats(0.0, g)
    return grid, bright_c, bright_s, full_s, full_c


def _comb_model(
    synth_cfg: SynthConfig,
    mapping_cfg: MappingConfig,
    chroma_rate: float,
    duration: float,
):
    phases = tuple(np.round(_arc_phases(chroma_rate, duration), 4))
    grid, bright_c, bright_s, full_s, full_c = _comb_curves(synth_cfg, mapping_cfg, phases)
    return grid, bright_c, bright_s, full_s, full_c


def decode_position(
    audio: AudioBlock,
    cfg: MappingConfig,
    synth_cfg: SynthConfig | None = None,
) -> DisplacementVector:
    """Estimate the displacement that produced a guidance tone.

    Composes the three estimators into a parameter frame and applies
    the exact mapping inverse.  Expected error is below 0.05 per axis
    for positions whose coordinates exceed the 0.05 dead band; inside
    the dead bands magnitudes are too small to measure reliably and the
    raw (small) estimates are returned as-is.
    """
    scfg = synth_cfg if synth_cfg is not None else SynthConfig()

    chroma = estimate_chroma_rate(audio)
    (b_rate, b_depth, _), (r_rate, r_depth, _) = _am_candidates(audio)
    beat_ok = b_depth >= _BEAT_MIN_DEPTH
    rough_ok = r_depth >= _ROUGHNESS_MIN_DEPTH
    if beat_ok and rough_ok:
        raise AmbiguityError(
            f"both modulation bands present: beats {b_rate:.2f} Hz depth {b_depth:.3f}, "
            f"roughness {r_rate:.1f} Hz depth {r_depth:.3f}"
        )
    balance = estimate_spectral_balance(audio)

    chroma_velocity = float(np.clip(chroma, -cfg.v_max, cfg.v_max))

    beat_rate = beat_depth = roughness_depth = 0.0
    if beat_ok:
        beat_rate = min(b_rate, cfg.beat_rate_max)
        beat_depth = min(1.0, b_depth)
    elif rough_ok:
        # fitted amplitude-over-mean m relates to modulator depth d by
        # m = d / (2 - d) for the (1 - d*(1 - cos)/2) modulator
        d = 2.0 * r_depth / (1.0 + r_depth)
        roughness_depth = min(d, cfg.roughness_depth_max)

    # z axis: invert both hypotheses against the arc-aware comb model and
    # keep the one whose untouched statistic is more consistent
    duration = len(audio.frames) / audio.sample_rate
    grid, bright_c, bright_s, full_s, full_c = _comb_model(scfg, cfg, chroma, duration)
    b_est = float(np.interp(balance.centroid, bright_c, grid))
    resid_b = abs(balance.bandwidth - float(np.interp(b_est, grid, bright_s)))
    f_est = float(np.interp(balance.bandwidth, full_s, grid))
    resid_f = abs(balance.centroid - float(np.interp(f_est, grid, full_c)))
    brightness = fullness = 0.0
    if resid_b <= resid_f:
        brightness = b_est
    else:
        fullness = f_est

    params = SonificationParams(
        chroma_velocity=chroma_velocity,
        beat_rate=beat_rate,
        beat_depth=beat_depth,
        roughness_depth=roughness_depth,
        brightness=brightness,
        fullness=fullness,
        noise_gain=0.0,
    )
    estimate = invert_params(params, cfg)
    return estimate.clamped()
