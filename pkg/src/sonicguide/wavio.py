"""Minimal RIFF/WAVE reader and writer: mono 16-bit PCM or 32-bit float.

The float path is bit-lossless for float32 audio; the PCM path rounds
dither-free with ties away from zero, so a round trip stays within one
16-bit step.  The PCM encoder here is also the streaming wire format of
the guidance service.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .synth import AudioBlock

__all__ = ["WavError", "write_wav", "read_wav", "encode_pcm16", "decode_pcm16"]

_PCM16_SCALE = 32767.0


class WavError(ValueError):
    """Malformed or unsupported WAV container."""


def encode_pcm16(frames: np.ndarray) -> bytes:
    """Little-endian 16-bit PCM, rounding ties away from zero."""
    x = np.asarray(frames, dtype=np.float64)
    q = np.sign(x) * np.floor(np.abs(x) * _PCM16_SCALE + 0.5)
    return np.clip(q, -32768, 32767).astype("<i2").tobytes()


def decode_pcm16(data: bytes) -> np.ndarray:
    return (np.frombuffer(data, dtype="<i2").astype(np.float32) / np.float32(_PCM16_SCALE))


def write_wav(audio: AudioBlock, path: str | Path, fmt: str = "float32") -> None:
    """Write mono audio as 32-bit float (default) or 16-bit PCM."""
    if fmt == "float32":
        payload = np.asarray(audio.frames, dtype="<f4").tobytes()
        format_tag, bits = 3, 32
    elif fmt == "pcm16":
        payload = encode_pcm16(audio.frames)
        format_tag, bits = 1, 16
    else:
        raise WavError(f"unsupported format {fmt!r} (use 'float32' or 'pcm16')")

    sr = audio.sample_rate
    block_align = bits // 8
    chunks = [
        b"fmt " + struct.pack("<IHHIIHH", 16, format_tag, 1, sr, sr * block_align, block_align, bits),
    ]
    if format_tag == 3:
        chunks.append(b"fact" + struct.pack("<II", 4, len(audio.frames)))
    chunks.append(b"data" + struct.pack("<I", len(payload)) + payload)
    if len(payload) % 2:
        chunks[-1] += b"\x00"
    body = b"WAVE" + b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def read_wav(path: str | Path) -> AudioBlock:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavError(f"{path}: truncated {cid!r} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise WavError(f"{path}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            data = body
        pos += 8 + size + (size % 2)

    if fmt is None or data is None:
        raise WavError(f"{path}: missing fmt or data chunk")
    format_tag, channels, sr, _, _, bits = fmt
    if channels != 1:
        raise WavError(f"{path}: only mono supported, got {channels} channels")
    if format_tag == 1 and bits == 16:
        frames = decode_pcm16(data)
    elif format_tag == 3 and bits == 32:
        frames = np.frombuffer(data, dtype="<f4")
    else:
        raise WavError(f"{path}: unsupported encoding (tag {format_tag}, {bits} bits)")
    return AudioBlock(sample_rate=sr, frames=frames.copy())
