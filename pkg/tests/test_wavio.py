import numpy as np
import pytest

from sonicguide.synth import AudioBlock
from sonicguide.wavio import WavError, decode_pcm16, encode_pcm16, read_wav, write_wav


def _noise_block(n=48000, sr=48000, seed=0):
    rng = np.random.default_rng(seed)
    return AudioBlock(sr, (rng.uniform(-1, 1, n)).astype(np.float32))


def test_float32_round_trip_bit_identical(tmp_path):
    block = _noise_block()
    path = tmp_path / "f.wav"
    write_wav(block, path, "float32")
    back = read_wav(path)
    assert back.sample_rate == 48000
    assert np.array_equal(back.frames, block.frames)


def test_pcm16_round_trip_within_one_step(tmp_path):
    block = _noise_block()
    path = tmp_path / "p.wav"
    write_wav(block, path, "pcm16")
    back = read_wav(path)
    err = np.abs(back.frames.astype(np.float64) - block.frames.astype(np.float64))
    assert err.max() <= 1.0 / 32768.0


def test_header_magic_bytes(tmp_path):
    path = tmp_path / "h.wav"
    write_wav(_noise_block(256), path)
    raw = path.read_bytes()
    assert raw[0:4] == b"RIFF"
    assert raw[8:12] == b"WAVE"


def test_riff_size_consistent(tmp_path):
    path = tmp_path / "s.wav"
    write_wav(_noise_block(1001), path, "pcm16")   # odd payload: pad byte
    raw = path.read_bytes()
    (riff_size,) = np.frombuffer(raw[4:8], dtype="<u4")
    assert riff_size == len(raw) - 8


def test_ties_round_away_from_zero():
    # 0.5/32767 scales to exactly 0.5, which must round to 1, and the
    # negative twin to -1
    x = np.array([0.5 / 32767.0, -0.5 / 32767.0])
    q = np.frombuffer(encode_pcm16(x), dtype="<i2")
    assert list(q) == [1, -1]


def test_pcm16_clips_out_of_range():
    q = np.frombuffer(encode_pcm16(np.array([2.0, -2.0])), dtype="<i2")
    assert list(q) == [32767, -32768]


def test_pcm16_encode_decode_inverse():
    x = np.linspace(-1, 1, 1001)
    once = decode_pcm16(encode_pcm16(x))
    twice = decode_pcm16(encode_pcm16(once))
    assert np.array_equal(once, twice)


def test_read_rejects_garbage(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"this is not audio")
    with pytest.raises(WavError):
        read_wav(path)


def test_read_rejects_truncated(tmp_path):
    path = tmp_path / "trunc.wav"
    write_wav(_noise_block(4096), path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(WavError):
        read_wav(path)


def test_unsupported_format_flag(tmp_path):
    with pytest.raises(WavError):
        write_wav(_noise_block(16), tmp_path / "x.wav", "mp3")
