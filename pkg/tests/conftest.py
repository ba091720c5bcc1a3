"""Shared helpers: constant-position renders, cached across tests."""

from functools import lru_cache

import numpy as np
import pytest

from sonicguide.mapping import DisplacementVector, MappingConfig, map_position
from sonicguide.synth import AudioBlock, SynthConfig, init_synth, render_into

MAPPING = MappingConfig()
SYNTH = SynthConfig()


@lru_cache(maxsize=256)
def _render_cached(x: float, y: float, z: float, seconds: float, seed: int) -> AudioBlock:
    cfg = SynthConfig(noise_seed=seed)
    state = init_synth(cfg)
    params = map_position(DisplacementVector(x, y, z), MAPPING)
    n_blocks = int(round(seconds * cfg.sample_rate / cfg.block_size))
    out = np.empty(n_blocks * cfg.block_size, dtype=np.float32)
    buf = np.empty(cfg.block_size, dtype=np.float32)
    for i in range(n_blocks):
        render_into(state, params, cfg, buf, MAPPING)
        out[i * cfg.block_size:(i + 1) * cfg.block_size] = buf
    return AudioBlock(cfg.sample_rate, out)


def render_constant(d, seconds: float = 2.0, seed: int = 0) -> AudioBlock:
    """Guidance tone at a fixed displacement, from a fresh synth state."""
    if isinstance(d, DisplacementVector):
        x, y, z = d.x, d.y, d.z
    else:
        x, y, z = d
    block = _render_cached(float(x), float(y), float(z), float(seconds), seed)
    return AudioBlock(block.sample_rate, block.frames)


@pytest.fixture
def render():
    return render_constant
