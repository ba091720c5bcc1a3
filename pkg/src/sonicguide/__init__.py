"""Auditory guidance by psychoacoustic sonification.

Maps a 3D displacement to a monophonic guidance tone (cyclic chroma
glide, beats/roughness, brightness/fullness, earcons), analyzes such
tones back into feature frames and decoded positions, and runs
interactive target-finding sessions over a local socket.
"""

from .earcons import (
    CLICK,
    TRIAD,
    ZONE_ENTER,
    ZONE_EXIT,
    CrossingState,
    EarconEvent,
    detect_events,
    init_crossing_state,
    render_earcon,
)
from .mapping import (
    DisplacementVector,
    MappingConfig,
    MappingError,
    SonificationParams,
    in_target_zone,
    invert_params,
    map_position,
)
from .probes import (
    AmbiguityError,
    FeatureFrame,
    NoSignalError,
    ProbeError,
    decode_position,
    estimate_am,
    estimate_chroma_rate,
    estimate_spectral_balance,
    extract_features,
)
from .stream import GuideRenderer, StreamError, render_stream
from .synth import (
    AudioBlock,
    SynthConfig,
    SynthError,
    SynthState,
    init_synth,
    render_block,
    render_into,
)
from .trajectory import (
    SessionLogWriter,
    Trajectory,
    TrajectoryError,
    load_trajectory,
    parse_trajectory,
    read_session_log,
    resample,
    serialize_trajectory,
)
from .wavio import WavError, read_wav, write_wav

__version__ = "0.1.0"
