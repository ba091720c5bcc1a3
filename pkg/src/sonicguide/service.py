"""Interactive guidance sessions: trials, live position-to-audio
streaming over a local socket, and session logging.

The engine is lockstep: audio blocks are produced while handling each
position update, covering exactly the stream time the update's
timestamp has made due.  The block schedule therefore depends only on
the accepted position log, which is what lets an offline re-render of
that log reproduce the streamed PCM bit for bit.
"""

from __future__ import annotations

import base64
import json
import math
import os
import queue
import socketserver
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .earcons import EarconEvent, detect_events, init_crossing_state
from .mapping import DisplacementVector, MappingConfig, in_target_zone
from .stream import GuideRenderer, blocks_due
from .synth import SynthConfig
from .trajectory import SessionLogWriter
from .wavio import encode_pcm16

__all__ = [
    "PROTOCOL_VERSION",
    "DEFAULT_ADDR",
    "ADDR_ENV_VAR",
    "ServiceError",
    "TrialRecord",
    "UpdateResult",
    "GuidanceSession",
    "GuidanceServer",
    "resolve_addr",
]

PROTOCOL_VERSION = 1
DEFAULT_ADDR = "127.0.0.1:7853"
ADDR_ENV_VAR = "SONIC_GUIDE_ADDR"


class ServiceError(ValueError):
    """Invalid session operation."""


@dataclass
class TrialRecord:
    trial_id: int
    mode: str
    start_time: float
    end_time: float
    start_position: tuple[float, float, float]
    target_radius: float
    outcome: str                      # hit | timeout | abort
    steps: int | None                 # simulated-operator trials only
    time_to_target: float | None
    path_length: float
    path: list[tuple[float, tuple[float, float, float]]]
    events: list[EarconEvent] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "mode": self.mode,
            "start_time": self.start_time,
            "end_time": self.end_time,
            "start_position": list(self.start_position),
            "target_radius": self.target_radius,
            "outcome": self.outcome,
            "steps": self.steps,
            "time_to_target": self.time_to_target,
            "path_length": self.path_length,
            "events": [e.as_dict() for e in self.events],
        }


@dataclass
class UpdateResult:
    accepted: bool
    reason: str | None = None
    events: list[EarconEvent] = field(default_factory=list)
    blocks: list[np.ndarray] = field(default_factory=list)
    first_seq: int = 0
    trial_result: TrialRecord | None = None


def _sample_start(rng: np.random.Generator, mode: str, distance: float) -> DisplacementVector:
    """Uniform direction on the circle (2d) or sphere (3d), scaled."""
    if mode == "2d":
        angle = rng.uniform(0.0, 2.0 * math.pi)
        vec = np.array([math.cos(angle), math.sin(angle), 0.0])
    else:
        vec = rng.standard_normal(3)
        while np.linalg.norm(vec) < 1e-9:
            vec = rng.standard_normal(3)
        vec = vec / np.linalg.norm(vec)
    vec = vec * distance
    return DisplacementVector(float(vec[0]), float(vec[1]), float(vec[2]))


class GuidanceSession:
    """One interactive session: positions in, audio blocks and events
    out, one trial at a time, everything logged."""

    def __init__(
        self,
        mapping_cfg: MappingConfig | None = None,
        synth_cfg: SynthConfig | None = None,
        mode: str = "3d",
        target: DisplacementVector | None = None,
        dwell_time: float = 0.5,
        trial_timeout: float = 60.0,
        log: SessionLogWriter | None = None,
        session_id: str | None = None,
    ):
        self.mapping_cfg = mapping_cfg if mapping_cfg is not None else MappingConfig()
        self.synth_cfg = synth_cfg if synth_cfg is not None else SynthConfig()
        self.mode = mode
        self.target = target if target is not None else DisplacementVector(0, 0, 0)
        self.dwell_time = dwell_time
        self.trial_timeout = trial_timeout
        self.log = log
        self.session_id = session_id or uuid.uuid4().hex[:12]

        self.renderer = GuideRenderer(self.mapping_cfg, self.synth_cfg, mode)
        self.seq = 0
        self.latest: DisplacementVector | None = None
        self.last_t = -math.inf
        self.position_log: list[tuple[float, DisplacementVector]] = []
        # update-time crossing detector: reports cues the moment the
        # position stream crosses a plane; the renderer keeps its own
        # block-schedule detector for waveform mixing
        self._crossing = None

        self._trial_active = False
        self._trial_count = 0
        self._trial_mode = mode
        self._trial_start_t = 0.0
        self._trial_start_pos: DisplacementVector | None = None
        self._trial_path: list[tuple[float, tuple[float, float, float]]] = []
        self._trial_events: list[EarconEvent] = []
        self._zone_since: float | None = None

    # -- trials ------------------------------------------------------------

    @property
    def trial_active(self) -> bool:
        return self._trial_active

    def start_trial(
        self,
        mode: str | None = None,
        start_distance: float = 0.8,
        seed: int | None = None,
    ) -> dict:
        """Place the operator on the start sphere and begin a trial."""
        if self._trial_active:
            raise ServiceError("a trial is already active")
        trial_mode = mode or self.mode
        rng = np.random.default_rng(seed)
        start = _sample_start(rng, trial_mode, start_distance)
        start = DisplacementVector(
            start.x + self.target.x, start.y + self.target.y, start.z + self.target.z
        )

        self._trial_active = True
        self._trial_count += 1
        self._trial_mode = trial_mode
        self._trial_start_t = max(self.last_t, self.renderer.clock, 0.0)
        self._trial_start_pos = start
        self._trial_path = []
        self._trial_events = []
        self._zone_since = None
        self.renderer.mode = trial_mode
        if self._crossing is not None:
            self._crossing.mode = trial_mode

        descriptor = {
            "trial_id": self._trial_count,
            "mode": trial_mode,
            "start": {"x": start.x, "y": start.y, "z": start.z},
            "start_distance": start_distance,
            "target_radius": self.mapping_cfg.target_radius,
        }
        if self.log:
            self.log.write({"type": "trial_start", "t": self._trial_start_t, **descriptor})
        return descriptor

    def _finish_trial(self, outcome: str, t: float) -> TrialRecord:
        path = self._trial_path
        length = 0.0
        for (_, a), (_, b) in zip(path, path[1:]):
            length += math.dist(a, b)
        start = self._trial_start_pos
        record = TrialRecord(
            trial_id=self._trial_count,
            mode=self._trial_mode,
            start_time=self._trial_start_t,
            end_time=t,
            start_position=(start.x, start.y, start.z),
            target_radius=self.mapping_cfg.target_radius,
            outcome=outcome,
            steps=None,
            time_to_target=t - self._trial_start_t if outcome == "hit" else None,
            path_length=length,
            path=path,
            events=list(self._trial_events),
        )
        self._trial_active = False
        self._zone_since = None
        if self.log:
            self.log.write({"type": "trial_end", "t": t, **record.to_dict()})
        return record

    def abort_trial(self) -> TrialRecord | None:
        if not self._trial_active:
            return None
        return self._finish_trial("abort", max(self.last_t, self._trial_start_t))

    # -- position stream ---------------------------------------------------

    def _displacement(self, p: DisplacementVector) -> DisplacementVector:
        return DisplacementVector(
            p.x - self.target.x, p.y - self.target.y, p.z - self.target.z
        )

    def update_position(self, t: float, x: float, y: float, z: float) -> UpdateResult:
        """Accept a position, render all audio due by its timestamp, and
        run trial bookkeeping.  Stale or non-finite updates are rejected
        without touching state."""
        if not all(math.isfinite(v) for v in (t, x, y, z)):
            return UpdateResult(False, "non-finite position or timestamp")
        if t < self.last_t:
            return UpdateResult(False, f"stale timestamp {t} < {self.last_t}")
        try:
            pos = DisplacementVector(x, y, z)
        except Exception as exc:
            return UpdateResult(False, str(exc))

        if self.latest is None:
            self.latest = pos   # audio before the first update holds it
            self._crossing = init_crossing_state(
                self._displacement(pos), self.mapping_cfg, self._trial_mode
            )

        first_seq = self.seq
        blocks: list[np.ndarray] = []
        held = self._displacement(self.latest)
        due = blocks_due(t, self.synth_cfg.sample_rate, self.synth_cfg.block_size)
        while self.renderer.blocks_rendered < due:
            block, _ = self.renderer.render_next(held)
            blocks.append(block)
            self.seq += 1

        prev_d = self._displacement(self.latest)
        next_d = self._displacement(pos)
        prev_t = self.last_t if math.isfinite(self.last_t) else t
        events = detect_events(prev_d, next_d, self._crossing, self.mapping_cfg,
                               t_prev=prev_t, t_next=t)
        self.latest = pos
        self.last_t = t
        self.position_log.append((t, pos))
        if self.log:
            self.log.write({"type": "pos", "t": t, "x": pos.x, "y": pos.y, "z": pos.z})
        for event in events:
            if self.log:
                self.log.write({"type": "event", "t": event.time, "kind": event.kind})

        trial_result: TrialRecord | None = None
        if self._trial_active:
            self._trial_path.append((t, (pos.x, pos.y, pos.z)))
            self._trial_events.extend(events)
            d = self._displacement(pos)
            if in_target_zone(d, self.mapping_cfg):
                if self._zone_since is None:
                    self._zone_since = t
                if t - self._zone_since >= self.dwell_time:
                    trial_result = self._finish_trial("hit", t)
            else:
                self._zone_since = None
            if trial_result is None and t - self._trial_start_t >= self.trial_timeout:
                trial_result = self._finish_trial("timeout", t)

        return UpdateResult(True, None, events, blocks, first_seq, trial_result)


# ---------------------------------------------------------------------------
# socket layer: newline-delimited JSON, one session per connection
# ---------------------------------------------------------------------------

def resolve_addr(addr: str | None = None) -> tuple[str, int]:
    """host:port from the argument, the SONIC_GUIDE_ADDR env var, or the
    default, in that order."""
    value = addr or os.environ.get(ADDR_ENV_VAR) or DEFAULT_ADDR
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise ServiceError(f"bad address {value!r}, expected host:port")
    return host, int(port)


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: GuidanceServer = self.server  # type: ignore[assignment]
        outbox: queue.Queue = queue.Queue(maxsize=512)
        stop = threading.Event()

        def writer() -> None:
            while not stop.is_set() or not outbox.empty():
                try:
                    payload = outbox.get(timeout=0.1)
                except queue.Empty:
                    continue
                if payload is None:
                    break
                try:
                    self.wfile.write(payload)
                except OSError:
                    stop.set()
                    break

        thread = threading.Thread(target=writer, daemon=True)
        thread.start()

        def send(message: dict) -> None:
            outbox.put(json.dumps(message, separators=(",", ":")).encode() + b"\n")

        def send_audio(message: dict) -> None:
            # audio may be dropped for a slow client; control traffic never is
            try:
                outbox.put_nowait(json.dumps(message, separators=(",", ":")).encode() + b"\n")
            except queue.Full:
                server.dropped_blocks += 1

        log = None
        if server.log_dir is not None:
            session_id = uuid.uuid4().hex[:12]
            log = SessionLogWriter(Path(server.log_dir) / f"session-{session_id}.jsonl")
        else:
            session_id = uuid.uuid4().hex[:12]
        session = GuidanceSession(
            mapping_cfg=server.mapping_cfg,
            synth_cfg=server.synth_cfg,
            mode=server.mode,
            dwell_time=server.dwell_time,
            trial_timeout=server.trial_timeout,
            log=log,
            session_id=session_id,
        )
        sr = session.synth_cfg.sample_rate

        greeted = False
        try:
            for raw in self.rfile:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("message must be an object with a 'type'")
                except ValueError as exc:
                    send({"type": "error", "message": f"malformed message: {exc}"})
                    continue

                kind = msg["type"]
                if kind == "hello":
                    version = msg.get("version", PROTOCOL_VERSION)
                    if version != PROTOCOL_VERSION:
                        send({"type": "error", "message":
                              f"protocol version {version} unsupported (need {PROTOCOL_VERSION})"})
                        break   # refuse the connection
                    if "mode" in msg:
                        session.mode = msg["mode"]
                        session.renderer.mode = msg["mode"]
                    greeted = True
                    send({
                        "type": "hello_ack",
                        "version": PROTOCOL_VERSION,
                        "session_id": session.session_id,
                        "rate": sr,
                        "block_size": session.synth_cfg.block_size,
                        "mode": session.mode,
                    })
                elif not greeted:
                    send({"type": "error", "message": "hello required first"})
                elif kind == "pos":
                    try:
                        result = session.update_position(
                            float(msg["t"]), float(msg["x"]), float(msg["y"]),
                            float(msg.get("z", 0.0)),
                        )
                    except (KeyError, TypeError, ValueError) as exc:
                        send({"type": "error", "message": f"bad pos message: {exc}"})
                        continue
                    if not result.accepted:
                        send({"type": "error", "message": result.reason, "recoverable": True})
                        continue
                    for i, block in enumerate(result.blocks):
                        send_audio({
                            "type": "audio",
                            "seq": result.first_seq + i,
                            "format": "pcm16le",
                            "rate": sr,
                            "data": base64.b64encode(encode_pcm16(block)).decode(),
                        })
                    for event in result.events:
                        send({"type": "event", "kind": event.kind, "t": event.time})
                    if result.trial_result is not None:
                        send({"type": "trial_result", **result.trial_result.to_dict()})
                elif kind == "start_trial":
                    try:
                        descriptor = session.start_trial(
                            mode=msg.get("mode"),
                            start_distance=float(msg.get("start_distance", 0.8)),
                            seed=msg.get("seed"),
                        )
                        send({"type": "trial_started", **descriptor})
                    except ServiceError as exc:
                        send({"type": "error", "message": str(exc)})
                elif kind == "abort":
                    record = session.abort_trial()
                    if record is not None:
                        send({"type": "trial_result", **record.to_dict()})
                    else:
                        send({"type": "error", "message": "no active trial"})
                else:
                    send({"type": "error", "message": f"unknown message type {kind!r}"})
        finally:
            session.abort_trial()
            if log is not None:
                log.close()
            stop.set()
            outbox.put(None)
            thread.join(timeout=2.0)


class GuidanceServer(socketserver.ThreadingTCPServer):
    """Threaded local guidance service; one session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        addr: str | None = None,
        mapping_cfg: MappingConfig | None = None,
        synth_cfg: SynthConfig | None = None,
        mode: str = "3d",
        dwell_time: float = 0.5,
        trial_timeout: float = 60.0,
        log_dir: str | Path | None = None,
    ):
        self.mapping_cfg = mapping_cfg if mapping_cfg is not None else MappingConfig()
        self.synth_cfg = synth_cfg if synth_cfg is not None else SynthConfig()
        self.mode = mode
        self.dwell_time = dwell_time
        self.trial_timeout = trial_timeout
        self.log_dir = str(log_dir) if log_dir is not None else None
        self.dropped_blocks = 0
        if self.log_dir is not None:
            Path(self.log_dir).mkdir(parents=True, exist_ok=True)
        super().__init__(resolve_addr(addr), _SessionHandler)

    @property
    def addr(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread
