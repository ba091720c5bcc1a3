"""Simulated operator: the machine stand-in for the human target-
finding study.  Each step it listens to a window of guidance audio at
its current position, decodes a displacement estimate with the probes,
and steps against it until it lands inside the target zone."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .earcons import detect_events, init_crossing_state
from .mapping import DisplacementVector, MappingConfig
from .probes import AmbiguityError, NoSignalError, decode_position
from .service import TrialRecord, _sample_start
from .stream import render_stream
from .synth import SynthConfig

__all__ = ["OperatorConfig", "run_simulated_operator", "summarize_trials"]

# paper-study geometry: a 4 mm target on a 4000 mm^2 screen; radius
# 2 mm over the sqrt(4000)/2 ~ 31.6 mm half-extent gives 0.063
STUDY_TARGET_RADIUS = 0.063


@dataclass(frozen=True)
class OperatorConfig:
    trials: int = 100
    mode: str = "2d"
    analysis_window: float = 1.0     # seconds listened per step
    step_gain: float = 0.5
    step_cap: float = 0.2            # max step norm
    max_steps: int = 50
    seed: int = 0
    start_distance: float = 0.8
    target_radius: float = STUDY_TARGET_RADIUS


def _run_trial(
    trial_id: int,
    cfg: OperatorConfig,
    mapping_cfg: MappingConfig,
    synth_cfg: SynthConfig,
) -> TrialRecord:
    rng = np.random.default_rng([cfg.seed, trial_id])
    pos = _sample_start(rng, cfg.mode, cfg.start_distance)
    crossing = init_crossing_state(pos, mapping_cfg, cfg.mode)  # type: ignore[arg-type]

    path = [(0.0, (pos.x, pos.y, pos.z))]
    events = []
    prev_move: np.ndarray | None = None
    outcome = "timeout"
    steps = cfg.max_steps

    for step in range(1, cfg.max_steps + 1):
        if pos.norm() <= mapping_cfg.target_radius:
            outcome = "hit"
            steps = step
            break

        audio, _ = render_stream(
            [(0.0, pos)], mapping_cfg, synth_cfg, mode=cfg.mode,
            duration=cfg.analysis_window,
        )
        try:
            estimate = decode_position(audio, mapping_cfg, synth_cfg)
            move = -cfg.step_gain * estimate.as_array()
        except AmbiguityError:
            # keep going, half a step along the last direction
            move = prev_move / 2.0 if prev_move is not None else np.zeros(3)
        except NoSignalError:
            move = np.zeros(3)

        if cfg.mode == "2d":
            move[2] = 0.0
        norm = float(np.linalg.norm(move))
        if norm > cfg.step_cap:
            move *= cfg.step_cap / norm
        prev_move = move

        t = step * cfg.analysis_window
        nxt = DisplacementVector(pos.x + move[0], pos.y + move[1], pos.z + move[2])
        events.extend(detect_events(pos, nxt, crossing, mapping_cfg,
                                    t_prev=t - cfg.analysis_window, t_next=t))
        pos = nxt
        path.append((t, (pos.x, pos.y, pos.z)))

    length = 0.0
    for (_, a), (_, b) in zip(path, path[1:]):
        length += math.dist(a, b)
    final_t = path[-1][0]
    return TrialRecord(
        trial_id=trial_id,
        mode=cfg.mode,
        start_time=0.0,
        end_time=final_t,
        start_position=path[0][1],
        target_radius=mapping_cfg.target_radius,
        outcome=outcome,
        steps=steps,
        time_to_target=final_t if outcome == "hit" else None,
        path_length=length,
        path=path,
        events=events,
    )


def run_simulated_operator(
    cfg: OperatorConfig,
    mapping_cfg: MappingConfig | None = None,
    synth_cfg: SynthConfig | None = None,
) -> list[TrialRecord]:
    """Run seeded target-finding trials and return their records.

    The mapping config is re-based onto the requested target radius so
    both the zone noise and the hit test use the study geometry.
    """
    base = mapping_cfg if mapping_cfg is not None else MappingConfig()
    mcfg = replace(base, target_radius=cfg.target_radius)
    scfg = synth_cfg if synth_cfg is not None else SynthConfig()
    return [_run_trial(k, cfg, mcfg, scfg) for k in range(cfg.trials)]


def summarize_trials(records: list[TrialRecord]) -> dict:
    hits = [r for r in records if r.outcome == "hit"]
    hit_steps = sorted(r.steps for r in hits if r.steps is not None)
    times = sorted(r.time_to_target for r in hits if r.time_to_target is not None)
    return {
        "trials": len(records),
        "hits": len(hits),
        "hit_rate": len(hits) / len(records) if records else 0.0,
        "median_steps": float(np.median(hit_steps)) if hit_steps else None,
        "median_time_to_target": float(np.median(times)) if times else None,
    }
