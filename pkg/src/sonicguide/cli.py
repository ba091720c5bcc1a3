"""Command-line entry point.

Subcommands: ``render`` a trajectory to WAV, ``sweep`` one axis as a
demo, ``analyze`` audio into feature frames, ``serve`` the interactive
guidance service, ``agent`` the simulated-operator study.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


from .agent import OperatorConfig, run_simulated_operator, summarize_trials
from .config import ConfigError, load_config
from .mapping import MappingError
from .probes import ProbeError, decode_position, extract_features
from .service import GuidanceServer, ServiceError
from .stream import StreamError, render_stream
from .synth import AudioBlock, SynthError
from .trajectory import TrajectoryError, load_trajectory, parse_trajectory
from .wavio import WavError, read_wav, write_wav

_INPUT_ERRORS = (
    ConfigError, TrajectoryError, MappingError, SynthError, StreamError,
    WavError, ServiceError, ProbeError, FileNotFoundError, IsADirectoryError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonicguide",
        description="Auditory guidance: sonify 3D displacement, analyze it back, run target-finding sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None,
                       help="key = value config file (flags override it)")

    p = sub.add_parser("render", help="render a trajectory CSV to WAV")
    p.add_argument("--traj", type=Path, required=True, help="trajectory CSV (t,x,y,z)")
    p.add_argument("--out", type=Path, required=True, help="output WAV path")
    p.add_argument("--mode", choices=("2d", "3d"), default=None,
                   help="earcon binding; default: inferred from the trajectory")
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p.add_argument("--duration", type=float, default=None,
                   help="override output duration in seconds")
    p.add_argument("--hold", action="store_true",
                   help="hold each position until the next (session-log replay) "
                        "instead of interpolating")
    add_config(p)

    p = sub.add_parser("sweep", help="write a one-axis -1 to +1 demo sweep (CSV + WAV)")
    p.add_argument("--axis", choices=("x", "y", "z"), required=True)
    p.add_argument("--out", type=Path, required=True, help="output WAV; CSV lands beside it")
    p.add_argument("--duration", type=float, default=20.0)
    add_config(p)

    p = sub.add_parser("analyze", help="extract feature frames (JSON lines) from audio")
    p.add_argument("--in", dest="infile", type=Path, required=True, help="input WAV")
    p.add_argument("--decode", action="store_true", help="also decode positions")
    p.add_argument("--window", type=float, default=1.0, help="analysis window seconds")
    p.add_argument("--hop", type=float, default=0.5, help="window hop seconds")
    add_config(p)

    p = sub.add_parser("serve", help="run the interactive guidance service")
    p.add_argument("--addr", default=None, help="host:port (default: $SONIC_GUIDE_ADDR or 127.0.0.1:7853)")
    p.add_argument("--mode", choices=("2d", "3d"), default=None)
    p.add_argument("--log-dir", type=Path, default=None)
    add_config(p)

    p = sub.add_parser("agent", help="run the simulated-operator target-finding study")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", type=Path, required=True, help="summary JSON output")
    p.add_argument("--mode", choices=("2d", "3d"), default="2d")
    p.add_argument("--start-distance", type=float, default=0.8)
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--trial-dir", type=Path, default=None,
                   help="directory for per-trial path CSVs (default: <report>_trials/)")
    add_config(p)

    return parser


def _cmd_render(args) -> int:
    cfg = load_config(args.config)
    traj = load_trajectory(args.traj)
    mode = args.mode or traj.mode
    audio, events = render_stream(
        traj.samples, cfg.mapping, cfg.synth, mode=mode, duration=args.duration,
        interpolate=not args.hold,
    )
    write_wav(audio, args.out, args.format)
    print(f"wrote {args.out}: {audio.duration:.3f} s, {len(events)} events")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows = []
    count = 201
    for i in range(count):
        t = args.duration * i / (count - 1)
        value = -1.0 + 2.0 * i / (count - 1)
        coords = {"x": 0.0, "y": 0.0, "z": 0.0, args.axis: value}
        rows.append(f"{t!r},{coords['x']!r},{coords['y']!r},{coords['z']!r}")
    csv_text = "t,x,y,z\n" + "\n".join(rows) + "\n"
    csv_path = args.out.with_suffix(".csv")
    csv_path.write_text(csv_text)

    traj = parse_trajectory(csv_text, mode="3d")
    audio, events = render_stream(traj.samples, cfg.mapping, cfg.synth, mode="3d")
    write_wav(audio, args.out, "float32")
    print(f"wrote {args.out} and {csv_path}: {audio.duration:.3f} s, {len(events)} events")
    return 0


def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    audio = read_wav(args.infile)
    sr = audio.sample_rate
    window = round(args.window * sr)
    hop = max(1, round(args.hop * sr))
    if window > len(audio.frames):
        raise ProbeError(
            f"audio shorter ({len(audio.frames) / sr:.2f} s) than the analysis window"
        )
    for start in range(0, len(audio.frames) - window + 1, hop):
        chunk = AudioBlock(sr, audio.frames[start:start + window])
        record: dict = {"t": start / sr}
        try:
            frame = extract_features(chunk)
            record.update(frame.as_dict())
            if args.decode:
                est = decode_position(chunk, cfg.mapping, cfg.synth)
                record["decoded"] = {"x": est.x, "y": est.y, "z": est.z}
        except ProbeError as exc:
            record["error"] = str(exc)
        print(json.dumps(record))
    return 0


def _cmd_serve(args) -> int:
    overrides = {"mode": args.mode, "log_dir": str(args.log_dir) if args.log_dir else None,
                 "addr": args.addr}
    cfg = load_config(args.config, overrides)
    server = GuidanceServer(
        addr=cfg.service.addr,
        mapping_cfg=cfg.mapping,
        synth_cfg=cfg.synth,
        mode=cfg.service.mode,
        dwell_time=cfg.service.dwell_time,
        trial_timeout=cfg.service.trial_timeout,
        log_dir=cfg.service.log_dir,
    )
    print(f"sonicguide service on {server.addr} (mode {cfg.service.mode}), Ctrl-C to stop")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return 0


def _cmd_agent(args) -> int:
    cfg = load_config(args.config)
    op_cfg = OperatorConfig(
        trials=args.trials,
        mode=args.mode,
        seed=args.seed,
        start_distance=args.start_distance,
        max_steps=args.max_steps,
    )
    records = run_simulated_operator(op_cfg, cfg.mapping, cfg.synth)
    summary = summarize_trials(records)
    summary.update({
        "mode": args.mode,
        "seed": args.seed,
        "start_distance": args.start_distance,
        "target_radius": op_cfg.target_radius,
    })

    trial_dir = args.trial_dir or args.report.with_name(args.report.stem + "_trials")
    trial_dir.mkdir(parents=True, exist_ok=True)
    for record in records:
        lines = ["t,x,y,z"]
        lines += [f"{t!r},{p[0]!r},{p[1]!r},{p[2]!r}" for t, p in record.path]
        (trial_dir / f"trial_{record.trial_id:03d}.csv").write_text("\n".join(lines) + "\n")

    args.report.parent.mkdir(parents=True, exist_ok=True)
    args.report.write_text(json.dumps(summary, indent=2) + "\n")
    print(
        f"{summary['hits']}/{summary['trials']} hits "
        f"(rate {summary['hit_rate']:.2f}), median steps {summary['median_steps']}, "
        f"report {args.report}"
    )
    return 0


_COMMANDS = {
    "render": _cmd_render,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "serve": _cmd_serve,
    "agent": _cmd_agent,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"sonicguide {args.command}: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # pragma: no cover - unexpected failure path
        print(f"sonicguide {args.command}: unexpected error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
