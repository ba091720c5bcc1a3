/**
 * Session client and single state store.
 *
 * All network and pointer input funnels through this class; the UI
 * renders from its immutable state snapshots.  During an active trial
 * the state intentionally carries no target information (the trial
 * descriptor stays private until the result arrives): navigation is by
 * sound alone.
 */

import {
  AudioMsg,
  EventMsg,
  HelloAckMsg,
  Mode,
  PROTOCOL_VERSION,
  ServerMsg,
  TrialResultMsg,
  TrialStartedMsg,
  decodeServerMsg,
  encodeMsg,
} from "./protocol.js";
import { decodeAudioData } from "./pcm.js";
import { PcmPlayer, PlayerStats } from "./player.js";
import { Transport } from "./transport.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";
export type TrialStatus = "idle" | "countdown" | "active" | "result";

export interface TrialSummary {
  record: TrialResultMsg;
  /** the pointer path this client sent during the trial: [t, x, y, z] */
  path: [number, number, number, number][];
  startDistance: number;
  targetRadius: number;
}

export interface UiState {
  connection: ConnectionStatus;
  sessionId: string | null;
  mode: Mode;
  reconnectOffered: boolean;
  trial: TrialStatus;
  countdown: number;
  activeTrialId: number | null;
  result: TrialSummary | null;
  pointer: { x: number; y: number; z: number };
  latencyMs: number | null;
  player: PlayerStats;
  trialEvents: { kind: string; t: number }[];
  lastError: string | null;
}

export interface ClientOptions {
  mode?: Mode;
  /** monotone wall clock in seconds; injectable for tests */
  now?: () => number;
}

const INITIAL_PLAYER_STATS: PlayerStats = {
  blocksReceived: 0,
  seqGaps: 0,
  underruns: 0,
  bufferedSeconds: 0,
};

export class GuidanceClient {
  private state: UiState;
  private listeners = new Set<(s: UiState) => void>();
  private readonly now: () => number;
  private epoch: number;
  private lastSentT = -1;
  private lastPosWall: number | null = null;
  private pendingTrial: TrialStartedMsg | null = null;
  private sentPath: [number, number, number, number][] = [];
  private helloResolve: ((ack: HelloAckMsg) => void) | null = null;
  private trialResolve: ((msg: TrialStartedMsg) => void) | null = null;

  /** every trial_result the server ever sent on this session */
  readonly trialRecords: TrialResultMsg[] = [];

  constructor(
    private readonly transport: Transport,
    private readonly player: PcmPlayer,
    options: ClientOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now() / 1000);
    this.epoch = this.now();
    this.state = {
      connection: "connecting",
      sessionId: null,
      mode: options.mode ?? "2d",
      reconnectOffered: false,
      trial: "idle",
      countdown: 0,
      activeTrialId: null,
      result: null,
      pointer: { x: 0, y: 0, z: 0 },
      latencyMs: null,
      player: INITIAL_PLAYER_STATS,
      trialEvents: [],
      lastError: null,
    };
    transport.onLine((line) => this.handleLine(line));
    transport.onClose(() => this.handleClose());
  }

  // -- state store ---------------------------------------------------------

  getState(): UiState {
    return this.state;
  }

  subscribe(listener: (s: UiState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private setState(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  // -- protocol ------------------------------------------------------------

  hello(): Promise<HelloAckMsg> {
    this.transport.send(
      encodeMsg({ type: "hello", version: PROTOCOL_VERSION, mode: this.state.mode }),
    );
    return new Promise((resolve) => {
      this.helloResolve = resolve;
    });
  }

  /** Update the pointer and send one position message (monotone t). */
  sendPosition(x: number, y: number, z: number): void {
    const t = Math.max(this.now() - this.epoch, this.lastSentT + 1e-6);
    this.lastSentT = t;
    this.lastPosWall = this.now();
    this.setState({ pointer: { x, y, z } });
    this.transport.send(encodeMsg({ type: "pos", t, x, y, z }));
    if (this.state.trial === "active") {
      this.sentPath.push([t, x, y, z]);
    }
  }

  beginCountdown(seconds: number): void {
    if (this.state.trial === "active" || this.state.trial === "countdown") {
      return;
    }
    this.setState({ trial: "countdown", countdown: seconds, result: null });
  }

  tickCountdown(): void {
    if (this.state.trial !== "countdown") {
      return;
    }
    const left = this.state.countdown - 1;
    if (left > 0) {
      this.setState({ countdown: left });
    }
    // the start_trial is sent by the owner when the countdown reaches 0
    else {
      this.setState({ countdown: 0 });
    }
  }

  startTrial(seed?: number): Promise<TrialStartedMsg> {
    this.transport.send(
      encodeMsg({ type: "start_trial", mode: this.state.mode, seed }),
    );
    return new Promise((resolve) => {
      this.trialResolve = resolve;
    });
  }

  abortTrial(): void {
    this.transport.send(encodeMsg({ type: "abort" }));
  }

  close(): void {
    this.transport.close();
  }

  // -- message handling ----------------------------------------------------

  private handleLine(line: string): void {
    let msg: ServerMsg;
    try {
      msg = decodeServerMsg(line);
    } catch (err) {
      this.setState({ lastError: String(err) });
      return;
    }
    switch (msg.type) {
      case "hello_ack":
        this.setState({ connection: "connected", sessionId: msg.session_id, mode: msg.mode });
        this.helloResolve?.(msg);
        this.helloResolve = null;
        break;
      case "audio":
        this.handleAudio(msg);
        break;
      case "event":
        this.handleEvent(msg);
        break;
      case "trial_started":
        this.pendingTrial = msg;
        this.sentPath = [];
        this.setState({
          trial: "active",
          countdown: 0,
          activeTrialId: msg.trial_id,
          trialEvents: [],
          result: null,
        });
        this.trialResolve?.(msg);
        this.trialResolve = null;
        break;
      case "trial_result":
        this.handleResult(msg);
        break;
      case "error":
        this.setState({ lastError: msg.message });
        break;
    }
  }

  private handleAudio(msg: AudioMsg): void {
    this.player.push(msg.seq, decodeAudioData(msg.data));
    const latency =
      this.lastPosWall !== null ? (this.now() - this.lastPosWall) * 1000 : null;
    this.setState({ player: this.player.stats, latencyMs: latency });
  }

  private handleEvent(msg: EventMsg): void {
    if (this.state.trial === "active") {
      this.setState({ trialEvents: [...this.state.trialEvents, { kind: msg.kind, t: msg.t }] });
    }
  }

  private handleResult(msg: TrialResultMsg): void {
    this.trialRecords.push(msg);
    const pending = this.pendingTrial;
    this.pendingTrial = null;
    this.setState({
      trial: "result",
      activeTrialId: null,
      result: {
        record: msg,
        path: this.sentPath,
        startDistance: pending?.start_distance ?? 0.8,
        targetRadius: msg.target_radius,
      },
    });
  }

  private handleClose(): void {
    const aborted = this.state.trial === "active" || this.state.trial === "countdown";
    this.setState({
      connection: "disconnected",
      reconnectOffered: true,
      trial: "idle",
      activeTrialId: null,
      lastError: aborted ? "connection lost, trial aborted" : this.state.lastError,
    });
  }
}
