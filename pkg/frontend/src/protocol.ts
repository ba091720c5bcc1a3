/**
 * The guidance-service wire protocol: newline-delimited JSON messages.
 * Mirrors the server's message shapes exactly; no UI-side extensions.
 */

export const PROTOCOL_VERSION = 1;

export type Mode = "2d" | "3d";

export interface HelloMsg {
  type: "hello";
  version: number;
  mode?: Mode;
}

export interface PosMsg {
  type: "pos";
  t: number;
  x: number;
  y: number;
  z: number;
}

export interface StartTrialMsg {
  type: "start_trial";
  mode?: Mode;
  start_distance?: number;
  seed?: number;
}

export interface AbortMsg {
  type: "abort";
}

export type ClientMsg = HelloMsg | PosMsg | StartTrialMsg | AbortMsg;

export interface HelloAckMsg {
  type: "hello_ack";
  version: number;
  session_id: string;
  rate: number;
  block_size: number;
  mode: Mode;
}

export interface AudioMsg {
  type: "audio";
  seq: number;
  format: "pcm16le";
  rate: number;
  data: string; // base64 PCM16 block
}

export interface EventMsg {
  type: "event";
  kind: "click" | "triad" | "zone_enter" | "zone_exit";
  t: number;
}

export interface TrialStartedMsg {
  type: "trial_started";
  trial_id: number;
  mode: Mode;
  start: { x: number; y: number; z: number };
  start_distance: number;
  target_radius: number;
}

export interface TrialResultMsg {
  type: "trial_result";
  trial_id: number;
  mode: Mode;
  start_time: number;
  end_time: number;
  start_position: number[];
  target_radius: number;
  outcome: "hit" | "timeout" | "abort";
  steps: number | null;
  time_to_target: number | null;
  path_length: number;
  events: { kind: string; time: number }[];
}

export interface ErrorMsg {
  type: "error";
  message: string;
  recoverable?: boolean;
}

export type ServerMsg =
  | HelloAckMsg
  | AudioMsg
  | EventMsg
  | TrialStartedMsg
  | TrialResultMsg
  | ErrorMsg;

export function encodeMsg(msg: ClientMsg): string {
  return JSON.stringify(msg) + "\n";
}

export function decodeServerMsg(line: string): ServerMsg {
  const parsed = JSON.parse(line) as { type?: string };
  if (typeof parsed !== "object" || parsed === null || typeof parsed.type !== "string") {
    throw new Error(`not a protocol message: ${line.slice(0, 120)}`);
  }
  return parsed as ServerMsg;
}

/**
 * Reassembles newline-delimited messages from arbitrarily chunked
 * transport reads (TCP segments and WebSocket frames need not align
 * with lines).
 */
export class LineDecoder {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((l) => l.length > 0);
  }
}
