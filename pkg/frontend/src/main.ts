/**
 * Browser entry point: the target-finding game.
 *
 * Move the pointer over the arena (scroll to change depth in 3D mode)
 * and follow the sound to the invisible target.  Audio streams from
 * the guidance service through the WebSocket bridge.
 */

import { GuidanceClient, UiState } from "./client.js";
import { PcmPlayer, WebAudioOut } from "./player.js";
import { buildPlotModel, drawPlot } from "./plot.js";
import { Mode } from "./protocol.js";
import { pointerToWorkspace, runTrialCountdown, wheelToZ } from "./trial.js";
import { WebSocketTransport } from "./transport.js";

const POINTER_SEND_HZ = 60;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function connect(): Promise<void> {
  const addr = (el<HTMLInputElement>("addr").value || "ws://127.0.0.1:7854").trim();
  const mode = el<HTMLSelectElement>("mode").value as Mode;

  const audioCtx = new AudioContext({ sampleRate: 48000 });
  await audioCtx.resume();
  const player = new PcmPlayer(new WebAudioOut(audioCtx));

  const ws = new WebSocket(addr);
  const transport = new WebSocketTransport(ws);
  await transport.opened();
  const client = new GuidanceClient(transport, player, {
    mode,
    now: () => performance.now() / 1000,
  });
  await client.hello();

  const arena = el<HTMLDivElement>("arena");
  const status = el<HTMLDivElement>("status");
  const stats = el<HTMLDivElement>("stats");
  const startButton = el<HTMLButtonElement>("start");
  const canvas = el<HTMLCanvasElement>("plot");
  const zGauge = el<HTMLDivElement>("zgauge");

  let pointer = { x: 0, y: 0, z: 0 };
  arena.addEventListener("pointermove", (ev) => {
    const rect = arena.getBoundingClientRect();
    const mapped = pointerToWorkspace(ev.clientX, ev.clientY, rect);
    pointer = { ...pointer, ...mapped };
  });
  arena.addEventListener("wheel", (ev) => {
    if (client.getState().mode === "3d") {
      ev.preventDefault();
      pointer = { ...pointer, z: wheelToZ(pointer.z, ev.deltaY) };
    }
  });

  // pointer sampling at a fixed cadence keeps the audio stream moving
  // even when the hand rests (the engine clock follows timestamps)
  setInterval(() => client.sendPosition(pointer.x, pointer.y, pointer.z), 1000 / POINTER_SEND_HZ);

  startButton.addEventListener("click", () => {
    void runTrialCountdown(client, 3, undefined);
  });

  function render(state: UiState): void {
    startButton.disabled = state.trial === "active" || state.trial === "countdown";
    const lines = [
      `session ${state.sessionId ?? "-"} (${state.mode}), ${state.connection}`,
      state.trial === "countdown" ? `starting in ${state.countdown}...` : "",
      state.trial === "active" ? "find the target by sound" : "",
      state.lastError ? `error: ${state.lastError}` : "",
      state.reconnectOffered ? "connection lost - reload to reconnect" : "",
    ];
    status.textContent = lines.filter(Boolean).join("\n");
    stats.textContent =
      `latency ${state.latencyMs === null ? "-" : state.latencyMs.toFixed(0)} ms | ` +
      `blocks ${state.player.blocksReceived} | gaps ${state.player.seqGaps} | ` +
      `underruns ${state.player.underruns} | buffer ${(state.player.bufferedSeconds * 1000).toFixed(0)} ms`;

    // the z gauge is visible only outside active trials (sound-only navigation)
    if (state.mode === "3d" && state.trial !== "active" && state.trial !== "countdown") {
      zGauge.style.visibility = "visible";
      zGauge.textContent = `z = ${pointer.z.toFixed(2)}`;
    } else {
      zGauge.style.visibility = "hidden";
    }

    const ctx = canvas.getContext("2d");
    if (ctx) {
      if (state.trial === "result" && state.result) {
        const model = buildPlotModel(state.result, canvas.width, canvas.height);
        drawPlot(ctx, model, canvas.width, canvas.height);
        const t = state.result.record.time_to_target;
        status.textContent +=
          `\ntrial ${state.result.record.trial_id}: ${state.result.record.outcome}` +
          (t !== null ? ` in ${t.toFixed(2)} s` : "") +
          `, path ${state.result.record.path_length.toFixed(2)}`;
        if (state.result.record.outcome === "hit") {
          playFanfare(audioCtx);
        }
      } else {
        ctx.clearRect(0, 0, canvas.width, canvas.height);
      }
    }
  }

  let fanfarePlayed = false;
  function playFanfare(ctx: AudioContext): void {
    if (fanfarePlayed) {
      return;
    }
    fanfarePlayed = true;
    setTimeout(() => (fanfarePlayed = false), 2000);
    const t0 = ctx.currentTime + 0.05;
    [523.25, 659.26, 783.99, 1046.5].forEach((freq, i) => {
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.frequency.value = freq;
      gain.gain.setValueAtTime(0.15, t0 + i * 0.09);
      gain.gain.exponentialRampToValueAtTime(1e-3, t0 + i * 0.09 + 0.4);
      osc.connect(gain).connect(ctx.destination);
      osc.start(t0 + i * 0.09);
      osc.stop(t0 + i * 0.09 + 0.45);
    });
  }

  client.subscribe(render);
  render(client.getState());
}

el<HTMLButtonElement>("connect").addEventListener("click", () => {
  void connect().catch((err) => {
    el<HTMLDivElement>("status").textContent = `connection failed: ${err}`;
  });
});
