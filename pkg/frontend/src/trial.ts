/**
 * Pointer-to-workspace mapping and the trial countdown driver.
 *
 * The pointer maps the x-y workspace square onto the arena element;
 * the scroll wheel steps z (3D mode only).  The countdown runs UI-side
 * and fires start_trial when it expires, per the flow: start button,
 * countdown, sound-only navigation, result screen.
 */

import { GuidanceClient } from "./client.js";

export interface Rect {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Map a pointer event position onto [-1, 1]^2 (screen up = +y). */
export function pointerToWorkspace(
  clientX: number,
  clientY: number,
  rect: Rect,
): { x: number; y: number } {
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  return {
    x: clamp((2 * (clientX - rect.left)) / rect.width - 1),
    y: clamp(1 - (2 * (clientY - rect.top)) / rect.height),
  };
}

export const Z_WHEEL_STEP = 0.05;

/** One wheel notch steps z by +-Z_WHEEL_STEP, clamped to the workspace. */
export function wheelToZ(currentZ: number, deltaY: number, step = Z_WHEEL_STEP): number {
  const next = currentZ + (deltaY < 0 ? step : -step);
  return Math.max(-1, Math.min(1, next));
}

export interface CountdownScheduler {
  (callback: () => void, ms: number): unknown;
}

/**
 * Run the pre-trial countdown, then ask the server to start the trial.
 * Returns once the trial is active.
 */
export async function runTrialCountdown(
  client: GuidanceClient,
  seconds: number,
  seed: number | undefined,
  schedule: CountdownScheduler = (cb, ms) => setTimeout(cb, ms),
): Promise<void> {
  client.beginCountdown(seconds);
  for (let i = 0; i < seconds; i++) {
    await new Promise<void>((resolve) => schedule(() => resolve(), 1000));
    client.tickCountdown();
  }
  await client.startTrial(seed);
}
