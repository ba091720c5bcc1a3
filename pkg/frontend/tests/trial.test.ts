import { describe, expect, it } from "vitest";

import { pointerToWorkspace, wheelToZ } from "../src/trial.js";

const RECT = { left: 100, top: 50, width: 400, height: 400 };

describe("pointerToWorkspace", () => {
  it("maps the arena corners onto the unit square", () => {
    expect(pointerToWorkspace(100, 50, RECT)).toEqual({ x: -1, y: 1 });
    expect(pointerToWorkspace(500, 450, RECT)).toEqual({ x: 1, y: -1 });
    expect(pointerToWorkspace(300, 250, RECT)).toEqual({ x: 0, y: 0 });
  });

  it("screen up is workspace +y", () => {
    const high = pointerToWorkspace(300, 100, RECT);
    const low = pointerToWorkspace(300, 400, RECT);
    expect(high.y).toBeGreaterThan(low.y);
  });

  it("clamps outside the arena", () => {
    expect(pointerToWorkspace(900, -100, RECT)).toEqual({ x: 1, y: 1 });
  });
});

describe("wheelToZ", () => {
  it("steps by 0.05 per notch, scroll-up raises", () => {
    expect(wheelToZ(0, -120)).toBeCloseTo(0.05, 9);
    expect(wheelToZ(0.05, 120)).toBeCloseTo(0, 9);
  });

  it("clamps to the workspace", () => {
    expect(wheelToZ(0.98, -120)).toBe(1);
    expect(wheelToZ(-0.98, 120)).toBe(-1);
  });
});
