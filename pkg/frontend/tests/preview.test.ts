import { describe, expect, it } from "vitest";

import { pushCapped, renderSparkline, SparklineContext } from "../src/preview.js";

interface Recorded {
  clears: number;
  begins: number;
  strokes: number;
  points: { x: number; y: number }[];
}

function recordingContext(): SparklineContext & { log: Recorded } {
  const log: Recorded = { clears: 0, begins: 0, strokes: 0, points: [] };
  return {
    log,
    strokeStyle: "",
    lineWidth: 0,
    clearRect: () => {
      log.clears++;
    },
    beginPath: () => {
      log.begins++;
    },
    moveTo: (x, y) => {
      log.points.push({ x, y });
    },
    lineTo: (x, y) => {
      log.points.push({ x, y });
    },
    stroke: () => {
      log.strokes++;
    },
  };
}

describe("pushCapped", () => {
  it("keeps only the most recent values once full", () => {
    const buf: number[] = [];
    for (let i = 0; i < 10; i++) {
      pushCapped(buf, i, 4);
    }
    expect(buf).toEqual([6, 7, 8, 9]);
  });

  it("leaves short buffers untouched", () => {
    const buf = [1, 2];
    pushCapped(buf, 3, 10);
    expect(buf).toEqual([1, 2, 3]);
  });
});

describe("renderSparkline", () => {
  it("always clears, draws nothing for fewer than two points", () => {
    const ctx = recordingContext();
    renderSparkline(ctx, [5], 100, 40);
    expect(ctx.log.clears).toBe(1);
    expect(ctx.log.begins).toBe(0);
    expect(ctx.log.points).toHaveLength(0);
  });

  it("draws one point per value inside the canvas bounds", () => {
    const ctx = recordingContext();
    const values = [10, 50, 30, 90, 20];
    renderSparkline(ctx, values, 120, 48);
    expect(ctx.log.begins).toBe(1);
    expect(ctx.log.strokes).toBe(1);
    expect(ctx.log.points).toHaveLength(values.length);
    for (const p of ctx.log.points) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(120);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(48);
    }
    const min = ctx.log.points.reduce((acc, p) => Math.min(acc, p.y), Infinity);
    const max = ctx.log.points.reduce((acc, p) => Math.max(acc, p.y), -Infinity);
    expect(max).toBeGreaterThan(min); // varying data spans some vertical range
  });

  it("draws a flat line for constant data instead of dividing by zero", () => {
    const ctx = recordingContext();
    renderSparkline(ctx, [42, 42, 42], 100, 40);
    const ys = new Set(ctx.log.points.map((p) => p.y));
    expect(ys.size).toBe(1);
    const y = [...ys][0]!;
    expect(Number.isFinite(y)).toBe(true);
    expect(y).toBeGreaterThanOrEqual(0);
    expect(y).toBeLessThanOrEqual(40);
  });
});
