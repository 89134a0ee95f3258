import { describe, expect, it } from "vitest";

import {
  buildSchedule,
  generatePinSet,
  mulberry32,
  STUDY_PIN_SET_SIZES,
} from "../src/pinset.js";

describe("mulberry32", () => {
  it("is deterministic and stays in [0, 1)", () => {
    const a = mulberry32(123);
    const b = mulberry32(123);
    for (let i = 0; i < 100; i++) {
      const va = a();
      expect(va).toBe(b());
      expect(va).toBeGreaterThanOrEqual(0);
      expect(va).toBeLessThan(1);
    }
  });
});

describe("generatePinSet", () => {
  it("yields the requested number of distinct 4-digit PINs", () => {
    for (const count of STUDY_PIN_SET_SIZES) {
      const pins = generatePinSet(count, 5);
      expect(pins).toHaveLength(count);
      expect(new Set(pins).size).toBe(count);
      for (const pin of pins) {
        expect(pin).toMatch(/^[0-9]{4}$/);
      }
    }
  });

  it("is deterministic in the seed", () => {
    expect(generatePinSet(15, 42)).toEqual(generatePinSet(15, 42));
    expect(generatePinSet(15, 42)).not.toEqual(generatePinSet(15, 43));
  });

  it("rejects non-study sizes unless overridden", () => {
    expect(() => generatePinSet(20, 1)).toThrow(/15\/30\/50/);
    expect(generatePinSet(20, 1, true)).toHaveLength(20);
  });

  it("rejects out-of-range counts even with the override", () => {
    expect(() => generatePinSet(0, 1, true)).toThrow(/out of range/);
    expect(() => generatePinSet(10001, 1, true)).toThrow(/out of range/);
  });
});

describe("buildSchedule", () => {
  it("contains every PIN exactly reps times", () => {
    const pins = generatePinSet(15, 9);
    const schedule = buildSchedule(pins, 3, 9);
    expect(schedule).toHaveLength(45);
    for (const pin of pins) {
      expect(schedule.filter((p) => p === pin)).toHaveLength(3);
    }
  });

  it("is deterministic in the seed and shuffled", () => {
    const pins = generatePinSet(15, 9);
    expect(buildSchedule(pins, 3, 9)).toEqual(buildSchedule(pins, 3, 9));
    const flat = pins.flatMap((p) => [p, p, p]);
    expect(buildSchedule(pins, 3, 9)).not.toEqual(flat);
  });

  it("rejects reps below one", () => {
    expect(() => buildSchedule(["1234"], 0, 1)).toThrow(/at least 1/);
  });
});
