import { describe, expect, it } from "vitest";

import { CaptureController, Key } from "../src/capture.js";
import { serializeSession } from "../src/format.js";
import { runScriptedCapture } from "./helpers.js";

function makeController(overrides: Partial<ConstructorParameters<typeof CaptureController>[0]> = {}) {
  return new CaptureController({
    pinCount: 15,
    reps: 3,
    seed: 42,
    inputMethod: "thumb-same-hand",
    ...overrides,
  });
}

/** Type the current prompt correctly and confirm it. */
function typePrompt(controller: CaptureController, tRef: { t: number }): void {
  const pin = controller.currentPrompt();
  expect(pin).not.toBeNull();
  for (const digit of pin!) {
    expect(controller.press(digit as Key, (tRef.t += 10))).toBe("recorded");
  }
  expect(controller.press("OK", (tRef.t += 10))).toBe("committed");
}

describe("CaptureController basics", () => {
  it("enforces the study PIN-set sizes unless overridden", () => {
    expect(() => makeController({ pinCount: 7 })).toThrow(/15\/30\/50/);
    const small = makeController({ pinCount: 7, allowAnyPinCount: true });
    expect(small.pins).toHaveLength(7);
  });

  it("walks the schedule as prompts are committed", () => {
    const c = makeController();
    expect(c.schedule).toHaveLength(45);
    const tRef = { t: 0 };
    expect(c.committedCount()).toBe(0);
    typePrompt(c, tRef);
    expect(c.committedCount()).toBe(1);
    expect(c.currentPrompt()).toBe(c.schedule[1]);
  });

  it("reports completion and ignores further presses", () => {
    const c = makeController({ pinCount: 2, reps: 1, allowAnyPinCount: true });
    const tRef = { t: 0 };
    typePrompt(c, tRef);
    typePrompt(c, tRef);
    expect(c.isDone()).toBe(true);
    expect(c.currentPrompt()).toBeNull();
    expect(c.press("1", (tRef.t += 10))).toBe("ignored");
  });
});

describe("voiding", () => {
  it("voids on a wrong digit and re-prompts the same PIN with no leftover taps", () => {
    const c = makeController();
    const pin = c.currentPrompt()!;
    const wrong = pin[1] === "0" ? "1" : "0"; // differs from the next expected digit
    expect(c.press(pin[0] as Key, 10)).toBe("recorded");
    expect(c.press(wrong as Key, 20)).toBe("voided");
    expect(c.voidedCount()).toBe(1);
    expect(c.attemptLength()).toBe(0);
    expect(c.currentPrompt()).toBe(pin);
    const exported = c.buildExport("none");
    expect(exported.taps).toHaveLength(0);
    expect(exported.pins).toHaveLength(0);
  });

  it("voids on DEL", () => {
    const c = makeController();
    const pin = c.currentPrompt()!;
    c.press(pin[0] as Key, 10);
    expect(c.press("DEL", 20)).toBe("voided");
    expect(c.attemptLength()).toBe(0);
    expect(c.currentPrompt()).toBe(pin);
  });

  it("voids on a premature OK", () => {
    const c = makeController();
    const pin = c.currentPrompt()!;
    c.press(pin[0] as Key, 10);
    c.press(pin[1] as Key, 20);
    expect(c.press("OK", 30)).toBe("voided");
    expect(c.voidedCount()).toBe(1);
    expect(c.currentPrompt()).toBe(pin);
  });

  it("voids a fifth digit instead of overfilling the attempt", () => {
    const c = makeController();
    const pin = c.currentPrompt()!;
    for (const digit of pin) {
      c.press(digit as Key, 0);
    }
    expect(c.attemptLength()).toBe(4);
    expect(c.press(pin[0] as Key, 100)).toBe("voided");
    expect(c.attemptLength()).toBe(0);
    expect(c.currentPrompt()).toBe(pin);
  });

  it("a voided attempt then a clean retry exports only the clean taps", () => {
    const c = makeController({ pinCount: 1, reps: 1, allowAnyPinCount: true });
    const pin = c.currentPrompt()!;
    c.press(pin[0] as Key, 10);
    c.press("DEL", 20);
    const tRef = { t: 100 };
    typePrompt(c, tRef);
    const exported = c.buildExport("none");
    expect(exported.taps.map((t) => t.key).join("")).toBe(pin);
    expect(exported.pins).toEqual([pin]);
  });
});

describe("clock guard", () => {
  it("bumps stalled or backwards timestamps so every stream stays strictly increasing", () => {
    const c = makeController({ pinCount: 1, reps: 1, allowAnyPinCount: true });
    c.addSample(10, 500);
    c.addSample(11, 500); // stalled clock
    c.addSample(12, 400); // backwards clock
    const pin = c.currentPrompt()!;
    for (const digit of pin) {
      c.press(digit as Key, 100); // all before the samples
    }
    c.press("OK", 100);
    c.addSample(13, 0);
    const exported = c.buildExport("ambient-light");
    const sampleTs = exported.samples.map((s) => s.t);
    expect(sampleTs).toHaveLength(4);
    expect([...sampleTs].sort((a, b) => a - b)).toEqual(sampleTs);
    for (let i = 1; i < sampleTs.length; i++) {
      expect(sampleTs[i]!).toBeGreaterThan(sampleTs[i - 1]!);
    }
    const tapTs = exported.taps.map((t) => t.t);
    for (let i = 1; i < tapTs.length; i++) {
      expect(tapTs[i]!).toBeGreaterThan(tapTs[i - 1]!);
    }
    // taps were claimed after the first three samples and before the last
    expect(tapTs[0]!).toBeGreaterThan(sampleTs[2]!);
    expect(tapTs[3]!).toBeLessThan(sampleTs[3]!);
  });

  it("drops non-finite and negative lux readings", () => {
    const c = makeController();
    c.addSample(Number.NaN, 10);
    c.addSample(-1, 20);
    c.addSample(Number.POSITIVE_INFINITY, 30);
    expect(c.sampleCount()).toBe(0);
    c.addSample(0, 40);
    expect(c.sampleCount()).toBe(1);
    expect(c.latestLux()).toBe(0);
  });
});

describe("export", () => {
  it("contains only committed digit taps, four per label, matching the label text", () => {
    const { exported } = runScriptedCapture({ withSamples: false });
    expect(exported.pins).toHaveLength(45);
    expect(exported.taps).toHaveLength(180);
    for (const tap of exported.taps) {
      expect(tap.key).toMatch(/^[0-9]$/);
    }
    for (let i = 0; i < exported.pins.length; i++) {
      const typed = exported.taps
        .slice(4 * i, 4 * i + 4)
        .map((t) => t.key)
        .join("");
      expect(typed).toBe(exported.pins[i]);
    }
  });

  it("records capture settings and the sensor mode in the header", () => {
    const c = makeController();
    const exported = c.buildExport("none", { user_agent: "test-agent" });
    expect(exported.meta.device).toBe("browser-capture");
    expect(exported.meta.input_method).toBe("thumb-same-hand");
    expect(exported.meta.rate_hz).toBeNull();
    expect(exported.meta.resolution_lux).toBeNull();
    expect(exported.meta.seed).toBe(42);
    expect(exported.meta.extra).toEqual({ sensor: "none", user_agent: "test-agent" });
  });

  it("depends only on capture events: identical scripts give identical bytes", () => {
    const a = runScriptedCapture();
    const b = runScriptedCapture();
    expect(a.text).toBe(b.text);
    expect(serializeSession(a.exported)).toBe(serializeSession(b.exported));
  });
});
