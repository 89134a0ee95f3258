/**
 * Scripted capture driver: replays a full, mistake-free run against the
 * controller using a synthetic clock and a seeded lux generator, so tests
 * and the committed fixture are byte-deterministic.
 */

import { CaptureController, Key } from "../src/capture.js";
import { ExportSession, serializeSession } from "../src/format.js";
import { mulberry32 } from "../src/pinset.js";

export interface ScriptedOptions {
  pinCount?: number;
  reps?: number;
  seed?: number;
  withSamples?: boolean;
}

export interface ScriptedRun {
  controller: CaptureController;
  exported: ExportSession;
  text: string;
}

export function runScriptedCapture(opts: ScriptedOptions = {}): ScriptedRun {
  const withSamples = opts.withSamples ?? true;
  const controller = new CaptureController({
    pinCount: opts.pinCount ?? 15,
    reps: opts.reps ?? 3,
    seed: opts.seed ?? 42,
    inputMethod: "thumb-same-hand",
    subject: "scripted",
    environment: "lab",
  });
  const rng = mulberry32(7);
  let t = 1_000_000_000; // start the synthetic clock at 1 s
  const tick = (): number => {
    t += 10_000_000; // 10 ms per event
    return t;
  };
  const sample = (): void => {
    controller.addSample(200 + Math.floor(rng() * 50), tick());
  };

  if (withSamples) {
    sample();
  }
  while (!controller.isDone()) {
    const pin = controller.currentPrompt();
    if (pin === null) {
      break;
    }
    for (const digit of pin) {
      if (withSamples) {
        sample();
      }
      controller.press(digit as Key, tick());
    }
    controller.press("OK", tick());
  }
  if (withSamples) {
    sample();
  }

  const exported = controller.buildExport(withSamples ? "ambient-light" : "none", {
    generator: "scripted",
  });
  return { controller, exported, text: serializeSession(exported) };
}
