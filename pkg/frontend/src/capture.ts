/**
 * Capture state machine.
 *
 * The controller owns the prompt schedule and the live buffers.  A PIN
 * attempt only reaches the export if the user typed all four prompted
 * digits in order and confirmed with OK; pressing DEL, a wrong digit, or a
 * premature OK voids the attempt, discards its taps, and re-prompts the
 * same PIN.  Sensor samples and committed taps share one monotonic clock
 * guard so exported timestamps are strictly increasing and every tap falls
 * inside the sampled range.
 */

import { ExportSession, Sample, SessionMeta, Tap } from "./format.js";
import { buildSchedule, generatePinSet } from "./pinset.js";

export type Key =
  | "0" | "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9"
  | "OK" | "DEL";

export type PressOutcome = "recorded" | "committed" | "voided" | "ignored";

export type SensorMode = "ambient-light" | "none";

export interface CaptureConfig {
  pinCount: number;
  reps: number;
  seed: number;
  inputMethod: string;
  environment?: string | null;
  subject?: string | null;
  device?: string;
  allowAnyPinCount?: boolean;
}

const DIGITS = new Set(["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]);

export class CaptureController {
  readonly pins: readonly string[];
  readonly schedule: readonly string[];
  readonly config: Readonly<CaptureConfig>;

  private promptIndex = 0;
  private attempt: Tap[] = [];
  private committedTaps: Tap[] = [];
  private committedLabels: string[] = [];
  private samples: Sample[] = [];
  private voided = 0;
  private lastT = -1;

  constructor(config: CaptureConfig) {
    this.config = { ...config };
    this.pins = generatePinSet(config.pinCount, config.seed, config.allowAnyPinCount);
    this.schedule = buildSchedule(this.pins, config.reps, config.seed);
  }

  /** The PIN the user should type next, or null when the run is complete. */
  currentPrompt(): string | null {
    return this.promptIndex < this.schedule.length
      ? this.schedule[this.promptIndex]!
      : null;
  }

  isDone(): boolean {
    return this.promptIndex >= this.schedule.length;
  }

  committedCount(): number {
    return this.committedLabels.length;
  }

  voidedCount(): number {
    return this.voided;
  }

  attemptLength(): number {
    return this.attempt.length;
  }

  sampleCount(): number {
    return this.samples.length;
  }

  latestLux(): number | null {
    const last = this.samples[this.samples.length - 1];
    return last === undefined ? null : last.lux;
  }

  /** Force strict monotonicity across everything that carries a timestamp. */
  private claimTime(tNs: number): number {
    const t = Math.max(Math.round(tNs), this.lastT + 1);
    this.lastT = t;
    return t;
  }

  addSample(lux: number, tNs: number): void {
    if (!Number.isFinite(lux) || lux < 0) {
      return; // sensors occasionally glitch; never poison the export
    }
    this.samples.push({ t: this.claimTime(tNs), lux });
  }

  press(key: Key, tNs: number): PressOutcome {
    if (this.isDone()) {
      return "ignored";
    }
    const t = this.claimTime(tNs);
    const prompt = this.schedule[this.promptIndex]!;

    if (key === "DEL") {
      this.attempt = [];
      this.voided++;
      return "voided";
    }
    if (key === "OK") {
      if (this.attempt.length === 4) {
        this.committedTaps.push(...this.attempt);
        this.committedLabels.push(prompt);
        this.attempt = [];
        this.promptIndex++;
        return "committed";
      }
      this.attempt = [];
      this.voided++;
      return "voided";
    }
    if (!DIGITS.has(key)) {
      return "ignored";
    }
    if (this.attempt.length >= 4 || key !== prompt[this.attempt.length]) {
      this.attempt = [];
      this.voided++;
      return "voided";
    }
    this.attempt.push({ t, key });
    return "recorded";
  }

  buildExport(sensorMode: SensorMode, extra?: Record<string, string | number | boolean | null>): ExportSession {
    const meta: SessionMeta = {
      device: this.config.device ?? "browser-capture",
      environment: this.config.environment ?? null,
      input_method: this.config.inputMethod,
      rate_hz: null, // browsers report at an unspecified, variable rate
      resolution_lux: null,
      subject: this.config.subject ?? null,
      seed: this.config.seed,
      extra: { sensor: sensorMode, ...extra },
    };
    return {
      meta,
      samples: [...this.samples],
      taps: [...this.committedTaps],
      pins: [...this.committedLabels],
    };
  }
}
