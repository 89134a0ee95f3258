/**
 * Session JSONL writer.
 *
 * One JSON object per line: a header first, samples and taps merged in
 * time order, and the PIN label list last.  Timestamps are integer
 * nanoseconds and every per-stream sequence is strictly increasing, so a
 * file written here loads in the analysis toolkit unchanged.
 */

export interface SessionMeta {
  device: string | null;
  environment: string | null;
  input_method: string | null;
  rate_hz: number | null;
  resolution_lux: number | null;
  subject: string | null;
  seed: number | null;
  /** Free-form extras (sensor availability, user agent, ...). */
  extra?: Record<string, string | number | boolean | null>;
}

export interface Sample {
  t: number;
  lux: number;
}

export interface Tap {
  t: number;
  key: string;
}

export interface ExportSession {
  meta: SessionMeta;
  samples: readonly Sample[];
  taps: readonly Tap[];
  pins: readonly string[];
}

const RESERVED_HEADER_KEYS = new Set([
  "type", "device", "environment", "input_method", "rate_hz",
  "resolution_lux", "subject", "seed",
]);

function assertNanoseconds(t: number, what: string): void {
  if (!Number.isSafeInteger(t)) {
    throw new Error(`${what} timestamp must be an integer nanosecond count, got ${t}`);
  }
}

function assertIncreasing(ts: readonly number[], what: string): void {
  for (let i = 1; i < ts.length; i++) {
    const prev = ts[i - 1]!;
    const cur = ts[i]!;
    if (cur <= prev) {
      throw new Error(`${what} timestamps must be strictly increasing (index ${i})`);
    }
  }
}

export function serializeSession(session: ExportSession): string {
  const { meta, samples, taps, pins } = session;

  for (const s of samples) {
    assertNanoseconds(s.t, "sample");
    if (!Number.isFinite(s.lux) || s.lux < 0) {
      throw new Error(`lux must be a non-negative number, got ${s.lux}`);
    }
  }
  for (const tap of taps) {
    assertNanoseconds(tap.t, "tap");
  }
  assertIncreasing(samples.map((s) => s.t), "sample");
  assertIncreasing(taps.map((t) => t.t), "tap");

  const header: Record<string, unknown> = {
    type: "session",
    device: meta.device,
    environment: meta.environment,
    input_method: meta.input_method,
    rate_hz: meta.rate_hz,
    resolution_lux: meta.resolution_lux,
    subject: meta.subject,
    seed: meta.seed,
  };
  for (const [key, value] of Object.entries(meta.extra ?? {})) {
    if (RESERVED_HEADER_KEYS.has(key)) {
      throw new Error(`extra header key ${key} collides with a reserved field`);
    }
    header[key] = value;
  }

  const lines: string[] = [JSON.stringify(header)];

  // merge the two streams; a sample sorts before a tap at the same instant
  let si = 0;
  let ti = 0;
  while (si < samples.length || ti < taps.length) {
    const s = samples[si];
    const t = taps[ti];
    if (s !== undefined && (t === undefined || s.t <= t.t)) {
      lines.push(JSON.stringify({ type: "sample", t: s.t, lux: s.lux }));
      si++;
    } else if (t !== undefined) {
      lines.push(JSON.stringify({ type: "tap", t: t.t, key: t.key }));
      ti++;
    }
  }

  lines.push(JSON.stringify({ type: "pins", labels: pins }));
  return lines.join("\n") + "\n";
}
