/**
 * Session file checker, mirroring the analysis toolkit's reader.
 *
 * Runs over the exact text that would be downloaded and returns a list of
 * problems (empty list = the file will load cleanly).  Kept dependency-free
 * so the same function runs in the page and in tests.
 */

const DIGIT_KEYS = new Set(["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]);
const CONTROL_KEYS = new Set(["OK", "DEL"]);
const CHANNEL_NAMES = ["r", "g", "b", "w"] as const;

type Record_ = Record<string, unknown>;

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

export function validateSessionText(text: string): string[] {
  const errors: string[] = [];
  if (text.charCodeAt(0) === 0xfeff) {
    errors.push("file starts with a BOM");
    text = text.slice(1);
  }

  const rawLines = text.split("\n");
  if (rawLines.length > 0 && rawLines[rawLines.length - 1] === "") {
    rawLines.pop(); // single trailing newline
  }
  if (rawLines.length === 0) {
    return ["file is empty"];
  }

  const records: { lineNo: number; record: Record_ }[] = [];
  for (let i = 0; i < rawLines.length; i++) {
    const lineNo = i + 1;
    let parsed: unknown;
    try {
      parsed = JSON.parse(rawLines[i]!);
    } catch {
      errors.push(`line ${lineNo}: not valid JSON`);
      continue;
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
      errors.push(`line ${lineNo}: record must be a JSON object`);
      continue;
    }
    records.push({ lineNo, record: parsed as Record_ });
  }
  if (records.length === 0) {
    return errors.length ? errors : ["no records"];
  }

  const first = records[0]!;
  let resolution: number | null = null;
  if (first.record["type"] !== "session") {
    errors.push(`line ${first.lineNo}: first record must have type "session"`);
  } else {
    const rate = first.record["rate_hz"];
    if (rate !== undefined && rate !== null && (!isFiniteNumber(rate) || rate <= 0)) {
      errors.push(`line ${first.lineNo}: rate_hz must be positive`);
    }
    const res = first.record["resolution_lux"];
    if (res !== undefined && res !== null) {
      if (!isFiniteNumber(res) || res <= 0) {
        errors.push(`line ${first.lineNo}: resolution_lux must be positive`);
      } else {
        resolution = res;
      }
    }
  }

  const sampleTimes: number[] = [];
  const taps: { t: number; key: string }[] = [];
  let pins: string[] | null = null;
  let channelPresence: boolean | null = null;

  for (let i = 1; i < records.length; i++) {
    const { lineNo, record } = records[i]!;
    if (pins !== null) {
      errors.push(`line ${lineNo}: the pins record must be the last line`);
      break;
    }
    const type = record["type"];
    if (type === "sample") {
      const t = record["t"];
      if (!isFiniteNumber(t) || !Number.isInteger(t)) {
        errors.push(`line ${lineNo}: sample t must be an integer nanosecond count`);
        continue;
      }
      const lux = record["lux"];
      if (!isFiniteNumber(lux)) {
        errors.push(`line ${lineNo}: sample lux must be a number`);
        continue;
      }
      if (lux < 0) {
        errors.push(`line ${lineNo}: negative lux`);
      }
      if (resolution !== null) {
        const steps = lux / resolution;
        if (Math.abs(steps - Math.round(steps)) > 1e-9) {
          errors.push(`line ${lineNo}: lux ${lux} is not a multiple of the declared resolution`);
        }
      }
      const present = CHANNEL_NAMES.map((c) => record[c] !== undefined);
      const nPresent = present.filter(Boolean).length;
      if (nPresent !== 0 && nPresent !== CHANNEL_NAMES.length) {
        errors.push(`line ${lineNo}: channel values must appear all together or not at all`);
      }
      const hasChannels = nPresent === CHANNEL_NAMES.length;
      if (channelPresence === null) {
        channelPresence = hasChannels;
      } else if (channelPresence !== hasChannels) {
        errors.push(`line ${lineNo}: channel presence must be uniform across samples`);
      }
      const prev = sampleTimes[sampleTimes.length - 1];
      if (prev !== undefined && t <= prev) {
        errors.push(`line ${lineNo}: sample timestamps not strictly increasing`);
      }
      sampleTimes.push(t);
    } else if (type === "tap") {
      const t = record["t"];
      const key = record["key"];
      if (!isFiniteNumber(t) || !Number.isInteger(t)) {
        errors.push(`line ${lineNo}: tap t must be an integer nanosecond count`);
        continue;
      }
      if (typeof key !== "string" || (!DIGIT_KEYS.has(key) && !CONTROL_KEYS.has(key))) {
        errors.push(`line ${lineNo}: unknown key ${JSON.stringify(key)}`);
        continue;
      }
      const prev = taps[taps.length - 1];
      if (prev !== undefined && t <= prev.t) {
        errors.push(`line ${lineNo}: tap timestamps not strictly increasing`);
      }
      taps.push({ t, key });
    } else if (type === "pins") {
      const labels = record["labels"];
      if (!Array.isArray(labels) || labels.some((l) => typeof l !== "string")) {
        errors.push(`line ${lineNo}: pins labels must be a list of strings`);
        pins = [];
      } else {
        pins = labels as string[];
      }
    } else {
      errors.push(`line ${lineNo}: unknown record type ${JSON.stringify(type)}`);
    }
  }

  if (pins === null) {
    errors.push("missing pins record");
    pins = [];
  }

  if (sampleTimes.length > 0) {
    const lo = sampleTimes[0]!;
    const hi = sampleTimes[sampleTimes.length - 1]!;
    for (const tap of taps) {
      if (tap.t < lo || tap.t > hi) {
        errors.push(`tap at t=${tap.t} outside the sample time range`);
      }
    }
  }

  for (const label of pins) {
    if (!/^[0-9]{4}$/.test(label)) {
      errors.push(`PIN ${JSON.stringify(label)} is not a 4-digit string`);
    }
  }

  const digitTaps = taps.filter((t) => DIGIT_KEYS.has(t.key));
  if (digitTaps.length !== 4 * pins.length) {
    errors.push(
      `found ${digitTaps.length} digit taps for ${pins.length} PIN labels ` +
      `(expected ${4 * pins.length})`,
    );
  } else {
    for (let i = 0; i < pins.length; i++) {
      const label = pins[i]!;
      const typed = digitTaps.slice(4 * i, 4 * i + 4).map((t) => t.key).join("");
      if (typed !== label) {
        errors.push(`digit taps ${typed} do not match PIN label ${label} (entry ${i + 1})`);
      }
    }
  }

  return errors;
}
