/**
 * Seeded PIN set and prompt schedule.
 *
 * The set sizes match the study design (15/30/50 PINs); the schedule lays
 * out every repetition and shuffles it so consecutive prompts rarely repeat
 * a PIN.  Everything is deterministic in the seed so a capture run can be
 * reproduced.
 */

export const STUDY_PIN_SET_SIZES = [15, 30, 50] as const;

/** Small deterministic PRNG; good enough for prompt shuffling. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function generatePinSet(
  count: number,
  seed: number,
  allowAnyCount = false,
): string[] {
  if (!allowAnyCount && !STUDY_PIN_SET_SIZES.includes(count as 15 | 30 | 50)) {
    throw new Error(
      `pin count must be one of ${STUDY_PIN_SET_SIZES.join("/")} (got ${count})`,
    );
  }
  if (count < 1 || count > 10000) {
    throw new Error(`pin count out of range: ${count}`);
  }
  const rng = mulberry32(seed);
  const pins = new Set<string>();
  while (pins.size < count) {
    let pin = "";
    for (let i = 0; i < 4; i++) {
      pin += Math.floor(rng() * 10).toString();
    }
    pins.add(pin);
  }
  return [...pins];
}

export function buildSchedule(pins: readonly string[], reps: number, seed: number): string[] {
  if (reps < 1) {
    throw new Error(`reps must be at least 1 (got ${reps})`);
  }
  const schedule: string[] = [];
  for (const pin of pins) {
    for (let r = 0; r < reps; r++) {
      schedule.push(pin);
    }
  }
  const rng = mulberry32(seed ^ 0x9e3779b9);
  for (let i = schedule.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [schedule[i], schedule[j]] = [schedule[j]!, schedule[i]!];
  }
  return schedule;
}
