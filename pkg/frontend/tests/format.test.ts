import { describe, expect, it } from "vitest";

import { ExportSession, serializeSession, SessionMeta } from "../src/format.js";
import { validateSessionText } from "../src/validate.js";

function meta(partial: Partial<SessionMeta> = {}): SessionMeta {
  return {
    device: "browser-capture",
    environment: null,
    input_method: "thumb",
    rate_hz: null,
    resolution_lux: null,
    subject: null,
    seed: 1,
    ...partial,
  };
}

function session(partial: Partial<ExportSession> = {}): ExportSession {
  return {
    meta: meta(),
    samples: [
      { t: 1, lux: 100 },
      { t: 3, lux: 120 },
      { t: 6, lux: 90 },
    ],
    taps: [
      { t: 2, key: "4" },
      { t: 4, key: "2" },
    ],
    pins: [],
    ...partial,
  };
}

describe("serializeSession", () => {
  it("writes header first, pins last, one trailing newline", () => {
    const text = serializeSession(session());
    expect(text.endsWith("\n")).toBe(true);
    expect(text.endsWith("\n\n")).toBe(false);
    const lines = text.slice(0, -1).split("\n");
    expect(JSON.parse(lines[0]!)["type"]).toBe("session");
    expect(JSON.parse(lines[lines.length - 1]!)["type"]).toBe("pins");
    expect(lines).toHaveLength(1 + 3 + 2 + 1);
  });

  it("merges samples and taps by time, sample first on a tie", () => {
    const text = serializeSession(
      session({
        samples: [
          { t: 1, lux: 10 },
          { t: 5, lux: 11 },
        ],
        taps: [
          { t: 3, key: "1" },
          { t: 5, key: "2" },
        ],
      }),
    );
    const kinds = text
      .trim()
      .split("\n")
      .slice(1, -1)
      .map((line) => {
        const rec = JSON.parse(line) as { type: string; t: number };
        return `${rec.type}@${rec.t}`;
      });
    expect(kinds).toEqual(["sample@1", "tap@3", "sample@5", "tap@5"]);
  });

  it("keeps integral lux integral in the JSON text", () => {
    const text = serializeSession(session({ samples: [{ t: 1, lux: 200 }], taps: [] }));
    expect(text).toContain('"lux":200}');
    expect(text).not.toContain("200.0");
  });

  it("places extra header entries after the fixed fields", () => {
    const text = serializeSession(
      session({ meta: meta({ extra: { sensor: "none", user_agent: "test" } }) }),
    );
    const header = text.split("\n")[0]!;
    const keys = Object.keys(JSON.parse(header) as Record<string, unknown>);
    expect(keys.slice(0, 2)).toEqual(["type", "device"]);
    expect(keys).toContain("sensor");
    expect(keys).toContain("user_agent");
    expect(keys.indexOf("sensor")).toBeGreaterThan(keys.indexOf("seed"));
  });

  it("rejects an extra key that collides with a reserved field", () => {
    expect(() =>
      serializeSession(session({ meta: meta({ extra: { device: "spoof" } }) })),
    ).toThrow(/collides/);
  });

  it("rejects fractional timestamps", () => {
    expect(() => serializeSession(session({ samples: [{ t: 1.5, lux: 1 }] }))).toThrow(
      /integer nanosecond/,
    );
    expect(() =>
      serializeSession(session({ samples: [], taps: [{ t: 2.25, key: "1" }] })),
    ).toThrow(/integer nanosecond/);
  });

  it("rejects negative or non-finite lux", () => {
    expect(() =>
      serializeSession(session({ samples: [{ t: 1, lux: -3 }], taps: [] })),
    ).toThrow(/non-negative/);
    expect(() =>
      serializeSession(session({ samples: [{ t: 1, lux: Number.NaN }], taps: [] })),
    ).toThrow(/non-negative/);
  });

  it("rejects non-increasing per-stream timestamps", () => {
    expect(() =>
      serializeSession(
        session({
          samples: [
            { t: 5, lux: 1 },
            { t: 5, lux: 2 },
          ],
          taps: [],
        }),
      ),
    ).toThrow(/strictly increasing/);
    expect(() =>
      serializeSession(
        session({
          samples: [],
          taps: [
            { t: 9, key: "1" },
            { t: 8, key: "2" },
          ],
        }),
      ),
    ).toThrow(/strictly increasing/);
  });

  it("produces text the mirror checker accepts", () => {
    const text = serializeSession(
      session({
        meta: meta({ extra: { sensor: "ambient-light" } }),
        samples: [
          { t: 1, lux: 10 },
          { t: 2, lux: 11 },
          { t: 3, lux: 12 },
          { t: 4, lux: 13 },
          { t: 9, lux: 14 },
        ],
        taps: [
          { t: 5, key: "1" },
          { t: 6, key: "2" },
          { t: 7, key: "3" },
          { t: 8, key: "4" },
        ],
        pins: ["1234"],
      }),
    );
    expect(validateSessionText(text)).toEqual([]);
  });
});
