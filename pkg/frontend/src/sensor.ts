/**
 * Ambient-light source with graceful degradation.
 *
 * The Generic Sensor API is unevenly available; when the constructor is
 * missing, construction throws, or permission is denied, the capture keeps
 * running in taps-only mode and the caller shows a banner instead of a
 * live preview.
 */

export type SensorStatus = "active" | "none" | "denied";

export interface SensorHandle {
  stop(): void;
}

interface AmbientLightSensorLike {
  illuminance: number | null;
  start(): void;
  stop(): void;
  addEventListener(type: "reading" | "error", cb: (event: unknown) => void): void;
}

type AmbientLightSensorCtor = new (options?: { frequency?: number }) => AmbientLightSensorLike;

function sensorConstructor(): AmbientLightSensorCtor | null {
  const g = globalThis as { AmbientLightSensor?: AmbientLightSensorCtor };
  return typeof g.AmbientLightSensor === "function" ? g.AmbientLightSensor : null;
}

const NOOP_HANDLE: SensorHandle = { stop: () => undefined };

export function startAmbientLight(
  onSample: (lux: number) => void,
  onStatus: (status: SensorStatus) => void,
  frequency = 60,
): SensorHandle {
  const Ctor = sensorConstructor();
  if (Ctor === null) {
    onStatus("none");
    return NOOP_HANDLE;
  }
  let sensor: AmbientLightSensorLike;
  try {
    sensor = new Ctor({ frequency });
  } catch {
    onStatus("none");
    return NOOP_HANDLE;
  }
  sensor.addEventListener("reading", () => {
    const lux = sensor.illuminance;
    if (typeof lux === "number" && Number.isFinite(lux)) {
      onSample(lux);
    }
  });
  sensor.addEventListener("error", (event) => {
    const name = (event as { error?: { name?: string } }).error?.name;
    onStatus(name === "NotAllowedError" ? "denied" : "none");
  });
  try {
    sensor.start();
  } catch {
    onStatus("none");
    return NOOP_HANDLE;
  }
  onStatus("active");
  return { stop: () => sensor.stop() };
}
