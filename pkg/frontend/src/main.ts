/**
 * Page wiring: setup form, keypad, live preview, and JSONL download.
 *
 * All capture logic lives in the imported modules; this file only moves
 * values between the DOM and the controller.  Nothing here runs outside a
 * browser — the module is a no-op under Node so the library files stay
 * importable from tests.
 */

import { CaptureController, Key, SensorMode } from "./capture.js";
import { ExportSession, serializeSession } from "./format.js";
import { pushCapped, renderSparkline, SparklineContext } from "./preview.js";
import { SensorHandle, SensorStatus, startAmbientLight } from "./sensor.js";
import { validateSessionText } from "./validate.js";

const PAD_ROWS: Key[][] = [
  ["1", "2", "3"],
  ["4", "5", "6"],
  ["7", "8", "9"],
  ["DEL", "0", "OK"],
];

const PREVIEW_CAP = 240;

function nowNs(): number {
  return Math.round(performance.now() * 1e6);
}

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function init(): void {
  const setupSection = byId<HTMLElement>("setup");
  const captureSection = byId<HTMLElement>("capture");
  const pinCountInput = byId<HTMLSelectElement>("pin-count");
  const repsInput = byId<HTMLInputElement>("reps");
  const seedInput = byId<HTMLInputElement>("seed");
  const inputMethodInput = byId<HTMLSelectElement>("input-method");
  const subjectInput = byId<HTMLInputElement>("subject");
  const environmentInput = byId<HTMLInputElement>("environment");
  const startButton = byId<HTMLButtonElement>("start");
  const sensorBanner = byId<HTMLElement>("sensor-banner");
  const promptEl = byId<HTMLElement>("prompt");
  const dotsEl = byId<HTMLElement>("attempt-dots");
  const progressEl = byId<HTMLElement>("progress");
  const voidedEl = byId<HTMLElement>("voided");
  const padEl = byId<HTMLElement>("keypad");
  const padTopToggle = byId<HTMLInputElement>("pad-top-toggle");
  const exportButton = byId<HTMLButtonElement>("export");
  const issuesEl = byId<HTMLElement>("issues");
  const canvas = byId<HTMLCanvasElement>("preview");
  const ctx = canvas.getContext("2d");

  let controller: CaptureController | null = null;
  let sensorHandle: SensorHandle | null = null;
  let sensorStatus: SensorStatus = "none";
  const luxBuffer: number[] = [];
  let flashTimer: ReturnType<typeof setTimeout> | null = null;

  function exportSensorMode(): SensorMode {
    // The exported header records whether lux samples were collected, not
    // why they are absent; "denied" degrades to "none".
    return sensorStatus === "active" ? "ambient-light" : "none";
  }

  // Keypad buttons are generated so markup and Key type cannot drift apart.
  for (const row of PAD_ROWS) {
    for (const key of row) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset["key"] = key;
      button.textContent = key;
      button.className = key === "OK" || key === "DEL" ? "pad-key pad-control" : "pad-key";
      button.addEventListener("click", () => handlePress(key));
      padEl.appendChild(button);
    }
  }

  function padLocked(): boolean {
    // With a live sensor, hold the pad until the first reading arrives so
    // every tap falls inside the sampled time range.
    return controller !== null && sensorStatus === "active" && controller.sampleCount() === 0;
  }

  function setBanner(): void {
    if (controller === null) {
      sensorBanner.textContent = "";
      sensorBanner.className = "banner";
      return;
    }
    if (sensorStatus === "active") {
      sensorBanner.textContent = padLocked()
        ? "light sensor starting — keypad unlocks at the first reading"
        : "light sensor active";
      sensorBanner.className = "banner banner-ok";
    } else if (sensorStatus === "denied") {
      sensorBanner.textContent = "light sensor permission denied — capturing taps only";
      sensorBanner.className = "banner banner-warn";
    } else {
      sensorBanner.textContent = "no ambient light sensor — capturing taps only";
      sensorBanner.className = "banner banner-warn";
    }
  }

  function updateUI(): void {
    if (controller === null) {
      return;
    }
    const prompt = controller.currentPrompt();
    if (prompt === null) {
      promptEl.textContent = "done";
      promptEl.classList.add("prompt-done");
    } else if (padLocked()) {
      promptEl.textContent = "…";
      promptEl.classList.remove("prompt-done");
    } else {
      promptEl.textContent = prompt;
      promptEl.classList.remove("prompt-done");
    }
    dotsEl.textContent = "●".repeat(controller.attemptLength()).padEnd(4, "○");
    progressEl.textContent = `${controller.committedCount()} / ${controller.schedule.length} entries`;
    voidedEl.textContent = controller.voidedCount() === 0
      ? ""
      : `${controller.voidedCount()} voided`;
    exportButton.disabled = controller.committedCount() === 0;
    setBanner();
  }

  function flashVoided(): void {
    promptEl.classList.add("prompt-voided");
    if (flashTimer !== null) {
      clearTimeout(flashTimer);
    }
    flashTimer = setTimeout(() => promptEl.classList.remove("prompt-voided"), 350);
  }

  function handlePress(key: Key): void {
    if (controller === null || padLocked()) {
      return;
    }
    const outcome = controller.press(key, nowNs());
    if (outcome === "voided") {
      flashVoided();
    }
    updateUI();
  }

  function onSample(lux: number): void {
    if (controller === null) {
      return;
    }
    const wasLocked = padLocked();
    controller.addSample(lux, nowNs());
    pushCapped(luxBuffer, lux, PREVIEW_CAP);
    if (ctx !== null) {
      renderSparkline(ctx as SparklineContext, luxBuffer, canvas.width, canvas.height);
    }
    if (wasLocked) {
      updateUI(); // first reading unlocks the pad
    }
  }

  function showIssues(lines: readonly string[]): void {
    issuesEl.textContent = lines.join("\n");
    issuesEl.hidden = lines.length === 0;
  }

  startButton.addEventListener("click", () => {
    const pinCount = Number(pinCountInput.value);
    const reps = Number(repsInput.value);
    const seed = Number(seedInput.value);
    if (!Number.isInteger(reps) || reps < 1 || !Number.isInteger(seed)) {
      showIssues(["repetitions must be a positive integer and the seed an integer"]);
      return;
    }
    try {
      controller = new CaptureController({
        pinCount,
        reps,
        seed,
        inputMethod: inputMethodInput.value,
        subject: subjectInput.value.trim() || null,
        environment: environmentInput.value.trim() || null,
      });
    } catch (err) {
      showIssues([err instanceof Error ? err.message : String(err)]);
      return;
    }
    showIssues([]);
    setupSection.hidden = true;
    captureSection.hidden = false;
    sensorHandle = startAmbientLight(onSample, (status) => {
      sensorStatus = status;
      updateUI();
    });
    updateUI();
  });

  padTopToggle.addEventListener("change", () => {
    // Pure layout: flips whether the keypad sits above or below the prompt.
    // The exported bytes never depend on this.
    captureSection.classList.toggle("pad-top", padTopToggle.checked);
  });

  exportButton.addEventListener("click", () => {
    if (controller === null) {
      return;
    }
    sensorHandle?.stop();
    if (sensorStatus === "active") {
      // Guarantee the sample range covers the final tap even if the user
      // exports before the next sensor reading lands.
      const lux = controller.latestLux();
      if (lux !== null) {
        controller.addSample(lux, nowNs());
      }
    }
    const extra: Record<string, string> = {};
    if (typeof navigator !== "undefined") {
      extra["user_agent"] = navigator.userAgent;
    }
    let exported: ExportSession = controller.buildExport(exportSensorMode(), extra);
    let text = serializeSession(exported);
    let errors = validateSessionText(text);
    if (
      errors.length > 0 &&
      exported.samples.length > 0 &&
      errors.every((e) => e.includes("outside the sample time range"))
    ) {
      // The sensor died mid-run and left taps past the sampled range;
      // degrade to a taps-only file rather than export an unloadable one.
      exported = {
        ...exported,
        samples: [],
        meta: { ...exported.meta, extra: { ...exported.meta.extra, sensor: "none" } },
      };
      text = serializeSession(exported);
      errors = validateSessionText(text);
    }
    if (errors.length > 0) {
      showIssues(["export blocked — the file would not load:", ...errors]);
      return;
    }
    showIssues([]);
    const name = `capture-${controller.pins.length}x${controller.config.reps}-seed${controller.config.seed}.jsonl`;
    try {
      const blob = new Blob([text], { type: "application/x-ndjson" });
      const url = URL.createObjectURL(blob);
      const anchor = document.createElement("a");
      anchor.href = url;
      anchor.download = name;
      document.body.appendChild(anchor);
      anchor.click();
      anchor.remove();
      setTimeout(() => URL.revokeObjectURL(url), 1000);
    } catch (err) {
      showIssues([
        "export failed — the browser could not create the download:",
        err instanceof Error ? err.message : String(err),
      ]);
    }
  });

  document.addEventListener("keydown", (event) => {
    if (controller === null || captureSection.hidden) {
      return;
    }
    let key: Key | null = null;
    if (/^[0-9]$/.test(event.key)) {
      key = event.key as Key;
    } else if (event.key === "Enter") {
      key = "OK";
    } else if (event.key === "Backspace" || event.key === "Delete") {
      key = "DEL";
    }
    if (key !== null) {
      event.preventDefault();
      handlePress(key);
    }
  });
}

if (typeof document !== "undefined" && typeof performance !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", init);
  } else {
    init();
  }
}
