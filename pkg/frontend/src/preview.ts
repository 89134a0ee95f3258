/**
 * Rolling sparkline of recent lux readings.
 *
 * Drawing goes through a minimal context interface so the renderer is
 * testable without a real canvas.
 */

export interface SparklineContext {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  /** Assigned a CSS color string; typed loosely so a 2D canvas context fits. */
  strokeStyle: unknown;
  lineWidth: number;
}

/** Append, dropping the oldest value once the buffer is full. */
export function pushCapped(buffer: number[], value: number, cap: number): void {
  buffer.push(value);
  if (buffer.length > cap) {
    buffer.splice(0, buffer.length - cap);
  }
}

export function renderSparkline(
  ctx: SparklineContext,
  values: readonly number[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (values.length < 2) {
    return;
  }
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const span = hi - lo || 1; // flat trace draws a centered line
  const pad = 2;
  ctx.strokeStyle = "#2f81f7";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i < values.length; i++) {
    const x = pad + (i / (values.length - 1)) * (width - 2 * pad);
    const y = height - pad - ((values[i]! - lo) / span) * (height - 2 * pad);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  }
  ctx.stroke();
}
