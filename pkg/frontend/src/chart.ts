/**
 * Scrolling strip chart on a raw 2D canvas.
 *
 * Left axis: smoothed EMG in percent with the active threshold lines dashed
 * over it (th and its hysteresis band for on-off, th1/th2 for proportional).
 * Right axis: commanded reference and encoder position as aperture fractions.
 * Drawing goes through a minimal context interface so tests can run it
 * against a recording fake.
 */

import type { ControlConfig, TelemetryMsg } from "./messages.js";

/** The subset of CanvasRenderingContext2D the chart uses. */
export interface Ctx2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
}

export interface ChartOptions {
  spanMs?: number;
  stale?: boolean;
}

export interface DrawStats {
  points: number;
  thresholdLines: number;
}

const COLORS = {
  background: "#10161d",
  grid: "#243140",
  emg: "#29c4d8",
  threshold: "#e8b33b",
  band: "#8a6d23",
  reference: "#e6e6e6",
  position: "#8f9aa6",
  text: "#9fb0c0",
  stale: "#d4564e",
};

export function drawChart(
  ctx: Ctx2D,
  width: number,
  height: number,
  frames: TelemetryMsg[],
  config: ControlConfig | null,
  opts: ChartOptions = {},
): DrawStats {
  const spanMs = opts.spanMs ?? 30_000;
  const stats: DrawStats = { points: 0, thresholdLines: 0 };

  ctx.globalAlpha = 1;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);

  // Horizontal grid at 0/25/50/75/100 percent.
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  for (let p = 0; p <= 100; p += 25) {
    const y = yPercent(p, height);
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }

  if (frames.length === 0) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "12px sans-serif";
    ctx.fillText("waiting for telemetry", 12, 20);
    return stats;
  }

  const tEnd = frames[frames.length - 1].t_ms;
  const tStart = tEnd - spanMs;
  const xOf = (t: number) => ((t - tStart) / spanMs) * width;

  // Threshold overlays under the traces.
  if (config) {
    const lines =
      config.strategy === "onoff"
        ? config.hysteresis_gap > 0
          ? [
              { v: config.th, color: COLORS.threshold },
              { v: config.th + config.hysteresis_gap / 2, color: COLORS.band },
              { v: config.th - config.hysteresis_gap / 2, color: COLORS.band },
            ]
          : [{ v: config.th, color: COLORS.threshold }]
        : [
            { v: config.th1, color: COLORS.threshold },
            { v: config.th2, color: COLORS.threshold },
          ];
    ctx.setLineDash([6, 4]);
    for (const line of lines) {
      ctx.strokeStyle = line.color;
      const y = yPercent(line.v, height);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(width, y);
      ctx.stroke();
      stats.thresholdLines += 1;
    }
    ctx.setLineDash([]);
  }

  stats.points += tracePercent(ctx, frames, xOf, height, COLORS.emg, (f) => f.emg_percent);
  stats.points += tracePercent(ctx, frames, xOf, height, COLORS.position, (f) => f.position * 100);
  stats.points += tracePercent(ctx, frames, xOf, height, COLORS.reference, (f) => f.reference * 100);

  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  ctx.fillText("EMG %", 8, 14);
  ctx.fillText("aperture", width - 58, 14);

  if (opts.stale) {
    ctx.fillStyle = COLORS.stale;
    ctx.globalAlpha = 0.9;
    ctx.fillRect(0, 0, width, 22);
    ctx.globalAlpha = 1;
    ctx.fillStyle = "#ffffff";
    ctx.font = "12px sans-serif";
    ctx.fillText("STALE - no telemetry", 10, 15);
  }
  return stats;
}

function yPercent(p: number, height: number): number {
  return height - (p / 100) * (height - 24) - 4;
}

function tracePercent(
  ctx: Ctx2D,
  frames: TelemetryMsg[],
  xOf: (t: number) => number,
  height: number,
  color: string,
  value: (f: TelemetryMsg) => number,
): number {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  let points = 0;
  for (let i = 0; i < frames.length; i++) {
    const x = xOf(frames[i].t_ms);
    const y = yPercent(value(frames[i]), height);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
    points++;
  }
  ctx.stroke();
  return points;
}
