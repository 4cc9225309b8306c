/** Rolling telemetry window: 30 s at 50 Hz by default. */

import type { TelemetryMsg } from "./messages.js";

export class TelemetryBuffer {
  private frames: TelemetryMsg[] = [];
  private readonly capacity: number;
  /** Count of frames ever pushed (drop bookkeeping for tests/diagnostics). */
  pushed = 0;

  constructor(capacity = 1500) {
    this.capacity = capacity;
  }

  push(frame: TelemetryMsg): void {
    this.frames.push(frame);
    this.pushed += 1;
    if (this.frames.length > this.capacity) {
      this.frames.splice(0, this.frames.length - this.capacity);
    }
  }

  get length(): number {
    return this.frames.length;
  }

  latest(): TelemetryMsg | null {
    return this.frames.length ? this.frames[this.frames.length - 1] : null;
  }

  /** Frames with t_ms inside the trailing window, oldest first. */
  window(spanMs: number): TelemetryMsg[] {
    const last = this.latest();
    if (!last) return [];
    const cutoff = last.t_ms - spanMs;
    let lo = 0;
    while (lo < this.frames.length && this.frames[lo].t_ms < cutoff) lo++;
    return this.frames.slice(lo);
  }

  clear(): void {
    this.frames = [];
  }
}
