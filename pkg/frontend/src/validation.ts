/**
 * Client-side mirror of the engine's config invariants.
 *
 * The console never knowingly sends an invalid patch: sliders are bounded by
 * these rules, and anything that slips through is rejected here before it
 * reaches the wire. The engine re-validates everything anyway; this mirror
 * only exists so the UI can react instantly and keep invalid states
 * unreachable.
 */

import type { ConfigPatch, ControlConfig } from "./messages.js";

export interface FieldError {
  field: string;
  msg: string;
}

/** Apply a patch to a config and check every invariant on the result. */
export function validatePatch(
  config: ControlConfig,
  patch: ConfigPatch,
): FieldError | null {
  for (const key of Object.keys(patch)) {
    if (!(key in config)) {
      return { field: key, msg: "unknown config field" };
    }
  }
  const next = { ...config, ...patch };
  if (next.strategy !== "onoff" && next.strategy !== "proportional") {
    return { field: "strategy", msg: `unknown strategy ${next.strategy}` };
  }
  if (!(next.th >= 0 && next.th <= 100)) {
    return { field: "th", msg: "must be in [0, 100]" };
  }
  if (!(next.th1 >= 0)) {
    return { field: "th1", msg: "must be >= 0" };
  }
  if (!(next.th1 < next.th2)) {
    return { field: "th2", msg: "requires th1 < th2" };
  }
  if (!(next.th2 <= 100)) {
    return { field: "th2", msg: "must be <= 100" };
  }
  if (!(next.delta >= 0 && next.delta < 50)) {
    return { field: "delta", msg: "must be in [0, 50)" };
  }
  if (next.hysteresis_gap < 0) {
    return { field: "hysteresis_gap", msg: "must be >= 0" };
  }
  if (next.hysteresis_gap > 0) {
    if (!(next.th - next.hysteresis_gap / 2 > 0)) {
      return { field: "hysteresis_gap", msg: "lower band edge must stay > 0" };
    }
    if (!(next.th + next.hysteresis_gap / 2 < 100)) {
      return { field: "hysteresis_gap", msg: "upper band edge must stay < 100" };
    }
  }
  if (!(Number.isInteger(next.ma_window) && next.ma_window >= 1)) {
    return { field: "ma_window", msg: "must be an integer >= 1" };
  }
  return null;
}

/** Slider bounds derived from the active config, mirroring the invariants. */
export interface SliderBounds {
  min: number;
  max: number;
  step: number;
}

export function sliderBounds(
  field: "th" | "th1" | "th2" | "delta" | "hysteresis_gap",
  config: ControlConfig,
): SliderBounds {
  switch (field) {
    case "th": {
      // Keep the hysteresis band inside (0, 100) for the current gap.
      const margin = config.hysteresis_gap / 2;
      return { min: Math.max(0, margin + 0.5), max: Math.min(100, 100 - margin - 0.5), step: 0.5 };
    }
    case "th1":
      return { min: 0, max: config.th2 - 1, step: 0.5 };
    case "th2":
      return { min: config.th1 + 1, max: 100, step: 0.5 };
    case "delta":
      return { min: 0, max: 49.5, step: 0.5 };
    case "hysteresis_gap": {
      // th +- gap/2 must stay strictly inside (0, 100).
      const room = 2 * Math.min(config.th, 100 - config.th) - 1;
      return { min: 0, max: Math.max(0, room), step: 0.5 };
    }
  }
}
