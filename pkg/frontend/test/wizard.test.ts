import { describe, expect, it } from "vitest";

import type { ConsoleClient } from "../src/client.js";
import type { ServerMsg } from "../src/messages.js";
import { CalibrationWizard, type WizardStep } from "../src/wizard.js";

const PROFILE = {
  rest_raw: 55,
  mvc_raw: 1990,
  captured_at: null,
  rest_window_ms: 1000,
  mvc_window_ms: 1000,
};

function makeWizard() {
  const commands: string[] = [];
  const steps: WizardStep[] = [];
  const fakeClient = {
    calibrateRest: () => commands.push("calibrate_rest"),
    calibrateMvc: () => commands.push("calibrate_mvc"),
    stop: () => commands.push("stop"),
  } as unknown as ConsoleClient;
  // Immediate scheduler: countdowns collapse synchronously.
  const wizard = new CalibrationWizard(fakeClient, (s) => steps.push(s), 2, (fn) => fn());
  return { wizard, commands, steps };
}

const state = (phase: ServerMsg & { type: "state" } extends never ? never : string, profile = null as typeof PROFILE | null): ServerMsg =>
  ({ type: "state", phase: phase as never, profile, config: null as never, t_ms: 0 });

describe("CalibrationWizard", () => {
  it("runs countdown, rest capture, mvc capture, done", () => {
    const { wizard, commands, steps } = makeWizard();
    wizard.begin();
    expect(commands).toEqual(["calibrate_rest"]);
    expect(steps.some((s) => s.kind === "countdown" && s.secondsLeft === 2)).toBe(true);
    expect(wizard.step).toEqual({ kind: "capturing", capture: "rest" });

    wizard.feed(state("calibrating_rest"));
    wizard.feed(state("idle"));
    expect(wizard.step.kind).toBe("rest-done");

    wizard.proceedToMvc();
    expect(commands).toEqual(["calibrate_rest", "calibrate_mvc"]);
    wizard.feed(state("calibrating_mvc"));
    wizard.feed(state("idle", PROFILE));
    expect(wizard.step).toEqual({ kind: "done", profile: PROFILE });
  });

  it("surfaces calibration failure and allows retry", () => {
    const { wizard, commands } = makeWizard();
    wizard.begin();
    wizard.feed(state("idle"));
    wizard.proceedToMvc();
    wizard.feed({ type: "error", field: "calibration", msg: "mvc <= rest" });
    expect(wizard.step).toEqual({ kind: "failed", reason: "mvc <= rest" });
    wizard.retry();
    expect(wizard.step).toEqual({ kind: "capturing", capture: "rest" });
    expect(commands).toEqual(["calibrate_rest", "calibrate_mvc", "calibrate_rest"]);
  });

  it("cancel stops the engine and returns to idle", () => {
    const { wizard, commands } = makeWizard();
    wizard.begin();
    wizard.cancel();
    expect(commands).toContain("stop");
    expect(wizard.step).toEqual({ kind: "idle" });
    // Late state messages from the cancelled capture change nothing.
    wizard.feed(state("idle"));
    expect(wizard.step).toEqual({ kind: "idle" });
  });

  it("ignores unrelated errors", () => {
    const { wizard } = makeWizard();
    wizard.begin();
    wizard.feed({ type: "error", field: "delta", msg: "must be in [0, 50)" });
    expect(wizard.step.kind).toBe("capturing");
  });
});
