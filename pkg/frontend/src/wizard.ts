/**
 * Calibration wizard: guides rest capture, then MVC capture, with countdowns.
 *
 * Engine state messages drive the transitions; the wizard never assumes a
 * capture succeeded until the engine reports the new profile. A calibration
 * error lands in a retry prompt; cancelling returns the engine to idle.
 */

import type { ConsoleClient } from "./client.js";
import type { CalibrationProfile, ServerMsg } from "./messages.js";

export type CaptureKind = "rest" | "mvc";

export type WizardStep =
  | { kind: "idle" }
  | { kind: "countdown"; capture: CaptureKind; secondsLeft: number }
  | { kind: "capturing"; capture: CaptureKind }
  | { kind: "rest-done" }
  | { kind: "done"; profile: CalibrationProfile }
  | { kind: "failed"; reason: string };

export type Scheduler = (fn: () => void, ms: number) => void;

export class CalibrationWizard {
  step: WizardStep = { kind: "idle" };

  private readonly client: ConsoleClient;
  private readonly onChange: (step: WizardStep) => void;
  private readonly countdownSeconds: number;
  private readonly schedule: Scheduler;
  private generation = 0; // cancels stale countdown timers

  constructor(
    client: ConsoleClient,
    onChange: (step: WizardStep) => void = () => {},
    countdownSeconds = 3,
    schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {
    this.client = client;
    this.onChange = onChange;
    this.countdownSeconds = countdownSeconds;
    this.schedule = schedule;
  }

  /** Start the flow: countdown, then ask the engine for a rest capture. */
  begin(): void {
    this.startCountdown("rest");
  }

  /** After a successful rest capture, run the MVC side. */
  proceedToMvc(): void {
    if (this.step.kind !== "rest-done") return;
    this.startCountdown("mvc");
  }

  retry(): void {
    if (this.step.kind !== "failed") return;
    this.startCountdown("rest");
  }

  cancel(): void {
    this.generation += 1;
    this.client.stop(); // engine returns to idle, any capture is abandoned
    this.set({ kind: "idle" });
  }

  /** Feed every server message through here (wire it to onMessage). */
  feed(msg: ServerMsg): void {
    if (msg.type === "error" && msg.field === "calibration") {
      this.set({ kind: "failed", reason: msg.msg });
      return;
    }
    if (msg.type !== "state") return;
    if (this.step.kind === "capturing" && msg.phase === "idle") {
      if (this.step.capture === "rest") {
        this.set({ kind: "rest-done" });
      } else if (msg.profile) {
        this.set({ kind: "done", profile: msg.profile });
      }
      // capture === "mvc" with no profile: an error message handles it
    }
  }

  private startCountdown(capture: CaptureKind): void {
    this.generation += 1;
    const gen = this.generation;
    const tick = (left: number) => {
      if (gen !== this.generation) return;
      if (left <= 0) {
        this.set({ kind: "capturing", capture });
        if (capture === "rest") this.client.calibrateRest();
        else this.client.calibrateMvc();
        return;
      }
      this.set({ kind: "countdown", capture, secondsLeft: left });
      this.schedule(() => tick(left - 1), 1000);
    };
    tick(this.countdownSeconds);
  }

  private set(step: WizardStep): void {
    this.step = step;
    this.onChange(step);
  }
}
