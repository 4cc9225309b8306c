/** DOM wiring: connects the tested core (client/wizard/chart) to the page. */

import { ConsoleClient } from "./client.js";
import { drawChart } from "./chart.js";
import type { ControlConfig, StateMsg } from "./messages.js";
import { sliderBounds } from "./validation.js";
import { CalibrationWizard, type WizardStep } from "./wizard.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const SLIDER_FIELDS = ["th", "th1", "th2", "delta", "hysteresis_gap"] as const;
type SliderField = (typeof SLIDER_FIELDS)[number];

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/`;
}

function setup(): void {
  const canvas = $<HTMLCanvasElement>("chart");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");

  const sliders = new Map<SliderField, HTMLInputElement>();
  const readouts = new Map<SliderField, HTMLElement>();
  for (const f of SLIDER_FIELDS) {
    sliders.set(f, $<HTMLInputElement>(`slider-${f}`));
    readouts.set(f, $(`value-${f}`));
  }

  const connBadge = $("connection");
  const phaseBadge = $("phase");
  const profileBadge = $("profile");
  const errorBox = $("errors");
  const fpsBadge = $("fps");
  const wizardBox = $("wizard-status");
  const startBtn = $<HTMLButtonElement>("btn-start");
  const stopBtn = $<HTMLButtonElement>("btn-stop");
  const calibrateBtn = $<HTMLButtonElement>("btn-calibrate");
  const wizardNextBtn = $<HTMLButtonElement>("btn-wizard-next");
  const wizardCancelBtn = $<HTMLButtonElement>("btn-wizard-cancel");

  let flashTimer: number | undefined;
  const flashError = (text: string) => {
    errorBox.textContent = text;
    errorBox.classList.add("visible");
    clearTimeout(flashTimer);
    flashTimer = window.setTimeout(() => errorBox.classList.remove("visible"), 4000);
  };

  const applyConfigToControls = (config: ControlConfig, pending: ReadonlySet<string>) => {
    for (const f of SLIDER_FIELDS) {
      const slider = sliders.get(f)!;
      const bounds = sliderBounds(f, config);
      slider.min = String(bounds.min);
      slider.max = String(bounds.max);
      slider.step = String(bounds.step);
      const isPending = pending.has(f);
      slider.classList.toggle("pending", isPending);
      if (!isPending && document.activeElement !== slider) {
        slider.value = String(config[f]);
      }
      readouts.get(f)!.textContent = isPending
        ? `${slider.value} (pending)`
        : String(config[f]);
    }
    for (const radio of document.querySelectorAll<HTMLInputElement>("input[name=strategy]")) {
      radio.checked = radio.value === config.strategy;
      radio.disabled = pending.has("strategy");
    }
    document.body.dataset.strategy = config.strategy;
  };

  const client = new ConsoleClient(
    wsUrl(),
    (url) => new WebSocket(url),
    {
      onConnection: (phase) => {
        connBadge.textContent = phase;
        connBadge.dataset.state = phase;
      },
      onConfig: applyConfigToControls,
      onFieldError: (err) => {
        flashError(`${err.field}: ${err.msg}`);
        if (client.config) applyConfigToControls(client.config, client.pending);
      },
      onEngineState: (state: StateMsg) => {
        phaseBadge.textContent = state.phase;
        profileBadge.textContent = state.profile
          ? `rest ${state.profile.rest_raw} / mvc ${state.profile.mvc_raw}`
          : "not calibrated";
        startBtn.disabled = state.profile === null || state.phase === "running";
        stopBtn.disabled = state.phase !== "running";
        wizard.feed(state);
      },
      onMessage: (msg) => {
        if (msg.type === "error") wizard.feed(msg);
      },
    },
  );

  const wizard = new CalibrationWizard(client, (step: WizardStep) => {
    wizardNextBtn.hidden = step.kind !== "rest-done" && step.kind !== "failed";
    wizardNextBtn.textContent = step.kind === "failed" ? "retry" : "capture MVC";
    wizardCancelBtn.hidden = step.kind === "idle" || step.kind === "done";
    switch (step.kind) {
      case "idle":
        wizardBox.textContent = "";
        break;
      case "countdown":
        wizardBox.textContent =
          step.capture === "rest"
            ? `relax the arm... ${step.secondsLeft}`
            : `maximal extensions... ${step.secondsLeft}`;
        break;
      case "capturing":
        wizardBox.textContent = `capturing ${step.capture}...`;
        break;
      case "rest-done":
        wizardBox.textContent = "rest level captured";
        break;
      case "done":
        wizardBox.textContent = `calibrated: dynamic range ${step.profile.rest_raw}..${step.profile.mvc_raw}, threshold at 50%`;
        break;
      case "failed":
        wizardBox.textContent = `calibration failed: ${step.reason}`;
        break;
    }
  });

  for (const f of SLIDER_FIELDS) {
    const slider = sliders.get(f)!;
    slider.addEventListener("change", () => {
      client.sendPatch({ [f]: Number(slider.value) });
    });
    slider.addEventListener("input", () => {
      readouts.get(f)!.textContent = `${slider.value} (moving)`;
    });
  }
  for (const radio of document.querySelectorAll<HTMLInputElement>("input[name=strategy]")) {
    radio.addEventListener("change", () => {
      if (radio.checked) client.sendStrategy(radio.value as ControlConfig["strategy"]);
    });
  }
  startBtn.addEventListener("click", () => client.start());
  stopBtn.addEventListener("click", () => client.stop());
  calibrateBtn.addEventListener("click", () => wizard.begin());
  wizardNextBtn.addEventListener("click", () => {
    if (wizard.step.kind === "failed") wizard.retry();
    else wizard.proceedToMvc();
  });
  wizardCancelBtn.addEventListener("click", () => wizard.cancel());

  // Render loop decoupled from message ingestion via the rolling buffer.
  let frameCount = 0;
  let fpsWindowStart = performance.now();
  const render = () => {
    const rect = canvas.getBoundingClientRect();
    if (canvas.width !== rect.width) canvas.width = rect.width;
    if (canvas.height !== rect.height) canvas.height = rect.height;
    drawChart(
      ctx,
      canvas.width,
      canvas.height,
      client.buffer.window(30_000),
      client.config,
      { stale: client.isStale(Date.now()), spanMs: 30_000 },
    );
    frameCount++;
    const now = performance.now();
    if (now - fpsWindowStart >= 1000) {
      fpsBadge.textContent = `${Math.round((frameCount * 1000) / (now - fpsWindowStart))} fps`;
      frameCount = 0;
      fpsWindowStart = now;
    }
    requestAnimationFrame(render);
  };

  client.connect();
  requestAnimationFrame(render);
}

window.addEventListener("load", setup);
