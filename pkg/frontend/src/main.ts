/** Browser bootstrap: wires the client, model, controls and render loop. */
import { ServiceClient } from "./client.js";
import { ConsoleModel } from "./model.js";
import { renderView, type ConsoleEls } from "./render.js";
import type { ControlAction } from "./types.js";

function serviceBase(): string {
  const param = new URLSearchParams(location.search).get("service");
  if (param !== null) {
    return param;
  }
  return `${location.protocol}//${location.hostname}:8000`;
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function main(): void {
  const model = new ConsoleModel();
  const client = new ServiceClient(serviceBase());
  const controller = new AbortController();

  const els: ConsoleEls = {
    staleBanner: el("stale-banner"),
    status: el("status"),
    clock: el("clock"),
    mode: el("mode"),
    intent: el("intent"),
    emgValue: el("emg-value"),
    emgCanvas: el<HTMLCanvasElement>("emg-plot"),
    servoTheta: el("servo-theta"),
    servoGauge: el<HTMLProgressElement>("servo-gauge"),
    openness: el("openness"),
    stagePanel: el("stage-panel"),
    cupGauge: el<HTMLProgressElement>("cup-gauge"),
    totals: el("totals"),
    scent: el("scent"),
    rejections: el("rejections"),
    stagedLabel: el("staged-label"),
  };
  el("service-url").textContent = client.baseUrl;

  const submit = async (action: ControlAction) => {
    const result = await client.submit(action);
    if (!result.ok) {
      model.rejected(action, result.message, Date.now());
    }
  };

  el("btn-start").addEventListener("click", () => void submit({ action: "StartStage" }));
  el("btn-stop").addEventListener("click", () => void submit({ action: "StopStage" }));
  el("btn-scent").addEventListener("click", () => void submit({ action: "ScentTrigger" }));
  el("btn-extension").addEventListener("click", () =>
    void submit({ action: "SetMode", mode: "extension" }),
  );
  el("btn-flexion").addEventListener("click", () =>
    void submit({ action: "SetMode", mode: "flexion" }),
  );
  const scentEnabled = el<HTMLInputElement>("scent-enabled");
  scentEnabled.addEventListener("change", () =>
    void submit({ action: "SetEnabled", enabled: scentEnabled.checked }),
  );

  // Threshold sliders stage a Recalibrate; nothing is sent until Apply.
  const kOn = el<HTMLInputElement>("k-on");
  const kOff = el<HTMLInputElement>("k-off");
  const restage = () =>
    model.stageRecalibration(Number(kOn.value), Number(kOff.value));
  kOn.addEventListener("input", restage);
  kOff.addEventListener("input", restage);
  restage();
  el("btn-recalibrate").addEventListener("click", () => {
    const staged = model.stagedRecalibration();
    void submit({ action: "Recalibrate", k_on: staged.kOn, k_off: staged.kOff });
  });

  void client.streamForever(
    {
      onFrame: (frame) => model.ingest(frame, Date.now()),
      onDrop: () => model.connectionLost(),
    },
    controller.signal,
  );

  const paint = () => {
    renderView(model.view(Date.now()), els);
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);
}

main();
