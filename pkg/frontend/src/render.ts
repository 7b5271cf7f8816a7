/** Thin DOM binding: paints a ViewState into fixed page elements. */
import type { ViewState } from "./model.js";

export interface ConsoleEls {
  staleBanner: HTMLElement;
  status: HTMLElement;
  clock: HTMLElement;
  mode: HTMLElement;
  intent: HTMLElement;
  emgValue: HTMLElement;
  emgCanvas: HTMLCanvasElement;
  servoTheta: HTMLElement;
  servoGauge: HTMLProgressElement;
  openness: HTMLElement;
  stagePanel: HTMLElement;
  cupGauge: HTMLProgressElement;
  totals: HTMLElement;
  scent: HTMLElement;
  rejections: HTMLElement;
  stagedLabel: HTMLElement;
}

const EMG_PLOT_MAX = 600; // ADC units shown; bursts reach ~450

export function drawEmg(view: ViewState, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const y = (v: number) => height - (Math.min(v, EMG_PLOT_MAX) / EMG_PLOT_MAX) * height;

  for (const [value, color] of [
    [view.thresholdOn, "#c0392b"],
    [view.thresholdOff, "#e67e22"],
  ] as const) {
    ctx.strokeStyle = color;
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(0, y(value));
    ctx.lineTo(width, y(value));
    ctx.stroke();
  }
  ctx.setLineDash([]);

  const points = view.emg;
  if (points.length < 2) {
    return;
  }
  ctx.strokeStyle = "#2980b9";
  ctx.beginPath();
  points.forEach((p, i) => {
    const x = (i / (points.length - 1)) * width;
    if (i === 0) {
      ctx.moveTo(x, y(p.value));
    } else {
      ctx.lineTo(x, y(p.value));
    }
  });
  ctx.stroke();
}

export function renderView(view: ViewState, els: ConsoleEls): void {
  els.staleBanner.hidden = !view.stale;
  els.status.textContent = view.status;
  els.clock.textContent = view.tMs === null ? "-" : `${(view.tMs / 1000).toFixed(1)} s`;
  els.mode.textContent = view.mode;
  els.intent.textContent = view.intentActive ? "ACTIVE" : "idle";
  els.intent.className = view.intentActive ? "intent on" : "intent";
  els.emgValue.textContent =
    view.filteredEmg === null ? "-" : view.filteredEmg.toFixed(1);
  drawEmg(view, els.emgCanvas);

  els.servoTheta.textContent =
    view.servoTheta === null
      ? "-"
      : `${view.servoTheta.toFixed(1)}° → ${view.servoTarget?.toFixed(0)}°`;
  els.servoGauge.value = view.servoTheta ?? 0;
  els.openness.textContent =
    view.openness === null ? "-" : `${(view.openness * 100).toFixed(0)}% open`;

  if (view.stage === null) {
    els.stagePanel.textContent = "no stage running";
    els.cupGauge.value = 0;
  } else {
    const s = view.stage;
    els.stagePanel.textContent =
      `stage ${s.index} (${s.status}): ${s.squeezes}/${s.target} squeezes, ` +
      `score ${s.score.toFixed(1)}, cup tier ${s.cup_tier}, ` +
      `${(s.elapsed_ms / 1000).toFixed(0)}s elapsed`;
    els.cupGauge.value = s.cup_level;
  }

  const t = view.totals;
  els.totals.textContent =
    t === null
      ? "-"
      : `squeezes ${t.squeezes} · score ${t.score.toFixed(1)} · scents ` +
        `${t.scent_emissions} · frames ${t.frames_sent} (${t.frames_dropped} lost)`;
  els.scent.textContent =
    view.scent === null
      ? "-"
      : view.scent.enabled
        ? view.scent.emitting
          ? "emitting"
          : "ready"
        : "disabled";

  els.rejections.replaceChildren(
    ...view.rejections.map((r) => {
      const li = document.createElement("li");
      li.textContent = `${r.action}: ${r.message}`;
      return li;
    }),
  );
  els.stagedLabel.textContent =
    `k_on ${view.staged.kOn.toFixed(1)} / k_off ${view.staged.kOff.toFixed(1)}`;
}
