/** DOM-free console state.
 *
 * The model holds no authoritative session state: everything displayed
 * comes from the last telemetry frame, so closing and reopening the
 * console reproduces the same view from the next snapshot. The only
 * client-side state is presentation bookkeeping: the rolling EMG
 * window, staleness tracking, recent rejections, and the staged
 * (not yet submitted) recalibration values.
 */
import type {
  ControlAction,
  ScentView,
  SessionTotals,
  StageView,
  TelemetryFrame,
} from "./types.js";

export const STALE_AFTER_MS = 2000;
export const EMG_WINDOW_POINTS = 600;
// Detector defaults, drawn as reference lines on the EMG plot. The
// telemetry schema does not expose live thresholds.
export const DEFAULT_THETA_ON = 250;
export const DEFAULT_THETA_OFF = 150;
const MAX_REJECTIONS = 5;

export interface EmgPoint {
  tMs: number;
  value: number;
}

export interface Rejection {
  action: string;
  message: string;
  atMs: number;
}

export interface StagedRecalibration {
  kOn: number;
  kOff: number;
}

export interface ViewState {
  connectedOnce: boolean;
  stale: boolean;
  status: string;
  mode: string;
  tMs: number | null;
  filteredEmg: number | null;
  intentActive: boolean;
  emg: readonly EmgPoint[];
  thresholdOn: number;
  thresholdOff: number;
  servoTheta: number | null;
  servoTarget: number | null;
  openness: number | null;
  stage: StageView | null;
  scent: ScentView | null;
  totals: SessionTotals | null;
  rejections: readonly Rejection[];
  staged: StagedRecalibration;
}

export class ConsoleModel {
  private latest: TelemetryFrame | null = null;
  private lastFrameAtMs: number | null = null;
  private connected = false;
  private emg: EmgPoint[] = [];
  private rejections: Rejection[] = [];
  private staged: StagedRecalibration = { kOn: 3.0, kOff: 1.5 };

  /** Absorb one telemetry frame received at wall time nowMs. */
  ingest(frame: TelemetryFrame, nowMs: number): void {
    if (this.latest !== null && frame.t_ms < this.latest.t_ms) {
      this.emg = []; // the server restarted; the old window is from another run
    }
    this.latest = frame;
    this.lastFrameAtMs = nowMs;
    this.connected = true;
    this.emg.push({ tMs: frame.t_ms, value: frame.filtered_emg });
    if (this.emg.length > EMG_WINDOW_POINTS) {
      this.emg.splice(0, this.emg.length - EMG_WINDOW_POINTS);
    }
  }

  connectionLost(): void {
    this.connected = false;
  }

  /** Record a server rejection for display; acceptances change nothing
   * here because accepted actions surface through later telemetry. */
  rejected(action: ControlAction, message: string, nowMs: number): void {
    this.rejections.unshift({ action: action.action, message, atMs: nowMs });
    if (this.rejections.length > MAX_REJECTIONS) {
      this.rejections.length = MAX_REJECTIONS;
    }
  }

  stageRecalibration(kOn: number, kOff: number): void {
    this.staged = { kOn, kOff };
  }

  stagedRecalibration(): StagedRecalibration {
    return this.staged;
  }

  view(nowMs: number): ViewState {
    const f = this.latest;
    const stale =
      !this.connected ||
      this.lastFrameAtMs === null ||
      nowMs - this.lastFrameAtMs >= STALE_AFTER_MS;
    return {
      connectedOnce: f !== null,
      stale,
      status: f === null ? "Disconnected" : f.status,
      mode: f === null ? "-" : f.mode,
      tMs: f === null ? null : f.t_ms,
      filteredEmg: f === null ? null : f.filtered_emg,
      intentActive: f !== null && f.intent_active,
      emg: this.emg,
      thresholdOn: DEFAULT_THETA_ON,
      thresholdOff: DEFAULT_THETA_OFF,
      servoTheta: f === null ? null : f.servo_theta,
      servoTarget: f === null ? null : f.servo_target,
      openness: f === null ? null : f.openness,
      stage: f === null ? null : f.stage,
      scent: f === null ? null : f.scent,
      totals: f === null ? null : f.totals,
      rejections: this.rejections,
      staged: this.staged,
    };
  }
}
