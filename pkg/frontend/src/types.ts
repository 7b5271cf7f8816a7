/** Wire types mirroring the service's telemetry and control schemas.
 *
 * TelemetryFrame mirrors the stream schema exactly and is render-only:
 * the console never mutates a frame or simulates state client-side.
 */

export type SessionStatus = "Idle" | "Running" | "Intermission" | "Finished";
export type IntentMode = "extension" | "flexion";

export interface StageView {
  index: number;
  status: string;
  target: number;
  squeezes: number;
  score: number;
  cup_level: number;
  cup_tier: number;
  elapsed_ms: number;
}

export interface ScentView {
  enabled: boolean;
  emitting: boolean;
  last_trigger_ms: number | null;
}

export interface SessionTotals {
  squeezes: number;
  score: number;
  scent_emissions: number;
  frames_sent: number;
  frames_dropped: number;
}

export interface TelemetryFrame {
  t_ms: number;
  status: SessionStatus;
  mode: IntentMode;
  filtered_emg: number;
  intent_active: boolean;
  servo_theta: number;
  servo_target: number;
  openness: number;
  stage: StageView | null;
  scent: ScentView;
  totals: SessionTotals;
}

export type ControlAction =
  | { action: "StartStage" }
  | { action: "StopStage" }
  | { action: "ScentTrigger" }
  | { action: "SetMode"; mode: IntentMode }
  | { action: "Recalibrate"; k_on: number; k_off: number }
  | { action: "SetEnabled"; enabled: boolean };

export type SubmitResult =
  | { ok: true }
  | { ok: false; status: number; message: string };
