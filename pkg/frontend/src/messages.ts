/** Wire protocol message shapes (one JSON object per WebSocket text frame). */

export type StrategyName = "onoff" | "proportional";

export interface ControlConfig {
  strategy: StrategyName;
  th: number;
  th1: number;
  th2: number;
  delta: number;
  hysteresis_gap: number;
  literal_eq2: boolean;
  ma_window: number;
}

export interface CalibrationProfile {
  rest_raw: number;
  mvc_raw: number;
  captured_at: string | null;
  rest_window_ms: number;
  mvc_window_ms: number;
}

export type EnginePhase =
  | "idle"
  | "calibrating_rest"
  | "calibrating_mvc"
  | "running";

export interface TelemetryMsg {
  type: "telemetry";
  t_ms: number;
  emg_percent: number;
  reference: number;
  position: number;
  config: ControlConfig;
  late_max_ms?: number;
  late_window_ms?: number;
  late_over_2ms?: number;
}

export interface AckMsg {
  type: "ack";
  cmd: string;
  config: ControlConfig;
}

export interface ErrorMsg {
  type: "error";
  field: string | null;
  msg: string;
}

export interface StateMsg {
  type: "state";
  phase: EnginePhase;
  profile: CalibrationProfile | null;
  config: ControlConfig;
  t_ms: number;
}

export type ServerMsg = TelemetryMsg | AckMsg | ErrorMsg | StateMsg;

export type ConfigPatch = Partial<ControlConfig>;

export type ClientMsg =
  | { type: "set_config"; patch: ConfigPatch }
  | { type: "set_strategy"; strategy: StrategyName }
  | { type: "calibrate_rest" }
  | { type: "calibrate_mvc" }
  | { type: "start" }
  | { type: "stop" };
