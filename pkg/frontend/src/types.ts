// Bridge wire schema: one JSON document per WebSocket frame.
// This file mirrors the field-by-field documentation in the simulator
// repository; the UI consumes it verbatim and derives nothing else.

export interface PendingEntry {
  request_id: number;
  kind: string;
  peer: string;
  groups: string[];
}

export interface SensorPolicy {
  policy: "open" | "blocked" | "temp_enabled" | "discarding";
  until: number;
}

export interface DeviceSnapshot {
  device: string;
  user: string;
  mode: "normal" | "secure";
  led: boolean;
  pending: PendingEntry[];
  sensors: Record<string, SensorPolicy>;
  feedback_count: number;
  suppressed_session: boolean;
}

export interface HelloMessage {
  type: "hello";
  scenario: string;
  speed: number;
  devices: string[];
}

export interface SnapshotMessage {
  type: "state_snapshot";
  seq: number;
  time_us: number;
  devices: DeviceSnapshot[];
}

export interface TraceRecord {
  t: number;
  seq: number;
  dev: string;
  comp: string;
  event: string;
  [field: string]: unknown;
}

export interface TraceMessage {
  type: "trace_event";
  record: TraceRecord;
}

export interface ClockMessage {
  type: "clock";
  time_us: number;
}

export type ServerMessage =
  | HelloMessage
  | SnapshotMessage
  | TraceMessage
  | ClockMessage;

export interface UserInput {
  kind: "sak" | "touch" | "text" | "exit";
  x?: number;
  y?: number;
  value?: string;
}

export interface UserInputMessage {
  type: "user_input";
  device: string;
  input: UserInput;
}
