// Pure mirror of the broadcast stream.
//
// The UI computes no security state of its own: UiState is a fold over
// the received messages and nothing else, which the tests exercise by
// replaying recorded streams. In particular the LED field is copied
// verbatim from the kernel's snapshot.

import type { DeviceSnapshot, ServerMessage, TraceRecord } from "./types.js";

export interface UiState {
  connected: boolean;
  scenario: string;
  speed: number;
  timeUs: number;
  snapshotSeq: number;
  devices: Record<string, DeviceSnapshot>;
  deviceOrder: string[];
  banner: string | null;
  trace: TraceRecord[];
}

export const TRACE_KEEP = 200;

export function initialState(): UiState {
  return {
    connected: false,
    scenario: "",
    speed: 1,
    timeUs: 0,
    snapshotSeq: -1,
    devices: {},
    deviceOrder: [],
    banner: null,
    trace: [],
  };
}

export function applyMessage(state: UiState, msg: ServerMessage): UiState {
  switch (msg.type) {
    case "hello":
      return {
        ...initialState(),
        connected: true,
        scenario: msg.scenario,
        speed: msg.speed,
        deviceOrder: [...msg.devices],
      };
    case "state_snapshot": {
      const devices: Record<string, DeviceSnapshot> = {};
      let banner = state.banner;
      for (const snap of msg.devices) {
        devices[snap.device] = snap;
        const previous = state.devices[snap.device];
        if (previous && snap.feedback_count > previous.feedback_count) {
          // the kernel blinked the indicator at the user: surface it
          banner = `Indicator check on ${snap.device}: re-press the ` +
            `attention key before acting`;
        }
      }
      return {
        ...state,
        timeUs: msg.time_us,
        snapshotSeq: msg.seq,
        devices,
        deviceOrder: state.deviceOrder.length
          ? state.deviceOrder
          : msg.devices.map((d) => d.device),
        banner,
      };
    }
    case "trace_event": {
      const trace = [...state.trace, msg.record];
      if (trace.length > TRACE_KEEP) {
        trace.splice(0, trace.length - TRACE_KEEP);
      }
      return { ...state, trace };
    }
    case "clock":
      return { ...state, timeUs: msg.time_us };
    default:
      return state;
  }
}

export function replayStream(messages: ServerMessage[]): UiState[] {
  const states: UiState[] = [];
  let state = initialState();
  for (const msg of messages) {
    state = applyMessage(state, msg);
    states.push(state);
  }
  return states;
}

export function ledModeSequence(
  messages: ServerMessage[],
  device: string,
): Array<[string, boolean]> {
  // collapse the stream to the (mode, led) transitions of one device
  const seq: Array<[string, boolean]> = [];
  for (const state of replayStream(messages)) {
    const snap = state.devices[device];
    if (!snap) continue;
    const point: [string, boolean] = [snap.mode, snap.led];
    const last = seq[seq.length - 1];
    if (!last || last[0] !== point[0] || last[1] !== point[1]) {
      seq.push(point);
    }
  }
  return seq;
}
