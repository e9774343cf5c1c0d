import { applyMessage, initialState } from "./state.js";
import { BridgeClient } from "./socket.js";
import { buildView } from "./view.js";
import { render, type InputSink } from "./render.js";
import type { ServerMessage, UserInput } from "./types.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

let state = initialState();
let selected: string | null = null;
let spoofDemo = false;

const url = new URL(window.location.href);
const bridge = `ws://${url.hostname}:${url.searchParams.get("port") ?? "8765"}`;

const client = new BridgeClient(bridge, {
  onMessage(msg: ServerMessage) {
    state = applyMessage(state, msg);
    paint();
  },
  onConnect() {
    state = { ...state, connected: true };
    paint();
  },
  onDisconnect() {
    state = { ...state, connected: false };
    paint();
  },
});

const sink: InputSink = Object.assign(
  (input: UserInput) => {
    const device = selected ?? state.deviceOrder[0];
    if (device) client.send(device, input);
  },
  {
    selectDevice(device: string) {
      selected = device;
      paint();
    },
    toggleSpoof() {
      spoofDemo = !spoofDemo;
      paint();
    },
  },
);

function paint(): void {
  render(root as HTMLElement, buildView(state, selected, spoofDemo), sink);
}

paint();
client.connect();
