// The spoof demo can fake every pixel of the secure screen; the
// hardware LED widget stays wired to the kernel snapshot no matter what.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { replayStream } from "../src/state.js";
import {
  buildDeviceView,
  buildView,
  formatClock,
  type SecureMenuView,
} from "../src/view.js";
import type { DeviceSnapshot, ServerMessage } from "../src/types.js";

const fixturePath = fileURLToPath(
  new URL("./fixtures/recorded_stream.json", import.meta.url));
const messages: ServerMessage[] = JSON.parse(
  readFileSync(fixturePath, "utf-8")).messages;

function snapshots(): DeviceSnapshot[] {
  const out: DeviceSnapshot[] = [];
  for (const state of replayStream(messages)) {
    for (const device of Object.values(state.devices)) out.push(device);
  }
  return out;
}

describe("view construction", () => {
  it("LED widget equals the kernel field, spoof demo on or off", () => {
    for (const snap of snapshots()) {
      for (const spoof of [false, true]) {
        expect(buildDeviceView(snap, spoof).led).toBe(snap.led);
      }
    }
  });

  it("secure mode renders the secure menu", () => {
    const secure = snapshots().find((s) => s.mode === "secure");
    expect(secure).toBeDefined();
    const view = buildDeviceView(secure!, false);
    expect(view.screen.kind).toBe("secure_menu");
    const menu = view.screen as SecureMenuView;
    expect(menu.builtins).toContain("exit");
  });

  it("spoof demo fakes the menu pixel-for-pixel but not the LED", () => {
    const normal = snapshots().find((s) => s.mode === "normal" && !s.led);
    expect(normal).toBeDefined();
    const honest = buildDeviceView({ ...normal!, mode: "secure", led: true },
      false);
    const spoofed = buildDeviceView(normal!, true);
    expect(spoofed.screen.kind).toBe("spoofed_secure");
    // identical screen content...
    const strip = (s: SecureMenuView) =>
      JSON.stringify({ ...s, kind: undefined });
    expect(strip(spoofed.screen as SecureMenuView)).toBe(
      strip(honest.screen as SecureMenuView));
    // ...but the hardware indicator still reports the kernel state
    expect(spoofed.led).toBe(false);
    expect(honest.led).toBe(true);
  });

  it("spoof label lives in the chrome, never inside the screen model", () => {
    const states = replayStream(messages);
    const last = states[states.length - 1];
    const view = buildView(last, "phoneA", true);
    expect(view.spoofLabel).toContain("DEMO");
    expect(JSON.stringify(view.phone!.screen)).not.toContain("DEMO");
  });

  it("home screen shows pending badge", () => {
    const normal = snapshots().find((s) => s.mode === "normal");
    const withPending = {
      ...normal!,
      pending: [{ request_id: 1, kind: "request_data", peer: "bob",
                  groups: ["friends"] }],
    };
    const view = buildDeviceView(withPending, false);
    expect(view.screen.kind).toBe("home");
    expect((view.screen as { pendingBadge: number }).pendingBadge).toBe(1);
  });

  it("clock formatting", () => {
    expect(formatClock(0)).toBe("00:00");
    expect(formatClock(61_000_000)).toBe("01:01");
    expect(formatClock(301_000_000)).toBe("05:01");
  });

  it("connection loss greys the device but keeps the last state", () => {
    const states = replayStream(messages);
    const last = { ...states[states.length - 1], connected: false };
    const view = buildView(last, "phoneA", false);
    expect(view.connected).toBe(false);
    expect(view.phone).not.toBeNull(); // still rendered, just greyed
  });
});
