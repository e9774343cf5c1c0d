// View construction: UiState in, a plain view tree out.
//
// The view tree is what the DOM layer paints and what the tests assert
// on. The LED widget is bound to the kernel-reported led field and to
// nothing else; the spoof demo can fake every pixel of the secure
// screen but has no path to this widget, which is the entire point of
// a hardware indicator.

import type { DeviceSnapshot, PendingEntry } from "./types.js";
import type { UiState } from "./state.js";

export interface SecureMenuView {
  kind: "secure_menu" | "spoofed_secure";
  builtins: string[];
  requests: PendingEntry[];
  user: string;
}

export interface HomeScreenView {
  kind: "home";
  apps: string[];
  pendingBadge: number;
}

export type ScreenView = SecureMenuView | HomeScreenView;

export interface DeviceView {
  device: string;
  user: string;
  led: boolean; // hardware indicator: kernel state, verbatim
  screen: ScreenView;
  sensors: Array<{ name: string; policy: string }>;
  suppressedSession: boolean;
}

export interface ViewModel {
  connected: boolean;
  scenario: string;
  clock: string;
  deviceTabs: string[];
  selected: string | null;
  banner: string | null;
  spoofDemo: boolean;
  spoofLabel: string | null; // chrome-level, never inside the screen
  phone: DeviceView | null;
}

export const MENU_BUILTINS = [
  "repository",
  "sensors",
  "archive",
  "peer_admin",
  "exit",
];

export function formatClock(timeUs: number): string {
  const totalSeconds = Math.floor(timeUs / 1_000_000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${String(minutes).padStart(2, "0")}:${String(seconds).padStart(2, "0")}`;
}

function secureMenu(
  snap: DeviceSnapshot,
  kind: "secure_menu" | "spoofed_secure",
): SecureMenuView {
  return {
    kind,
    builtins: [...MENU_BUILTINS],
    requests: snap.pending.map((p) => ({ ...p, groups: [...p.groups] })),
    user: snap.user,
  };
}

export function buildDeviceView(
  snap: DeviceSnapshot,
  spoofDemo: boolean,
): DeviceView {
  let screen: ScreenView;
  if (snap.mode === "secure") {
    screen = secureMenu(snap, "secure_menu");
  } else if (spoofDemo) {
    // pixel-identical fake of the secure menu, minus the one thing
    // normal-world code cannot draw: the hardware LED
    screen = secureMenu(snap, "spoofed_secure");
  } else {
    screen = {
      kind: "home",
      apps: ["messaging", "payments", "settings"],
      pendingBadge: snap.pending.length,
    };
  }
  return {
    device: snap.device,
    user: snap.user,
    led: snap.led,
    screen,
    sensors: Object.entries(snap.sensors)
      .map(([name, p]) => ({ name, policy: p.policy }))
      .sort((a, b) => a.name.localeCompare(b.name)),
    suppressedSession: snap.suppressed_session,
  };
}

export function buildView(
  state: UiState,
  selected: string | null,
  spoofDemo: boolean,
): ViewModel {
  const tabs = state.deviceOrder.length
    ? state.deviceOrder
    : Object.keys(state.devices).sort();
  const pick = selected && state.devices[selected] ? selected : tabs[0] ?? null;
  const snap = pick ? state.devices[pick] : undefined;
  return {
    connected: state.connected,
    scenario: state.scenario,
    clock: formatClock(state.timeUs),
    deviceTabs: tabs,
    selected: pick,
    banner: state.banner,
    spoofDemo,
    spoofLabel: spoofDemo ? "DEMO: spoofed screen (note the dark LED)" : null,
    phone: snap ? buildDeviceView(snap, spoofDemo) : null,
  };
}
