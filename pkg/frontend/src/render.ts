// DOM painting: full redraw of the view tree on every change.
// Nothing here inspects UiState directly; it paints the ViewModel only.

import type { UserInput } from "./types.js";
import type { ScreenView, ViewModel } from "./view.js";

export interface InputSink {
  (input: UserInput): void;
  selectDevice?(device: string): void;
  toggleSpoof?(): void;
}

function el(
  tag: string,
  className: string,
  text?: string,
): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderScreen(screen: ScreenView, sink: InputSink): HTMLElement {
  if (screen.kind === "home") {
    const home = el("div", "screen home");
    const grid = el("div", "app-grid");
    for (const app of screen.apps) {
      const icon = el("button", "app-icon", app);
      icon.addEventListener("click", () => sink({ kind: "touch", x: 0, y: 0 }));
      grid.appendChild(icon);
    }
    home.appendChild(grid);
    if (screen.pendingBadge > 0) {
      home.appendChild(
        el("div", "badge", `${screen.pendingBadge} pending`));
    }
    return home;
  }
  // real secure menu and the spoofed fake share markup by design: only
  // the hardware LED (rendered elsewhere) tells them apart
  const menu = el("div", `screen secure-menu ${screen.kind}`);
  menu.appendChild(el("div", "menu-title", `secure services / ${screen.user}`));
  const list = el("ul", "builtin-list");
  for (const item of screen.builtins) {
    const li = el("li", "builtin", item);
    if (item === "exit") {
      li.addEventListener("click", () => sink({ kind: "exit" }));
    } else {
      li.addEventListener("click", () => sink({ kind: "touch", x: 0, y: 0 }));
    }
    list.appendChild(li);
  }
  menu.appendChild(list);
  if (screen.requests.length > 0) {
    menu.appendChild(el("div", "menu-title", "pending requests"));
    const pending = el("ul", "pending-list");
    for (const req of screen.requests) {
      pending.appendChild(el(
        "li", "pending-entry",
        `${req.kind} from ${req.peer}` +
        (req.groups.length ? ` [${req.groups.join(", ")}]` : "")));
    }
    menu.appendChild(pending);
  }
  return menu;
}

export function render(
  root: HTMLElement,
  view: ViewModel,
  sink: InputSink,
): void {
  root.textContent = "";
  const shell = el("div", view.connected ? "shell" : "shell disconnected");

  const chrome = el("div", "chrome");
  chrome.appendChild(el("span", "scenario", view.scenario || "(no scenario)"));
  chrome.appendChild(el("span", "clock", view.clock));
  const spoofButton = el("button", "spoof-toggle",
    view.spoofDemo ? "spoof demo: on" : "spoof demo: off");
  spoofButton.addEventListener("click", () => sink.toggleSpoof?.());
  chrome.appendChild(spoofButton);
  shell.appendChild(chrome);

  if (view.spoofLabel) {
    shell.appendChild(el("div", "spoof-label", view.spoofLabel));
  }
  if (view.banner) {
    shell.appendChild(el("div", "training-banner", view.banner));
  }

  const tabs = el("div", "tabs");
  for (const device of view.deviceTabs) {
    const tab = el("button",
      device === view.selected ? "tab selected" : "tab", device);
    tab.addEventListener("click", () => sink.selectDevice?.(device));
    tabs.appendChild(tab);
  }
  shell.appendChild(tabs);

  if (view.phone) {
    const phone = el("div", "phone");
    const ledRow = el("div", "led-row");
    // the one widget normal-world pixels can never reach
    const led = el("span", view.phone.led ? "led on" : "led off");
    led.id = "hardware-led";
    ledRow.appendChild(led);
    ledRow.appendChild(el("span", "led-caption", "secure indicator"));
    phone.appendChild(ledRow);

    phone.appendChild(renderScreen(view.phone.screen, sink));

    const controls = el("div", "controls");
    const sak = el("button", "sak-button", "SAK");
    sak.addEventListener("click", () => sink({ kind: "sak" }));
    controls.appendChild(sak);

    const text = document.createElement("input");
    text.className = "text-entry";
    text.placeholder = "type…";
    const send = el("button", "send-button", "type");
    send.addEventListener("click", () => {
      sink({ kind: "text", value: text.value });
      text.value = "";
    });
    controls.appendChild(text);
    controls.appendChild(send);
    phone.appendChild(controls);

    const sensors = el("table", "sensor-table");
    for (const s of view.phone.sensors) {
      const row = el("tr", `sensor ${s.policy}`);
      row.appendChild(el("td", "sensor-name", s.name));
      row.appendChild(el("td", "sensor-policy", s.policy));
      sensors.appendChild(row);
    }
    phone.appendChild(sensors);
    shell.appendChild(phone);
  }

  if (!view.connected) {
    const overlay = el("div", "reconnect-overlay");
    overlay.appendChild(el("div", "reconnect-note", "connection lost"));
    shell.appendChild(overlay);
  }
  root.appendChild(shell);
}
