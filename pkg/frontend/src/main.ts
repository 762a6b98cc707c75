/** DOM glue: connect to the service, render the view model, send advice. */

import {
  Composer,
  ViewModel,
  applyMessage,
  applySnapshot,
  composeAdvice,
  initialComposer,
  initialViewModel,
  recordSubmission,
  selectCommand,
  setConnected,
  setSentence,
  sparklinePoints,
  toggleNoise,
} from "./viewmodel.js";
import {
  ACTIONS,
  ActionLabel,
  SessionSnapshot,
  configUpdate,
  parseServerMessage,
} from "./wire.js";

let vm: ViewModel = initialViewModel();
let composer: Composer = initialComposer();
let socket: WebSocket | null = null;
let sessionId = new URLSearchParams(location.search).get("session") ?? "";

const $ = (id: string) => document.getElementById(id)!;

function serviceBase(): string {
  return location.origin.replace(/^file:.*/, "http://localhost:8000");
}

async function hydrate(): Promise<void> {
  if (!sessionId) return;
  const res = await fetch(`${serviceBase()}/session/${sessionId}`);
  if (res.ok) {
    vm = applySnapshot(vm, (await res.json()) as SessionSnapshot);
    render();
  }
}

function connect(): void {
  if (!sessionId) return;
  const url = `${serviceBase().replace(/^http/, "ws")}/session/${sessionId}/ws`;
  socket = new WebSocket(url);
  socket.onopen = () => {
    vm = setConnected(vm, true);
    render();
  };
  socket.onmessage = (event) => {
    const msg = parseServerMessage(JSON.parse(event.data));
    if (msg) {
      vm = applyMessage(vm, msg);
      render();
    }
  };
  socket.onclose = () => {
    vm = setConnected(vm, false);
    render();
    setTimeout(() => {
      void hydrate().then(connect);
    }, 1000);
  };
}

function sideCell(clean: boolean, hasGoblet: boolean, label: string): string {
  return `<div class="side ${clean ? "clean" : "dirty"}">${label}${
    hasGoblet ? " 🏺" : ""
  }</div>`;
}

function renderTable(): string {
  const s = vm.state;
  if (!s) return "<em>waiting for the first update…</em>";
  const hand =
    s.hand_object === "sponge" ? "🧽" : s.hand_object === "goblet" ? "🏺" : "✋";
  const arm = (where: string) => (s.hand_position === where ? ` ${hand}` : "");
  return [
    sideCell(s.left_clean, s.goblet_position === "left", `left${arm("left")}`),
    `<div class="side home">home${arm("home")}</div>`,
    sideCell(s.right_clean, s.goblet_position === "right", `right${arm("right")}`),
  ].join("");
}

function renderHistory(): string {
  return vm.history
    .slice()
    .reverse()
    .map((row) => {
      const conf =
        row.fusedConfidence === null ? "—" : row.fusedConfidence.toFixed(3);
      const label = row.fusedLabel ?? row.sentence;
      const note = row.reason ? ` (${row.reason})` : "";
      return `<li class="advice ${row.status}">“${row.sentence}” → ${label} · γ=${conf} · <b>${row.status}</b>${note}</li>`;
    })
    .join("");
}

function renderSparkline(): string {
  const pts = sparklinePoints(vm.rewards, 280, 48);
  if (pts.length < 2) return "";
  const d = pts.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  return `<svg viewBox="0 0 280 48" width="280" height="48"><polyline points="${d}" fill="none" stroke="#2a7" stroke-width="1.5"/></svg>`;
}

function render(): void {
  $("banner").hidden = vm.connected || !vm.everConnected;
  $("session-label").textContent = vm.sessionId ?? "(not connected)";
  $("episode").textContent = String(vm.episode);
  $("step").textContent = String(vm.step);
  $("last-action").textContent = vm.lastAction ?? "—";
  $("episode-reward").textContent = vm.episodeReward.toFixed(2);
  $("outcome").textContent = vm.lastOutcome ?? "—";
  $("table").innerHTML = renderTable();
  $("history").innerHTML = renderHistory();
  $("sparkline").innerHTML = renderSparkline();
  $("sentence").setAttribute("value", composer.sentence);
  composer.gestureSlots.forEach((label, i) => {
    $(`slot-${i}`).textContent = label;
  });
}

function buildControls(): void {
  const commands = $("commands");
  for (const action of ACTIONS) {
    const btn = document.createElement("button");
    btn.textContent = action;
    btn.onclick = () => {
      composer = selectCommand(composer, action as ActionLabel);
      render();
    };
    commands.appendChild(btn);
  }
  ($("sentence") as HTMLInputElement).oninput = (e) => {
    composer = setSentence(composer, (e.target as HTMLInputElement).value);
  };
  $("noise").onclick = () => {
    composer = toggleNoise(composer, Math.random);
    render();
  };
  $("send").onclick = () => {
    if (!socket || socket.readyState !== WebSocket.OPEN) return;
    vm = recordSubmission(vm, composer);
    socket.send(JSON.stringify(composeAdvice(composer)));
    render();
  };
  $("pace").onchange = (e) => {
    const pace = Number((e.target as HTMLInputElement).value);
    if (socket && pace > 0) socket.send(JSON.stringify(configUpdate({ pace })));
  };
  ($("session-input") as HTMLInputElement).onchange = (e) => {
    sessionId = (e.target as HTMLInputElement).value.trim();
    socket?.close();
    vm = initialViewModel();
    void hydrate().then(connect);
  };
}

buildControls();
void hydrate().then(connect);
render();
