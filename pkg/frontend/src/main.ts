/**
 * Browser wiring: one protocol request per user action, render after each
 * response or event. The page holds no state across reloads except the
 * server address (kept in the URL hash).
 */
import { openSocket, ProtocolClient, ProtocolError } from "./protocol.js";
import {
  applyBreakpoints,
  applyConnectionLoss,
  applyError,
  applyEvent,
  applyInspect,
  applyLoad,
  applyMode,
  applyPosition,
  applySeparability,
  initialViewModel,
} from "./viewmodel.js";
import { renderAll, type Panels } from "./render.js";

const app = document.getElementById("app")!;
app.innerHTML = `
  <div id="connection-banner" class="hidden"></div>
  <header>
    <input id="address" type="text" size="28" />
    <button id="connect">connect</button>
    <span id="status"></span>
  </header>
  <main>
    <section class="left">
      <textarea id="source" rows="14" spellcheck="false"
        placeholder="paste OpenQASM 2.0 here"></textarea>
      <div class="toolbar">
        <button id="load">load</button>
        <button id="step">step</button>
        <button id="continue">continue</button>
        <button id="inspect">inspect</button>
        <button id="separability">separability</button>
        <label><input id="mode-toggle" type="checkbox" /> device mode</label>
      </div>
      <div id="listing"></div>
    </section>
    <section class="right">
      <div id="amplitude-view"></div>
      <div id="histogram-view"></div>
      <div id="qubit-panel"></div>
      <div id="assertions"></div>
    </section>
  </main>
`;

const panels: Panels = {
  banner: document.getElementById("connection-banner")!,
  listing: document.getElementById("listing")!,
  status: document.getElementById("status")!,
  amplitudes: document.getElementById("amplitude-view")!,
  histogram: document.getElementById("histogram-view")!,
  qubits: document.getElementById("qubit-panel")!,
  assertions: document.getElementById("assertions")!,
};

const vm = initialViewModel(window.location.hash.slice(1) || "ws://127.0.0.1:7460");
let client: ProtocolClient | null = null;

const addressInput = document.getElementById("address") as HTMLInputElement;
addressInput.value = vm.address;

function redraw(): void {
  renderAll(vm, panels);
}

async function guarded(action: () => Promise<void>): Promise<void> {
  try {
    vm.lastError = null;
    await action();
  } catch (error) {
    applyError(vm, error instanceof ProtocolError ? `${error.code}: ${error.message}` : String(error));
  }
  redraw();
}

async function connect(): Promise<void> {
  vm.address = addressInput.value;
  window.location.hash = vm.address;
  vm.connection = "connecting";
  redraw();
  try {
    const socket = await openSocket(vm.address);
    client = new ProtocolClient(socket);
    client.onEvent((frame) => {
      applyEvent(vm, frame);
      redraw();
    });
    client.onClose(() => {
      applyConnectionLoss(vm);
      client = null;
      redraw();
    });
    await client.request("hello");
    vm.connection = "connected";
  } catch (error) {
    vm.connection = "disconnected";
    applyError(vm, String(error));
  }
  redraw();
}

function requireClient(): ProtocolClient {
  if (!client) throw new ProtocolError("closed", "not connected");
  return client;
}

document.getElementById("connect")!.addEventListener("click", () => void connect());
panels.banner.addEventListener("click", (event) => {
  if ((event.target as HTMLElement).id === "reconnect") void connect();
});

document.getElementById("load")!.addEventListener("click", () =>
  guarded(async () => {
    const source = (document.getElementById("source") as HTMLTextAreaElement).value;
    applyLoad(vm, await requireClient().request("load", { source }));
  }),
);

document.getElementById("step")!.addEventListener("click", () =>
  guarded(async () => {
    applyPosition(vm, await requireClient().request("step"));
  }),
);

document.getElementById("continue")!.addEventListener("click", () =>
  guarded(async () => {
    applyPosition(vm, await requireClient().request("continue"));
  }),
);

document.getElementById("inspect")!.addEventListener("click", () =>
  guarded(async () => {
    applyInspect(vm, await requireClient().request("inspect"));
  }),
);

document.getElementById("separability")!.addEventListener("click", () =>
  guarded(async () => {
    applySeparability(vm, await requireClient().request("separability"));
  }),
);

document.getElementById("mode-toggle")!.addEventListener("change", (event) =>
  guarded(async () => {
    const device = (event.target as HTMLInputElement).checked;
    const result = await requireClient().request("set-mode", {
      mode: device ? "device" : "omniscient",
    });
    applyMode(vm, result.mode);
  }),
);

panels.listing.addEventListener("click", (event) => {
  const item = (event.target as HTMLElement).closest(".instruction") as HTMLElement | null;
  if (!item) return;
  const line = Number(item.dataset.line);
  void guarded(async () => {
    const result = await requireClient().request("set-breakpoint", { line });
    applyBreakpoints(vm, result.breakpoints);
  });
});

redraw();
