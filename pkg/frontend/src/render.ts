/**
 * DOM rendering: one pure pass from the view model to the panels.
 * Bars carry their raw server values in data attributes so tests (and
 * curious users) can check the rendering against the protocol payload.
 */
import { magnitude, phaseColor, phaseDegrees } from "./color.js";
import type { ViewModel } from "./viewmodel.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function bitLabel(index: number, nQubits: number): string {
  return index.toString(2).padStart(nQubits, "0");
}

export function renderBanner(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  root.id = "connection-banner";
  if (vm.connection === "connected") {
    root.classList.add("hidden");
    return;
  }
  root.classList.remove("hidden");
  root.append(
    el("span", "banner-text", vm.connection === "connecting" ? "connecting..." : "disconnected"),
  );
  const button = el("button", "reconnect", "reconnect") as HTMLButtonElement;
  button.id = "reconnect";
  root.append(button);
}

export function renderListing(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  const list = el("ol", "listing");
  for (const entry of vm.instructions) {
    const item = el("li", "instruction", `${entry.source}`);
    item.dataset.index = String(entry.index);
    item.dataset.line = String(entry.line);
    if (entry.index === vm.position && !vm.finished) item.classList.add("current");
    if (vm.breakpoints.has(entry.index)) item.classList.add("breakpoint");
    list.append(item);
  }
  root.append(list);
}

export function renderStatus(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  root.append(el("span", "mode-label", `mode: ${vm.mode}`));
  root.append(
    el(
      "span",
      "position-label",
      vm.finished ? "finished" : `next instruction: ${vm.position}`,
    ),
  );
  if (vm.classicalBits !== null) {
    root.append(el("span", "creg-label", `classical bits: ${vm.classicalBits}`));
  }
  if (vm.lastError) root.append(el("span", "error-label", vm.lastError));
}

export function renderAmplitudes(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  if (vm.mode === "device-faithful" || vm.snapshot === null) {
    root.classList.add("hidden");
    return;
  }
  root.classList.remove("hidden");
  const snapshot = vm.snapshot;
  const chart = el("div", "amp-chart");
  snapshot.amplitudes.forEach(([re, im], index) => {
    const bar = el("div", "amp-bar");
    const column = el("div", "amp-column");
    const mag = magnitude(re, im);
    column.style.height = `${(mag * 100).toFixed(2)}%`;
    column.style.backgroundColor = phaseColor(re, im);
    bar.dataset.basis = bitLabel(index, snapshot.n_qubits);
    bar.dataset.magnitude = mag.toFixed(6);
    bar.dataset.phase = phaseDegrees(re, im).toFixed(1);
    bar.title = `|${bar.dataset.basis}>  magnitude ${bar.dataset.magnitude}  phase ${bar.dataset.phase}°`;
    bar.append(column, el("span", "amp-label", bar.dataset.basis));
    chart.append(bar);
  });
  root.append(chart);
}

export function renderHistogram(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  if (vm.mode !== "device-faithful" || vm.histogram === null) {
    root.classList.add("hidden");
    return;
  }
  root.classList.remove("hidden");
  const total = Object.values(vm.histogram).reduce((a, b) => a + b, 0) || 1;
  const chart = el("div", "hist-chart");
  for (const key of Object.keys(vm.histogram).sort()) {
    const count = vm.histogram[key];
    const bar = el("div", "hist-bar");
    const column = el("div", "hist-column");
    column.style.height = `${((count / total) * 100).toFixed(2)}%`;
    bar.dataset.outcome = key;
    bar.dataset.count = String(count);
    bar.title = `${key}: ${count}/${total}`;
    bar.append(column, el("span", "hist-label", `${key} (${count})`));
    chart.append(bar);
  }
  if (vm.histogramShots !== null) {
    root.append(el("div", "hist-shots", `${vm.histogramShots} sampled measurements`));
  }
  root.append(chart);
}

export function renderQubitPanel(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  const probs = vm.qubitProbabilities;
  const separability = new Map(
    (vm.separability?.per_qubit ?? []).map((entry) => [entry.qubit, entry]),
  );
  const count = Math.max(vm.nQubits, probs?.length ?? 0);
  for (let q = 0; q < count; q++) {
    const row = el("div", "qubit-row");
    row.dataset.qubit = String(q);
    row.append(el("span", "qubit-name", `q${q}`));
    if (probs && probs[q]) {
      const [p0, p1] = probs[q];
      row.append(el("span", "qubit-probs", `p0=${p0.toFixed(4)} p1=${p1.toFixed(4)}`));
    }
    const entry = separability.get(q);
    if (entry) {
      const badge = el(
        "span",
        entry.entangled ? "badge entangled" : "badge separable",
        entry.entangled ? "entangled" : "separable",
      );
      badge.title = `purity ${entry.purity.toFixed(6)}`;
      row.append(badge);
    }
    root.append(row);
  }
}

export function renderAssertions(vm: ViewModel, root: HTMLElement): void {
  root.innerHTML = "";
  const list = el("ul", "assertion-feed");
  for (const item of vm.assertions) {
    const entry = el("li", `assertion ${item.verdict}`, `${item.text}: ${item.verdict}`);
    entry.dataset.verdict = item.verdict;
    list.append(entry);
  }
  root.append(list);
}

export interface Panels {
  banner: HTMLElement;
  listing: HTMLElement;
  status: HTMLElement;
  amplitudes: HTMLElement;
  histogram: HTMLElement;
  qubits: HTMLElement;
  assertions: HTMLElement;
}

export function renderAll(vm: ViewModel, panels: Panels): void {
  renderBanner(vm, panels.banner);
  renderListing(vm, panels.listing);
  renderStatus(vm, panels.status);
  renderAmplitudes(vm, panels.amplitudes);
  renderHistogram(vm, panels.histogram);
  renderQubitPanel(vm, panels.qubits);
  renderAssertions(vm, panels.assertions);
}
