/**
 * Session view model: plain state mutated only by protocol results and
 * server events. No quantum state is ever computed here; every number
 * rendered comes from a server payload.
 */
import type {
  AssertionResult,
  EventFrame,
  InspectResult,
  InstructionEntry,
  LoadResult,
  SeparabilityResult,
  Snapshot,
} from "./protocol.js";

export type Connection = "disconnected" | "connecting" | "connected";

export interface AssertionFeedItem {
  kind: string;
  text: string;
  verdict: string;
}

export interface ViewModel {
  connection: Connection;
  address: string;
  source: string;
  instructions: InstructionEntry[];
  nQubits: number;
  position: number;
  finished: boolean;
  breakpoints: Set<number>;
  mode: "omniscient" | "device-faithful";
  snapshot: Snapshot | null;
  classicalBits: string | null;
  histogram: Record<string, number> | null;
  histogramShots: number | null;
  qubitProbabilities: [number, number][] | null;
  separability: SeparabilityResult | null;
  assertions: AssertionFeedItem[];
  lastError: string | null;
  running: boolean;
}

export function initialViewModel(address = "ws://127.0.0.1:7460"): ViewModel {
  return {
    connection: "disconnected",
    address,
    source: "",
    instructions: [],
    nQubits: 0,
    position: 0,
    finished: false,
    breakpoints: new Set(),
    mode: "omniscient",
    snapshot: null,
    classicalBits: null,
    histogram: null,
    histogramShots: null,
    qubitProbabilities: null,
    separability: null,
    assertions: [],
    lastError: null,
    running: false,
  };
}

export function applyLoad(vm: ViewModel, result: LoadResult): void {
  vm.source = result.source;
  vm.instructions = result.instructions;
  vm.nQubits = result.n_qubits;
  vm.position = 0;
  vm.finished = result.instructions.length === 0;
  vm.breakpoints = new Set(result.breakpoints);
  vm.mode = result.mode as ViewModel["mode"];
  vm.snapshot = null;
  vm.histogram = null;
  vm.histogramShots = null;
  vm.qubitProbabilities = null;
  vm.separability = null;
  vm.assertions = [];
  vm.lastError = null;
}

export function applyPosition(vm: ViewModel, result: { position: number; finished: boolean }): void {
  vm.position = result.position;
  vm.finished = result.finished;
}

export function applyInspect(vm: ViewModel, result: InspectResult): void {
  vm.mode = result.mode as ViewModel["mode"];
  vm.position = result.position;
  vm.qubitProbabilities = result.qubit_probabilities ?? null;
  if (result.snapshot) {
    vm.snapshot = result.snapshot;
    vm.classicalBits = result.classical_bits ?? null;
    vm.histogram = null;
    vm.histogramShots = null;
  } else {
    vm.histogram = result.histogram ?? {};
    vm.histogramShots = result.shots ?? null;
    vm.snapshot = null;
    vm.classicalBits = null;
  }
}

export function applyMode(vm: ViewModel, mode: string): void {
  vm.mode = mode as ViewModel["mode"];
  if (vm.mode === "device-faithful") {
    // the amplitude view is disabled in device mode; stale data must not linger
    vm.snapshot = null;
    vm.classicalBits = null;
  } else {
    vm.histogram = null;
    vm.histogramShots = null;
  }
}

export function applyBreakpoints(vm: ViewModel, breakpoints: number[]): void {
  vm.breakpoints = new Set(breakpoints);
}

export function applySeparability(vm: ViewModel, result: SeparabilityResult): void {
  vm.separability = result;
}

export function applyAssertion(vm: ViewModel, result: AssertionResult): void {
  vm.assertions.push({
    kind: result.directive.kind,
    text: result.directive.text,
    verdict: result.verdict,
  });
}

export function applyEvent(vm: ViewModel, frame: EventFrame): void {
  switch (frame.event) {
    case "assertion":
      applyAssertion(vm, (frame as any).result as AssertionResult);
      break;
    case "paused":
    case "finished":
      vm.running = false;
      vm.position = (frame as any).position ?? vm.position;
      vm.finished = frame.event === "finished";
      break;
    case "heartbeat":
      vm.running = true;
      break;
  }
}

export function applyConnectionLoss(vm: ViewModel): void {
  vm.connection = "disconnected";
  vm.running = false;
}

export function applyError(vm: ViewModel, message: string): void {
  vm.lastError = message;
}

/** The source line of the next instruction to execute, if any. */
export function currentLine(vm: ViewModel): number | null {
  const entry = vm.instructions[vm.position];
  return entry ? entry.line : null;
}
