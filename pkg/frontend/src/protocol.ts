/**
 * Client for the qdb debug-session wire protocol (see ../PROTOCOL.md).
 *
 * One JSON object per WebSocket text message. Requests carry a strictly
 * increasing integer id and are answered by exactly one result or error
 * with the same id; server-initiated events carry no id.
 */

export interface ErrorInfo {
  code: string;
  message: string;
}

export interface EventFrame {
  type: "event";
  event: string;
  [key: string]: unknown;
}

export interface InstructionEntry {
  index: number;
  kind: string;
  line: number;
  source: string;
}

export interface Snapshot {
  n_qubits: number;
  amplitudes: [number, number][];
  ordering: string;
}

export interface LoadResult {
  n_qubits: number;
  n_clbits: number;
  source: string;
  mode: string;
  seed: number;
  instructions: InstructionEntry[];
  directives: unknown[];
  breakpoints: number[];
}

export interface InspectResult {
  mode: string;
  position: number;
  snapshot?: Snapshot;
  classical_bits?: string;
  histogram?: Record<string, number>;
  shots?: number;
  qubit_probabilities?: [number, number][];
}

export interface AssertionResult {
  directive: { kind: string; text: string };
  verdict: "pass" | "fail" | "inconclusive";
  evidence: Record<string, unknown>;
  shots_used: number | null;
  p_value: number | null;
}

export interface SeparabilityEntry {
  qubit: number;
  purity: number;
  entangled: boolean;
}

export interface SeparabilityResult {
  mode: string;
  per_qubit: SeparabilityEntry[];
  shots_per_setting?: number;
}

/** Minimal WebSocket surface, satisfied by browsers and the `ws` package. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

export class ProtocolError extends Error {
  constructor(public code: string, message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

type Pending = { resolve: (value: any) => void; reject: (reason: Error) => void };

export class ProtocolClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private eventListeners: Array<(frame: EventFrame) => void> = [];
  private closeListeners: Array<() => void> = [];
  private closed = false;

  constructor(private socket: SocketLike) {
    socket.addEventListener("message", (event: { data: unknown }) => {
      this.handleFrame(String(event.data));
    });
    socket.addEventListener("close", () => this.handleClose());
    socket.addEventListener("error", () => this.handleClose());
  }

  /** Send one request; resolves with the result payload or rejects with
   * a ProtocolError carrying the server's error code. */
  request<T = any>(type: string, payload: Record<string, unknown> = {}): Promise<T> {
    if (this.closed) {
      return Promise.reject(new ProtocolError("closed", "connection is closed"));
    }
    const id = this.nextId++;
    const frame = JSON.stringify({ id, type, ...payload });
    return new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.socket.send(frame);
    });
  }

  onEvent(listener: (frame: EventFrame) => void): void {
    this.eventListeners.push(listener);
  }

  onClose(listener: () => void): void {
    this.closeListeners.push(listener);
  }

  close(): void {
    this.socket.close();
  }

  private handleFrame(text: string): void {
    let frame: any;
    try {
      frame = JSON.parse(text);
    } catch {
      return; // a malformed server frame is ignored, never fatal
    }
    if (frame.type === "event") {
      for (const listener of this.eventListeners) listener(frame as EventFrame);
      return;
    }
    if (typeof frame.id === "number" && this.pending.has(frame.id)) {
      const entry = this.pending.get(frame.id)!;
      this.pending.delete(frame.id);
      if (frame.type === "result") {
        entry.resolve(frame.result);
      } else {
        entry.reject(new ProtocolError(frame.error?.code ?? "unknown", frame.error?.message ?? ""));
      }
    }
  }

  private handleClose(): void {
    if (this.closed) return;
    this.closed = true;
    for (const entry of this.pending.values()) {
      entry.reject(new ProtocolError("closed", "connection lost"));
    }
    this.pending.clear();
    for (const listener of this.closeListeners) listener();
  }
}

/** Open a WebSocket and resolve once the connection is established. */
export function openSocket(
  url: string,
  WebSocketImpl: new (url: string) => SocketLike = (globalThis as any).WebSocket,
): Promise<SocketLike> {
  return new Promise((resolve, reject) => {
    const socket = new WebSocketImpl(url);
    let settled = false;
    socket.addEventListener("open", () => {
      settled = true;
      resolve(socket);
    });
    socket.addEventListener("error", (event: any) => {
      if (!settled) {
        settled = true;
        reject(new ProtocolError("connect", `cannot reach ${url}: ${event?.message ?? "error"}`));
      }
    });
  });
}
