import { describe, expect, it } from "vitest";

import { ProtocolClient, ProtocolError, type SocketLike } from "../src/protocol.js";

type Listener = (event: any) => void;

class FakeSocket implements SocketLike {
  sent: string[] = [];
  listeners = new Map<string, Listener[]>();
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.emit("close", {});
  }

  addEventListener(type: string, listener: Listener): void {
    const list = this.listeners.get(type) ?? [];
    list.push(listener);
    this.listeners.set(type, list);
  }

  emit(type: string, event: any): void {
    for (const listener of this.listeners.get(type) ?? []) listener(event);
  }

  reply(frame: unknown): void {
    this.emit("message", { data: JSON.stringify(frame) });
  }
}

describe("ProtocolClient", () => {
  it("sends monotonically increasing ids and resolves matching results", async () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    const first = client.request("hello");
    const second = client.request("inspect");
    const ids = socket.sent.map((frame) => JSON.parse(frame).id);
    expect(ids).toEqual([1, 2]);
    socket.reply({ id: 2, type: "result", result: { mode: "omniscient" } });
    socket.reply({ id: 1, type: "result", result: { protocol: 1 } });
    await expect(first).resolves.toEqual({ protocol: 1 });
    await expect(second).resolves.toEqual({ mode: "omniscient" });
  });

  it("rejects with the server error code", async () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    const pending = client.request("step");
    socket.reply({ id: 1, type: "error", error: { code: "CursorExhausted", message: "end" } });
    await expect(pending).rejects.toMatchObject({ code: "CursorExhausted" });
  });

  it("dispatches events to listeners without touching requests", async () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    const events: string[] = [];
    client.onEvent((frame) => events.push(frame.event));
    const pending = client.request("continue");
    socket.reply({ type: "event", event: "heartbeat", state: "running" });
    socket.reply({ type: "event", event: "finished", position: 6 });
    socket.reply({ id: 1, type: "result", result: { reason: "end" } });
    await pending;
    expect(events).toEqual(["heartbeat", "finished"]);
  });

  it("rejects all pending requests when the connection closes", async () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    const pending = client.request("inspect");
    const closes: number[] = [];
    client.onClose(() => closes.push(1));
    socket.emit("close", {});
    await expect(pending).rejects.toBeInstanceOf(ProtocolError);
    expect(closes).toEqual([1]);
    await expect(client.request("hello")).rejects.toMatchObject({ code: "closed" });
  });

  it("ignores malformed server frames", async () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    const pending = client.request("hello");
    socket.emit("message", { data: "garbage{" });
    socket.reply({ id: 1, type: "result", result: { protocol: 1 } });
    await expect(pending).resolves.toEqual({ protocol: 1 });
  });

  it("sends payload fields flattened into the frame", () => {
    const socket = new FakeSocket();
    const client = new ProtocolClient(socket);
    void client.request("set-breakpoint", { line: 11 });
    expect(JSON.parse(socket.sent[0])).toEqual({ id: 1, type: "set-breakpoint", line: 11 });
  });
});
