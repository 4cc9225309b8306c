import { beforeEach, describe, expect, it, vi } from "vitest";

import { ConsoleClient, type SocketLike } from "../src/client.js";
import type { ControlConfig, ServerMsg } from "../src/messages.js";

const CFG: ControlConfig = {
  strategy: "onoff",
  th: 50,
  th1: 20,
  th2: 80,
  delta: 5,
  hysteresis_gap: 0,
  literal_eq2: false,
  ma_window: 50,
};

class FakeSocket implements SocketLike {
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  sent: string[] = [];

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.({});
  }

  // test helpers
  open(): void {
    this.onopen?.({});
  }

  deliver(msg: ServerMsg): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

function makeClient() {
  const sockets: FakeSocket[] = [];
  const events: Array<[string, unknown]> = [];
  const client = new ConsoleClient(
    "ws://test/",
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    {
      onConfig: (config, pending) => events.push(["config", { config, pending: [...pending] }]),
      onFieldError: (err) => events.push(["error", err]),
      onConnection: (phase) => events.push(["connection", phase]),
    },
    { reconnectInitialMs: 5, staleAfterMs: 100 },
  );
  client.connect();
  const sock = sockets[0];
  sock.open();
  sock.deliver({ type: "state", phase: "idle", profile: null, config: CFG, t_ms: 0 });
  return { client, sockets, events, sock };
}

describe("pending/ack lifecycle", () => {
  it("marks fields pending until the engine acks", () => {
    const { client, sock } = makeClient();
    expect(client.config?.th).toBe(50);

    const err = client.sendThreshold(30);
    expect(err).toBeNull();
    expect(client.pending.has("th")).toBe(true);
    // Displayed config still reflects the last ack, not the slider.
    expect(client.config?.th).toBe(50);

    sock.deliver({ type: "ack", cmd: "set_config", config: { ...CFG, th: 30 } });
    expect(client.pending.size).toBe(0);
    expect(client.config?.th).toBe(30);
  });

  it("orders concurrent commands by reply sequence", () => {
    const { client, sock } = makeClient();
    client.sendThreshold(30);
    client.sendDelta(10);
    expect([...client.pending]).toEqual(["th", "delta"]);
    sock.deliver({ type: "ack", cmd: "set_config", config: { ...CFG, th: 30 } });
    expect([...client.pending]).toEqual(["delta"]);
    sock.deliver({ type: "ack", cmd: "set_config", config: { ...CFG, th: 30, delta: 10 } });
    expect(client.pending.size).toBe(0);
    expect(client.config?.delta).toBe(10);
  });

  it("reverts the offending command on an engine error", () => {
    const { client, sock, events } = makeClient();
    client.sendRaw({ type: "set_config", patch: { delta: 60 } });
    expect(client.pending.has("delta")).toBe(true);
    sock.deliver({ type: "error", field: "delta", msg: "must be in [0, 50)" });
    expect(client.pending.size).toBe(0);
    expect(client.config?.delta).toBe(5); // untouched
    const errs = events.filter(([k]) => k === "error");
    expect(errs.at(-1)?.[1]).toEqual({ field: "delta", msg: "must be in [0, 50)" });
  });

  it("rejects invalid patches locally before the wire", () => {
    const { client, sock } = makeClient();
    const before = sock.sent.length;
    const err = client.sendPatch({ delta: 60 });
    expect(err?.field).toBe("delta");
    expect(sock.sent.length).toBe(before); // nothing sent
    expect(client.pending.size).toBe(0);
  });

  it("set_strategy rides the same pending machinery", () => {
    const { client, sock } = makeClient();
    client.sendStrategy("proportional");
    expect(client.pending.has("strategy")).toBe(true);
    sock.deliver({
      type: "ack",
      cmd: "set_strategy",
      config: { ...CFG, strategy: "proportional" },
    });
    expect(client.pending.size).toBe(0);
    expect(client.config?.strategy).toBe("proportional");
  });
});

describe("state and telemetry", () => {
  it("state messages update phase and profile", () => {
    const { client, sock } = makeClient();
    sock.deliver({
      type: "state",
      phase: "running",
      profile: { rest_raw: 40, mvc_raw: 2000, captured_at: null, rest_window_ms: 1000, mvc_window_ms: 1000 },
      config: CFG,
      t_ms: 123,
    });
    expect(client.enginePhase).toBe("running");
    expect(client.profile?.mvc_raw).toBe(2000);
  });

  it("telemetry fills the rolling buffer and clears staleness", () => {
    vi.useFakeTimers();
    try {
      const { client, sock } = makeClient();
      expect(client.isStale(Date.now())).toBe(true);
      sock.deliver({
        type: "telemetry",
        t_ms: 0,
        emg_percent: 10,
        reference: 0,
        position: 0,
        config: CFG,
      });
      expect(client.buffer.length).toBe(1);
      expect(client.isStale(Date.now())).toBe(false);
      vi.advanceTimersByTime(1000);
      expect(client.isStale(Date.now())).toBe(true);
    } finally {
      vi.useRealTimers();
    }
  });
});

describe("reconnect", () => {
  it("reopens after an unexpected close and drops stale pendings", async () => {
    const { client, sockets, sock } = makeClient();
    client.sendThreshold(25);
    expect(client.pending.size).toBe(1);
    sock.onclose?.({}); // transport drop, not client.close()
    expect(client.connection).toBe("reconnecting");
    expect(client.pending.size).toBe(0); // nothing silently in flight
    await new Promise((r) => setTimeout(r, 30));
    expect(sockets.length).toBeGreaterThan(1);
    sockets.at(-1)!.open();
    expect(client.connection).toBe("open");
  });

  it("stays closed when the console itself closed", async () => {
    const { client, sockets } = makeClient();
    client.close();
    await new Promise((r) => setTimeout(r, 30));
    expect(sockets.length).toBe(1);
    expect(client.connection).toBe("closed");
  });
});
