/**
 * Engine protocol client and console-side state.
 *
 * All control state lives in the engine; this client only tracks what it has
 * been told: the last acknowledged config, the engine phase/profile, and a
 * rolling telemetry buffer. Slider moves become pending fields until the
 * engine acks (commands are answered in order), so the UI can render pending
 * state distinctly and never present an unacknowledged value as current.
 * Transport failures trigger backoff reconnects; a missing telemetry flow
 * marks the view stale.
 */

import { TelemetryBuffer } from "./buffer.js";
import type {
  CalibrationProfile,
  ClientMsg,
  ConfigPatch,
  ControlConfig,
  EnginePhase,
  ServerMsg,
  StateMsg,
  StrategyName,
  TelemetryMsg,
} from "./messages.js";
import { validatePatch, type FieldError } from "./validation.js";

export type ConnectionPhase = "connecting" | "open" | "reconnecting" | "closed";

/** Browser WebSocket and the `ws` package both satisfy this. Handler event
 * payloads differ between the two, so they are typed loosely here; only
 * `data` on message events is ever read. */
export interface SocketLike {
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((ev: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onmessage: ((ev: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onclose: ((ev: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onerror: ((ev: any) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientCallbacks {
  onConnection?: (phase: ConnectionPhase) => void;
  onConfig?: (config: ControlConfig, pending: ReadonlySet<string>) => void;
  onTelemetry?: (frame: TelemetryMsg) => void;
  onEngineState?: (state: StateMsg) => void;
  onFieldError?: (err: FieldError) => void;
  onMessage?: (msg: ServerMsg) => void;
}

export interface ClientOptions {
  reconnectInitialMs?: number;
  reconnectMaxMs?: number;
  staleAfterMs?: number;
  bufferCapacity?: number;
}

export class ConsoleClient {
  readonly buffer: TelemetryBuffer;
  connection: ConnectionPhase = "closed";
  config: ControlConfig | null = null;
  enginePhase: EnginePhase | null = null;
  profile: CalibrationProfile | null = null;
  /** Fields changed locally and not yet acknowledged. */
  readonly pending = new Set<string>();

  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly cb: ClientCallbacks;
  private readonly opts: Required<ClientOptions>;
  private socket: SocketLike | null = null;
  private closedByUs = false;
  private backoffMs: number;
  private inflight: string[][] = [];
  private lastTelemetryWall = 0;

  constructor(
    url: string,
    factory: SocketFactory,
    callbacks: ClientCallbacks = {},
    options: ClientOptions = {},
  ) {
    this.url = url;
    this.factory = factory;
    this.cb = callbacks;
    this.opts = {
      reconnectInitialMs: options.reconnectInitialMs ?? 250,
      reconnectMaxMs: options.reconnectMaxMs ?? 5000,
      staleAfterMs: options.staleAfterMs ?? 500,
      bufferCapacity: options.bufferCapacity ?? 1500,
    };
    this.backoffMs = this.opts.reconnectInitialMs;
    this.buffer = new TelemetryBuffer(this.opts.bufferCapacity);
  }

  connect(): void {
    this.closedByUs = false;
    this.openSocket("connecting");
  }

  close(): void {
    this.closedByUs = true;
    this.setConnection("closed");
    if (this.socket) {
      try {
        this.socket.close();
      } catch {
        /* already gone */
      }
      this.socket = null;
    }
  }

  /** True when connected but telemetry stopped flowing (frozen plot). */
  isStale(nowWallMs: number): boolean {
    if (this.connection !== "open") return true;
    return nowWallMs - this.lastTelemetryWall > this.opts.staleAfterMs;
  }

  // ----------------------------------------------------------------- sending

  /**
   * Validate against the engine's invariants (mirrored locally over the
   * optimistic config) and send. Returns the local rejection, if any; the
   * field stays pending until the engine acks.
   */
  sendPatch(patch: ConfigPatch): FieldError | null {
    const base = this.optimisticConfig();
    if (!base) {
      return { field: "connection", msg: "no config snapshot yet" };
    }
    const err = validatePatch(base, patch);
    if (err) {
      this.cb.onFieldError?.(err);
      return err;
    }
    const fields = Object.keys(patch);
    for (const f of fields) this.pending.add(f);
    this.inflight.push(fields);
    this.send({ type: "set_config", patch });
    this.emitConfig();
    return null;
  }

  sendThreshold(value: number): FieldError | null {
    return this.sendPatch({ th: value });
  }

  sendDelta(value: number): FieldError | null {
    return this.sendPatch({ delta: value });
  }

  sendStrategy(strategy: StrategyName): void {
    this.pending.add("strategy");
    this.inflight.push(["strategy"]);
    this.send({ type: "set_strategy", strategy });
    this.emitConfig();
  }

  calibrateRest(): void {
    this.inflight.push([]);
    this.send({ type: "calibrate_rest" });
  }

  calibrateMvc(): void {
    this.inflight.push([]);
    this.send({ type: "calibrate_mvc" });
  }

  start(): void {
    this.inflight.push([]);
    this.send({ type: "start" });
  }

  stop(): void {
    this.inflight.push([]);
    this.send({ type: "stop" });
  }

  /** Bypass local validation (tests force engine-side rejections with it). */
  sendRaw(msg: ClientMsg): void {
    if (msg.type === "set_config") {
      const fields = Object.keys(msg.patch);
      for (const f of fields) this.pending.add(f);
      this.inflight.push(fields);
    } else {
      this.inflight.push([]);
    }
    this.send(msg);
    this.emitConfig();
  }

  // ---------------------------------------------------------------- internal

  private optimisticConfig(): ControlConfig | null {
    return this.config ? { ...this.config } : null;
  }

  private send(msg: ClientMsg): void {
    if (!this.socket) throw new Error("not connected");
    this.socket.send(JSON.stringify(msg));
  }

  private setConnection(phase: ConnectionPhase): void {
    if (this.connection !== phase) {
      this.connection = phase;
      this.cb.onConnection?.(phase);
    }
  }

  private emitConfig(): void {
    if (this.config) this.cb.onConfig?.(this.config, this.pending);
  }

  private openSocket(phase: ConnectionPhase): void {
    this.setConnection(phase);
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.backoffMs = this.opts.reconnectInitialMs;
      this.setConnection("open");
    };
    sock.onmessage = (ev) => {
      let msg: ServerMsg;
      try {
        msg = JSON.parse(String(ev.data)) as ServerMsg;
      } catch {
        return; // not ours to crash on
      }
      this.handle(msg);
    };
    sock.onerror = () => {
      /* close follows; reconnect handled there */
    };
    sock.onclose = () => {
      if (this.socket !== sock) return;
      this.socket = null;
      // Commands in flight died with the socket: nothing is pending anymore.
      this.inflight = [];
      this.pending.clear();
      if (!this.closedByUs) {
        this.setConnection("reconnecting");
        const delay = this.backoffMs;
        this.backoffMs = Math.min(this.backoffMs * 2, this.opts.reconnectMaxMs);
        setTimeout(() => {
          if (!this.closedByUs) this.openSocket("reconnecting");
        }, delay);
      }
    };
  }

  private handle(msg: ServerMsg): void {
    switch (msg.type) {
      case "telemetry": {
        this.buffer.push(msg);
        this.lastTelemetryWall = Date.now();
        this.cb.onTelemetry?.(msg);
        break;
      }
      case "ack": {
        const fields = this.inflight.shift() ?? [];
        for (const f of fields) this.pending.delete(f);
        this.config = msg.config;
        this.emitConfig();
        break;
      }
      case "error": {
        // The engine rejected the oldest in-flight command: revert its fields.
        const fields = this.inflight.shift() ?? [];
        for (const f of fields) this.pending.delete(f);
        this.emitConfig();
        this.cb.onFieldError?.({
          field: msg.field ?? "engine",
          msg: msg.msg,
        });
        break;
      }
      case "state": {
        this.enginePhase = msg.phase;
        this.profile = msg.profile;
        if (this.inflight.length === 0) {
          this.config = msg.config;
          this.emitConfig();
        }
        this.cb.onEngineState?.(msg);
        break;
      }
    }
    this.cb.onMessage?.(msg);
  }
}
