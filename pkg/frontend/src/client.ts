/**
 * WebSocket client for the workbench service.
 *
 * Owns the socket lifecycle (connect, reconnect with capped backoff) and
 * the per-connection command sequence counter. The server checks that
 * sequence numbers strictly increase per connection, so the counter
 * resets every time a new socket opens.
 *
 * The constructor takes a WebSocket factory so the same class runs in
 * the browser (native WebSocket) and in node tests (the "ws" package).
 */

import { UiModel } from './model.js';
import {
  buildCommand,
  CommandKind,
  CommandMessage,
  FaultKind,
  parseServerMessage,
} from './protocol.js';

/** Structural subset of the WebSocket API the client needs. Handler
 * parameters are typed loosely so both the browser WebSocket and the
 * node "ws" implementation satisfy it without casts. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 5000;

export class BenchClient {
  private socket: SocketLike | null = null;
  private sequence = 0;
  private backoffMs = BACKOFF_START_MS;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    readonly url: string,
    readonly model: UiModel,
    private readonly makeSocket: SocketFactory,
    private readonly now: () => number = () => Date.now(),
  ) {}

  connect(): void {
    if (this.closed) return;
    this.model.connectionChanged('connecting');
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.sequence = 0;
      this.backoffMs = BACKOFF_START_MS;
      this.model.connectionChanged('connected');
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg !== null) this.model.ingest(msg, this.now());
    };
    socket.onerror = () => {
      // onclose follows; reconnect is handled there
    };
    socket.onclose = () => {
      if (this.socket !== socket) return;
      this.socket = null;
      this.model.connectionChanged('disconnected');
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.reconnectTimer !== null) return;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
  }

  /** Serialize and send one command; returns it for inspection, or null
   * when there is no open connection to send on. */
  send(
    kind: CommandKind,
    extra: Partial<Pick<CommandMessage, 'fault' | 'enable' | 'fraction'>> = {},
  ): CommandMessage | null {
    if (this.socket === null || this.model.connection !== 'connected') {
      return null;
    }
    this.sequence += 1;
    const cmd = buildCommand(kind, this.sequence, extra);
    this.socket.send(JSON.stringify(cmd));
    this.model.commandSent(kind, this.sequence, this.now(), extra.fault);
    return cmd;
  }

  setFault(fault: FaultKind, enable: boolean): CommandMessage | null {
    return this.send('set_fault', { fault, enable });
  }

  setPotentiometer(fraction: number): CommandMessage | null {
    return this.send('set_potentiometer', { fraction });
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
  }
}
