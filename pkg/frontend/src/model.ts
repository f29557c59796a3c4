/**
 * Client-side state for the workbench panel.
 *
 * UiModel is the single mutable store behind the view. It consumes the
 * ordered server message stream and exposes a pure projection
 * (viewState) the renderer draws from.
 *
 * Two rules keep the panel honest:
 *
 * - Indicator state (LEDs, LCD, buzzer, meters, selectors) always equals
 *   the latest snapshot. The client never invents or extrapolates
 *   simulated state.
 * - Pending commands influence only control affordances (a depressed
 *   button), never indicators. A command stays pending until an
 *   accepted/rejected event matches it or it times out.
 */

import {
  ALL_FAULTS,
  BenchEvent,
  CommandKind,
  FaultKind,
  ServerMessage,
  StateSnapshot,
  TripInfo,
} from './protocol.js';

export type ConnectionStatus = 'connecting' | 'connected' | 'disconnected';

/** How long a rejection toast stays visible, ms. */
export const TOAST_MS = 4000;

/** Unacknowledged commands older than this stop looking depressed, ms. */
export const PENDING_TIMEOUT_MS = 2000;

export interface PendingCommand {
  sequenceNumber: number;
  kind: CommandKind;
  fault?: FaultKind;
  sentAtMs: number;
}

export interface Rejection {
  reason: string;
  atMs: number;
}

interface ServerInfo {
  name: string;
  version: string;
  tickDurationS: number;
  speed: number;
}

export class UiModel {
  connection: ConnectionStatus = 'connecting';
  server: ServerInfo | null = null;
  snapshot: StateSnapshot | null = null;
  /** Bounded ring of bench events, oldest first. */
  events: BenchEvent[] = [];
  pending: PendingCommand[] = [];
  lastRejection: Rejection | null = null;
  lastProtocolError: string | null = null;
  staleDropped = 0;
  /** Bumped on every observable change; the render loop diffs against it. */
  version = 0;

  constructor(readonly eventRingSize = 200) {}

  ingest(msg: ServerMessage, nowMs: number): void {
    switch (msg.type) {
      case 'hello':
        this.server = {
          name: msg.server,
          version: msg.server_version,
          tickDurationS: msg.tick_duration_s,
          speed: msg.speed,
        };
        break;
      case 'snapshot':
        // stale snapshot: never step the rendered tick backwards
        if (this.snapshot !== null && msg.data.tick < this.snapshot.tick) {
          this.staleDropped += 1;
          return;
        }
        this.snapshot = msg.data;
        break;
      case 'event':
        this.pushEvent(msg.data, nowMs);
        break;
      case 'error':
        this.lastProtocolError = msg.error;
        break;
    }
    this.version += 1;
  }

  connectionChanged(status: ConnectionStatus): void {
    this.connection = status;
    if (status !== 'connected') {
      // acks for these can no longer arrive on this connection
      this.pending = [];
    }
    this.version += 1;
  }

  commandSent(
    kind: CommandKind,
    sequenceNumber: number,
    nowMs: number,
    fault?: FaultKind,
  ): void {
    this.pending.push({ sequenceNumber, kind, fault, sentAtMs: nowMs });
    this.version += 1;
  }

  private pushEvent(event: BenchEvent, nowMs: number): void {
    this.events.push(event);
    if (this.events.length > this.eventRingSize) {
      this.events.splice(0, this.events.length - this.eventRingSize);
    }
    if (event.type === 'command_accepted' || event.type === 'command_rejected') {
      this.settlePending(event);
    }
    if (event.type === 'command_rejected') {
      const reason = (event.data as { reason?: unknown }).reason;
      this.lastRejection = { reason: String(reason ?? 'rejected'), atMs: nowMs };
    }
  }

  private settlePending(event: BenchEvent): void {
    const cmd = (event.data as { command?: { kind?: string; sequence_number?: number } })
      .command;
    if (!cmd) return;
    this.pending = this.pending.filter(
      (p) => !(p.kind === cmd.kind && p.sequenceNumber === cmd.sequence_number),
    );
  }

  /** Pending commands young enough to render as depressed controls. */
  livePending(nowMs: number): PendingCommand[] {
    return this.pending.filter((p) => nowMs - p.sentAtMs < PENDING_TIMEOUT_MS);
  }
}

// -- view projection ---------------------------------------------------------

/** Meter full-scale values; bars clamp here, numerics do not. */
export const VOLT_FULL_SCALE = 400;
export const AMP_FULL_SCALE = 20;

const LCD_COLS = 16;

export interface MeterView {
  value: number;
  /** Bar fill, 0..1, clamped to full scale. */
  fraction: number;
}

export interface SelectorView {
  fault: FaultKind;
  active: boolean;
  pending: boolean;
}

export interface TripRow {
  timeS: number;
  ansiFunction: string;
  faultKind: string;
  measured: string;
  setting: string;
}

export interface PanelView {
  connection: ConnectionStatus;
  /** Non-null renders the full-width reconnect banner. */
  banner: string | null;
  serverLine: string;
  controlsEnabled: boolean;
  powerOn: boolean;
  greenLed: boolean;
  yellowLed: boolean;
  buzzerOn: boolean;
  lcdLines: [string, string];
  motorPhase: string;
  speedRadS: number;
  torqueNm: number;
  housingOpen: boolean;
  potentiometer: number;
  volts: MeterView[];
  amps: MeterView[];
  frequencyHz: number;
  selectors: SelectorView[];
  pendingKinds: Set<CommandKind>;
  latchedTrip: TripInfo | null;
  tripRows: TripRow[];
  toast: string | null;
  staleDropped: number;
  tick: number;
}

/** Word-wrap the LCD source string onto a 16x2 character display. */
export function lcdWrap(text: string): [string, string] {
  if (text.length <= LCD_COLS) return [text, ''];
  let cut = text.lastIndexOf(' ', LCD_COLS);
  if (cut <= 0) cut = LCD_COLS;
  const top = text.slice(0, cut).trimEnd();
  const rest = text.slice(cut).trimStart();
  return [top, rest.slice(0, LCD_COLS)];
}

function meter(value: number, fullScale: number): MeterView {
  const fraction = Math.min(Math.max(value / fullScale, 0), 1);
  return { value, fraction };
}

export function viewState(model: UiModel, nowMs: number): PanelView {
  const snap = model.snapshot;
  const connected = model.connection === 'connected';
  const live = model.livePending(nowMs);
  const pendingKinds = new Set<CommandKind>(live.map((p) => p.kind));
  const pendingFaults = new Set(
    live.filter((p) => p.kind === 'set_fault' && p.fault).map((p) => p.fault),
  );

  const active = new Set(snap?.panel.active_fault_selectors ?? []);
  const selectors: SelectorView[] = ALL_FAULTS.map((fault) => ({
    fault,
    active: active.has(fault),
    pending: pendingFaults.has(fault),
  }));

  const tripRows: TripRow[] = [];
  for (const ev of model.events) {
    if (ev.type !== 'trip') continue;
    const t = ev.data as unknown as TripInfo;
    tripRows.push({
      timeS: ev.time_s,
      ansiFunction: t.ansi_function,
      faultKind: t.fault_kind,
      measured: `${t.measured_value.toFixed(1)} ${t.unit}`,
      setting: `${t.setting_value.toFixed(1)} ${t.unit}`,
    });
  }
  tripRows.reverse();

  const toast =
    model.lastRejection !== null && nowMs - model.lastRejection.atMs < TOAST_MS
      ? model.lastRejection.reason
      : null;

  return {
    connection: model.connection,
    banner: connected
      ? null
      : model.connection === 'connecting'
        ? 'Connecting to workbench...'
        : 'Connection lost. Reconnecting...',
    serverLine: model.server
      ? `${model.server.name} ${model.server.version}  x${model.server.speed}`
      : '',
    controlsEnabled: connected && snap !== null,
    powerOn: snap?.panel.power_on ?? false,
    greenLed: snap?.panel.green_led ?? false,
    yellowLed: snap?.panel.yellow_fault_led ?? false,
    buzzerOn: snap?.panel.buzzer_on ?? false,
    lcdLines: lcdWrap(snap?.panel.lcd_line ?? ''),
    motorPhase: snap?.motor.phase ?? '-',
    speedRadS: snap?.motor.rotor_speed_rad_s ?? 0,
    torqueNm: snap?.motor.torque_nm ?? 0,
    housingOpen: snap?.panel.housing_open ?? false,
    potentiometer: snap?.panel.potentiometer ?? 0,
    volts: (snap?.measurement.v_v ?? [0, 0, 0]).map((v) =>
      meter(v, VOLT_FULL_SCALE),
    ),
    amps: (snap?.measurement.i_a ?? [0, 0, 0]).map((i) =>
      meter(i, AMP_FULL_SCALE),
    ),
    frequencyHz: snap?.measurement.frequency_hz ?? 0,
    selectors,
    pendingKinds,
    latchedTrip: snap?.panel.latched_trip ?? null,
    tripRows,
    toast,
    staleDropped: model.staleDropped,
    tick: snap?.tick ?? 0,
  };
}
