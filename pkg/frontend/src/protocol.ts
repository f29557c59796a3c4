/**
 * Wire protocol types for the workbench service.
 *
 * Mirrors the JSON messages exchanged on the service WebSocket. Every
 * message in either direction carries "v": 1. The server speaks first:
 * one hello, then an initial snapshot, then a stream of snapshot, event,
 * and error messages. Clients send flat command objects with strictly
 * increasing sequence numbers (per connection).
 */

export const PROTOCOL_VERSION = 1;

export type FaultKind =
  | 'overvoltage'
  | 'undervoltage'
  | 'overcurrent'
  | 'phase_loss'
  | 'locked_rotor'
  | 'extended_start'
  | 'voltage_unbalance'
  | 'current_unbalance';

export const ALL_FAULTS: FaultKind[] = [
  'overvoltage',
  'undervoltage',
  'overcurrent',
  'phase_loss',
  'locked_rotor',
  'extended_start',
  'voltage_unbalance',
  'current_unbalance',
];

export type CommandKind =
  | 'power_on'
  | 'power_off'
  | 'start_motor'
  | 'stop_motor'
  | 'set_fault'
  | 'set_potentiometer'
  | 'reset_fault'
  | 'open_housing'
  | 'close_housing';

/** Latched trip record as it appears in panel state and trip events. */
export interface TripInfo {
  ansi_function: string;
  fault_kind: FaultKind;
  sim_time: number;
  measured_value: number;
  setting_value: number;
  unit: string;
}

export interface PanelState {
  power_on: boolean;
  green_led: boolean;
  yellow_fault_led: boolean;
  buzzer_on: boolean;
  /** Single LCD source string, at most 32 characters. */
  lcd_line: string;
  /** Potentiometer position, 0..1. */
  potentiometer: number;
  active_fault_selectors: FaultKind[];
  housing_open: boolean;
  latched_trip: TripInfo | null;
}

export interface MotorState {
  rotor_speed_rad_s: number;
  slip: number;
  energized: boolean;
  phase: 'stopped' | 'starting' | 'running';
  phase_currents_a: [number, number, number];
  torque_nm: number;
}

export interface MeasurementState {
  /** Per-phase line voltages, volts. */
  v_v: [number, number, number];
  /** Per-phase currents, amperes. */
  i_a: [number, number, number];
  frequency_hz: number;
}

export interface FunctionState {
  picked_up: boolean;
  timer_s: number;
  tripped: boolean;
}

export interface StateSnapshot {
  tick: number;
  sim_time_s: number;
  panel: PanelState;
  motor: MotorState;
  measurement: MeasurementState;
  functions: Record<string, FunctionState>;
  /** Events since the previous broadcast snapshot (catch-up only). */
  last_events?: BenchEvent[];
}

/** One entry of the server's append-only event log. */
export interface BenchEvent {
  tick: number;
  time_s: number;
  type: 'command_accepted' | 'command_rejected' | 'trip' | string;
  data: Record<string, unknown>;
}

export interface HelloMessage {
  type: 'hello';
  v: number;
  server: string;
  server_version: string;
  tick_duration_s: number;
  speed: number;
  tick: number;
}

export interface SnapshotMessage {
  type: 'snapshot';
  v: number;
  data: StateSnapshot;
}

export interface EventMessage {
  type: 'event';
  v: number;
  data: BenchEvent;
}

export interface ErrorMessage {
  type: 'error';
  v: number;
  error: string;
  sequence_number?: number;
}

export type ServerMessage =
  | HelloMessage
  | SnapshotMessage
  | EventMessage
  | ErrorMessage;

/** Outbound command, sent flat next to "type": "command". */
export interface CommandMessage {
  v: number;
  type: 'command';
  kind: CommandKind;
  sequence_number: number;
  fault?: FaultKind;
  enable?: boolean;
  fraction?: number;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== 'object' || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.v !== PROTOCOL_VERSION) return null;
  if (
    m.type === 'hello' ||
    m.type === 'snapshot' ||
    m.type === 'event' ||
    m.type === 'error'
  ) {
    return msg as ServerMessage;
  }
  return null;
}

export function buildCommand(
  kind: CommandKind,
  sequenceNumber: number,
  extra: Partial<Pick<CommandMessage, 'fault' | 'enable' | 'fraction'>> = {},
): CommandMessage {
  return {
    v: PROTOCOL_VERSION,
    type: 'command',
    kind,
    sequence_number: sequenceNumber,
    ...extra,
  };
}
