"""Deterministic fixed-tick simulation of the bench.

One World owns the clock, the panel, the motor, the brake, the active
injections, the measurement chain, and the relay. step() advances exactly
one tick: commands apply at the tick boundary in arrival order, then the
supply, motor, measurement, and protection update in that fixed sequence.
Everything stochastic draws from the single seeded RNG, so a (config, seed,
command schedule) triple always reproduces the same event log, byte for
byte.

Tick order inside step():
    1. tick_index += 1
    2. apply queued commands (accept/reject events)
    3. effective supply from nominal + active injections
    4. motor terminals (contactor and housing interlock), circuit solve,
       mechanics
    5. raw measurement -> noise -> rolling-average register
    6. relay evaluate; a trip latches the panel and opens the contactor on
       this same tick
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, List, Optional, Tuple

from .config import LCD_IDLE_TEXT, RunConfig
from .events import (
    VOLTAGE_PATH_FAULTS,
    CommandKind,
    Event,
    FaultKind,
    PanelCommand,
    TripEvent,
)
from .faults import FaultTiming, apply_measurement_noise, arm_fault, effective_supply
from .motor import (
    BrakeSelector,
    BrakeState,
    MotorState,
    brake_from_potentiometer,
    calibrate_overcurrent_gain,
    solve_equivalent_circuit,
    step_mechanics,
)
from .protection import MotorPhase, ProtectionEngine, ThreePhaseMeasurement

#: Brake selector implied by each brake-path fault.
BRAKE_FAULTS: Dict[FaultKind, BrakeSelector] = {
    FaultKind.OVERCURRENT: BrakeSelector.OVERCURRENT,
    FaultKind.LOCKED_ROTOR: BrakeSelector.LOCKED,
    FaultKind.EXTENDED_START: BrakeSelector.EXTENDED_START,
}


@dataclass
class PanelState:
    """Operator-visible bench state."""

    power_on: bool = False
    green_led: bool = False
    yellow_fault_led: bool = False
    buzzer_on: bool = False
    lcd_line: str = ""
    potentiometer: float = 0.0
    active_fault_selectors: List[FaultKind] = field(default_factory=list)
    housing_open: bool = False
    latched_trip: Optional[TripEvent] = None

    def to_dict(self) -> dict:
        return {
            "power_on": self.power_on,
            "green_led": self.green_led,
            "yellow_fault_led": self.yellow_fault_led,
            "buzzer_on": self.buzzer_on,
            "lcd_line": self.lcd_line,
            "potentiometer": self.potentiometer,
            "active_fault_selectors": [f.value for f in self.active_fault_selectors],
            "housing_open": self.housing_open,
            "latched_trip": self.latched_trip.to_dict() if self.latched_trip else None,
        }


class _RollingMean:
    """Fixed-window rolling mean with O(1) updates."""

    __slots__ = ("window", "buf", "total")

    def __init__(self, window: int):
        self.window = window
        self.buf: Deque[float] = deque(maxlen=window)
        self.total = 0.0

    def push(self, x: float) -> float:
        if len(self.buf) == self.buf.maxlen:
            self.total -= self.buf[0]
        self.buf.append(x)
        self.total += x
        return self.total / len(self.buf)


def lcd_message(
    power_on: bool,
    latched_trip: Optional[TripEvent],
    fault_lines: dict,
) -> str:
    """What the LCD shows: blank when off, the idle banner when healthy,
    the per-fault line after a trip."""
    if not power_on:
        return ""
    if latched_trip is not None:
        return fault_lines[latched_trip.fault_kind]
    return LCD_IDLE_TEXT


class World:
    """Complete bench state plus the tick loop."""

    def __init__(self, config: RunConfig, rng_seed: Optional[int] = None):
        self.config = config
        self.seed = config.rng_seed if rng_seed is None else rng_seed
        self.rng = random.Random(self.seed)
        self.tick_index = 0
        self.panel = PanelState()
        self.motor_state = MotorState()
        self.brake = BrakeState()
        self.engine = ProtectionEngine(
            config.protection,
            config.motor.rated_voltage_ll_v,
            config.motor.rated_current_a,
        )
        self.injections: Dict[FaultKind, FaultTiming] = {}
        self.overcurrent_gain = calibrate_overcurrent_gain(config.motor)
        w = config.measurement_window_ticks
        self._avg = [_RollingMean(w) for _ in range(6)]
        self.last_measurement = ThreePhaseMeasurement((0.0,) * 3, (0.0,) * 3)
        self.last_supply_v: Tuple[float, float, float] = (0.0, 0.0, 0.0)
        self.terminal_voltages_v: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    # -- clock ---------------------------------------------------------------

    @property
    def sim_time_s(self) -> float:
        return self.tick_index * self.config.tick_duration_s

    # -- command handling ------------------------------------------------

    def _reject(self, cmd: PanelCommand, reason: str, events: List[Event]) -> None:
        events.append(
            Event(
                self.tick_index,
                self.sim_time_s,
                "command_rejected",
                {"command": cmd.to_dict(), "reason": reason},
            )
        )

    def _accept(self, cmd: PanelCommand, events: List[Event], **extra) -> None:
        data = {"command": cmd.to_dict()}
        data.update(extra)
        events.append(Event(self.tick_index, self.sim_time_s, "command_accepted", data))

    def _apply_command(self, cmd: PanelCommand, events: List[Event]) -> None:
        panel = self.panel
        kind = cmd.kind

        if kind is CommandKind.POWER_ON:
            panel.power_on = True
            self._accept(cmd, events)
        elif kind is CommandKind.POWER_OFF:
            panel.power_on = False
            self.motor_state = replace(self.motor_state, energized=False, starting=False)
            self._accept(cmd, events)
        elif kind is CommandKind.START_MOTOR:
            if not panel.power_on:
                self._reject(cmd, "panel power is off", events)
            elif panel.housing_open:
                self._reject(cmd, "housing is open", events)
            elif panel.latched_trip is not None:
                self._reject(cmd, "trip latched; reset first", events)
            else:
                self.motor_state = replace(self.motor_state, energized=True, starting=True)
                self._accept(cmd, events)
        elif kind is CommandKind.STOP_MOTOR:
            self.motor_state = replace(self.motor_state, energized=False, starting=False)
            self._accept(cmd, events)
        elif kind is CommandKind.SET_FAULT:
            self._apply_set_fault(cmd, events)
        elif kind is CommandKind.SET_POTENTIOMETER:
            if not 0.0 <= cmd.fraction <= 1.0:
                self._reject(cmd, "potentiometer fraction must lie in [0, 1]", events)
            else:
                panel.potentiometer = cmd.fraction
                self._accept(cmd, events)
        elif kind is CommandKind.RESET_FAULT:
            self.reset_fault()
            self._accept(cmd, events)
        elif kind is CommandKind.OPEN_HOUSING:
            panel.housing_open = True
            # safety interlock: the contactor drops out with the lid open
            self.motor_state = replace(self.motor_state, energized=False, starting=False)
            self._accept(cmd, events)
        elif kind is CommandKind.CLOSE_HOUSING:
            panel.housing_open = False
            self._accept(cmd, events)
        else:  # pragma: no cover - enum is closed
            self._reject(cmd, f"unknown command kind {kind}", events)

    def _apply_set_fault(self, cmd: PanelCommand, events: List[Event]) -> None:
        panel = self.panel
        fault = cmd.fault
        if fault is None:
            self._reject(cmd, "set_fault requires a fault kind", events)
            return
        if not panel.power_on:
            self._reject(cmd, "panel power is off", events)
            return
        if cmd.enable:
            if panel.latched_trip is not None:
                self._reject(cmd, "trip latched; no new fault until reset", events)
                return
            if fault in panel.active_fault_selectors:
                self._accept(cmd, events)  # idempotent: selector already on
                return
            if fault in VOLTAGE_PATH_FAULTS:
                clash = [
                    f for f in panel.active_fault_selectors if f in VOLTAGE_PATH_FAULTS
                ]
                if clash:
                    self._reject(
                        cmd,
                        "voltage-path fault already active: " + clash[0].value,
                        events,
                    )
                    return
            timing = arm_fault(fault, self.config.injection, self.sim_time_s, self.rng)
            self.injections[fault] = timing
            panel.active_fault_selectors.append(fault)
            extra = {}
            if timing.pole_open_times_s is not None:
                extra["pole_open_times_s"] = [
                    round(t, 9) for t in timing.pole_open_times_s
                ]
            self._accept(cmd, events, **extra)
        else:
            self.injections.pop(fault, None)
            if fault in panel.active_fault_selectors:
                panel.active_fault_selectors.remove(fault)
            self._accept(cmd, events)

    # -- fault reset -------------------------------------------------------

    def reset_fault(self) -> None:
        """Clear the latch, silence the buzzer, zero the relay. Idempotent.
        The motor stays stopped until started again."""
        self.panel.latched_trip = None
        self.panel.buzzer_on = False
        self.engine.reset()

    # -- one tick ----------------------------------------------------------

    def step(self, commands: List[PanelCommand] = ()) -> List[Event]:
        """Advance one tick; returns the events this tick produced."""
        cfg = self.config
        dt = cfg.tick_duration_s
        self.tick_index += 1
        events: List[Event] = []

        for cmd in commands:
            self._apply_command(cmd, events)

        panel = self.panel

        # supply bus after injections (relay PTs sit on this bus)
        nominal = cfg.motor.rated_voltage_ll_v if panel.power_on else 0.0
        supply = effective_supply(
            nominal,
            cfg.motor.frequency_hz,
            self.injections,
            cfg.injection,
            self.sim_time_s,
        )
        self.last_supply_v = supply.phase_voltages_v

        # brake path
        selector = BrakeSelector.OFF
        for fault, sel in BRAKE_FAULTS.items():
            if fault in panel.active_fault_selectors:
                selector = sel
                break
        self.brake = brake_from_potentiometer(
            panel.potentiometer, selector, self.overcurrent_gain
        )

        # motor terminals: contactor plus housing interlock
        ms = self.motor_state
        contactor_closed = ms.energized and panel.power_on and not panel.housing_open
        if contactor_closed:
            terminals = supply.phase_voltages_v
            connected = supply.phase_connected
            divisors = supply.current_divisors
        else:
            terminals = (0.0, 0.0, 0.0)
            connected = (False, False, False)
            divisors = (1.0, 1.0, 1.0)
        self.terminal_voltages_v = terminals

        slip = ms.slip(cfg.motor)
        if contactor_closed:
            sol = solve_equivalent_circuit(cfg.motor, terminals, slip, connected, divisors)
            currents = sol.phase_currents_a
            torque = sol.torque_nm
        else:
            currents = (0.0, 0.0, 0.0)
            torque = 0.0

        load = self.brake.load_torque_nm(cfg.motor)
        ms = replace(ms, phase_currents_a=currents, torque_nm=torque)
        self.motor_state = step_mechanics(ms, cfg.motor, torque, load, dt)

        # measurement chain: noise then rolling average register
        raw = ThreePhaseMeasurement(
            v_v=supply.phase_voltages_v,
            i_a=currents,
            frequency_hz=supply.frequency_hz,
        )
        noisy = apply_measurement_noise(raw, cfg.injection.noise_sigma_fraction, self.rng)
        if cfg.measurement_window_ticks > 1:
            a = self._avg
            register = ThreePhaseMeasurement(
                v_v=(
                    a[0].push(noisy.v_v[0]),
                    a[1].push(noisy.v_v[1]),
                    a[2].push(noisy.v_v[2]),
                ),
                i_a=(
                    a[3].push(noisy.i_a[0]),
                    a[4].push(noisy.i_a[1]),
                    a[5].push(noisy.i_a[2]),
                ),
                frequency_hz=noisy.frequency_hz,
            )
        else:
            register = noisy
        self.last_measurement = register

        trip = self.engine.evaluate(register, self.motor_phase(), dt)
        if trip is not None:
            trip = replace(trip, sim_time=self.sim_time_s)
            self.engine.latched = trip
            panel.latched_trip = trip
            panel.buzzer_on = True
            # the contactor opens on the same tick the trip latches
            self.motor_state = replace(self.motor_state, energized=False, starting=False)
            events.append(Event(self.tick_index, self.sim_time_s, "trip", trip.to_dict()))

        # panel indicators
        panel.green_led = panel.power_on
        panel.yellow_fault_led = panel.latched_trip is not None
        panel.lcd_line = lcd_message(
            panel.power_on, panel.latched_trip, cfg.lcd_fault_lines
        )

        return events

    def motor_phase(self) -> MotorPhase:
        ms = self.motor_state
        if not ms.energized:
            return MotorPhase.STOPPED
        if ms.starting:
            return MotorPhase.STARTING
        return MotorPhase.RUNNING

    # -- snapshots -----------------------------------------------------------

    def snapshot(self) -> dict:
        """JSON-ready copy of the observable state."""
        ms = self.motor_state
        m = self.last_measurement
        return {
            "tick": self.tick_index,
            "sim_time_s": round(self.sim_time_s, 9),
            "panel": self.panel.to_dict(),
            "motor": {
                "rotor_speed_rad_s": round(ms.rotor_speed_rad_s, 9),
                "slip": round(ms.slip(self.config.motor), 9),
                "energized": ms.energized,
                "phase": self.motor_phase().value,
                "phase_currents_a": [round(x, 6) for x in ms.phase_currents_a],
                "torque_nm": round(ms.torque_nm, 6),
            },
            "measurement": {
                "v_v": [round(x, 6) for x in m.v_v],
                "i_a": [round(x, 6) for x in m.i_a],
                "frequency_hz": m.frequency_hz,
            },
            "functions": self.engine.snapshot(),
        }
