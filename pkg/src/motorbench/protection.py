"""IED protection-relay emulation.

Eight definite-time elements watch the three-phase RMS measurement and the
motor run phase. Each element keeps a pickup flag and a timer; a timer that
survives its element's delay produces a trip, and when several elements
complete on the same tick a fixed priority decides the diagnosis.

Element summary (percent values are of rated voltage or rated current):

    59   overvoltage          mean V >= pickup
    27   undervoltage         mean V <= pickup, motor energization commanded,
                              suppressed while the phase-loss signature holds
    51   overcurrent          max I >= pickup, motor running
    LR   locked rotor         max I >= pickup, motor running
    48   extended start       max I >= pickup while the start persists;
                              trips when starting outlasts start_time_limit_s
    47   voltage unbalance    unbalance >= pickup, all phases above the
                              phase-loss floor
    46   current unbalance    unbalance >= pickup, motor running, max I >=
                              50% rated
    PL   phase loss           min V <= floor while max V >= companion
                              (asymmetric-dead-phase signature)

The undervoltage/phase-loss pair is the only deliberately overlapping
region: a collapsing supply passes through asymmetric states, and whichever
element's delay expires first names the event.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .events import FAULT_FOR_FUNCTION, AnsiFunction, FaultKind, TripEvent


class NoSignalError(ValueError):
    """Unbalance is undefined for a dead (zero-mean) signal."""


class SettingsRangeError(ValueError):
    """A setting landed outside its legal range.

    The device rejects the whole settings block; the message names each
    offending field and its legal range.
    """

    def __init__(self, issues: Sequence[str]):
        self.issues = list(issues)
        super().__init__("; ".join(issues))


def percent_unbalance(values: Sequence[float]) -> float:
    """Percent unbalance: 100 * max deviation from mean / mean.

    This is the NEMA definition used for both voltage and current channels.

    Raises:
        NoSignalError: mean is zero or negative (no signal to assess).
    """
    mean = sum(values) / len(values)
    if mean <= 0.0:
        raise NoSignalError("unbalance undefined for zero-mean signal")
    max_dev = max(abs(v - mean) for v in values)
    return 100.0 * max_dev / mean


#: Legal setting ranges, percent of the rated base quantity.
LEGAL_RANGES: Mapping[str, Tuple[float, float]] = {
    "overcurrent_pickup_pct": (20.0, 800.0),
    "locked_rotor_pickup_pct": (20.0, 800.0),
    "current_unbalance_pickup_pct": (10.0, 70.0),
    "extended_start_pickup_pct": (100.0, 800.0),
    "undervoltage_pickup_pct": (70.0, 99.0),
    "overvoltage_pickup_pct": (101.0, 115.0),
    "voltage_unbalance_pickup_pct": (3.0, 10.0),
}

_DELAY_FIELDS = (
    "overcurrent_delay_s",
    "locked_rotor_delay_s",
    "current_unbalance_delay_s",
    "start_time_limit_s",
    "undervoltage_delay_s",
    "overvoltage_delay_s",
    "voltage_unbalance_delay_s",
    "phase_loss_delay_s",
)


@dataclass(frozen=True)
class ProtectionSettings:
    """Pickups and definite-time delays for every element."""

    overcurrent_pickup_pct: float = 120.0
    overcurrent_delay_s: float = 4.0
    locked_rotor_pickup_pct: float = 130.0
    locked_rotor_delay_s: float = 1.0
    current_unbalance_pickup_pct: float = 10.0
    current_unbalance_delay_s: float = 0.7
    extended_start_pickup_pct: float = 150.0
    start_time_limit_s: float = 5.0
    undervoltage_pickup_pct: float = 85.0
    undervoltage_delay_s: float = 0.5
    overvoltage_pickup_pct: float = 110.0
    overvoltage_delay_s: float = 0.5
    voltage_unbalance_pickup_pct: float = 10.0
    voltage_unbalance_delay_s: float = 0.5
    phase_loss_floor_pct: float = 20.0
    phase_loss_companion_min_pct: float = 50.0
    phase_loss_delay_s: float = 0.1

    def __post_init__(self) -> None:
        issues = []
        for name, (lo, hi) in LEGAL_RANGES.items():
            value = getattr(self, name)
            if not lo <= value <= hi:
                issues.append(f"{name}={value} outside legal range [{lo}, {hi}]")
        for name in _DELAY_FIELDS:
            if getattr(self, name) <= 0.0:
                issues.append(f"{name}={getattr(self, name)} must be positive")
        if not 0.0 < self.phase_loss_floor_pct < self.phase_loss_companion_min_pct <= 100.0:
            issues.append(
                "phase loss thresholds require 0 < floor < companion <= 100 "
                f"(got floor={self.phase_loss_floor_pct}, "
                f"companion={self.phase_loss_companion_min_pct})"
            )
        if issues:
            raise SettingsRangeError(issues)


@dataclass(frozen=True)
class ThreePhaseMeasurement:
    """RMS snapshot the relay sees on one tick.

    Voltages are line-line-equivalent volts per phase channel (a healthy
    220 V supply reads 220 on each), currents are amperes per phase.
    """

    v_v: Tuple[float, float, float]
    i_a: Tuple[float, float, float]
    frequency_hz: float = 60.0


class MotorPhase(str, Enum):
    """Run phase as seen by the relay's start-supervision logic."""

    STOPPED = "stopped"
    STARTING = "starting"
    RUNNING = "running"


@dataclass
class FunctionState:
    """Pickup/timer state of one element.

    The timer counts whole ticks internally so that long delays accumulate
    without float drift; `timer_s` is always count * dt.
    """

    picked_up: bool = False
    timer_s: float = 0.0
    tripped: bool = False
    _ticks: int = field(default=0, repr=False)

    def to_dict(self) -> dict:
        return {
            "picked_up": self.picked_up,
            "timer_s": round(self.timer_s, 9),
            "tripped": self.tripped,
        }


#: Diagnosis priority when several elements complete on the same tick.
CLASSIFY_PRIORITY: Tuple[AnsiFunction, ...] = (
    AnsiFunction.PHASE_LOSS,
    AnsiFunction.LOCKED_ROTOR,
    AnsiFunction.EXTENDED_START_48,
    AnsiFunction.OVERCURRENT_51,
    AnsiFunction.CURRENT_UNBALANCE_46,
    AnsiFunction.VOLTAGE_UNBALANCE_47,
    AnsiFunction.OVERVOLTAGE_59,
    AnsiFunction.UNDERVOLTAGE_27,
)


def classify_trip(completed: Iterable[AnsiFunction]) -> AnsiFunction:
    """Pick the single diagnosis from the set of completed elements."""
    done = set(completed)
    if not done:
        raise ValueError("classify_trip requires at least one completed element")
    for fn in CLASSIFY_PRIORITY:
        if fn in done:
            return fn
    raise ValueError(f"unknown functions: {done}")


# timer comparison guard: count*dt can sit within one ulp of the delay
_EPS = 1e-9


class ProtectionEngine:
    """Stateful relay: one FunctionState per element plus the latch.

    Single-threaded by design; the simulation owns it and snapshots copy
    the state out.
    """

    def __init__(
        self,
        settings: ProtectionSettings,
        rated_voltage_ll_v: float,
        rated_current_a: float,
    ):
        self.settings = settings
        self.rated_voltage_ll_v = rated_voltage_ll_v
        self.rated_current_a = rated_current_a
        self.states: Dict[AnsiFunction, FunctionState] = {
            fn: FunctionState() for fn in AnsiFunction
        }
        self.latched: Optional[TripEvent] = None

    # -- helpers -----------------------------------------------------------

    def _volts(self, pct: float) -> float:
        return pct / 100.0 * self.rated_voltage_ll_v

    def _amps(self, pct: float) -> float:
        return pct / 100.0 * self.rated_current_a

    def phase_loss_signature(self, v: Sequence[float]) -> bool:
        s = self.settings
        return (
            min(v) <= self._volts(s.phase_loss_floor_pct)
            and max(v) >= self._volts(s.phase_loss_companion_min_pct)
        )

    # -- main entry --------------------------------------------------------

    def evaluate(
        self,
        m: ThreePhaseMeasurement,
        motor_phase: MotorPhase,
        dt_s: float,
    ) -> Optional[TripEvent]:
        """Advance every element one tick; return a TripEvent if one latches.

        While latched the relay holds its diagnosis: timers freeze and no
        further trips are produced until reset().
        """
        if self.latched is not None:
            return None

        s = self.settings
        v = m.v_v
        i = m.i_a
        v_mean = (v[0] + v[1] + v[2]) / 3.0
        v_min = min(v)
        i_max = max(i)
        energized = motor_phase is not MotorPhase.STOPPED
        running = motor_phase is MotorPhase.RUNNING
        starting = motor_phase is MotorPhase.STARTING

        pl_active = self.phase_loss_signature(v)

        try:
            v_unb = percent_unbalance(v)
        except NoSignalError:
            v_unb = 0.0
        try:
            i_unb = percent_unbalance(i)
        except NoSignalError:
            i_unb = 0.0

        # (condition, delay, measured, setting, unit) per element
        checks: Dict[AnsiFunction, Tuple[bool, float, float, float, str]] = {
            AnsiFunction.OVERVOLTAGE_59: (
                v_mean >= self._volts(s.overvoltage_pickup_pct),
                s.overvoltage_delay_s,
                v_mean,
                self._volts(s.overvoltage_pickup_pct),
                "V",
            ),
            AnsiFunction.UNDERVOLTAGE_27: (
                energized
                and not pl_active
                and v_mean <= self._volts(s.undervoltage_pickup_pct),
                s.undervoltage_delay_s,
                v_mean,
                self._volts(s.undervoltage_pickup_pct),
                "V",
            ),
            AnsiFunction.OVERCURRENT_51: (
                running and i_max >= self._amps(s.overcurrent_pickup_pct),
                s.overcurrent_delay_s,
                i_max,
                self._amps(s.overcurrent_pickup_pct),
                "A",
            ),
            AnsiFunction.LOCKED_ROTOR: (
                running and i_max >= self._amps(s.locked_rotor_pickup_pct),
                s.locked_rotor_delay_s,
                i_max,
                self._amps(s.locked_rotor_pickup_pct),
                "A",
            ),
            AnsiFunction.EXTENDED_START_48: (
                starting and i_max >= self._amps(s.extended_start_pickup_pct),
                s.start_time_limit_s,
                i_max,
                self._amps(s.extended_start_pickup_pct),
                "A",
            ),
            AnsiFunction.VOLTAGE_UNBALANCE_47: (
                v_min > self._volts(s.phase_loss_floor_pct)
                and v_unb >= s.voltage_unbalance_pickup_pct,
                s.voltage_unbalance_delay_s,
                v_unb,
                s.voltage_unbalance_pickup_pct,
                "%",
            ),
            AnsiFunction.CURRENT_UNBALANCE_46: (
                running
                and i_max >= 0.5 * self.rated_current_a
                and i_unb >= s.current_unbalance_pickup_pct,
                s.current_unbalance_delay_s,
                i_unb,
                s.current_unbalance_pickup_pct,
                "%",
            ),
            AnsiFunction.PHASE_LOSS: (
                pl_active,
                s.phase_loss_delay_s,
                v_min,
                self._volts(s.phase_loss_floor_pct),
                "V",
            ),
        }

        completed: Dict[AnsiFunction, Tuple[float, float, str]] = {}
        for fn, (condition, delay, measured, setting, unit) in checks.items():
            st = self.states[fn]
            if condition:
                if st.picked_up:
                    st._ticks += 1
                else:
                    st.picked_up = True
                    st._ticks = 0
                st.timer_s = st._ticks * dt_s
                if st.timer_s >= delay - _EPS:
                    completed[fn] = (measured, setting, unit)
            else:
                st.picked_up = False
                st._ticks = 0
                st.timer_s = 0.0
        if not completed:
            return None

        winner = classify_trip(completed.keys())
        measured, setting, unit = completed[winner]
        self.states[winner].tripped = True
        event = TripEvent(
            ansi_function=winner,
            fault_kind=FAULT_FOR_FUNCTION[winner],
            sim_time=0.0,  # stamped by the caller, which owns the clock
            measured_value=measured,
            setting_value=setting,
            unit=unit,
        )
        self.latched = event
        return event

    def reset(self) -> None:
        """Clear the latch and zero every element."""
        for st in self.states.values():
            st.picked_up = False
            st.tripped = False
            st.timer_s = 0.0
            st._ticks = 0
        self.latched = None

    def snapshot(self) -> dict:
        return {fn.value: st.to_dict() for fn, st in self.states.items()}
