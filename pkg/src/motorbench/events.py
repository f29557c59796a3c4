"""Shared vocabulary: fault kinds, ANSI device functions, events, commands.

Every other module speaks in these types, so they live in one import-cycle-free
place. All of them serialize to plain JSON-compatible dicts with stable key
order, which is what makes event logs byte-reproducible.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional


class FaultKind(str, Enum):
    """The eight injectable bench faults."""

    OVERVOLTAGE = "overvoltage"
    UNDERVOLTAGE = "undervoltage"
    OVERCURRENT = "overcurrent"
    PHASE_LOSS = "phase_loss"
    LOCKED_ROTOR = "locked_rotor"
    EXTENDED_START = "extended_start"
    VOLTAGE_UNBALANCE = "voltage_unbalance"
    CURRENT_UNBALANCE = "current_unbalance"


#: Faults that act on the supply voltage path. The panel allows at most one
#: of these at a time; the brake-path and current-path faults are mechanical
#: or series-impedance effects and do not collide on the supply.
VOLTAGE_PATH_FAULTS = frozenset(
    {
        FaultKind.OVERVOLTAGE,
        FaultKind.UNDERVOLTAGE,
        FaultKind.PHASE_LOSS,
        FaultKind.VOLTAGE_UNBALANCE,
    }
)


class AnsiFunction(str, Enum):
    """Protection device functions, ANSI numbering where one exists."""

    UNDERVOLTAGE_27 = "27"
    CURRENT_UNBALANCE_46 = "46"
    VOLTAGE_UNBALANCE_47 = "47"
    EXTENDED_START_48 = "48_EXT_START"
    OVERCURRENT_51 = "51"
    OVERVOLTAGE_59 = "59"
    PHASE_LOSS = "PHASE_LOSS"
    LOCKED_ROTOR = "LOCKED_ROTOR"


#: One protection function per diagnosable fault kind.
FUNCTION_FOR_FAULT: Mapping[FaultKind, AnsiFunction] = {
    FaultKind.OVERVOLTAGE: AnsiFunction.OVERVOLTAGE_59,
    FaultKind.UNDERVOLTAGE: AnsiFunction.UNDERVOLTAGE_27,
    FaultKind.OVERCURRENT: AnsiFunction.OVERCURRENT_51,
    FaultKind.PHASE_LOSS: AnsiFunction.PHASE_LOSS,
    FaultKind.LOCKED_ROTOR: AnsiFunction.LOCKED_ROTOR,
    FaultKind.EXTENDED_START: AnsiFunction.EXTENDED_START_48,
    FaultKind.VOLTAGE_UNBALANCE: AnsiFunction.VOLTAGE_UNBALANCE_47,
    FaultKind.CURRENT_UNBALANCE: AnsiFunction.CURRENT_UNBALANCE_46,
}

FAULT_FOR_FUNCTION: Mapping[AnsiFunction, FaultKind] = {
    v: k for k, v in FUNCTION_FOR_FAULT.items()
}


@dataclass(frozen=True)
class TripEvent:
    """A latched protection trip.

    measured_value violated setting_value per the function's comparison
    direction at the moment the definite-time delay expired. Units are the
    natural ones for the function: V for voltage elements, A for current
    elements, % for the unbalance elements.
    """

    ansi_function: AnsiFunction
    fault_kind: FaultKind
    sim_time: float
    measured_value: float
    setting_value: float
    unit: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "ansi_function": self.ansi_function.value,
            "fault_kind": self.fault_kind.value,
            "sim_time": round(self.sim_time, 9),
            "measured_value": round(self.measured_value, 6),
            "setting_value": round(self.setting_value, 6),
            "unit": self.unit,
        }


class CommandKind(str, Enum):
    """Operator actions available on the panel."""

    POWER_ON = "power_on"
    POWER_OFF = "power_off"
    START_MOTOR = "start_motor"
    STOP_MOTOR = "stop_motor"
    SET_FAULT = "set_fault"
    SET_POTENTIOMETER = "set_potentiometer"
    RESET_FAULT = "reset_fault"
    OPEN_HOUSING = "open_housing"
    CLOSE_HOUSING = "close_housing"


@dataclass(frozen=True)
class PanelCommand:
    """One operator command, applied at a tick boundary in arrival order."""

    kind: CommandKind
    fault: Optional[FaultKind] = None       # for SET_FAULT
    enable: bool = True                     # for SET_FAULT: on or off
    fraction: float = 0.0                   # for SET_POTENTIOMETER
    sequence_number: int = 0
    client_id: str = "local"

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "kind": self.kind.value,
            "sequence_number": self.sequence_number,
            "client_id": self.client_id,
        }
        if self.kind is CommandKind.SET_FAULT:
            d["fault"] = self.fault.value if self.fault else None
            d["enable"] = self.enable
        if self.kind is CommandKind.SET_POTENTIOMETER:
            d["fraction"] = self.fraction
        return d

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "PanelCommand":
        kind = CommandKind(d["kind"])
        fault = FaultKind(d["fault"]) if d.get("fault") else None
        return PanelCommand(
            kind=kind,
            fault=fault,
            enable=bool(d.get("enable", True)),
            fraction=float(d.get("fraction", 0.0)),
            sequence_number=int(d.get("sequence_number", 0)),
            client_id=str(d.get("client_id", "local")),
        )


@dataclass(frozen=True)
class Event:
    """One entry in the append-only event log."""

    tick: int
    time_s: float
    type: str
    data: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tick": self.tick,
            "time_s": round(self.time_s, 9),
            "type": self.type,
            "data": dict(self.data),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
