"""motorbench: a simulated three-phase induction motor workbench.

A 220 V, 1 HP squirrel-cage motor model, eight injectable electrical and
mechanical fault conditions, and a protection-relay emulator that detects,
classifies, and trips on each one. The simulation is a deterministic
fixed-tick world: same config, same seed, same commands, same event log.
"""
from .config import (
    DEFAULT_LCD_FAULT_LINES,
    ConfigError,
    RunConfig,
    deterministic_overrides,
    load_config,
    save_config,
)
from .events import (
    AnsiFunction,
    CommandKind,
    Event,
    FaultKind,
    PanelCommand,
    TripEvent,
)
from .faults import InjectionConfig, InjectionError, SupplyState, effective_supply
from .motor import (
    BrakeSelector,
    BrakeState,
    CircuitSolution,
    MotorModelError,
    MotorParams,
    MotorState,
    calibrate_overcurrent_gain,
    solve_equivalent_circuit,
    steady_state_current,
    torque_slip_curve,
)
from .protection import (
    MotorPhase,
    NoSignalError,
    ProtectionEngine,
    ProtectionSettings,
    SettingsRangeError,
    ThreePhaseMeasurement,
    percent_unbalance,
)
from .sim import PanelState, World, lcd_message

__version__ = "0.1.0"

__all__ = [
    "AnsiFunction",
    "BrakeSelector",
    "BrakeState",
    "CircuitSolution",
    "CommandKind",
    "ConfigError",
    "DEFAULT_LCD_FAULT_LINES",
    "Event",
    "FaultKind",
    "InjectionConfig",
    "InjectionError",
    "MotorModelError",
    "MotorParams",
    "MotorPhase",
    "MotorState",
    "NoSignalError",
    "PanelCommand",
    "PanelState",
    "ProtectionEngine",
    "ProtectionSettings",
    "RunConfig",
    "SettingsRangeError",
    "SupplyState",
    "ThreePhaseMeasurement",
    "TripEvent",
    "World",
    "calibrate_overcurrent_gain",
    "deterministic_overrides",
    "effective_supply",
    "lcd_message",
    "load_config",
    "percent_unbalance",
    "save_config",
    "solve_equivalent_circuit",
    "steady_state_current",
    "torque_slip_curve",
    "__version__",
]
