"""Run configuration: one JSON document holding motor constants, protection
settings, injection knobs, and the clock/seed.

Field names embed units (ohm, v, a, s, pct, ticks). Files may contain
// line comments; they are stripped before parsing. load/save round-trips
to an identical document.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Union

from .events import FaultKind
from .faults import InjectionConfig, InjectionError
from .motor import MotorModelError, MotorParams
from .protection import ProtectionSettings, SettingsRangeError

#: What the panel LCD shows after a trip, per diagnosed fault. One line,
#: at most 16 characters.
DEFAULT_LCD_FAULT_LINES: Mapping[FaultKind, str] = {
    FaultKind.OVERVOLTAGE: "TRIP OVERVOLTAGE",
    FaultKind.UNDERVOLTAGE: "TRIP UNDERVOLT",
    FaultKind.OVERCURRENT: "TRIP OVERCURRENT",
    FaultKind.PHASE_LOSS: "TRIP PHASE LOSS",
    FaultKind.LOCKED_ROTOR: "TRIP LOCKED ROT",
    FaultKind.EXTENDED_START: "TRIP LONG START",
    FaultKind.VOLTAGE_UNBALANCE: "TRIP VOLT UNBAL",
    FaultKind.CURRENT_UNBALANCE: "TRIP CURR UNBAL",
}

LCD_WIDTH = 16
LCD_IDLE_TEXT = "Workbench Working"  # spans both 16-char lines


class ConfigError(ValueError):
    """Invalid configuration; message lists each field and its legal range."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the command stream."""

    motor: MotorParams = field(default_factory=MotorParams)
    protection: ProtectionSettings = field(default_factory=ProtectionSettings)
    injection: InjectionConfig = field(default_factory=InjectionConfig)
    tick_duration_s: float = 0.010
    rng_seed: int = 1
    measurement_window_ticks: int = 10
    lcd_fault_lines: Mapping[FaultKind, str] = field(
        default_factory=lambda: dict(DEFAULT_LCD_FAULT_LINES)
    )

    def __post_init__(self) -> None:
        issues = []
        if self.tick_duration_s <= 0:
            issues.append("tick_duration_s must be positive")
        if self.measurement_window_ticks < 1:
            issues.append("measurement_window_ticks must be >= 1")
        if self.injection.overvoltage_source_ll_v <= self.motor.rated_voltage_ll_v:
            issues.append(
                "injection.overvoltage_source_ll_v must exceed "
                f"motor.rated_voltage_ll_v ({self.motor.rated_voltage_ll_v})"
            )
        for kind, line in self.lcd_fault_lines.items():
            if len(line) > 2 * LCD_WIDTH:
                issues.append(f"lcd_fault_lines[{kind.value}] longer than 32 chars")
        if issues:
            raise ConfigError(issues)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tick_duration_s": self.tick_duration_s,
            "rng_seed": self.rng_seed,
            "measurement_window_ticks": self.measurement_window_ticks,
            "motor": asdict(self.motor),
            "protection": asdict(self.protection),
            "injection": asdict(self.injection),
            "lcd_fault_lines": {k.value: v for k, v in self.lcd_fault_lines.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "RunConfig":
        issues = []

        def build(cls, key):
            block = d.get(key, {})
            known = {f.name for f in fields(cls)}
            unknown = set(block) - known
            if unknown:
                issues.append(f"{key}: unknown fields {sorted(unknown)}")
            try:
                return cls(**{k: v for k, v in block.items() if k in known})
            except (SettingsRangeError, MotorModelError, InjectionError, TypeError) as e:
                if isinstance(e, SettingsRangeError):
                    issues.extend(f"{key}.{msg}" for msg in e.issues)
                else:
                    issues.append(f"{key}: {e}")
                return cls()

        top_known = {
            "motor",
            "protection",
            "injection",
            "lcd_fault_lines",
            "tick_duration_s",
            "rng_seed",
            "measurement_window_ticks",
        }
        top_unknown = set(d) - top_known
        if top_unknown:
            issues.append(f"unknown fields {sorted(top_unknown)}")

        motor = build(MotorParams, "motor")
        protection = build(ProtectionSettings, "protection")
        injection = build(InjectionConfig, "injection")
        lcd = dict(DEFAULT_LCD_FAULT_LINES)
        for key, line in d.get("lcd_fault_lines", {}).items():
            try:
                lcd[FaultKind(key)] = str(line)
            except ValueError:
                issues.append(f"lcd_fault_lines: unknown fault kind '{key}'")
        if issues:
            raise ConfigError(issues)
        try:
            return RunConfig(
                motor=motor,
                protection=protection,
                injection=injection,
                tick_duration_s=float(d.get("tick_duration_s", 0.010)),
                rng_seed=int(d.get("rng_seed", 1)),
                measurement_window_ticks=int(d.get("measurement_window_ticks", 10)),
                lcd_fault_lines=lcd,
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError([str(e)])


def strip_comments(text: str) -> str:
    """Remove // line comments (full-line or trailing outside strings)."""
    out_lines = []
    for line in text.splitlines():
        stripped = line.lstrip()
        if stripped.startswith("//"):
            continue
        # trailing comment: only strip when the // is not inside a string
        in_string = False
        cut = None
        k = 0
        while k < len(line) - 1:
            c = line[k]
            if c == '"' and (k == 0 or line[k - 1] != "\\"):
                in_string = not in_string
            elif not in_string and c == "/" and line[k + 1] == "/":
                cut = k
                break
            k += 1
        out_lines.append(line if cut is None else line[:cut].rstrip())
    return "\n".join(out_lines)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Parse a config file, stripping // comments. Raises ConfigError with
    one issue per offending field."""
    text = Path(path).read_text()
    try:
        data = json.loads(strip_comments(text))
    except json.JSONDecodeError as e:
        raise ConfigError([f"not valid JSON: {e}"])
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a JSON object"])
    return RunConfig.from_dict(data)


def save_config(config: RunConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(config.to_json())


def deterministic_overrides(config: RunConfig) -> RunConfig:
    """The same bench with every stochastic element disabled: zero noise,
    zero pole stagger, raw per-tick measurements."""
    from dataclasses import replace

    return replace(
        config,
        injection=replace(
            config.injection,
            pole_stagger_max_s=0.0,
            phase_loss_cascade_jitter_frac=0.0,
            noise_sigma_fraction=0.0,
        ),
        measurement_window_ticks=1,
    )
