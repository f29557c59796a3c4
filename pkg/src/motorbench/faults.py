"""Fault injection: how each selector corrupts the supply, the brake, or the
measurement chain.

Supply-path faults transform the nominal three-phase source into an effective
SupplyState; brake-path faults are handled by the electromechanical brake
(see motor.BrakeSelector); the current-unbalance fault inserts a series
impedance modeled as a per-phase current divisor.

Interruption faults open real contactor poles, and real poles do not open
simultaneously: each pole k opens at t_arm + d_k with d_k drawn uniformly
from [0, pole_stagger_max_s] once per injection. The phase-loss selector
works through a two-stage command-relay chain: the first stage drops pole a,
and the second stage drops the remaining pole pair together after a
mechanical cascade lag. The lag is cascade_base plus a jitter of
+-cascade_jitter_frac * pole_stagger_max_s. Those timing draws, racing the
relay's definite-time elements over the 10 ms tick grid, are the only source
of classification randomness in the bench.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

from .events import FaultKind
from .protection import ThreePhaseMeasurement


class InjectionError(ValueError):
    """Raised for invalid injection configuration."""


@dataclass(frozen=True)
class InjectionConfig:
    """Knobs for the fault injectors and the measurement chain."""

    overvoltage_source_ll_v: float = 380.0
    pole_stagger_max_s: float = 0.207
    phase_loss_cascade_base_s: float = 0.184
    phase_loss_cascade_jitter_frac: float = 0.35
    unbalance_sag_fraction: float = 0.85
    series_impedance_factor: float = 1.35
    noise_sigma_fraction: float = 0.005

    def __post_init__(self) -> None:
        issues = []
        if self.overvoltage_source_ll_v <= 0:
            issues.append("overvoltage_source_ll_v must be positive")
        if self.pole_stagger_max_s < 0:
            issues.append("pole_stagger_max_s must be >= 0")
        if self.phase_loss_cascade_base_s < 0:
            issues.append("phase_loss_cascade_base_s must be >= 0")
        if self.phase_loss_cascade_jitter_frac < 0:
            issues.append("phase_loss_cascade_jitter_frac must be >= 0")
        if not 0.0 <= self.unbalance_sag_fraction <= 1.0:
            issues.append("unbalance_sag_fraction must lie in [0, 1]")
        if self.series_impedance_factor < 1.0:
            issues.append("series_impedance_factor must be >= 1")
        if self.noise_sigma_fraction < 0:
            issues.append("noise_sigma_fraction must be >= 0")
        if issues:
            raise InjectionError("; ".join(issues))


@dataclass(frozen=True)
class SupplyState:
    """Effective source as seen at the relay's voltage transformers."""

    phase_voltages_v: Tuple[float, float, float]
    phase_connected: Tuple[bool, bool, bool]
    frequency_hz: float = 60.0
    current_divisors: Tuple[float, float, float] = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class FaultTiming:
    """Per-injection draw record. pole_open_times_s are absolute sim times;
    None for faults without pole mechanics."""

    armed_at_s: float
    pole_open_times_s: Optional[Tuple[float, float, float]] = None


def arm_fault(
    kind: FaultKind,
    config: InjectionConfig,
    sim_time_s: float,
    rng: random.Random,
) -> FaultTiming:
    """Record an injection start, drawing any mechanical timing offsets.

    Draw order is fixed per kind so a given seed always produces the same
    event timeline.
    """
    if kind is FaultKind.UNDERVOLTAGE:
        offsets = tuple(
            rng.uniform(0.0, config.pole_stagger_max_s) for _ in range(3)
        )
        return FaultTiming(
            armed_at_s=sim_time_s,
            pole_open_times_s=tuple(sim_time_s + d for d in offsets),
        )
    if kind is FaultKind.PHASE_LOSS:
        d_a = rng.uniform(0.0, config.pole_stagger_max_s)
        jitter_half = config.phase_loss_cascade_jitter_frac * config.pole_stagger_max_s
        lag = config.phase_loss_cascade_base_s + rng.uniform(-jitter_half, jitter_half)
        lag = max(0.0, lag)
        t_a = sim_time_s + d_a
        t_pair = t_a + lag
        return FaultTiming(
            armed_at_s=sim_time_s,
            pole_open_times_s=(t_a, t_pair, t_pair),
        )
    return FaultTiming(armed_at_s=sim_time_s)


def effective_supply(
    nominal_voltage_ll_v: float,
    frequency_hz: float,
    active: Mapping[FaultKind, FaultTiming],
    config: InjectionConfig,
    sim_time_s: float,
) -> SupplyState:
    """Apply the active injections to the nominal source at one instant.

    With no active fault this is the identity. At most one voltage-path
    fault may be active (the panel enforces exclusivity before arming).
    """
    v = [nominal_voltage_ll_v] * 3
    connected = [True, True, True]
    divisors = [1.0, 1.0, 1.0]

    if FaultKind.OVERVOLTAGE in active and nominal_voltage_ll_v > 0.0:
        scale = config.overvoltage_source_ll_v / nominal_voltage_ll_v
        v = [x * scale for x in v]

    if FaultKind.VOLTAGE_UNBALANCE in active:
        v[0] *= config.unbalance_sag_fraction

    for kind in (FaultKind.UNDERVOLTAGE, FaultKind.PHASE_LOSS):
        timing = active.get(kind)
        if timing is not None and timing.pole_open_times_s is not None:
            for k in range(3):
                if sim_time_s >= timing.pole_open_times_s[k]:
                    v[k] = 0.0
                    connected[k] = False

    if FaultKind.CURRENT_UNBALANCE in active:
        divisors[0] = config.series_impedance_factor

    return SupplyState(
        phase_voltages_v=tuple(v),
        phase_connected=tuple(connected),
        frequency_hz=frequency_hz,
        current_divisors=tuple(divisors),
    )


def apply_measurement_noise(
    m: ThreePhaseMeasurement,
    sigma_fraction: float,
    rng: random.Random,
) -> ThreePhaseMeasurement:
    """Multiplicative instrument noise: each channel times (1 + g), with
    g ~ Normal(0, sigma). Results clamp at zero; a dead channel stays dead.
    """
    if sigma_fraction <= 0.0:
        return m
    v = tuple(
        max(0.0, x * (1.0 + rng.gauss(0.0, sigma_fraction))) for x in m.v_v
    )
    i = tuple(
        max(0.0, x * (1.0 + rng.gauss(0.0, sigma_fraction))) for x in m.i_a
    )
    return ThreePhaseMeasurement(v_v=v, i_a=i, frequency_hz=m.frequency_hz)
