"""Steady-state induction motor model: per-phase equivalent circuit plus
first-order mechanics.

The machine is the classic single-cage equivalent circuit. Per phase, with
slip s:

    Z1 = R1 + jX1            stator
    Z2 = R2/s + jX2          rotor, referred to the stator
    Zm = jXm                 magnetizing branch
    Z  = Z1 + (Zm || Z2)

Electromagnetic torque comes from the air-gap power: each phase contributes
I2^2 * (R2/s) / w_sync, so a balanced machine produces 3 * I2^2 * (R2/s) /
w_sync. Unbalanced supplies are handled by solving each phase independently
against the per-phase circuit at the common slip and summing the phase
torques. That ignores negative-sequence braking torque, which is acceptable
for a bench whose relay reacts to RMS magnitudes, not to torque ripple.

Open phases use a deliberately simple single-phasing approximation: with one
phase open on an isolated-neutral machine the two live windings are in series
across one line-line voltage, so their currents are scaled by sqrt(3)/2 and
the open phase carries nothing. With two or three phases open there is no
return path and every current is zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

SQRT3 = math.sqrt(3.0)

#: Scale applied to the live phase currents when exactly one phase is open:
#: two windings in series across a single line-line voltage.
SINGLE_PHASING_FACTOR = SQRT3 / 2.0

#: Slip below which a start is considered complete.
SLIP_RUN_THRESHOLD = 0.05

#: A healthy unloaded start must finish inside this window.
START_WINDOW_S = 2.0


class MotorModelError(ValueError):
    """Raised for out-of-domain inputs (slip outside [0, 1], negative volts)."""


@dataclass(frozen=True)
class MotorParams:
    """Nameplate and equivalent-circuit constants.

    Defaults describe the bench machine: 220 V line-line, 1 HP (746 W),
    4-pole, 60 Hz. rated_current_a is the nameplate line current computed
    from rated power at 0.8 power factor and 0.8 efficiency.
    """

    r1_ohm: float = 2.5
    x1_ohm: float = 3.0
    r2_ohm: float = 2.0
    x2_ohm: float = 3.0
    xm_ohm: float = 60.0
    inertia_kgm2: float = 0.01
    pole_pairs: int = 2
    frequency_hz: float = 60.0
    rated_voltage_ll_v: float = 220.0
    rated_power_w: float = 746.0
    power_factor: float = 0.8
    efficiency: float = 0.8
    brake_torque_max_nm: float = 20.0

    def __post_init__(self) -> None:
        if self.xm_ohm < 5.0 * self.x1_ohm:
            raise MotorModelError(
                "xm_ohm must be at least 5x x1_ohm for a credible machine "
                f"(got xm={self.xm_ohm}, x1={self.x1_ohm})"
            )
        for name in ("r1_ohm", "x1_ohm", "r2_ohm", "x2_ohm"):
            if getattr(self, name) <= 0:
                raise MotorModelError(f"{name} must be positive")
        if self.pole_pairs < 1:
            raise MotorModelError("pole_pairs must be >= 1")
        if self.inertia_kgm2 <= 0:
            raise MotorModelError("inertia_kgm2 must be positive")

    @property
    def sync_speed_rad_s(self) -> float:
        return 2.0 * math.pi * self.frequency_hz / self.pole_pairs

    @property
    def rated_current_a(self) -> float:
        return self.rated_power_w / (
            SQRT3 * self.rated_voltage_ll_v * self.power_factor * self.efficiency
        )


@dataclass(frozen=True)
class MotorState:
    """Mechanical and electrical state carried between ticks."""

    rotor_speed_rad_s: float = 0.0
    energized: bool = False
    starting: bool = False
    phase_currents_a: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    torque_nm: float = 0.0

    def slip(self, params: MotorParams) -> float:
        s = 1.0 - self.rotor_speed_rad_s / params.sync_speed_rad_s
        return min(1.0, max(0.0, s))


class BrakeSelector(str, Enum):
    """Electromechanical brake selector position."""

    OFF = "off"
    OVERCURRENT = "overcurrent"
    LOCKED = "locked"
    EXTENDED_START = "extended_start"


@dataclass(frozen=True)
class BrakeState:
    """Brake engagement as a fraction of brake_torque_max_nm."""

    selector: BrakeSelector = BrakeSelector.OFF
    fraction: float = 0.0

    def load_torque_nm(self, params: MotorParams) -> float:
        return self.fraction * params.brake_torque_max_nm


@dataclass(frozen=True)
class CircuitSolution:
    """Per-tick electrical solution of the machine."""

    phase_currents_a: Tuple[float, float, float]
    torque_nm: float
    electrical_power_w: float
    airgap_power_w: float


# Slips below this are synchronous for all purposes; guards r2/slip overflow.
_SLIP_EPS = 1e-12


def _phase_impedance(params: MotorParams, slip: float) -> complex:
    z1 = complex(params.r1_ohm, params.x1_ohm)
    zm = complex(0.0, params.xm_ohm)
    if slip < _SLIP_EPS:
        # rotor branch open: magnetizing current only
        return z1 + zm
    z2 = complex(params.r2_ohm / slip, params.x2_ohm)
    return z1 + (zm * z2) / (zm + z2)


def solve_equivalent_circuit(
    params: MotorParams,
    phase_voltages_v: Sequence[float],
    slip: float,
    phase_connected: Sequence[bool] = (True, True, True),
    current_divisors: Sequence[float] = (1.0, 1.0, 1.0),
) -> CircuitSolution:
    """Solve the per-phase circuit for all three phases at a common slip.

    Args:
        params: machine constants.
        phase_voltages_v: per-phase RMS volts in line-line-equivalent terms
            (a healthy supply reads rated_voltage_ll_v on every channel);
            converted internally to line-neutral for the wye circuit.
        slip: rotor slip in [0, 1].
        phase_connected: False marks a pole that is physically open.
        current_divisors: per-phase series scaling (>1 inserts impedance),
            used by the current-unbalance injection.

    Returns:
        CircuitSolution with RMS phase currents, summed torque, and the
        electrical/air-gap powers for energy bookkeeping.

    Raises:
        MotorModelError: slip outside [0, 1] or a negative voltage.
    """
    if not 0.0 <= slip <= 1.0:
        raise MotorModelError(f"slip must lie in [0, 1], got {slip}")
    if any(v < 0.0 for v in phase_voltages_v):
        raise MotorModelError("phase voltages must be non-negative")

    live = [bool(c) for c in phase_connected]
    n_live = sum(live)
    # No return path once fewer than two phases remain connected.
    if n_live < 2:
        return CircuitSolution((0.0, 0.0, 0.0), 0.0, 0.0, 0.0)
    phase_factor = SINGLE_PHASING_FACTOR if n_live == 2 else 1.0

    z_total = _phase_impedance(params, slip)
    zm = complex(0.0, params.xm_ohm)
    rotor_live = slip >= _SLIP_EPS
    if rotor_live:
        z2 = complex(params.r2_ohm / slip, params.x2_ohm)
        rotor_divider = abs(zm / (zm + z2))
        r2_over_s = params.r2_ohm / slip
    else:
        rotor_divider = 0.0
        r2_over_s = 0.0

    w_sync = params.sync_speed_rad_s
    currents = [0.0, 0.0, 0.0]
    torque = 0.0
    p_elec = 0.0
    p_airgap = 0.0
    cos_phi = z_total.real / abs(z_total)
    for k in range(3):
        if not live[k]:
            continue
        v_ln = phase_voltages_v[k] / SQRT3
        i1 = (v_ln / abs(z_total)) * phase_factor / current_divisors[k]
        currents[k] = i1
        if rotor_live:
            i2 = i1 * rotor_divider
            p_gap = i2 * i2 * r2_over_s
            torque += p_gap / w_sync
            p_airgap += p_gap
        p_elec += v_ln * i1 * cos_phi

    return CircuitSolution(tuple(currents), torque, p_elec, p_airgap)


def torque_slip_curve(
    params: MotorParams,
    slips: Optional[Sequence[float]] = None,
) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Sample the balanced-supply torque-slip curve.

    Returns (slips, torques). Default grid is 100 points on (0, 1].
    """
    if slips is None:
        slips = [(k + 1) / 100.0 for k in range(100)]
    v = (params.rated_voltage_ll_v,) * 3
    torques = tuple(
        solve_equivalent_circuit(params, v, s).torque_nm for s in slips
    )
    return tuple(slips), torques


def step_mechanics(
    state: MotorState,
    params: MotorParams,
    torque_e_nm: float,
    load_torque_nm: float,
    dt_s: float,
) -> MotorState:
    """Advance rotor speed one tick with explicit Euler.

    Speed is clamped to [0, sync]: the brake cannot drive the rotor
    backwards and the machine cannot overhaul synchronous speed.
    """
    w_sync = params.sync_speed_rad_s
    accel = (torque_e_nm - load_torque_nm) / params.inertia_kgm2
    w = state.rotor_speed_rad_s + dt_s * accel
    w = min(w_sync, max(0.0, w))
    new = replace(state, rotor_speed_rad_s=w)
    if new.starting and new.slip(params) < SLIP_RUN_THRESHOLD:
        new = replace(new, starting=False)
    return new


def steady_state_current(params: MotorParams, slip: float) -> float:
    """Balanced-supply phase current magnitude at the given slip."""
    v = (params.rated_voltage_ll_v,) * 3
    return solve_equivalent_circuit(params, v, slip).phase_currents_a[0]


def calibrate_overcurrent_gain(
    params: MotorParams,
    target_current_fraction: float = 1.25,
) -> float:
    """Find the brake gain k such that full potentiometer settles the machine
    at target_current_fraction of rated current.

    The steady operating point solves torque(slip*) == k * brake_torque_max
    where slip* is the slip at which the phase current equals the target.
    The current magnitude is monotone in slip, so slip* is a bracketed root.
    """
    from scipy.optimize import brentq

    target = target_current_fraction * params.rated_current_a

    def current_error(s: float) -> float:
        return steady_state_current(params, s) - target

    lo, hi = 1e-6, 1.0
    if current_error(hi) < 0.0:
        raise MotorModelError("target current exceeds locked-rotor current")
    slip_star = brentq(current_error, lo, hi, xtol=1e-12)
    v = (params.rated_voltage_ll_v,) * 3
    torque_star = solve_equivalent_circuit(params, v, slip_star).torque_nm
    return torque_star / params.brake_torque_max_nm


def brake_from_potentiometer(
    potentiometer: float,
    selector: BrakeSelector,
    overcurrent_gain: float,
) -> BrakeState:
    """Map the pot fraction and selector position to brake engagement.

    The overcurrent position scales linearly with the pot through the
    calibrated gain; the locked and extended-start positions clamp the
    rotor outright.
    """
    if not 0.0 <= potentiometer <= 1.0:
        raise MotorModelError("potentiometer fraction must lie in [0, 1]")
    if selector is BrakeSelector.OFF:
        return BrakeState(selector, 0.0)
    if selector is BrakeSelector.OVERCURRENT:
        return BrakeState(selector, min(1.0, overcurrent_gain * potentiometer))
    return BrakeState(selector, 1.0)
