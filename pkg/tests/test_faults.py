"""Fault injector and measurement chain tests.

Verifies:
- effective_supply identity with nothing armed
- Overvoltage rescales all three phases to the stiff 380 V source
- Undervoltage opens three poles independently within the stagger window
- Phase loss drops pole a first, then the remaining pair together after the
  cascade lag; lag bounds follow base +- jitter_frac * stagger
- Voltage unbalance sags one phase; current unbalance divides one phase
- Multiplicative noise clamps at zero, keeps dead channels dead, and is
  unbiased in the mean
- arm_fault timing draws are a pure function of the seed
"""
from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motorbench.events import FaultKind
from motorbench.faults import (
    FaultTiming,
    InjectionConfig,
    InjectionError,
    apply_measurement_noise,
    arm_fault,
    effective_supply,
)
from motorbench.protection import ThreePhaseMeasurement

NOMINAL_V = 220.0
FREQ = 60.0
CFG = InjectionConfig()


def supply_at(active, t):
    return effective_supply(NOMINAL_V, FREQ, active, CFG, t)


class TestInjectionConfig:
    def test_defaults_valid(self):
        cfg = InjectionConfig()
        assert cfg.overvoltage_source_ll_v == 380.0
        assert cfg.series_impedance_factor == 1.35

    @pytest.mark.parametrize(
        "field,value",
        [
            ("overvoltage_source_ll_v", 0.0),
            ("pole_stagger_max_s", -0.1),
            ("phase_loss_cascade_base_s", -1.0),
            ("unbalance_sag_fraction", 1.5),
            ("series_impedance_factor", 0.9),
            ("noise_sigma_fraction", -0.01),
        ],
    )
    def test_bad_values_rejected(self, field, value):
        with pytest.raises(InjectionError) as err:
            InjectionConfig(**{field: value})
        assert field in str(err.value)


class TestEffectiveSupply:
    def test_identity_with_nothing_armed(self):
        s = supply_at({}, 1.0)
        assert s.phase_voltages_v == (NOMINAL_V,) * 3
        assert s.phase_connected == (True, True, True)
        assert s.current_divisors == (1.0, 1.0, 1.0)
        assert s.frequency_hz == FREQ

    def test_overvoltage_rescales_to_stiff_source(self):
        active = {FaultKind.OVERVOLTAGE: FaultTiming(armed_at_s=0.5)}
        s = supply_at(active, 1.0)
        assert s.phase_voltages_v == pytest.approx((380.0,) * 3)
        assert s.phase_connected == (True, True, True)

    def test_overvoltage_on_dead_bus_stays_dead(self):
        active = {FaultKind.OVERVOLTAGE: FaultTiming(armed_at_s=0.5)}
        s = effective_supply(0.0, FREQ, active, CFG, 1.0)
        assert s.phase_voltages_v == (0.0, 0.0, 0.0)

    def test_voltage_unbalance_sags_phase_a_only(self):
        active = {FaultKind.VOLTAGE_UNBALANCE: FaultTiming(armed_at_s=0.0)}
        s = supply_at(active, 1.0)
        assert s.phase_voltages_v[0] == pytest.approx(0.85 * NOMINAL_V)
        assert s.phase_voltages_v[1] == NOMINAL_V
        assert s.phase_voltages_v[2] == NOMINAL_V
        assert s.phase_connected == (True, True, True)

    def test_current_unbalance_divides_phase_a_only(self):
        active = {FaultKind.CURRENT_UNBALANCE: FaultTiming(armed_at_s=0.0)}
        s = supply_at(active, 1.0)
        assert s.current_divisors == (1.35, 1.0, 1.0)
        assert s.phase_voltages_v == (NOMINAL_V,) * 3

    def test_poles_open_as_time_passes(self):
        timing = FaultTiming(
            armed_at_s=1.0, pole_open_times_s=(1.05, 1.10, 1.15)
        )
        active = {FaultKind.UNDERVOLTAGE: timing}
        assert supply_at(active, 1.04).phase_connected == (True, True, True)
        assert supply_at(active, 1.05).phase_connected == (False, True, True)
        assert supply_at(active, 1.12).phase_connected == (False, False, True)
        s = supply_at(active, 2.0)
        assert s.phase_connected == (False, False, False)
        assert s.phase_voltages_v == (0.0, 0.0, 0.0)

    def test_open_pole_reads_zero_volts(self):
        timing = FaultTiming(armed_at_s=0.0, pole_open_times_s=(0.0, 9.0, 9.0))
        active = {FaultKind.PHASE_LOSS: timing}
        s = supply_at(active, 0.5)
        assert s.phase_voltages_v == (0.0, NOMINAL_V, NOMINAL_V)
        assert s.phase_connected == (False, True, True)


class TestArmFault:
    @given(seed=st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=200, deadline=None)
    def test_undervoltage_offsets_within_stagger_window(self, seed):
        timing = arm_fault(
            FaultKind.UNDERVOLTAGE, CFG, 2.0, random.Random(seed)
        )
        assert timing.armed_at_s == 2.0
        for t in timing.pole_open_times_s:
            assert 2.0 <= t <= 2.0 + CFG.pole_stagger_max_s

    @given(seed=st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=200, deadline=None)
    def test_phase_loss_cascade_structure(self, seed):
        timing = arm_fault(FaultKind.PHASE_LOSS, CFG, 3.0, random.Random(seed))
        t_a, t_b, t_c = timing.pole_open_times_s
        assert t_b == t_c  # second-stage pair drops together
        assert t_a <= t_b  # pole a leads
        assert 3.0 <= t_a <= 3.0 + CFG.pole_stagger_max_s
        jitter_half = CFG.phase_loss_cascade_jitter_frac * CFG.pole_stagger_max_s
        lag = t_b - t_a
        lo = max(0.0, CFG.phase_loss_cascade_base_s - jitter_half)
        hi = CFG.phase_loss_cascade_base_s + jitter_half
        assert lo - 1e-12 <= lag <= hi + 1e-12

    def test_lag_spans_its_band(self):
        """Across many draws the cascade lag approaches both band edges."""
        rng = random.Random(7)
        lags = []
        for _ in range(4000):
            t = arm_fault(FaultKind.PHASE_LOSS, CFG, 0.0, rng)
            lags.append(t.pole_open_times_s[1] - t.pole_open_times_s[0])
        jitter_half = CFG.phase_loss_cascade_jitter_frac * CFG.pole_stagger_max_s
        band = 2 * jitter_half
        assert min(lags) < CFG.phase_loss_cascade_base_s - 0.45 * band
        assert max(lags) > CFG.phase_loss_cascade_base_s + 0.45 * band

    def test_non_mechanical_faults_have_no_pole_times(self):
        for kind in (
            FaultKind.OVERVOLTAGE,
            FaultKind.VOLTAGE_UNBALANCE,
            FaultKind.CURRENT_UNBALANCE,
            FaultKind.OVERCURRENT,
            FaultKind.LOCKED_ROTOR,
            FaultKind.EXTENDED_START,
        ):
            timing = arm_fault(kind, CFG, 1.0, random.Random(0))
            assert timing.pole_open_times_s is None
            assert timing.armed_at_s == 1.0

    def test_same_seed_same_timeline(self):
        for kind in (FaultKind.UNDERVOLTAGE, FaultKind.PHASE_LOSS):
            a = arm_fault(kind, CFG, 5.0, random.Random(123))
            b = arm_fault(kind, CFG, 5.0, random.Random(123))
            assert a == b

    def test_different_seeds_differ(self):
        a = arm_fault(FaultKind.UNDERVOLTAGE, CFG, 5.0, random.Random(1))
        b = arm_fault(FaultKind.UNDERVOLTAGE, CFG, 5.0, random.Random(2))
        assert a.pole_open_times_s != b.pole_open_times_s


class TestMeasurementNoise:
    def test_sigma_zero_is_identity(self):
        m = ThreePhaseMeasurement((220.0,) * 3, (3.0,) * 3)
        assert apply_measurement_noise(m, 0.0, random.Random(0)) is m

    def test_dead_channels_stay_dead(self):
        m = ThreePhaseMeasurement((0.0, 220.0, 220.0), (0.0, 3.0, 3.0))
        rng = random.Random(9)
        for _ in range(200):
            noisy = apply_measurement_noise(m, 0.005, rng)
            assert noisy.v_v[0] == 0.0
            assert noisy.i_a[0] == 0.0
            assert noisy.v_v[1] > 0.0

    def test_never_negative_even_at_huge_sigma(self):
        m = ThreePhaseMeasurement((1.0,) * 3, (1.0,) * 3)
        rng = random.Random(4)
        for _ in range(500):
            noisy = apply_measurement_noise(m, 5.0, rng)
            assert all(x >= 0.0 for x in noisy.v_v)
            assert all(x >= 0.0 for x in noisy.i_a)

    def test_unbiased_and_correctly_scaled(self):
        m = ThreePhaseMeasurement((220.0,) * 3, (3.0,) * 3)
        rng = random.Random(11)
        n = 4000
        samples = [apply_measurement_noise(m, 0.005, rng).v_v[0] for _ in range(n)]
        mean = sum(samples) / n
        sd = math.sqrt(sum((x - mean) ** 2 for x in samples) / (n - 1))
        # mean within 5 standard errors; sd within 15% of 0.5% of signal
        assert abs(mean - 220.0) < 5 * (220.0 * 0.005) / math.sqrt(n)
        assert 0.85 * 1.1 < sd < 1.15 * 1.1

    def test_frequency_passes_through(self):
        m = ThreePhaseMeasurement((220.0,) * 3, (3.0,) * 3, frequency_hz=50.0)
        noisy = apply_measurement_noise(m, 0.005, random.Random(1))
        assert noisy.frequency_hz == 50.0
