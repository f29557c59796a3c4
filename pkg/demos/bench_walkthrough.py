#!/usr/bin/env python3
"""Drive the bench panel by hand: power on, start the motor, inject an
overvoltage, watch the relay trip, reset. Prints the panel state as it goes."""
from motorbench.config import RunConfig, deterministic_overrides
from motorbench.events import CommandKind, FaultKind, PanelCommand
from motorbench.sim import World


def show(world, label):
    p = world.panel
    m = world.motor_state
    leds = f"green={'on' if p.green_led else 'off'} yellow={'on' if p.yellow_fault_led else 'off'}"
    buzzer = "BUZZING" if p.buzzer_on else "quiet"
    print(f"[t={world.sim_time_s:6.2f}s] {label}")
    print(f"    LCD '{p.lcd_line}'  {leds}  buzzer {buzzer}")
    print(f"    speed {m.rotor_speed_rad_s:7.2f} rad/s  "
          f"currents {tuple(round(i, 2) for i in m.phase_currents_a)} A")


def run_until(world, seconds):
    ticks = round(seconds / world.config.tick_duration_s)
    events = []
    for _ in range(ticks):
        events.extend(world.step())
    return events


def main():
    world = World(deterministic_overrides(RunConfig()))
    show(world, "bench idle, panel dark")

    world.step([PanelCommand(CommandKind.POWER_ON)])
    show(world, "panel power on")

    world.step([PanelCommand(CommandKind.START_MOTOR)])
    run_until(world, 1.0)
    show(world, "motor started and up to speed")

    world.step(
        [PanelCommand(CommandKind.SET_FAULT, fault=FaultKind.OVERVOLTAGE, enable=True)]
    )
    show(world, "overvoltage selector on: 380 V now on the bus")

    events = run_until(world, 1.0)
    for ev in events:
        if ev.type == "trip":
            d = ev.data
            print(f"    >> TRIP function {d['ansi_function']} at t={d['sim_time']}s: "
                  f"measured {d['measured_value']} {d['unit']} "
                  f"against setting {d['setting_value']} {d['unit']}")
    show(world, "relay tripped, contactor open")

    world.step(
        [PanelCommand(CommandKind.SET_FAULT, fault=FaultKind.OVERVOLTAGE, enable=False)]
    )
    world.step([PanelCommand(CommandKind.RESET_FAULT)])
    show(world, "fault cleared and relay reset")


if __name__ == "__main__":
    main()
