#!/usr/bin/env python3
"""Print the steady-state torque-slip curve and the key operating points."""
import math

from motorbench.motor import (
    MotorParams,
    solve_equivalent_circuit,
    steady_state_current,
    torque_slip_curve,
)


def main():
    params = MotorParams()
    slips, torques = torque_slip_curve(params)
    peak = max(range(len(torques)), key=lambda i: torques[i])

    print("slip     torque_nm   current_a")
    for i in range(0, len(slips), 5):
        i_a = steady_state_current(params, slips[i])
        marker = "  <- pull-out" if i == peak else ""
        print(f"{slips[i]:5.3f} {torques[i]:11.3f} {i_a:11.3f}{marker}")

    i_rated = params.rated_current_a
    i_locked = steady_state_current(params, 1.0)
    sol = solve_equivalent_circuit(
        params, (params.rated_voltage_ll_v,) * 3, slips[peak]
    )
    print()
    print(f"rated current        : {i_rated:.4f} A")
    print(f"locked-rotor current : {i_locked:.4f} A ({i_locked / i_rated:.2f}x rated)")
    print(f"pull-out torque      : {sol.torque_nm:.3f} N.m at slip {slips[peak]:.2f}")
    print(f"synchronous speed    : {params.sync_speed_rad_s:.4f} rad/s "
          f"({params.sync_speed_rad_s * 60 / (2 * math.pi):.0f} rpm)")


if __name__ == "__main__":
    main()
