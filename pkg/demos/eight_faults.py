#!/usr/bin/env python3
"""Run the canonical scripted scenario for each of the eight faults on the
deterministic bench and show what the relay diagnosed."""
from motorbench.config import RunConfig, deterministic_overrides
from motorbench.events import FaultKind
from motorbench.harness import builtin_scenario, run_scenario


def main():
    config = deterministic_overrides(RunConfig())
    print(f"{'injected':<18} {'diagnosed':<18} {'function':<12} {'latency_s':>9}")
    for fault in FaultKind:
        result = run_scenario(config, builtin_scenario(fault), seed=1)
        trip = result.trip
        print(
            f"{fault.value:<18} {result.diagnosed.value:<18} "
            f"{trip.ansi_function.value:<12} {result.detection_latency_s:>9.2f}"
        )


if __name__ == "__main__":
    main()
