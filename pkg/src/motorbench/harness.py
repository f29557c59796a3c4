"""Scripted bench runs.

A ScenarioScript is a timed command schedule (power on, start, inject) plus
a timeout. run_scenario() executes one against a fresh World and reports
what the relay diagnosed; run_reliability() repeats a scenario across many
seeds and tallies correct, misclassified, and missed runs. The canonical
per-fault scenarios ship as JSON files next to this module.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .config import RunConfig
from .events import CommandKind, Event, FaultKind, PanelCommand, TripEvent
from .sim import World

#: Reliability report serialization format, bumped on breaking changes.
REPORT_VERSION = 1


class ScenarioError(ValueError):
    """A scenario file is malformed or internally inconsistent."""


@dataclass(frozen=True)
class ScenarioStep:
    """One scheduled command. It applies on the first tick whose boundary
    time is at or after time_s."""

    time_s: float
    command: PanelCommand


@dataclass(frozen=True)
class ScenarioScript:
    """A named, timed command schedule with an expected diagnosis."""

    name: str
    fault: Optional[FaultKind]
    timeout_s: float
    steps: Tuple[ScenarioStep, ...]

    def __post_init__(self) -> None:
        if self.timeout_s <= 0.0:
            raise ScenarioError(f"{self.name}: timeout_s must be positive")
        times = [s.time_s for s in self.steps]
        if any(t < 0.0 for t in times):
            raise ScenarioError(f"{self.name}: negative command time")
        if times != sorted(times):
            raise ScenarioError(f"{self.name}: steps must be time-ordered")
        if times and times[-1] >= self.timeout_s:
            raise ScenarioError(f"{self.name}: command scheduled after timeout")

    @property
    def injection_time_s(self) -> Optional[float]:
        """When the scripted fault is switched on, if it is."""
        for step in self.steps:
            cmd = step.command
            if (
                cmd.kind is CommandKind.SET_FAULT
                and cmd.enable
                and cmd.fault is self.fault
            ):
                return step.time_s
        return None

    @staticmethod
    def from_dict(raw: Mapping) -> "ScenarioScript":
        try:
            name = str(raw["name"])
            fault = FaultKind(raw["fault"]) if raw.get("fault") else None
            timeout_s = float(raw["timeout_s"])
            steps = []
            for entry in raw["commands"]:
                entry = dict(entry)
                time_s = float(entry.pop("time_s"))
                steps.append(ScenarioStep(time_s, PanelCommand.from_dict(entry)))
        except (KeyError, ValueError, TypeError) as e:
            raise ScenarioError(f"bad scenario document: {e}") from e
        return ScenarioScript(name, fault, timeout_s, tuple(steps))

    def to_dict(self) -> dict:
        out: dict = {
            "name": self.name,
            "fault": self.fault.value if self.fault else None,
            "timeout_s": self.timeout_s,
            "commands": [],
        }
        for step in self.steps:
            entry = {"time_s": step.time_s}
            entry.update(step.command.to_dict())
            out["commands"].append(entry)
        return out


def load_scenario(path: Union[str, Path]) -> ScenarioScript:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: not valid JSON: {e}") from e
    return ScenarioScript.from_dict(raw)


def builtin_scenario(fault: FaultKind) -> ScenarioScript:
    """The canonical scripted run for one fault kind."""
    ref = resources.files("motorbench").joinpath(f"scenarios/{fault.value}.json")
    raw = json.loads(ref.read_text(encoding="utf-8"))
    return ScenarioScript.from_dict(raw)


@dataclass(frozen=True)
class ScenarioResult:
    """Outcome of one scripted run."""

    scenario: str
    fault: Optional[FaultKind]
    seed: int
    trip: Optional[TripEvent]
    ticks_run: int
    injected_at_s: Optional[float]
    events: Tuple[Event, ...] = field(repr=False, default=())

    @property
    def diagnosed(self) -> Optional[FaultKind]:
        return self.trip.fault_kind if self.trip else None

    @property
    def correct(self) -> Optional[bool]:
        if self.fault is None or self.trip is None:
            return None
        return self.diagnosed is self.fault

    @property
    def detection_latency_s(self) -> Optional[float]:
        if self.trip is None or self.injected_at_s is None:
            return None
        return self.trip.sim_time - self.injected_at_s


def run_scenario(
    config: RunConfig,
    script: ScenarioScript,
    seed: Optional[int] = None,
    stop_on_trip: bool = True,
    collect_events: bool = True,
) -> ScenarioResult:
    """Execute one script against a fresh World and report the outcome."""
    world = World(config, rng_seed=seed)
    dt = config.tick_duration_s
    schedule: Dict[int, List[PanelCommand]] = {}
    for step in script.steps:
        tick = max(1, math.ceil(step.time_s / dt - 1e-9))
        schedule.setdefault(tick, []).append(step.command)

    total_ticks = math.ceil(script.timeout_s / dt)
    events: List[Event] = []
    for tick in range(1, total_ticks + 1):
        out = world.step(schedule.get(tick, []))
        if collect_events:
            events.extend(out)
        if stop_on_trip and world.panel.latched_trip is not None:
            break

    return ScenarioResult(
        scenario=script.name,
        fault=script.fault,
        seed=world.seed,
        trip=world.panel.latched_trip,
        ticks_run=world.tick_index,
        injected_at_s=script.injection_time_s,
        events=tuple(events),
    )


def run_detection_matrix(
    config: RunConfig,
    seeds: Sequence[int],
    faults: Optional[Sequence[FaultKind]] = None,
) -> Dict[FaultKind, List[ScenarioResult]]:
    """Every fault's canonical scenario across a set of seeds."""
    out: Dict[FaultKind, List[ScenarioResult]] = {}
    for fault in faults or list(FaultKind):
        script = builtin_scenario(fault)
        out[fault] = [
            run_scenario(config, script, seed=s, collect_events=False) for s in seeds
        ]
    return out


@dataclass(frozen=True)
class ReliabilityReport:
    """Tally of one fault's scenario across many seeds.

    trials == correct + sum(misclassified.values()) + no_trip always holds.
    """

    fault: FaultKind
    trials: int
    base_seed: int
    correct: int
    no_trip: int
    misclassified: Mapping[FaultKind, int]
    mean_detection_latency_s: Optional[float]

    @property
    def correct_rate(self) -> float:
        return self.correct / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "fault": self.fault.value,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "correct": self.correct,
            "correct_rate": round(self.correct_rate, 6),
            "no_trip": self.no_trip,
            "misclassified": {
                k.value: n for k, n in sorted(self.misclassified.items())
            },
            "mean_detection_latency_s": (
                round(self.mean_detection_latency_s, 6)
                if self.mean_detection_latency_s is not None
                else None
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(d: Mapping) -> "ReliabilityReport":
        if d.get("version") != REPORT_VERSION:
            raise ValueError(f"unsupported report version {d.get('version')!r}")
        return ReliabilityReport(
            fault=FaultKind(d["fault"]),
            trials=int(d["trials"]),
            base_seed=int(d["base_seed"]),
            correct=int(d["correct"]),
            no_trip=int(d["no_trip"]),
            misclassified={
                FaultKind(k): int(n) for k, n in d["misclassified"].items()
            },
            mean_detection_latency_s=d["mean_detection_latency_s"],
        )


def run_reliability(
    config: RunConfig,
    fault: FaultKind,
    trials: int,
    base_seed: int = 0,
    script: Optional[ScenarioScript] = None,
) -> ReliabilityReport:
    """Repeat one fault's scenario across consecutive seeds and tally the
    diagnoses. Seed i of n is base_seed + i."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    script = script or builtin_scenario(fault)
    correct = 0
    no_trip = 0
    mis: Dict[FaultKind, int] = {}
    latencies: List[float] = []
    for i in range(trials):
        r = run_scenario(config, script, seed=base_seed + i, collect_events=False)
        if r.trip is None:
            no_trip += 1
            continue
        if r.diagnosed is fault:
            correct += 1
        else:
            mis[r.diagnosed] = mis.get(r.diagnosed, 0) + 1
        if r.detection_latency_s is not None:
            latencies.append(r.detection_latency_s)
    return ReliabilityReport(
        fault=fault,
        trials=trials,
        base_seed=base_seed,
        correct=correct,
        no_trip=no_trip,
        misclassified=mis,
        mean_detection_latency_s=(
            sum(latencies) / len(latencies) if latencies else None
        ),
    )


def render_table(reports: Sequence[ReliabilityReport]) -> str:
    """One row per report; header-only when the set is empty."""
    header = (
        f"{'fault':<18} {'trials':>6} {'correct':>7} {'rate':>6} "
        f"{'no_trip':>7}  misclassified"
    )
    lines = [header]
    for rep in reports:
        mis = (
            ", ".join(f"{k.value}={n}" for k, n in sorted(rep.misclassified.items()))
            or "-"
        )
        lines.append(
            f"{rep.fault.value:<18} {rep.trials:>6} {rep.correct:>7} "
            f"{rep.correct_rate:>6.3f} {rep.no_trip:>7}  {mis}"
        )
    return "\n".join(lines) + "\n"


def render_report(report: ReliabilityReport) -> str:
    """Fixed-width text summary of a reliability run."""
    lines = [
        f"fault under test : {report.fault.value}",
        f"trials           : {report.trials} (seeds {report.base_seed}.."
        f"{report.base_seed + report.trials - 1})",
        f"correct          : {report.correct}  ({100.0 * report.correct_rate:.1f}%)",
        f"no trip          : {report.no_trip}",
    ]
    if report.misclassified:
        lines.append("misclassified as :")
        for kind, n in sorted(report.misclassified.items()):
            lines.append(f"    {kind.value:<18} {n}")
    else:
        lines.append("misclassified as : (none)")
    if report.mean_detection_latency_s is not None:
        lines.append(
            f"mean latency     : {report.mean_detection_latency_s:.3f} s"
        )
    return "\n".join(lines) + "\n"
