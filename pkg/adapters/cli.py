"""
tmdyn CLI Commands - simulate, classify, build, enumerate, fixture.

Each command returns a RunReport; app.main prints it and maps errors to
exit codes. Every phase writes one ledger entry when a ledger is given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import structlog

from core.automata import export_dot
from core.errors import BudgetExceededError, InputError
from core.fixtures import all_configurations, fixture, sample_configurations
from core.head import (
    detect_preperiodicity,
    find_cycle,
    find_n_cycle,
    find_zigzag,
)
from core.logger import EventType, Logger
from core.machine import (
    Configuration,
    TuringMachine,
    project,
    step_T,
    step_TH,
    step_TT,
)
from core.schemas import configuration_to_dict, machine_to_json
from core.sh_recognizer import build_sh_recognizer, sh_equivalence_check, window_phase
from core.st_recognizer import (
    PartialConfiguration,
    all_partials,
    build_C,
    build_decider,
    st_equivalence_check,
    window_radius,
)
from core.traces import (
    EquivalenceReport,
    enumerate_LSH,
    enumerate_LST,
    render_symbol,
)
from helpers.utils import Timer, atomic_write, canonical_json, content_hash

log = structlog.get_logger("tmdyn.cli")

VIEWS = ("T", "TH", "TT")
TARGETS = ("st", "sh")
MAX_N_CYCLES = 4


@dataclass
class RunReport:
    """Machine-readable outcome of one command."""

    command: str
    parameters: dict
    verdicts: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        data = {
            "command": self.command,
            "parameters": self.parameters,
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
        }
        if include_timings:
            data["timings"] = self.timings
        return data

    def to_json(self, include_timings: bool = False) -> str:
        """Byte-identical for identical inputs unless timings are included."""
        return canonical_json(self.to_dict(include_timings))

    def write(self, path: str | Path) -> None:
        atomic_write(path, json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _record(
    ledger: Optional[Logger],
    event: EventType,
    machine: TuringMachine,
    command: str,
    data: dict,
    outcome: str,
    timer: Timer,
) -> None:
    if ledger is not None:
        ledger.log(event, data, machine=machine.name, command=command, outcome=outcome, elapsed_ms=timer.elapsed_ms)


# ============================================================
# simulate
# ============================================================

def _window_text(config: Configuration, lo: int, hi: int) -> str:
    return " ".join(render_symbol(config.marked(i)) for i in range(lo, hi + 1))


def cmd_simulate(
    machine: TuringMachine,
    config: Configuration,
    steps: int,
    view: str = "T",
    ledger: Optional[Logger] = None,
) -> RunReport:
    """Per-step tape window, head, and both trace symbols."""
    if view not in VIEWS:
        raise InputError(f"unknown view {view!r}; choose one of {', '.join(VIEWS)}")
    if steps < 0:
        raise InputError("steps must be >= 0")
    config.validate_for(machine)
    if view != "TH" and config.head is None:
        raise InputError(f"view {view} needs a configuration with a head")

    rows = []
    with Timer() as timer:
        current = project(config).config if view == "TT" else config
        lo, hi = config.lo, config.hi
        for t in range(steps + 1):
            head = current.head
            if head is not None:
                lo, hi = min(lo, head.pos), max(hi, head.pos)
            rows.append({
                "t": t,
                "window": _window_text(current, lo, hi),
                "state": None if head is None else head.state,
                "pos": None if head is None else head.pos,
                "trace_T": None if head is None else render_symbol((current.cell(head.pos), head.state)),
                "trace_H": render_symbol(current.marked(0)),
            })
            if t == steps:
                break
            if view == "T":
                current = step_T(machine, current)
            elif view == "TH":
                current = step_TH(machine, current)
            else:
                current = step_TT(machine, project(current)).config

    report = RunReport(
        "simulate",
        {"machine": machine.name, "steps": steps, "view": view, "configuration": configuration_to_dict(config)},
        {"positions": [row["pos"] for row in rows]},
        rows,
        {"total_ms": round(timer.elapsed_ms, 3)},
    )
    _record(ledger, EventType.SIMULATION, machine, "simulate", report.parameters, "ok", timer)
    return report


# ============================================================
# classify
# ============================================================

def _classify_samples(machine: TuringMachine, config: Optional[Configuration], radius: int) -> list[Configuration]:
    samples = list(all_configurations(machine, 1))
    samples += [c for c in sample_configurations(machine, 32, radius, seed=0) if c.head is not None]
    if config is not None and config.head is not None:
        samples.insert(0, config)
    return samples


def _zigzag_widths(
    machine: TuringMachine,
    radius: int,
    horizon: int,
    max_branches: int,
) -> tuple[list, Optional[int]]:
    """Witnesses for increasing widths; the width whose search hit the budget, if any."""
    witnesses = []
    width = 1
    while width <= radius:
        try:
            witness = find_zigzag(machine, width, radius, horizon, max_branches)
        except BudgetExceededError:
            return witnesses, width
        if witness is None:
            break
        witnesses.append(witness)
        width = witness.width + 1
    return witnesses, None


def cmd_classify(
    machine: TuringMachine,
    width: int,
    radius: int,
    horizon: int,
    config: Optional[Configuration] = None,
    max_branches: int = 1 << 20,
    ledger: Optional[Logger] = None,
) -> RunReport:
    """Bounded-horizon head-dynamics verdicts; never a global claim."""
    if width < 0 or radius < 1 or horizon < 1:
        raise InputError("classify needs width >= 0, radius >= 1 and horizon >= 1")
    if config is not None:
        config.validate_for(machine)
    scope = f"(radius {radius}, horizon {horizon})"
    report = RunReport(
        "classify",
        {"machine": machine.name, "width": width, "radius": radius, "horizon": horizon},
    )
    samples = _classify_samples(machine, config, radius)

    with Timer() as cycles_timer:
        cycles = [w for w in (find_cycle(machine, c, radius, horizon) for c in samples) if w is not None]
    if cycles:
        widest = max(cycles, key=lambda w: (w.width, w.stamps))
        report.verdicts["cycles"] = f"max cycle width {widest.width} {scope}"
        report.witnesses.append(widest.to_dict())
    else:
        report.verdicts["cycles"] = f"no cycles found {scope}"
    report.timings["cycles_ms"] = round(cycles_timer.elapsed_ms, 3)

    with Timer() as zigzag_timer:
        zigzags, stopped_at = _zigzag_widths(machine, radius, horizon, max_branches)
    if zigzags:
        widest = zigzags[-1]
        text = f"zigzag width ≥ {widest.width} witnessed"
        report.witnesses.append(widest.to_dict())
    else:
        text = "no zigzag witnessed"
    if stopped_at is not None:
        text += f"; width-{stopped_at} search stopped by budget {max_branches}"
    elif not zigzags or zigzags[-1].width < radius:
        nxt = zigzags[-1].width + 1 if zigzags else 1
        text += f"; no width-{nxt} zigzag {scope}"
    report.verdicts["zigzags"] = text
    report.timings["zigzags_ms"] = round(zigzag_timer.elapsed_ms, 3)

    with Timer() as ncycle_timer:
        best = 0
        for c in samples:
            for n in range(best + 1, MAX_N_CYCLES + 1):
                witness = find_n_cycle(machine, c, n, width, horizon)
                if witness is None:
                    break
                best = n
                if n == MAX_N_CYCLES:
                    report.witnesses.append(witness.to_dict())
            if best == MAX_N_CYCLES:
                break
    report.verdicts["n_cycles"] = f"max n-cycle count {best} at width {width} (capped at {MAX_N_CYCLES}) {scope}"
    report.timings["n_cycles_ms"] = round(ncycle_timer.elapsed_ms, 3)

    with Timer() as pre_timer:
        certificates = [detect_preperiodicity(machine, c, horizon) for c in samples]
    found = [c for c in certificates if c is not None]
    report.verdicts["preperiodic"] = f"{len(found)} of {len(samples)} sampled configurations preperiodic within {horizon} steps"
    report.timings["preperiodic_ms"] = round(pre_timer.elapsed_ms, 3)

    total = cycles_timer.elapsed + zigzag_timer.elapsed + ncycle_timer.elapsed + pre_timer.elapsed
    report.timings["total_ms"] = round(total * 1000, 3)
    if ledger is not None:
        ledger.log(
            EventType.CLASSIFY,
            report.verdicts,
            machine=machine.name,
            command="classify",
            outcome="ok",
            elapsed_ms=total * 1000,
        )
    log.info("classify.done", machine=machine.name, **report.verdicts)
    return report


# ============================================================
# build
# ============================================================

def _equivalence_verdict(report: EquivalenceReport) -> str:
    mismatch = report.first_mismatch
    if mismatch is None:
        return "EQUAL at all lengths"
    return f"DIFFERS at length {mismatch.length}"


def _window_dots(machine: TuringMachine, radius: int) -> str:
    """One digraph per window phase of the decider."""
    parts = []
    for u in all_partials(machine, radius, 0):
        triples, exit_key = window_phase(machine, radius, u)
        v = PartialConfiguration(*(exit_key or triples[-1]))
        parts.append(export_dot(build_C(machine, radius, u, v), f"C {u} -> {v}"))
    return "".join(parts)


def cmd_build(
    machine: TuringMachine,
    target: str,
    width: int,
    n_max: int,
    l_max: int = 12,
    t_max: int = 8,
    radius: int = 6,
    horizon: int = 500,
    budget: int = 1 << 24,
    max_branches: int = 1 << 20,
    dot_path: Optional[str] = None,
    json_path: Optional[str] = None,
    ledger: Optional[Logger] = None,
) -> RunReport:
    """Build the st or sh recognizer, write artifacts, compare with the oracle."""
    if target not in TARGETS:
        raise InputError(f"unknown target {target!r}; choose st or sh")
    if width < 0 or n_max < 1:
        raise InputError("build needs width >= 0 and nmax >= 1")
    report = RunReport(
        "build",
        {
            "machine": machine.name,
            "target": target,
            "width": width,
            "window_radius": window_radius(width),
            "nmax": n_max,
            "lmax": l_max,
            "tmax": t_max,
            "radius": radius,
            "horizon": horizon,
        },
    )

    with Timer() as check_timer:
        try:
            wide = find_zigzag(machine, width + 1, max(radius, width + 1), horizon, max_branches)
            note = None
        except BudgetExceededError as exc:
            wide, note = None, str(exc)
    if wide is not None:
        report.verdicts["warning"] = f"zigzag of width {wide.width} > {width} witnessed; recognizer may differ"
        report.witnesses.append(wide.to_dict())
    elif note is not None:
        report.verdicts["warning"] = f"zigzag check inconclusive: {note}"
    if "warning" in report.verdicts:
        log.warning("build.zigzag", machine=machine.name, detail=report.verdicts["warning"])
        _record(ledger, EventType.WARNING, machine, "build", {"warning": report.verdicts["warning"]}, "warning", check_timer)

    with Timer() as build_timer:
        if target == "st":
            decider = build_decider(machine, width)
            artifact = decider.describe()
            dot = _window_dots(machine, decider.radius) if dot_path else None
        else:
            dfa = build_sh_recognizer(machine, width, l_max, t_max, max_branches)
            artifact = dfa.to_dict()
            dot = export_dot(dfa, f"{machine.name} S_H N={width}") if dot_path else None
    report.verdicts["fingerprint"] = content_hash(canonical_json(artifact))
    report.timings["build_ms"] = round(build_timer.elapsed_ms, 3)
    _record(ledger, EventType.BUILD, machine, "build", {"target": target, "width": width}, "ok", build_timer)

    with Timer() as check:
        if target == "st":
            equivalence = st_equivalence_check(machine, width, n_max, budget)
        else:
            equivalence = sh_equivalence_check(machine, width, n_max, l_max, t_max, budget, recognizer=dfa)
    report.timings["equivalence_ms"] = round(check.elapsed_ms, 3)
    report.verdicts["equivalence"] = _equivalence_verdict(equivalence)
    report.witnesses.append(equivalence.to_dict())
    _record(
        ledger,
        EventType.EQUIVALENCE,
        machine,
        "build",
        {"target": target, "width": width, "nmax": n_max},
        report.verdicts["equivalence"],
        check,
    )

    if dot_path:
        atomic_write(dot_path, dot)
    if json_path:
        atomic_write(
            json_path,
            json.dumps({"recognizer": artifact, "equivalence": equivalence.to_dict()}, indent=2, sort_keys=True) + "\n",
        )
    return report


# ============================================================
# enumerate / fixture
# ============================================================

def cmd_enumerate(
    machine: TuringMachine,
    target: str,
    n: int,
    budget: int = 1 << 24,
    ledger: Optional[Logger] = None,
) -> tuple[RunReport, str]:
    """Sorted language slice, one word per line."""
    if target not in TARGETS:
        raise InputError(f"unknown target {target!r}; choose st or sh")
    with Timer() as timer:
        sample = enumerate_LST(machine, n, budget) if target == "st" else enumerate_LSH(machine, n, budget)
    report = RunReport(
        "enumerate",
        {"machine": machine.name, "target": target, "length": n},
        {"words": len(sample), "fingerprint": content_hash(sample.dump())},
        timings={"total_ms": round(timer.elapsed_ms, 3)},
    )
    _record(ledger, EventType.ENUMERATION, machine, "enumerate", report.parameters, str(len(sample)), timer)
    return report, sample.dump()


def cmd_fixture(name: str, json_path: Optional[str] = None) -> str:
    """JSON text of a corpus machine, also written to json_path if given."""
    text = machine_to_json(fixture(name)) + "\n"
    if json_path:
        atomic_write(json_path, text)
    return text
