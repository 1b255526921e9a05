"""
tmdyn Head Dynamics - cycles, zigzags, n-cycles, visits, preperiodicity
and window stability, all as bounded-horizon searches.

A search that finds nothing reports "none up to (radius, horizon)"; it
never claims the property holds for the infinite system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Optional

import structlog

from core.errors import BudgetExceededError, InputError
from core.machine import (
    Configuration,
    Head,
    MarkedCell,
    State,
    Symbol,
    TuringMachine,
    run,
)

log = structlog.get_logger("tmdyn.head")

RIGHT_CYCLE = "right-cycle"
LEFT_CYCLE = "left-cycle"
RIGHT_ZIGZAG = "right-zigzag"
LEFT_ZIGZAG = "left-zigzag"
N_CYCLE = "n-cycle"

DEFAULT_MAX_BRANCHES = 1 << 20


@dataclass(frozen=True)
class CycleWitness:
    kind: str
    base: int
    width: int
    stamps: tuple[int, ...]
    configuration: Configuration

    def verify(self, machine: TuringMachine) -> bool:
        """Re-simulate and check the head position at every stamp."""
        positions = dict(head_positions(machine, self.configuration, self.stamps[-1]))
        i, n = self.base, self.width
        if self.kind == N_CYCLE:
            for q, t in enumerate(self.stamps):
                pos = positions.get(t)
                if q % 2 == 0 and pos != i:
                    return False
                if q % 2 == 1 and (pos is None or abs(pos - i) <= n):
                    return False
            return True
        sign = 1 if self.kind in (RIGHT_CYCLE, RIGHT_ZIGZAG) else -1
        t0, t1, t2 = self.stamps
        return positions.get(t0) == i and positions.get(t2) == i and positions.get(t1) == i + sign * n

    def to_dict(self) -> dict:
        config = self.configuration
        return {
            "kind": self.kind,
            "base": self.base,
            "width": self.width,
            "stamps": list(self.stamps),
            "window": {"lo": config.lo, "cells": list(config.window)},
            "head": None if config.head is None else {"state": config.head.state, "pos": config.head.pos},
        }


@dataclass(frozen=True)
class PreperiodicityCertificate:
    transient: int
    period: int
    state: State
    position: int
    interval: tuple[int, int]
    contents: tuple[Symbol, ...]
    configuration: Configuration = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "transient": self.transient,
            "period": self.period,
            "state": self.state,
            "position": self.position,
            "interval": list(self.interval),
            "contents": list(self.contents),
        }


def _require_head(config: Configuration, op: str) -> Head:
    if config.head is None:
        raise InputError(f"{op} needs a configuration with a head")
    return config.head


# ============================================================
# Sparse simulation
# ============================================================

def head_positions(machine: TuringMachine, config: Configuration, horizon: int) -> Iterator[tuple[int, int]]:
    """Yield (t, head position) for t = 0..horizon."""
    head = _require_head(config, "head_positions")
    written: dict[int, Symbol] = {}
    state, pos = head.state, head.pos
    for t in range(horizon + 1):
        yield t, pos
        if t == horizon:
            return
        symbol = written.get(pos)
        if symbol is None:
            symbol = config.cell(pos)
        write, state, move = machine.delta(symbol, state)
        written[pos] = write
        pos += move


def visit_times(machine: TuringMachine, config: Configuration, cell: int, horizon: int) -> set[int]:
    return {t for t, pos in head_positions(machine, config, horizon) if pos == cell}


def visit_bound(n: int, width: int, alphabet_size: int) -> int:
    """Visits to a cell beyond which an n-cycle of the given width must exist."""
    return 2 * n * alphabet_size ** (2 * width + 1)


def isolation_length(machine: TuringMachine, period: int) -> int:
    """Word length at which a periodic head-involving S_H trace is isolated."""
    if period < 1:
        raise InputError("isolation_length needs period >= 1")
    return len(machine.states) * len(machine.alphabet) ** (period + 1) * (period + 1) ** 2


# ============================================================
# Cycles
# ============================================================

def find_cycle(
    machine: TuringMachine,
    config: Configuration,
    max_width: int,
    horizon: int,
    min_width: int = 1,
) -> Optional[CycleWitness]:
    """Earliest-completing cycle from the head's starting cell.

    t_2 is the first return to the base cell after the head has been at
    least min_width away; the reported width is the farthest excursion on
    that side, capped at max_width (right wins a tie).
    """
    head = _require_head(config, "find_cycle")
    if max_width < min_width:
        return None
    base = head.pos
    first_reach: dict[int, int] = {}
    far_right = far_left = 0
    for t, pos in head_positions(machine, config, horizon):
        offset = pos - base
        if offset not in first_reach:
            first_reach[offset] = t
        far_right = max(far_right, offset)
        far_left = max(far_left, -offset)
        if t == 0 or offset != 0:
            continue
        right = min(far_right, max_width)
        left = min(far_left, max_width)
        if max(right, left) < min_width:
            continue
        if right >= left:
            return CycleWitness(RIGHT_CYCLE, base, right, (0, first_reach[right], t), config)
        return CycleWitness(LEFT_CYCLE, base, left, (0, first_reach[-left], t), config)
    return None


def find_n_cycle(
    machine: TuringMachine,
    config: Configuration,
    n: int,
    width: int,
    horizon: int,
) -> Optional[CycleWitness]:
    """Greedy earliest stamps: alternate leaving [i-width, i+width] and returning to i."""
    head = _require_head(config, "find_n_cycle")
    if n < 1:
        raise InputError("find_n_cycle needs n >= 1")
    base = head.pos
    stamps = [0]
    for t, pos in head_positions(machine, config, horizon):
        if t == 0:
            continue
        outside = len(stamps) % 2 == 1
        if outside and abs(pos - base) > width:
            stamps.append(t)
        elif not outside and pos == base:
            stamps.append(t)
            if len(stamps) == 2 * n + 1:
                return CycleWitness(N_CYCLE, base, width, tuple(stamps), config)
    return None


@dataclass
class _Branch:
    start: State
    reads: dict
    tape: dict
    state: State
    pos: int
    first_reach: dict
    far_right: int = 0
    far_left: int = 0


def _zigzag_key(b: _Branch, t: int, min_width: int, r: int, pad: Symbol) -> tuple:
    if b.far_right >= min_width and (b.far_left < min_width or b.far_right <= b.far_left):
        width, kind, t1 = b.far_right, RIGHT_ZIGZAG, b.first_reach[b.far_right]
    else:
        width, kind, t1 = b.far_left, LEFT_ZIGZAG, b.first_reach[-b.far_left]
    window = tuple(b.reads.get(i, pad) for i in range(-r, r + 1))
    return (t, width, window, kind, t1, b.start)


def find_zigzag(
    machine: TuringMachine,
    min_width: int,
    window_radius: int,
    horizon: int,
    max_branches: int = DEFAULT_MAX_BRANCHES,
    pad: Optional[Symbol] = None,
) -> Optional[CycleWitness]:
    """Search every window on [-r, r] with the head at 0 for a zigzag.

    Window cells are fixed only when the machine first reads them, so runs
    sharing a prefix of reads are explored once. Runs advance one step per
    round; the first round that completes a zigzag gives the minimal t_2,
    and the smallest (width, window) among those wins.
    """
    pad = machine.blank if pad is None else pad
    r = window_radius
    branches = [_Branch(q, {}, {}, q, 0, {0: 0}) for q in machine.states]
    explored = len(branches)

    for t in range(horizon + 1):
        if t > 0:
            found = [
                _zigzag_key(b, t, min_width, r, pad)
                for b in branches
                if b.pos == 0 and max(b.far_right, b.far_left) >= min_width
            ]
            if found:
                _, width, window, kind, t1, start = min(found)
                config = Configuration(-r, window, (pad,), (pad,), Head(start, 0))
                log.debug("zigzag.found", machine=machine.name, width=width, t2=t)
                return CycleWitness(kind, 0, width, (0, t1, t), config)
        if t == horizon:
            break

        advanced = []
        for b in branches:
            # cannot get back to cell 0 before the horizon
            if abs(b.pos) > horizon - t:
                continue
            symbol = b.tape.get(b.pos)
            if symbol is None and abs(b.pos) > r:
                symbol = pad
            if symbol is None:
                options = [(a, {**b.reads, b.pos: a}) for a in machine.alphabet]
            else:
                options = [(symbol, b.reads)]
            for read, reads in options:
                write, state, move = machine.delta(read, b.state)
                nb = _Branch(
                    b.start,
                    reads,
                    {**b.tape, b.pos: write},
                    state,
                    b.pos + move,
                    b.first_reach,
                    b.far_right,
                    b.far_left,
                )
                if nb.pos not in nb.first_reach:
                    nb.first_reach = {**nb.first_reach, nb.pos: t + 1}
                nb.far_right = max(nb.far_right, nb.pos)
                nb.far_left = max(nb.far_left, -nb.pos)
                advanced.append(nb)
        explored += len(advanced)
        if explored > max_branches:
            raise BudgetExceededError("find_zigzag", explored, max_branches)
        branches = advanced
    return None


# ============================================================
# Preperiodicity
# ============================================================

def detect_preperiodicity(
    machine: TuringMachine,
    config: Configuration,
    step_budget: int,
) -> Optional[PreperiodicityCertificate]:
    """First exact repeat of the full machine state, giving minimal (transient, period).

    Cells outside the visited interval still hold their initial contents,
    so two configurations with the same head agree everywhere as soon as
    they agree on the interval visited so far.
    """
    head = _require_head(config, "detect_preperiodicity")
    orbit = [config]
    seen: dict[tuple[State, int], list[int]] = {(head.state, head.pos): [0]}
    lo = hi = head.pos
    current = config
    for t in range(1, step_budget + 1):
        current = run(machine, current, 1)[1]
        h = current.head
        lo, hi = min(lo, h.pos), max(hi, h.pos)
        contents = current.cells(lo, hi)
        for s in seen.get((h.state, h.pos), ()):
            if orbit[s].cells(lo, hi) == contents:
                log.debug("preperiodic.found", machine=machine.name, transient=s, period=t - s)
                return PreperiodicityCertificate(s, t - s, h.state, h.pos, (lo, hi), contents, orbit[s])
        seen.setdefault((h.state, h.pos), []).append(t)
        orbit.append(current)
    return None


# ============================================================
# Window stability
# ============================================================

def _marked_view(tape: dict, head: Optional[Head], k: int) -> tuple[MarkedCell, ...]:
    return tuple(
        (tape[i], head.state) if head is not None and head.pos == i else tape[i]
        for i in range(-k, k + 1)
    )


def check_window_stability(
    machine: TuringMachine,
    config: Configuration,
    k: int,
    m: int,
    horizon: int,
    max_branches: int = DEFAULT_MAX_BRANCHES,
) -> bool:
    """Does agreement on [-m, m] pin cells [-k, k] for the whole horizon?

    Agreement is on the marked tape: a head inside [-m, m] is shared with
    config, otherwise the other configuration has no head there. Cells
    outside [-m, m] are fixed lazily, when a run first reads them, and a
    head farther than the horizon from [-k, k] never matters.
    """
    if m < k:
        raise InputError("check_window_stability needs m >= k")

    reference = []
    for c in run(machine, config, horizon):
        reference.append(tuple(c.marked(i) for i in range(-k, k + 1)))

    window = {i: config.cell(i) for i in range(-m, m + 1)}
    own = config.head
    if own is not None and -m <= own.pos <= m:
        heads: list[Optional[Head]] = [own]
    else:
        reach = horizon + k
        outside = [p for p in range(-reach, reach + 1) if abs(p) > m]
        heads = [None] + [Head(q, p) for p, q in product(outside, machine.states)]

    stack = [(0, window, h) for h in heads]
    explored = len(stack)
    while stack:
        t, tape, head = stack.pop()
        view = _marked_view(tape, head, k)
        # a head out of reach leaves [-k, k] frozen for the rest of the horizon
        if head is None or abs(head.pos) - k > horizon - t:
            if any(reference[s] != view for s in range(t, horizon + 1)):
                return False
            continue
        if reference[t] != view:
            return False
        if t == horizon:
            continue
        symbol = tape.get(head.pos)
        reads = machine.alphabet if symbol is None else (symbol,)
        for read in reads:
            write, state, move = machine.delta(read, head.state)
            stack.append((t + 1, {**tape, head.pos: write}, Head(state, head.pos + move)))
            explored += 1
        if explored > max_branches:
            raise BudgetExceededError("check_window_stability", explored, max_branches)
    return True
