"""
tmdyn Fixtures - The corpus machines used by tests, examples and the CLI.

PING_PONG   two-state oscillator on a unary tape
LEFT        one-state machine that always moves left
BOUNCE_SHIFT head rebounds between two walls, shifting both walls left
NLEVEL(n)   n-level tape, contents shift down while sweeping; rebounds on
            a lowest-level wall, which is erased the same way
"""

from __future__ import annotations

import random
import re
from itertools import product
from typing import Iterator, Optional

from core.errors import UnknownFixtureError
from core.machine import Configuration, Head, RuleEntry, TuringMachine, make_machine

FIXTURE_NAMES = ("PING_PONG", "LEFT", "BOUNCE_SHIFT", "NLEVEL(n)")

_NLEVEL = re.compile(r"^NLEVEL\(?(\d+)\)?$")


def ping_pong() -> TuringMachine:
    return make_machine(
        ["a"],
        ["q0", "q1"],
        [("a", "q0", "a", "q1", 1), ("a", "q1", "a", "q0", -1)],
        name="PING_PONG",
    )


def left_mover() -> TuringMachine:
    return make_machine(
        ["a", "b"],
        ["q"],
        [("a", "q", "a", "q", -1), ("b", "q", "b", "q", -1)],
        name="LEFT",
    )


def bounce_shift() -> TuringMachine:
    """Wall bouncer over {0, W}.

    R sweeps right; on a wall it erases it and turns into P, which
    rewrites the wall one cell further left. L sweeps left; on a wall it
    erases it and turns into Q, which rewrites it one cell further left
    and starts the next right sweep.
    """
    rules = [
        ("0", "R", "0", "R", 1),
        ("W", "R", "0", "P", -1),
        ("0", "P", "W", "L", -1),
        ("W", "P", "W", "L", -1),
        ("0", "L", "0", "L", -1),
        ("W", "L", "0", "Q", -1),
        ("0", "Q", "W", "R", 1),
        ("W", "Q", "W", "R", 1),
    ]
    return make_machine(["0", "W"], ["R", "P", "L", "Q"], rules, name="BOUNCE_SHIFT")


def nlevel(n: int) -> TuringMachine:
    """n-level sweeper; a symbol is a string of n level contents, level 0 first."""
    if n < 1:
        raise UnknownFixtureError(f"NLEVEL needs at least one level, got {n}")
    alphabet = ["".join(levels) for levels in product("0W", repeat=n)]
    rules: list[RuleEntry] = []
    for symbol in alphabet:
        shifted = symbol[1:] + "0"
        wall = symbol[0] == "W"
        rules.append(RuleEntry(symbol, "R", shifted, "L" if wall else "R", -1 if wall else 1))
        rules.append(RuleEntry(symbol, "L", shifted, "R" if wall else "L", 1 if wall else -1))
    return make_machine(alphabet, ["L", "R"], rules, name=f"NLEVEL({n})")


def fixture(name: str) -> TuringMachine:
    """Look up a corpus machine by name ("NLEVEL(3)" selects three levels)."""
    key = name.strip().upper().replace("-", "_")
    if key == "PING_PONG":
        return ping_pong()
    if key == "LEFT":
        return left_mover()
    if key == "BOUNCE_SHIFT":
        return bounce_shift()
    match = _NLEVEL.match(key)
    if match:
        return nlevel(int(match.group(1)))
    raise UnknownFixtureError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")


def walled_configuration(half_width: int = 3) -> Configuration:
    """BOUNCE_SHIFT start: walls at -half_width and +half_width, head (R, 0)."""
    cells = ["W"] + ["0"] * (2 * half_width - 1) + ["W"]
    return Configuration.from_cells(-half_width, cells, "0", Head("R", 0))


def nlevel_walled_configuration(n: int, half_width: int = 3) -> Configuration:
    """NLEVEL(n) start: full-height walls at +-half_width, head (R, 0)."""
    wall, empty = "W" * n, "0" * n
    cells = [wall] + [empty] * (2 * half_width - 1) + [wall]
    return Configuration.from_cells(-half_width, cells, empty, Head("R", 0))


# ============================================================
# Sampling
# ============================================================

def all_configurations(
    machine: TuringMachine,
    radius: int,
    head_pos: Optional[int] = 0,
) -> Iterator[Configuration]:
    """Every window on [-radius, radius] and every head state, blank pads."""
    for cells in product(machine.alphabet, repeat=2 * radius + 1):
        for state in machine.states:
            head = Head(state, head_pos) if head_pos is not None else None
            yield Configuration.from_cells(-radius, cells, machine.blank, head)


def sample_configurations(
    machine: TuringMachine,
    count: int,
    radius: int = 3,
    seed: int = 0,
    headless_ratio: float = 0.0,
) -> list[Configuration]:
    """Reproducible random configurations with random periodic pads."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        cells = [rng.choice(machine.alphabet) for _ in range(2 * radius + 1)]
        left = tuple(rng.choice(machine.alphabet) for _ in range(rng.randint(1, 3)))
        right = tuple(rng.choice(machine.alphabet) for _ in range(rng.randint(1, 3)))
        head = None
        if rng.random() >= headless_ratio:
            head = Head(rng.choice(machine.states), rng.randint(-radius, radius))
        out.append(Configuration(-radius, tuple(cells), left, right, head))
    return out
