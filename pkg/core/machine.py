"""
tmdyn Machine Core - Turing machines and their three dynamical systems.

The moving-head system T, the marked-tape system T_H and the moving-tape
system T_T all share one exact configuration model: a finite window over
[lo, hi] with periodic padding on both sides and at most one head.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Mapping, Optional, Union

from core.errors import InputError, MachineDefinitionError

Symbol = str
State = str
Pair = tuple[Symbol, State]
# a cell seen by T_H: bare symbol, or (symbol, state) when the head is on it
MarkedCell = Union[Symbol, Pair]

DIRECTIONS = (-1, 1)


# ============================================================
# Machines
# ============================================================

@dataclass(frozen=True)
class RuleEntry:
    """One line of a rule table: (read, state) -> (write, next, move)."""

    read: Symbol
    state: State
    write: Symbol
    next: State
    move: int

    def to_dict(self) -> dict:
        return {
            "read": self.read,
            "state": self.state,
            "write": self.write,
            "next": self.next,
            "move": self.move,
        }


@dataclass(frozen=True)
class TuringMachine:
    """A machine (A, Q, delta) with a total rule over A x Q."""

    alphabet: tuple[Symbol, ...]
    states: tuple[State, ...]
    rules: tuple[RuleEntry, ...]
    name: str = field(default="", compare=False)
    _table: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        table = {(r.read, r.state): (r.write, r.next, r.move) for r in self.rules}
        object.__setattr__(self, "_table", table)

    def delta(self, symbol: Symbol, state: State) -> tuple[Symbol, State, int]:
        return self._table[(symbol, state)]

    def delta_A(self, symbol: Symbol, state: State) -> Symbol:
        return self._table[(symbol, state)][0]

    def delta_Q(self, symbol: Symbol, state: State) -> State:
        return self._table[(symbol, state)][1]

    def delta_D(self, symbol: Symbol, state: State) -> int:
        return self._table[(symbol, state)][2]

    @property
    def pairs(self) -> tuple[Pair, ...]:
        """The S_T alphabet A x Q in canonical order."""
        return tuple((a, q) for a in self.alphabet for q in self.states)

    @property
    def blank(self) -> Symbol:
        """Alphabetically first symbol, used as the default pad."""
        return self.alphabet[0]

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "states": list(self.states),
            "rules": [r.to_dict() for r in self.rules],
        }


def _as_entry(raw: Union[RuleEntry, Mapping, tuple]) -> RuleEntry:
    if isinstance(raw, RuleEntry):
        return raw
    if isinstance(raw, Mapping):
        try:
            return RuleEntry(raw["read"], raw["state"], raw["write"], raw["next"], raw["move"])
        except KeyError as exc:
            raise MachineDefinitionError(f"rule entry missing field {exc}") from exc
    if isinstance(raw, tuple) and len(raw) == 5:
        return RuleEntry(*raw)
    raise MachineDefinitionError(f"cannot read rule entry {raw!r}")


def make_machine(
    alphabet: Iterable[Symbol],
    states: Iterable[State],
    rules: Iterable[Union[RuleEntry, Mapping, tuple]],
    name: str = "",
) -> TuringMachine:
    """Validate a rule table and build a machine.

    Raises MachineDefinitionError on duplicate entries, missing
    (symbol, state) pairs, foreign symbols or states, or a move outside
    {-1, +1}.
    """
    alphabet = tuple(sorted(set(alphabet)))
    states = tuple(sorted(set(states)))
    if not alphabet:
        raise MachineDefinitionError("empty alphabet")
    if not states:
        raise MachineDefinitionError("empty state set")

    seen: dict[Pair, RuleEntry] = {}
    for raw in rules:
        entry = _as_entry(raw)
        if entry.read not in alphabet or entry.write not in alphabet:
            raise MachineDefinitionError(f"unknown symbol in rule {entry.to_dict()}")
        if entry.state not in states or entry.next not in states:
            raise MachineDefinitionError(f"unknown state in rule {entry.to_dict()}")
        if entry.move not in DIRECTIONS:
            raise MachineDefinitionError(f"invalid direction {entry.move!r}, expected -1 or +1")
        key = (entry.read, entry.state)
        if key in seen:
            raise MachineDefinitionError(f"duplicate rule for {key}")
        seen[key] = entry

    missing = [(a, q) for a in alphabet for q in states if (a, q) not in seen]
    if missing:
        raise MachineDefinitionError(f"incomplete rule: no entry for {missing[0]}")

    ordered = tuple(seen[(a, q)] for a in alphabet for q in states)
    return TuringMachine(alphabet, states, ordered, name=name)


def reflect_machine(machine: TuringMachine) -> TuringMachine:
    """Left-right mirror image: every move is negated."""
    rules = tuple(
        RuleEntry(r.read, r.state, r.write, r.next, -r.move) for r in machine.rules
    )
    return TuringMachine(machine.alphabet, machine.states, rules, name=f"{machine.name}~")


# ============================================================
# Configurations
# ============================================================

@dataclass(frozen=True)
class Head:
    state: State
    pos: int


@dataclass(frozen=True)
class Configuration:
    """Tape window over [lo, hi] plus periodic pads, with an optional head.

    Cell i < lo reads left_pad backwards from lo, cell i > hi reads
    right_pad forwards from hi, so the tape is total.
    """

    lo: int
    window: tuple[Symbol, ...]
    left_pad: tuple[Symbol, ...]
    right_pad: tuple[Symbol, ...]
    head: Optional[Head] = None

    def __post_init__(self):
        if not self.window:
            raise InputError("configuration window must be nonempty")
        if not self.left_pad or not self.right_pad:
            raise InputError("configuration pads must be nonempty")

    @property
    def hi(self) -> int:
        return self.lo + len(self.window) - 1

    @classmethod
    def uniform(cls, symbol: Symbol, head: Optional[Head] = None) -> "Configuration":
        return cls(0, (symbol,), (symbol,), (symbol,), head)

    @classmethod
    def from_cells(
        cls,
        lo: int,
        cells: Iterable[Symbol],
        pad: Symbol,
        head: Optional[Head] = None,
    ) -> "Configuration":
        return cls(lo, tuple(cells), (pad,), (pad,), head)

    def cell(self, i: int) -> Symbol:
        if i < self.lo:
            k = self.lo - 1 - i
            n = len(self.left_pad)
            return self.left_pad[n - 1 - (k % n)]
        if i > self.hi:
            return self.right_pad[(i - self.hi - 1) % len(self.right_pad)]
        return self.window[i - self.lo]

    def cells(self, lo: int, hi: int) -> tuple[Symbol, ...]:
        return tuple(self.cell(i) for i in range(lo, hi + 1))

    def marked(self, i: int) -> MarkedCell:
        """Content of cell i as seen on the marked tape."""
        if self.head is not None and self.head.pos == i:
            return (self.cell(i), self.head.state)
        return self.cell(i)

    def extended_to(self, i: int) -> "Configuration":
        """Same configuration with the window grown to contain cell i."""
        if self.lo <= i <= self.hi:
            return self
        lo, hi = min(self.lo, i), max(self.hi, i)
        # pads re-anchor to the new edges so the infinite tape is unchanged
        left = tuple(self.cell(j) for j in range(lo - len(self.left_pad), lo))
        right = tuple(self.cell(j) for j in range(hi + 1, hi + 1 + len(self.right_pad)))
        return Configuration(lo, self.cells(lo, hi), left, right, self.head)

    def with_cell(self, i: int, symbol: Symbol) -> "Configuration":
        grown = self.extended_to(i)
        window = list(grown.window)
        window[i - grown.lo] = symbol
        return Configuration(grown.lo, tuple(window), grown.left_pad, grown.right_pad, grown.head)

    def with_head(self, head: Optional[Head]) -> "Configuration":
        return Configuration(self.lo, self.window, self.left_pad, self.right_pad, head)

    def equivalent(self, other: "Configuration") -> bool:
        """True iff both describe the same infinite tape and the same head."""
        if self.head != other.head:
            return False
        lo = min(self.lo, other.lo) - lcm(len(self.left_pad), len(other.left_pad))
        hi = max(self.hi, other.hi) + lcm(len(self.right_pad), len(other.right_pad))
        return self.cells(lo, hi) == other.cells(lo, hi)

    def validate_for(self, machine: TuringMachine) -> None:
        symbols = set(self.window) | set(self.left_pad) | set(self.right_pad)
        foreign = symbols - set(machine.alphabet)
        if foreign:
            raise InputError(f"configuration uses symbols outside the alphabet: {sorted(foreign)}")
        if self.head is not None and self.head.state not in machine.states:
            raise InputError(f"configuration head state {self.head.state!r} is not a machine state")


@dataclass(frozen=True)
class TapeStatePair:
    """A point of the moving-tape system: the head is always on cell 0."""

    config: Configuration

    def __post_init__(self):
        head = self.config.head
        if head is None or head.pos != 0:
            raise InputError("a tape/state pair needs its head on cell 0")

    @property
    def state(self) -> State:
        return self.config.head.state

    @property
    def symbol(self) -> Symbol:
        return self.config.cell(0)


def reflect_config(config: Configuration) -> Configuration:
    """Mirror image: cell i of the result is cell -i of the input."""
    head = None
    if config.head is not None:
        head = Head(config.head.state, -config.head.pos)
    return Configuration(
        -config.hi,
        tuple(reversed(config.window)),
        tuple(reversed(config.right_pad)),
        tuple(reversed(config.left_pad)),
        head,
    )


# ============================================================
# Dynamics
# ============================================================

def shift_config(config: Configuration, k: int) -> Configuration:
    """Shift action: cell i of the result is cell i+k of the input."""
    head = None
    if config.head is not None:
        head = Head(config.head.state, config.head.pos - k)
    return Configuration(config.lo - k, config.window, config.left_pad, config.right_pad, head)


def step_T(machine: TuringMachine, config: Configuration) -> Configuration:
    head = config.head
    if head is None:
        raise InputError("step_T needs a configuration with a head")
    write, nxt, move = machine.delta(config.cell(head.pos), head.state)
    return config.with_cell(head.pos, write).with_head(Head(nxt, head.pos + move))


def step_TH(machine: TuringMachine, config: Configuration) -> Configuration:
    """Marked-tape step; headless configurations are fixed points."""
    if config.head is None:
        return config
    return step_T(machine, config)


def project(config: Configuration) -> TapeStatePair:
    """Recentre at the head (moving-head to moving-tape factor map)."""
    if config.head is None:
        raise InputError("only configurations with a head project to the moving-tape system")
    return TapeStatePair(shift_config(config, config.head.pos))


def mark_head(config: Configuration) -> Configuration:
    """Moving-head to marked-tape injection.

    The configuration model already stores the head as a marked cell, so
    the image is the same value; it exists to state the commutation
    mark_head(step_T(c)) == step_TH(mark_head(c)).
    """
    return config


def step_TT(machine: TuringMachine, pair: TapeStatePair) -> TapeStatePair:
    moved = step_T(machine, pair.config)
    return TapeStatePair(shift_config(moved, moved.head.pos))


def run(machine: TuringMachine, config: Configuration, steps: int) -> list[Configuration]:
    """Orbit prefix [config, T(config), ..., T^steps(config)] under step_TH."""
    orbit = [config]
    for _ in range(steps):
        config = step_TH(machine, config)
        orbit.append(config)
    return orbit
