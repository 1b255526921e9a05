"""
tmdyn S_T Recognizers - window DFAs, excursion DPDAs and the phase decider
for the language of the moving-tape trace subshift.

While the head stays strictly inside a window of radius N, a finite
automaton can carry the whole window (build_C). Once it leaves on the
right, the cells behind it go onto a stack and the cells ahead are kept in
the state, at most N of them (build_R; build_L is its mirror image). For a
machine that cannot zigzag wider than N, a trace splits into at most five
such phases, with at most one excursion per side.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Optional

import structlog

from core.automata import BOTTOM, Dfa, Dpda, make_dpda
from core.errors import ConstructionError, InputError
from core.machine import Pair, State, Symbol, TuringMachine, reflect_machine
from core.traces import (
    DEFAULT_BUDGET,
    EquivalenceReport,
    compare_languages,
    enumerate_LST,
)

log = structlog.get_logger("tmdyn.st")

REJECT = ("REJECT",)
PHASE_CASES = ("C", "CR", "CRC", "CRCL", "CRCLC", "CL", "CLC", "CLR", "CLRC")


# ============================================================
# Partial configurations
# ============================================================

@dataclass(frozen=True)
class PartialConfiguration:
    """A window over cells -N..N, a head state and a head position in it."""

    word: tuple[Symbol, ...]
    state: State
    position: int

    def __post_init__(self):
        if len(self.word) % 2 != 1:
            raise InputError("a partial configuration needs an odd-length word")
        if abs(self.position) > self.radius:
            raise InputError(f"position {self.position} is outside [-{self.radius}, {self.radius}]")

    @property
    def radius(self) -> int:
        return len(self.word) // 2

    def cell(self, i: int) -> Symbol:
        return self.word[i + self.radius]

    def cells(self, lo: int, hi: int) -> tuple[Symbol, ...]:
        return tuple(self.cell(i) for i in range(lo, hi + 1))

    def key(self) -> tuple:
        return (self.word, self.state, self.position)

    def __str__(self) -> str:
        return f"({''.join(self.word)}, {self.state}, {self.position})"


def reflect_partial(u: PartialConfiguration) -> PartialConfiguration:
    return PartialConfiguration(tuple(reversed(u.word)), u.state, -u.position)


def all_partials(machine: TuringMachine, radius: int, position: int) -> Iterator[PartialConfiguration]:
    for word in product(machine.alphabet, repeat=2 * radius + 1):
        for state in machine.states:
            yield PartialConfiguration(word, state, position)


def _window_step(machine: TuringMachine, radius: int, key: tuple) -> tuple[Pair, tuple]:
    """Apply the rule once to a window triple; returns (letter read, next triple)."""
    word, state, pos = key
    read = word[pos + radius]
    write, nxt, move = machine.delta(read, state)
    cells = list(word)
    cells[pos + radius] = write
    return (read, state), (tuple(cells), nxt, pos + move)


# ============================================================
# Window phase
# ============================================================

def build_C(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    v: PartialConfiguration,
) -> Dfa:
    """DFA for the words read from u while the head stays in (-N, N), ending in v.

    States are the window triples reachable from u; a triple with the head
    on -N or N has no outgoing transition, and a letter that disagrees
    with the simulated read has none either.
    """
    if u.radius != N or v.radius != N:
        raise ConstructionError(f"partial configurations must have radius {N}")
    if u.position != 0:
        raise ConstructionError("a window phase starts with the head on cell 0")

    start = u.key()
    states = {start}
    transitions = {}
    frontier = [start]
    while frontier:
        key = frontier.pop()
        if abs(key[2]) >= N:
            continue
        letter, nxt = _window_step(machine, N, key)
        transitions[(key, letter)] = nxt
        if nxt not in states:
            states.add(nxt)
            frontier.append(nxt)
    accepting = frozenset({v.key()}) & frozenset(states)
    return Dfa(machine.pairs, frozenset(states), transitions, start, accepting)


@lru_cache(maxsize=64)
def _window_exits(machine: TuringMachine, N: int) -> frozenset:
    """Every triple at -N or N that some window phase from cell 0 ends in."""
    exits = set()
    for u in all_partials(machine, N, 0):
        key, seen = u.key(), set()
        while abs(key[2]) < N and key not in seen:
            seen.add(key)
            _, key = _window_step(machine, N, key)
        if abs(key[2]) == N:
            exits.add(key)
    return frozenset(exits)


# ============================================================
# Excursion phase
# ============================================================

def _accepting_pairs(machine: TuringMachine, N: int, v: PartialConfiguration) -> list[tuple]:
    """(state, stack) pairs whose decoded configuration matches v."""
    k = v.position
    if k < 0:
        return []
    out = []
    for length in range(N + 1):
        for w in product(machine.alphabet, repeat=length):
            # w starts at the head cell (cell 1 when back home)
            first = k if k >= 1 else 1
            if any(first + j <= N and w[j] != v.cell(first + j) for j in range(length)):
                continue
            if k >= 1:
                mu = v.cells(1, k - 1)
                out.append((("R", w, v.state), tuple(reversed(mu)) + (BOTTOM,)))
            else:
                out.append((("H", w, v.state), (BOTTOM,)))
    return out


def build_R(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    v: PartialConfiguration,
) -> Dpda:
    """DPDA for the words read from u while the head stays strictly right of 0.

    The state holds (cells from the head rightwards, at most N of them,
    head state); the stack holds the cells between 1 and the head, top
    first, so the head position is the stack depth plus one. A left move
    on the bottom symbol brings the head back to cell 0 and ends the phase
    in a home state.
    """
    if N < 1:
        raise ConstructionError("an excursion automaton needs N >= 1")
    if u.radius != N or v.radius != N:
        raise ConstructionError(f"partial configurations must have radius {N}")
    if u.position != N:
        raise ConstructionError(f"a right excursion starts with the head on cell {N}")
    if u.cells(-N, 0) != v.cells(-N, 0):
        raise ConstructionError("u and v must agree on cells -N..0")
    if u.key() not in _window_exits(machine, N):
        raise ConstructionError(f"no window phase from cell 0 reaches {u}")
    if BOTTOM in machine.alphabet:
        raise ConstructionError(f"tape alphabet clashes with the bottom symbol {BOTTOM}")

    tops = machine.alphabet + (BOTTOM,)
    words = [w for length in range(N + 1) for w in product(machine.alphabet, repeat=length)]
    main = [("R", w, q) for w in words for q in machine.states]
    home = [("H", w, q) for w in words for q in machine.states]

    rules = []
    for top in tops:
        for letter in machine.pairs:
            rules.append((letter, REJECT, top, REJECT, (top,)))
            for state in home:
                rules.append((letter, state, top, REJECT, (top,)))
            for state in main:
                rules.append((letter, state, top, *_excursion_move(machine, N, state, letter, top)))

    initial = ("R", (u.cell(N),), u.state)
    stack = tuple(u.cell(i) for i in range(N - 1, 0, -1)) + (BOTTOM,)
    return make_dpda(
        machine.pairs,
        main + home + [REJECT],
        tops,
        rules,
        initial,
        stack,
        _accepting_pairs(machine, N, v),
    )


def _excursion_move(machine: TuringMachine, N: int, state: tuple, letter: Pair, top: str) -> tuple:
    _, w, q = state
    symbol, p = letter
    if p != q or (w and w[0] != symbol):
        return REJECT, (top,)
    write, nxt, move = machine.delta(symbol, p)
    if move == 1:
        return ("R", w[1:], nxt), (write, top)
    if top == BOTTOM:
        return ("H", ((write,) + w[1:])[:N], nxt), (BOTTOM,)
    return ("R", ((top, write) + w[1:])[:N], nxt), ()


def build_L(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    v: PartialConfiguration,
) -> Dpda:
    """Left excursion: the right excursion of the mirrored machine."""
    if u.position != -N:
        raise ConstructionError(f"a left excursion starts with the head on cell {-N}")
    return build_R(reflect_machine(machine), N, reflect_partial(u), reflect_partial(v))


def zigzag_bound_from_dpda(state_count: int, stack_alphabet_size: int) -> int:
    """Widest 1-zigzag possible when S_T has a DPDA of this size."""
    if state_count < 1 or stack_alphabet_size < 1:
        raise InputError("zigzag_bound_from_dpda needs positive sizes")
    return 2 ** (state_count ** 2 * stack_alphabet_size ** 2 + 1) + 3


# ============================================================
# Phase decider
# ============================================================

def window_radius(width: int) -> int:
    """Radius of the window phases for a machine of zigzag width `width`."""
    return width + 1


class PhaseDecider:
    """Runs every initial-window guess in parallel through the phase cases.

    A decider built at width N keeps windows of radius N + 1, so an
    excursion starts only when the head gets past a zigzag of width N.
    Run tuples:
      ("C", phases, window, state, pos)
      ("X", phases, side, saved, ahead, state, stack)
    where an excursion is stored in mirrored coordinates (side -1 for
    left), `saved` holds cells -radius..0, `ahead` the known cells from
    the head outwards and `stack` the cells between 1 and the head.
    """

    def __init__(self, machine: TuringMachine, width: int):
        if width < 0:
            raise InputError("decider width must be >= 0")
        self.machine = machine
        self.width = width
        self.radius = window_radius(width)
        self._start: Optional[frozenset] = None

    @property
    def guess_count(self) -> int:
        return len(self.machine.alphabet) ** (2 * self.radius + 1) * len(self.machine.states)

    def start(self) -> frozenset:
        if self._start is None:
            self._start = frozenset(
                ("C", "C", window, q, 0)
                for window in product(self.machine.alphabet, repeat=2 * self.radius + 1)
                for q in self.machine.states
            )
        return self._start

    def step(self, run: tuple, letter: Pair) -> Optional[tuple]:
        if run[0] == "C":
            return self._window_step(run, letter)
        return self._excursion_step(run, letter)

    def advance(self, runs: Iterable[tuple], letter: Pair) -> frozenset:
        out = set()
        for run in runs:
            nxt = self.step(run, letter)
            if nxt is not None:
                out.add(nxt)
        return frozenset(out)

    def _window_step(self, run: tuple, letter: Pair) -> Optional[tuple]:
        _, phases, window, q, pos = run
        r = self.radius
        symbol, p = letter
        if window[pos + r] != symbol or q != p:
            return None
        write, nxt, move = self.machine.delta(symbol, p)
        cells = list(window)
        cells[pos + r] = write
        pos += move
        if abs(pos) < r:
            return ("C", phases, tuple(cells), nxt, pos)
        side = "R" if pos > 0 else "L"
        if side in phases:
            return None
        s = 1 if pos > 0 else -1
        saved = tuple(cells[s * i + r] for i in range(-r, 1))
        ahead = (cells[s * r + r],)
        stack = tuple(cells[s * i + r] for i in range(r - 1, 0, -1))
        return ("X", phases + side, s, saved, ahead, nxt, stack)

    def _excursion_step(self, run: tuple, letter: Pair) -> Optional[tuple]:
        _, phases, s, saved, ahead, q, stack = run
        r = self.radius
        symbol, p = letter
        if p != q or (ahead and ahead[0] != symbol):
            return None
        write, nxt, move = self.machine.delta(symbol, p)
        if move * s == 1:
            return ("X", phases, s, saved, ahead[1:], nxt, (write,) + stack)
        if stack:
            ahead = ((stack[0], write) + ahead[1:])[:r]
            return ("X", phases, s, saved, ahead, nxt, stack[1:])
        # back on cell 0: rebuild the window from the saved half and the cells ahead
        right = ((write,) + ahead[1:])[:r]
        if len(right) < r:
            return None
        mirrored = saved + right
        window = tuple(mirrored[s * i + r] for i in range(-r, r + 1))
        return ("C", phases + "C", window, nxt, 0)

    def accepts(self, word: Iterable[Pair]) -> bool:
        runs = self.start()
        for letter in word:
            runs = self.advance(runs, letter)
            if not runs:
                return False
        return True

    def phases_of(self, word: Iterable[Pair]) -> set[str]:
        """Phase sequences of the guesses that survive the word."""
        runs = self.start()
        for letter in word:
            runs = self.advance(runs, letter)
        return {run[1] for run in runs}

    def slices(self, n_max: int) -> dict[int, set[tuple]]:
        """Accepted words of every length 1..n_max (dead prefixes pruned)."""
        out: dict[int, set[tuple]] = {n: set() for n in range(1, n_max + 1)}
        stack = [((), self.start())]
        while stack:
            word, runs = stack.pop()
            if len(word) == n_max:
                continue
            for letter in self.machine.pairs:
                nxt = self.advance(runs, letter)
                if nxt:
                    longer = word + (letter,)
                    out[len(longer)].add(longer)
                    stack.append((longer, nxt))
        return out

    def describe(self) -> dict:
        return {
            "machine": self.machine.name,
            "width": self.width,
            "window_radius": self.radius,
            "guesses": self.guess_count,
            "cases": list(PHASE_CASES),
        }


def build_decider(machine: TuringMachine, width: int) -> PhaseDecider:
    decider = PhaseDecider(machine, width)
    log.debug("decider.built", machine=machine.name, width=width, guesses=decider.guess_count)
    return decider


def st_membership(decider: PhaseDecider, word: Iterable[Pair]) -> bool:
    return decider.accepts(word)


def st_equivalence_check(
    machine: TuringMachine,
    N: int,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
) -> EquivalenceReport:
    """Compare the width-N decider with the S_T oracle at every length up to n_max."""
    decider = build_decider(machine, N)
    slices = decider.slices(n_max)
    report = EquivalenceReport(machine.name, f"phase decider N={N}")
    for n in range(1, n_max + 1):
        comparison = compare_languages(enumerate_LST(machine, n, budget), slices[n])
        report.lengths.append(comparison)
        log.info(
            "st.compare",
            machine=machine.name,
            length=n,
            oracle=comparison.oracle_size,
            recognizer=comparison.recognizer_size,
            equal=comparison.equal,
        )
    return report
