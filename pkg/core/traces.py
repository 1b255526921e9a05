"""
tmdyn Trace Oracle - Trace words of S_T and S_H and brute-force languages.

The enumerators are the ground truth every recognizer is judged against,
so they stay deliberately simple: sweep every relevant window, run the
machine, collect the words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import structlog

from core.errors import BudgetExceededError, InputError
from core.machine import (
    Configuration,
    MarkedCell,
    Pair,
    TapeStatePair,
    TuringMachine,
    step_TH,
    step_TT,
)

log = structlog.get_logger("tmdyn.traces")

DEFAULT_BUDGET = 1 << 24

TraceSymbolT = Pair
TraceSymbolH = MarkedCell
Word = tuple


# ============================================================
# Rendering
# ============================================================

def render_symbol(symbol: TraceSymbolH) -> str:
    if isinstance(symbol, tuple):
        return f"({symbol[0]},{symbol[1]})"
    return str(symbol)


def render_word(word: Iterable[TraceSymbolH]) -> str:
    return ",".join(render_symbol(s) for s in word)


def sort_words(words: Iterable[Word]) -> list[Word]:
    """Canonical order: by rendered text, so mixed S_H words compare."""
    return sorted(words, key=render_word)


@dataclass
class LanguageSample:
    """The exact length-n slice of a trace language."""

    length: int
    words: frozenset
    machine: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        bad = [w for w in self.words if len(w) != self.length]
        if bad:
            raise ValueError(f"word {render_word(bad[0])} does not have length {self.length}")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return tuple(word) in self.words

    def sorted(self) -> list[Word]:
        return sort_words(self.words)

    def dump(self) -> str:
        """Sorted text, one comma-separated word per line."""
        return "".join(render_word(w) + "\n" for w in self.sorted())


# ============================================================
# Traces
# ============================================================

def trace_T(machine: TuringMachine, pair: TapeStatePair, n: int) -> list[TraceSymbolT]:
    out: list[TraceSymbolT] = []
    for t in range(n):
        out.append((pair.symbol, pair.state))
        if t + 1 < n:
            pair = step_TT(machine, pair)
    return out


def trace_H(machine: TuringMachine, config: Configuration, n: int) -> list[TraceSymbolH]:
    out: list[TraceSymbolH] = []
    for t in range(n):
        out.append(config.marked(0))
        if t + 1 < n:
            config = step_TH(machine, config)
    return out


# ============================================================
# Enumeration
# ============================================================

def _check_budget(what: str, needed: int, budget: int) -> None:
    if needed > budget:
        raise BudgetExceededError(what, needed, budget)


def _run_window(
    machine: TuringMachine,
    cells: Sequence[str],
    origin: int,
    head: int,
    state: str,
    n: int,
    observe_cell: int | None,
) -> tuple:
    """Run n steps on a plain list tape.

    `origin` is the list index of cell 0. With observe_cell None the word
    is the S_T trace (symbol under the head, state); otherwise it is the
    marked content of that cell at each step.
    """
    tape = list(cells)
    pos = origin + head
    word = []
    for t in range(n):
        symbol = tape[pos]
        if observe_cell is None:
            word.append((symbol, state))
        elif pos == origin + observe_cell:
            word.append((symbol, state))
        else:
            word.append(tape[origin + observe_cell])
        if t + 1 < n:
            write, state, move = machine.delta(symbol, state)
            tape[pos] = write
            pos += move
    return tuple(word)


def enumerate_LST(
    machine: TuringMachine,
    n: int,
    budget: int = DEFAULT_BUDGET,
    extra_radius: int = 0,
) -> LanguageSample:
    """Exact length-n language of S_T.

    An n-step trace reads only cells within distance n-1 of the start, so
    sweeping cells [-(n-1), n-1] and all states is exhaustive.
    """
    if n < 1:
        raise InputError("enumerate_LST needs n >= 1")
    radius = n - 1 + extra_radius
    width = 2 * radius + 1
    _check_budget("enumerate_LST", len(machine.alphabet) ** width * len(machine.states), budget)

    words = set()
    for cells in product(machine.alphabet, repeat=width):
        for state in machine.states:
            words.add(_run_window(machine, cells, radius, 0, state, n, None))
    log.debug("enumerate.st", machine=machine.name, length=n, words=len(words))
    return LanguageSample(n, frozenset(words), machine.name, {"radius": radius})


def enumerate_LSH(
    machine: TuringMachine,
    n: int,
    budget: int = DEFAULT_BUDGET,
    extra_radius: int = 0,
) -> LanguageSample:
    """Exact length-n language of S_H.

    Heads farther than n-1 from cell 0 never reach it within n steps and
    contribute only constant words, as do headless configurations. A run
    from head position h reads only cells within n-1 of h, so for each h
    the sweep covers [h-(n-1), h+(n-1)], which always contains cell 0.
    """
    if n < 1:
        raise InputError("enumerate_LSH needs n >= 1")
    radius = n - 1 + extra_radius
    width = 2 * radius + 1
    heads = range(-(n - 1), n)
    needed = len(heads) * len(machine.alphabet) ** width * len(machine.states)
    _check_budget("enumerate_LSH", needed, budget)

    words = {(s,) * n for s in machine.alphabet}
    for h in heads:
        # window [h - radius, h + radius]; cell 0 sits at index radius - h
        origin = radius - h
        for cells in product(machine.alphabet, repeat=width):
            for state in machine.states:
                words.add(_run_window(machine, cells, origin, h, state, n, 0))
    log.debug("enumerate.sh", machine=machine.name, length=n, words=len(words))
    return LanguageSample(n, frozenset(words), machine.name, {"radius": radius})


def extensions(sample: LanguageSample, longer: LanguageSample) -> dict[Word, list[Word]]:
    """Right-extensions in `longer` of every word in `sample`."""
    out: dict[Word, list[Word]] = {w: [] for w in sample.words}
    for word in longer.words:
        prefix = word[: sample.length]
        if prefix in out:
            out[prefix].append(word)
    return out


# ============================================================
# Oracle comparison
# ============================================================

@dataclass
class LengthComparison:
    length: int
    oracle_size: int
    recognizer_size: int
    missing: list = field(default_factory=list)
    extra: list = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return not self.missing and not self.extra

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "oracle_size": self.oracle_size,
            "recognizer_size": self.recognizer_size,
            "missing": [render_word(w) for w in self.missing],
            "extra": [render_word(w) for w in self.extra],
        }


@dataclass
class EquivalenceReport:
    """Per-length comparison of a recognizer slice against the oracle."""

    machine: str
    recognizer: str
    lengths: list[LengthComparison] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return all(c.equal for c in self.lengths)

    @property
    def first_mismatch(self) -> LengthComparison | None:
        return next((c for c in self.lengths if not c.equal), None)

    def to_dict(self) -> dict:
        return {
            "machine": self.machine,
            "recognizer": self.recognizer,
            "equal": self.equal,
            "lengths": [c.to_dict() for c in self.lengths],
        }


def compare_languages(oracle: LanguageSample, recognized: Iterable[Word]) -> LengthComparison:
    recognized = {tuple(w) for w in recognized}
    return LengthComparison(
        oracle.length,
        len(oracle.words),
        len(recognized),
        sort_words(oracle.words - recognized),
        sort_words(recognized - oracle.words),
    )
