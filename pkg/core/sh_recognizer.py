"""
tmdyn S_H Recognizer - finite automaton for the column-trace language.

Cell 0 shows a bare symbol until the head first arrives (the arrival
piece B), then follows the window phases: a window phase shows the
simulated marked cell 0, an excursion leaves cell 0 untouched so it only
contributes a run of one repeated symbol whose possible lengths form an
eventually periodic set. Headless runs give the constant words.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Hashable, Optional

import structlog

from core.automata import (
    Concat,
    Dfa,
    Dpda,
    Union,
    UnaryEventuallyPeriodicSet,
    nfa_concat_union,
    unary_fit,
    words_of_length,
)
from core.errors import BudgetExceededError, ConstructionError, FitError, IntervalPropertyError
from core.machine import State, Symbol, TuringMachine
from core.st_recognizer import PartialConfiguration, all_partials, build_L, build_R, window_radius
from core.traces import (
    DEFAULT_BUDGET,
    EquivalenceReport,
    compare_languages,
    enumerate_LSH,
)

log = structlog.get_logger("tmdyn.sh")

DEFAULT_L_MAX = 12
DEFAULT_T_MAX = 8
DEFAULT_MAX_BRANCHES = 1 << 20

PROVENANCE = ("R̄", "L̄", "B", "C̄", "C̄-constant")


@dataclass(frozen=True)
class UnaryPiece:
    symbol: Symbol
    lengths: UnaryEventuallyPeriodicSet
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ConstructionError(f"unknown piece provenance {self.provenance!r}")

    def __contains__(self, word) -> bool:
        word = tuple(word)
        return all(s == self.symbol for s in word) and len(word) in self.lengths

    def to_dfa(self, alphabet) -> Dfa:
        return self.lengths.to_dfa(self.symbol, alphabet)

    def to_dict(self) -> dict:
        return {"symbol": self.symbol, "provenance": self.provenance, **self.lengths.to_dict()}


def sh_alphabet(machine: TuringMachine) -> tuple:
    """A ⊔ (A×Q): bare symbols first, then marked cells."""
    return machine.alphabet + machine.pairs


def _fit_checked(observed: set[int], l_max: int, piece: str) -> UnaryEventuallyPeriodicSet:
    """Fit on [0, l_max], then demand agreement on [0, 2 l_max]."""
    fitted = unary_fit({k for k in observed if k <= l_max}, l_max, piece)
    for k in range(2 * l_max + 1):
        if (k in fitted) != (k in observed):
            raise FitError(
                f"fit {fitted.to_dict()} disagrees with length {k} at doubled horizon",
                piece,
            )
    return fitted


# ============================================================
# Unary projection
# ============================================================

def _accepted_lengths(
    automaton: Dfa | Dpda,
    horizon: int,
    alive: Optional[Callable[[Hashable], bool]] = None,
) -> set[int]:
    """Lengths up to horizon of accepted words.

    With `alive`, a length also counts when some run is then in a state
    that satisfies it.
    """
    if isinstance(automaton, Dfa):
        layer = {automaton.initial}
        accepted = set()
        for k in range(horizon + 1):
            if layer & automaton.accepting or (alive is not None and any(alive(s) for s in layer)):
                accepted.add(k)
            layer = {
                automaton.transitions[(s, a)]
                for s in layer
                for a in automaton.alphabet
                if (s, a) in automaton.transitions
            }
            if not layer:
                break
        return accepted

    reach = max((len(stack) for _, stack in automaton.accepting), default=1)
    layer = {(automaton.initial, automaton.initial_stack, False)}
    accepted = set()
    for k in range(horizon + 1):
        if any(not deep and (s, stack) in automaton.accepting for s, stack, deep in layer) or (
            alive is not None and any(alive(s) for s, _, _ in layer)
        ):
            accepted.add(k)
        if k == horizon:
            break
        remaining = horizon - k - 1
        nxt = set()
        for state, stack, deep in layer:
            for a in automaton.input_alphabet:
                rule = automaton.transitions.get((a, state, stack[0]))
                if rule is None:
                    continue
                new, truncated = rule[1] + stack[1:], deep
                # too deep to unwind to an accepting stack in the remaining steps
                if len(new) > remaining + reach + 1:
                    if alive is None:
                        continue
                    new, truncated = new[: remaining + 1] + (automaton.bottom,), True
                nxt.add((rule[0], new, truncated))
        layer = nxt
        if not layer:
            break
    return accepted


def project_unary(
    automaton: Dfa | Dpda,
    observed_symbol: Symbol,
    l_max: int = DEFAULT_L_MAX,
    provenance: str = "R̄",
) -> UnaryPiece:
    """Lengths of the accepted words, as a fitted unary piece."""
    lengths = _accepted_lengths(automaton, 2 * l_max)
    return UnaryPiece(observed_symbol, _fit_checked(lengths, l_max, provenance), provenance)


# ============================================================
# Arrival piece
# ============================================================

def _arrivals(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    horizon: int,
    max_branches: int,
) -> set[int]:
    """Arrival times up to horizon, by depth-first search over lazily read tapes."""
    lengths = {0}
    starts = [h for h in range(-horizon, horizon + 1) if h != 0]
    stack = [(0, h, q, {}) for h in starts for q in machine.states]
    explored = len(stack)
    while stack:
        t, pos, state, tape = stack.pop()
        symbol = tape.get(pos)
        reads = machine.alphabet if symbol is None else (symbol,)
        for read in reads:
            write, nxt, move = machine.delta(read, state)
            npos = pos + move
            if npos == 0:
                if nxt == u.state and all(
                    tape.get(i, u.cell(i)) == u.cell(i) for i in range(-N, N + 1) if i != pos
                ) and (abs(pos) > N or write == u.cell(pos)):
                    lengths.add(t + 1)
                continue
            if t + 1 < horizon and abs(npos) <= horizon - t - 1:
                stack.append((t + 1, npos, nxt, {**tape, pos: write}))
                explored += 1
        if explored > max_branches:
            raise BudgetExceededError("build_B", explored, max_branches)
    return lengths


def build_B(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    t_max: int = DEFAULT_T_MAX,
    max_branches: int = DEFAULT_MAX_BRANCHES,
) -> UnaryPiece:
    """Times t at which a head that has not yet visited cell 0 arrives there showing u.

    Heads start anywhere off cell 0 within reach; tape cells are fixed the
    first time they are read. On arrival, every cell of the window the head
    has touched must agree with u (the untouched ones can be chosen to).

    Arrival times form an interval from 0. An interval that stops short of
    the search horizon is the whole set; one that reaches t_max is searched
    again up to 2 t_max, and only an interval reaching that far is taken
    as every length.
    """
    if u.radius != N:
        raise ConstructionError(f"partial configuration must have radius {N}")
    if u.position != 0:
        raise ConstructionError("an arrival piece needs the head on cell 0")

    horizon = t_max
    lengths = _arrivals(machine, N, u, horizon, max_branches)
    if max(lengths) >= t_max:
        horizon = 2 * t_max
        lengths = _arrivals(machine, N, u, horizon, max_branches)

    top = max(lengths)
    if lengths != set(range(top + 1)):
        raise IntervalPropertyError(f"arrival lengths {sorted(lengths)} are not an interval", "B")
    if top < horizon:
        fitted = UnaryEventuallyPeriodicSet(top + 1, 1, frozenset(lengths), frozenset())
    else:
        fitted = _fit_checked(lengths, t_max, "B")
    return UnaryPiece(u.cell(0), fitted, "B")


# ============================================================
# Window phase observed at cell 0
# ============================================================

def _observe(window: tuple, state: State, pos: int, radius: int):
    cell = window[radius]
    return (cell, state) if pos == 0 else cell


def window_phase(machine: TuringMachine, radius: int, u: PartialConfiguration) -> tuple[list, Optional[tuple]]:
    """Deterministic window phase from u: visited triples and the exit triple, if any."""
    triples = []
    seen = set()
    key = u.key()
    while abs(key[2]) < radius and key not in seen:
        seen.add(key)
        triples.append(key)
        word, state, pos = key
        write, nxt, move = machine.delta(word[pos + radius], state)
        cells = list(word)
        cells[pos + radius] = write
        key = (tuple(cells), nxt, pos + move)
    if abs(key[2]) == radius:
        return triples, key
    # loop: key is the first repeated triple
    return triples + [key], None


def _cbar_dfa(
    machine: TuringMachine,
    radius: int,
    u: PartialConfiguration,
    target: Optional[tuple],
) -> Dfa:
    triples, exit_key = window_phase(machine, radius, u)
    alphabet = sh_alphabet(machine)
    index = {}
    transitions = {}
    path = triples if exit_key is None else triples + [exit_key]
    for key in path:
        if key not in index:
            index[key] = len(index)
    for a, b in zip(path, path[1:]):
        word, state, pos = a
        transitions[(index[a], _observe(word, state, pos, radius))] = index[b]
    if target is None:
        accepting = frozenset(index.values())
    else:
        accepting = frozenset({index[target]}) if target in index else frozenset()
    return Dfa(alphabet, frozenset(index.values()), transitions, 0, accepting)


def build_Cbar(
    machine: TuringMachine,
    N: int,
    u: PartialConfiguration,
    v: PartialConfiguration,
) -> Dfa:
    """Cell-0 observations while the head stays in (-N, N), from u to v."""
    if u.radius != N or v.radius != N:
        raise ConstructionError(f"partial configurations must have radius {N}")
    if u.position != 0:
        raise ConstructionError("a window phase starts with the head on cell 0")
    return _cbar_dfa(machine, N, u, v.key())


# ============================================================
# Excursion pieces
# ============================================================

def _away(state: Hashable) -> bool:
    return state[0] == "R"


def excursion_pieces(
    machine: TuringMachine,
    radius: int,
    u: PartialConfiguration,
    l_max: int = DEFAULT_L_MAX,
) -> tuple[UnaryPiece, dict[tuple, UnaryPiece]]:
    """Cell-0 run lengths of the excursion that starts from the exit triple u.

    Returns the open piece (the word ends while the head is still away)
    and, per return window v, the projection of build_R or build_L from u
    to v. Cell 0 shows its bare symbol from the exit step on, so an open
    excursion alive after k steps accounts for k + 1 letters.
    """
    outward = 1 if u.position > 0 else -1
    side = "R̄" if outward > 0 else "L̄"
    build = build_R if outward > 0 else build_L
    symbol = u.cell(0)
    horizon = 2 * l_max

    start = replace(build(machine, radius, u, PartialConfiguration(u.word, u.state, 0)), accepting=frozenset())
    alive = _accepted_lengths(start, horizon, alive=_away)
    opened = {0} | {k + 1 for k in alive if k < horizon}
    open_piece = UnaryPiece(symbol, _fit_checked(opened, l_max, side), side)

    returns = {}
    kept = u.word[radius:] if outward < 0 else u.word[: radius + 1]
    for cells in product(machine.alphabet, repeat=radius):
        word = cells + kept if outward < 0 else kept + cells
        for state in machine.states:
            v = PartialConfiguration(word, state, 0)
            piece = project_unary(build(machine, radius, u, v), symbol, l_max, side)
            if piece.lengths.members_up_to(horizon):
                returns[v.key()] = piece
    return open_piece, returns


# ============================================================
# Assembly
# ============================================================

class _Assembler:
    def __init__(self, machine: TuringMachine, N: int, l_max: int, t_max: int, max_branches: int):
        self.machine = machine
        self.radius = window_radius(N)
        self.l_max = l_max
        self.t_max = t_max
        self.max_branches = max_branches
        self.alphabet = sh_alphabet(machine)
        self.pieces: list[UnaryPiece] = []
        self._phase: dict = {}
        self._excursions: dict = {}

    def unary(self, symbol: Symbol, lengths: UnaryEventuallyPeriodicSet, provenance: str) -> Dfa:
        return self.use(UnaryPiece(symbol, lengths, provenance))

    def use(self, piece: UnaryPiece) -> Dfa:
        self.pieces.append(piece)
        return piece.to_dfa(self.alphabet)

    def excursion(self, exit_key: tuple):
        if exit_key not in self._excursions:
            u = PartialConfiguration(*exit_key)
            self._excursions[exit_key] = excursion_pieces(self.machine, self.radius, u, self.l_max)
        return self._excursions[exit_key]

    def phase(self, key: tuple, allowed: frozenset):
        memo = (key, allowed)
        if memo in self._phase:
            return self._phase[memo]
        u = PartialConfiguration(*key)
        parts = [_cbar_dfa(self.machine, self.radius, u, None)]
        _, exit_key = window_phase(self.machine, self.radius, u)
        if exit_key is not None:
            side_letter = "R" if exit_key[2] > 0 else "L"
            if side_letter in allowed:
                opened, returns = self.excursion(exit_key)
                tails = [self.use(opened)]
                for w, piece in returns.items():
                    tails.append(Concat((
                        self.use(piece),
                        self.phase(w, allowed - {side_letter}),
                    )))
                parts.append(Concat((
                    _cbar_dfa(self.machine, self.radius, u, exit_key),
                    Union(tuple(tails)),
                )))
        expr = Union(tuple(parts))
        self._phase[memo] = expr
        return expr

    def expression(self):
        everything = UnaryEventuallyPeriodicSet(0, 1, frozenset(), frozenset({0}))
        parts = [self.unary(a, everything, "C̄-constant") for a in self.machine.alphabet]
        allowed = frozenset({"R", "L"})
        for u in all_partials(self.machine, self.radius, 0):
            arrival = build_B(self.machine, self.radius, u, self.t_max, self.max_branches)
            parts.append(Concat((self.use(arrival), self.phase(u.key(), allowed))))
        return Union(tuple(parts))


def build_sh_recognizer(
    machine: TuringMachine,
    N: int,
    l_max: int = DEFAULT_L_MAX,
    t_max: int = DEFAULT_T_MAX,
    max_branches: int = DEFAULT_MAX_BRANCHES,
) -> Dfa:
    """Single DFA over A ⊔ (A×Q) for the S_H language of a width-N machine."""
    assembler = _Assembler(machine, N, l_max, t_max, max_branches)
    expr = assembler.expression()
    dfa = nfa_concat_union(expr, assembler.alphabet).reachable()
    log.info(
        "sh.built",
        machine=machine.name,
        width=N,
        unary_pieces=len(assembler.pieces),
        dfa_states=len(dfa.states),
    )
    return dfa


def sh_equivalence_check(
    machine: TuringMachine,
    N: int,
    n_max: int,
    l_max: int = DEFAULT_L_MAX,
    t_max: int = DEFAULT_T_MAX,
    budget: int = DEFAULT_BUDGET,
    recognizer: Optional[Dfa] = None,
) -> EquivalenceReport:
    dfa = recognizer or build_sh_recognizer(machine, N, l_max, t_max)
    report = EquivalenceReport(machine.name, f"sh recognizer N={N}")
    for n in range(1, n_max + 1):
        comparison = compare_languages(enumerate_LSH(machine, n, budget), words_of_length(dfa, n))
        report.lengths.append(comparison)
        log.info(
            "sh.compare",
            machine=machine.name,
            length=n,
            oracle=comparison.oracle_size,
            recognizer=comparison.recognizer_size,
            equal=comparison.equal,
        )
    return report


# ============================================================
# Regularity probe
# ============================================================

@dataclass
class RegularityProbe:
    """Distinct right-residual classes per prefix length, from oracle samples."""

    machine: str
    n_max: int
    suffix_length: int
    counts: list[int]

    @property
    def stable(self) -> bool:
        return len(self.counts) >= 2 and self.counts[-1] == self.counts[-2]

    def to_dict(self) -> dict:
        return {
            "machine": self.machine,
            "n_max": self.n_max,
            "suffix_length": self.suffix_length,
            "counts": self.counts,
            "stable": self.stable,
        }


def regularity_probe(machine: TuringMachine, n_max: int, budget: int = DEFAULT_BUDGET) -> RegularityProbe:
    """Residual-count estimate on ℒ_{n_max}(S_H).

    With m = n_max // 2, prefixes of length k <= m are grouped by the set
    of length-m words that can follow them. A regular language keeps
    these counts bounded as k grows.
    """
    sample = enumerate_LSH(machine, n_max, budget)
    m = n_max // 2
    counts = []
    for k in range(m + 1):
        residuals: dict[tuple, set] = {}
        for word in sample.words:
            residuals.setdefault(word[:k], set()).add(word[k:k + m])
        counts.append(len({frozenset(s) for s in residuals.values()}))
    log.info("sh.probe", machine=machine.name, n_max=n_max, counts=counts)
    return RegularityProbe(machine.name, n_max, m, counts)
