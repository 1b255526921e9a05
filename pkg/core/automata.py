"""
tmdyn Automata - DFAs, NFAs, union/concatenation assembly, the extended
DPDA model, unary eventually-periodic sets, DOT and JSON export.

Input symbols are tape symbols (str) or (symbol, state) pairs; states are
any hashable value until an automaton is exported, where they are
renumbered in discovery order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Optional

import structlog

from core.errors import ConstructionError, FitError, InputError

log = structlog.get_logger("tmdyn.automata")

Input = Hashable
BOTTOM = "⊥"


def _label(symbol) -> str:
    if isinstance(symbol, tuple):
        return "(" + ",".join(str(s) for s in symbol) + ")"
    return str(symbol)


def _encode(symbol):
    return list(symbol) if isinstance(symbol, tuple) else symbol


def _decode(value):
    return tuple(value) if isinstance(value, list) else value


# ============================================================
# Finite automata
# ============================================================

@dataclass(frozen=True)
class Dfa:
    """Partial deterministic automaton; a missing transition rejects."""

    alphabet: tuple
    states: frozenset
    transitions: dict = field(hash=False)
    initial: Hashable
    accepting: frozenset

    def __post_init__(self):
        if self.initial not in self.states:
            raise ConstructionError("DFA initial state is not in its state set")

    def step(self, state, symbol):
        return self.transitions.get((state, symbol))

    def accepts(self, word: Iterable[Input]) -> bool:
        state = self.initial
        for symbol in word:
            state = self.transitions.get((state, symbol))
            if state is None:
                return False
        return state in self.accepting

    def reachable(self) -> "Dfa":
        """Drop states unreachable from the initial state."""
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            state = queue.popleft()
            for symbol in self.alphabet:
                nxt = self.transitions.get((state, symbol))
                if nxt is not None and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        transitions = {k: v for k, v in self.transitions.items() if k[0] in seen}
        return Dfa(self.alphabet, frozenset(seen), transitions, self.initial, self.accepting & seen)

    def numbered(self) -> tuple[dict, list]:
        """Canonical state numbering (BFS from the initial state, alphabet order)."""
        order = [self.initial]
        index = {self.initial: 0}
        i = 0
        while i < len(order):
            state = order[i]
            i += 1
            for symbol in self.alphabet:
                nxt = self.transitions.get((state, symbol))
                if nxt is not None and nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
        return index, order

    def to_dict(self) -> dict:
        index, order = self.numbered()
        return {
            "kind": "dfa",
            "alphabet": [_encode(a) for a in self.alphabet],
            "states": list(range(len(order))),
            "initial": 0,
            "accepting": sorted(index[s] for s in self.accepting if s in index),
            "transitions": [
                [index[s], _encode(a), index[self.transitions[(s, a)]]]
                for s in order
                for a in self.alphabet
                if (s, a) in self.transitions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


@dataclass(frozen=True)
class Nfa:
    """Automaton with epsilon moves; transitions map (state, symbol|None) to a state set."""

    alphabet: tuple
    states: frozenset
    transitions: dict = field(hash=False)
    initial: frozenset
    accepting: frozenset

    def closure(self, states: Iterable) -> frozenset:
        out = set(states)
        stack = list(out)
        while stack:
            state = stack.pop()
            for nxt in self.transitions.get((state, None), ()):
                if nxt not in out:
                    out.add(nxt)
                    stack.append(nxt)
        return frozenset(out)

    def move(self, states: frozenset, symbol) -> frozenset:
        out = set()
        for state in states:
            out.update(self.transitions.get((state, symbol), ()))
        return self.closure(out)

    def accepts(self, word: Iterable[Input]) -> bool:
        current = self.closure(self.initial)
        for symbol in word:
            current = self.move(current, symbol)
            if not current:
                return False
        return bool(current & self.accepting)

    def determinize(self) -> Dfa:
        """Subset construction over the reachable non-empty subsets."""
        start = self.closure(self.initial)
        index = {start: 0}
        queue = deque([start])
        transitions = {}
        accepting = set()
        while queue:
            subset = queue.popleft()
            if subset & self.accepting:
                accepting.add(index[subset])
            for symbol in self.alphabet:
                nxt = self.move(subset, symbol)
                if not nxt:
                    continue
                if nxt not in index:
                    index[nxt] = len(index)
                    queue.append(nxt)
                transitions[(index[subset], symbol)] = index[nxt]
        log.debug("nfa.determinized", nfa_states=len(self.states), dfa_states=len(index))
        return Dfa(self.alphabet, frozenset(index.values()), transitions, 0, frozenset(accepting))


def words_of_length(dfa: Dfa, n: int) -> set[tuple]:
    """Every accepted word of length n."""
    out: set[tuple] = set()
    stack = [(dfa.initial, ())]
    while stack:
        state, word = stack.pop()
        if len(word) == n:
            if state in dfa.accepting:
                out.add(word)
            continue
        for symbol in dfa.alphabet:
            nxt = dfa.transitions.get((state, symbol))
            if nxt is not None:
                stack.append((nxt, word + (symbol,)))
    return out


def singleton_dfa(word: Iterable[Input], alphabet: Iterable[Input]) -> Dfa:
    """DFA for exactly one word."""
    word = tuple(word)
    transitions = {(i, symbol): i + 1 for i, symbol in enumerate(word)}
    states = frozenset(range(len(word) + 1))
    return Dfa(tuple(alphabet), states, transitions, 0, frozenset({len(word)}))


# ============================================================
# Union / concatenation assembly
# ============================================================

@dataclass(frozen=True)
class Union:
    parts: tuple


@dataclass(frozen=True)
class Concat:
    parts: tuple


class _Builder:
    """Thompson-style fragments: every sub-expression becomes (start, end)."""

    def __init__(self, alphabet: tuple):
        self.alphabet = alphabet
        self.count = 0
        self.edges: dict = {}

    def fresh(self) -> int:
        self.count += 1
        return self.count - 1

    def edge(self, src, symbol, dst):
        self.edges.setdefault((src, symbol), set()).add(dst)

    def leaf(self, automaton) -> tuple[int, int]:
        if set(automaton.alphabet) != set(self.alphabet):
            raise ConstructionError("alphabet mismatch between assembled automata")
        start, end = self.fresh(), self.fresh()
        ids = {s: self.fresh() for s in automaton.states}
        if isinstance(automaton, Dfa):
            self.edge(start, None, ids[automaton.initial])
            for (src, symbol), dst in automaton.transitions.items():
                self.edge(ids[src], symbol, ids[dst])
        else:
            for s in automaton.initial:
                self.edge(start, None, ids[s])
            for (src, symbol), dsts in automaton.transitions.items():
                for dst in dsts:
                    self.edge(ids[src], symbol, ids[dst])
        for s in automaton.accepting:
            self.edge(ids[s], None, end)
        return start, end

    def build(self, expr) -> tuple[int, int]:
        if isinstance(expr, (Dfa, Nfa)):
            return self.leaf(expr)
        start, end = self.fresh(), self.fresh()
        if isinstance(expr, Union):
            for part in expr.parts:
                s, e = self.build(part)
                self.edge(start, None, s)
                self.edge(e, None, end)
            return start, end
        if isinstance(expr, Concat):
            current = start
            for part in expr.parts:
                s, e = self.build(part)
                self.edge(current, None, s)
                current = e
            self.edge(current, None, end)
            return start, end
        raise ConstructionError(f"cannot assemble {type(expr).__name__}")


def _first_alphabet(expr) -> Optional[tuple]:
    if isinstance(expr, (Dfa, Nfa)):
        return expr.alphabet
    for part in expr.parts:
        found = _first_alphabet(part)
        if found is not None:
            return found
    return None


def expression_to_nfa(expr, alphabet: Optional[Iterable[Input]] = None) -> Nfa:
    alphabet = tuple(alphabet) if alphabet is not None else _first_alphabet(expr)
    if alphabet is None:
        raise ConstructionError("an expression without leaves needs an explicit alphabet")
    builder = _Builder(alphabet)
    start, end = builder.build(expr)
    transitions = {k: frozenset(v) for k, v in builder.edges.items()}
    return Nfa(alphabet, frozenset(range(builder.count)), transitions, frozenset({start}), frozenset({end}))


def nfa_concat_union(expr, alphabet: Optional[Iterable[Input]] = None) -> Dfa:
    """Determinize a union/concatenation tree of automata over one alphabet."""
    return expression_to_nfa(expr, alphabet).determinize()


# ============================================================
# Deterministic pushdown automata (extended model)
# ============================================================

ID = tuple  # (state, stack word), top first


@dataclass(frozen=True)
class Dpda:
    """DPDA with an initial stack word and (state, stack) acceptance.

    transitions: (input, state, top) -> (state, push word); the push word
    replaces the top. The bottom symbol stays alone at the bottom of every
    stack, which is checked here rather than at run time.
    """

    input_alphabet: tuple
    states: frozenset
    stack_alphabet: tuple
    bottom: str
    transitions: dict = field(hash=False)
    initial: Hashable
    initial_stack: tuple
    accepting: frozenset

    def __post_init__(self):
        if self.bottom not in self.stack_alphabet:
            raise ConstructionError("bottom symbol is not in the stack alphabet")
        if self.initial not in self.states:
            raise ConstructionError("DPDA initial state is not in its state set")
        _check_stack(self.initial_stack, self.bottom, "initial stack")
        for state, stack in self.accepting:
            _check_stack(stack, self.bottom, f"accepting stack of {state!r}")
        for (symbol, state, top), (nxt, push) in self.transitions.items():
            where = f"transition on ({_label(symbol)}, {state!r}, {top})"
            if len(push) > 2:
                raise ConstructionError(f"{where} pushes more than two symbols")
            if top == self.bottom:
                if push.count(self.bottom) != 1 or push[-1] != self.bottom:
                    raise ConstructionError(f"{where} must keep exactly one bottom symbol, last")
            elif self.bottom in push:
                raise ConstructionError(f"{where} pushes the bottom symbol above the bottom")

    def to_dict(self) -> dict:
        order = sorted(self.states, key=repr)
        index = {s: i for i, s in enumerate(order)}
        return {
            "kind": "dpda",
            "input_alphabet": [_encode(a) for a in self.input_alphabet],
            "states": list(range(len(order))),
            "state_labels": [repr(s) for s in order],
            "stack_alphabet": list(self.stack_alphabet),
            "bottom": self.bottom,
            "initial": index[self.initial],
            "initial_stack": list(self.initial_stack),
            "accepting": sorted(
                ([index[s], list(stack)] for s, stack in self.accepting),
                key=json.dumps,
            ),
            "transitions": sorted(
                (
                    [_encode(a), index[q], top, index[nxt], list(push)]
                    for (a, q, top), (nxt, push) in self.transitions.items()
                ),
                key=json.dumps,
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, default=str)


def _check_stack(stack: tuple, bottom: str, what: str) -> None:
    if not stack or stack[-1] != bottom or stack.count(bottom) != 1:
        raise ConstructionError(f"{what} must end with exactly one bottom symbol")


def make_dpda(
    input_alphabet: Iterable[Input],
    states: Iterable[Hashable],
    stack_alphabet: Iterable[str],
    rules: Iterable[tuple],
    initial: Hashable,
    initial_stack: Iterable[str],
    accepting: Iterable[tuple],
    bottom: str = BOTTOM,
) -> Dpda:
    """Build a Dpda from (input, state, top, next, push) rules; duplicates are an error."""
    transitions: dict = {}
    for symbol, state, top, nxt, push in rules:
        key = (symbol, state, top)
        if key in transitions:
            raise ConstructionError(f"nondeterministic transition on ({_label(symbol)}, {state!r}, {top})")
        transitions[key] = (nxt, tuple(push))
    return Dpda(
        tuple(input_alphabet),
        frozenset(states),
        tuple(stack_alphabet),
        bottom,
        transitions,
        initial,
        tuple(initial_stack),
        frozenset((s, tuple(stack)) for s, stack in accepting),
    )


def dpda_step(dpda: Dpda, description: ID, symbol: Input) -> Optional[ID]:
    """One move; None when no transition applies."""
    state, stack = description
    rule = dpda.transitions.get((symbol, state, stack[0]))
    if rule is None:
        return None
    nxt, push = rule
    new_stack = push + stack[1:]
    assert new_stack[-1] == dpda.bottom and new_stack.count(dpda.bottom) == 1
    return nxt, new_stack


def dpda_run(dpda: Dpda, word: Iterable[Input]) -> Iterator[ID]:
    """Instantaneous descriptions along the run, stopping at a reject."""
    description: Optional[ID] = (dpda.initial, dpda.initial_stack)
    yield description
    for symbol in word:
        description = dpda_step(dpda, description, symbol)
        if description is None:
            return
        yield description


def dpda_accepts(dpda: Dpda, word: Iterable[Input]) -> bool:
    word = tuple(word)
    last = None
    steps = -1
    for steps, last in enumerate(dpda_run(dpda, word)):
        pass
    return steps == len(word) and last in dpda.accepting


# ============================================================
# Unary eventually-periodic sets
# ============================================================

@dataclass(frozen=True)
class UnaryEventuallyPeriodicSet:
    """{k < preperiod : k in initial} plus {k >= preperiod : k mod period in residues}."""

    preperiod: int
    period: int
    initial: frozenset = frozenset()
    residues: frozenset = frozenset()

    def __post_init__(self):
        if self.period < 1:
            raise FitError("period must be at least 1")
        if any(k >= self.preperiod or k < 0 for k in self.initial):
            raise FitError("explicit members must lie below the preperiod")

    def __contains__(self, k: int) -> bool:
        if k < 0:
            return False
        if k < self.preperiod:
            return k in self.initial
        return k % self.period in self.residues

    def is_finite(self) -> bool:
        return not self.residues

    def is_all_naturals(self) -> bool:
        return len(self.initial) == self.preperiod and len(self.residues) == self.period

    def members_up_to(self, n: int) -> list[int]:
        return [k for k in range(n + 1) if k in self]

    def to_dfa(self, symbol: Input, alphabet: Iterable[Input]) -> Dfa:
        """Unary DFA over `symbol`; the tail states loop back to the preperiod."""
        last = self.preperiod + self.period - 1
        transitions = {(j, symbol): j + 1 if j < last else self.preperiod for j in range(last + 1)}
        accepting = frozenset(j for j in range(last + 1) if j in self)
        return Dfa(tuple(alphabet), frozenset(range(last + 1)), transitions, 0, accepting)

    def to_dict(self) -> dict:
        return {
            "preperiod": self.preperiod,
            "period": self.period,
            "initial": sorted(self.initial),
            "residues": sorted(self.residues),
        }


def unary_fit(lengths: Iterable[int], l_max: int, piece: str = "") -> UnaryEventuallyPeriodicSet:
    """Smallest (period, preperiod) eventually-periodic set matching [0, l_max].

    A fit must see at least two full periods after the preperiod inside the
    observed window; otherwise the horizon is too short to commit.
    """
    observed = set(lengths)
    if any(k < 0 or k > l_max for k in observed):
        raise InputError(f"observed lengths must lie in [0, {l_max}]")

    for period in range(1, l_max + 2):
        for pre in range(0, l_max + 2):
            if l_max - pre + 1 < 2 * period:
                break
            residues: dict[int, bool] = {}
            consistent = True
            for k in range(pre, l_max + 1):
                member = k in observed
                if residues.setdefault(k % period, member) != member:
                    consistent = False
                    break
            if consistent:
                return UnaryEventuallyPeriodicSet(
                    pre,
                    period,
                    frozenset(k for k in observed if k < pre),
                    frozenset(r for r, member in residues.items() if member),
                )
    raise FitError(f"insufficient horizon: no eventually periodic fit up to {l_max}", piece)


# ============================================================
# Export
# ============================================================

def _quote(s: str) -> str:
    return '"{}"'.format(s.replace('"', r"\""))


def export_dot(automaton: Dfa | Nfa | Dpda, name: str = "automaton") -> str:
    """Deterministic DOT digraph text."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    if isinstance(automaton, Dfa):
        index, order = automaton.numbered()
        for s in order:
            shape = "doublecircle" if s in automaton.accepting else "circle"
            lines.append(f"  {index[s]} [shape={shape}];")
        lines.append(f'  start [shape=point]; start -> {index[automaton.initial]};')
        for s in order:
            for a in automaton.alphabet:
                if (s, a) in automaton.transitions:
                    dst = index[automaton.transitions[(s, a)]]
                    lines.append(f"  {index[s]} -> {dst} [label={_quote(_label(a))}];")
    elif isinstance(automaton, Nfa):
        order = sorted(automaton.states, key=repr)
        index = {s: i for i, s in enumerate(order)}
        for s in order:
            shape = "doublecircle" if s in automaton.accepting else "circle"
            lines.append(f"  {index[s]} [shape={shape}];")
        for s in sorted(index[s] for s in automaton.initial):
            lines.append(f"  start{s} [shape=point]; start{s} -> {s};")
        arcs = sorted(
            (index[src], index[dst], "ε" if a is None else _label(a))
            for (src, a), dsts in automaton.transitions.items()
            for dst in dsts
        )
        for src, dst, label in arcs:
            lines.append(f"  {src} -> {dst} [label={_quote(label)}];")
    else:
        data = automaton.to_dict()
        labels = data["state_labels"]
        finals = {s for s, _ in data["accepting"]}
        for i, label in enumerate(labels):
            shape = "doublecircle" if i in finals else "circle"
            lines.append(f"  {i} [shape={shape} label={_quote(label)}];")
        lines.append(f"  start [shape=point]; start -> {data['initial']};")
        for a, q, top, nxt, push in data["transitions"]:
            label = f"{_label(_decode(a))}, {top} / {''.join(push) or 'ε'}"
            lines.append(f"  {q} -> {nxt} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def automaton_from_json(text: str) -> Dfa | Dpda:
    """Inverse of Dfa.to_json / Dpda.to_json (states come back as integers)."""
    try:
        data = json.loads(text)
        kind = data["kind"]
        if kind == "dfa":
            return Dfa(
                tuple(_decode(a) for a in data["alphabet"]),
                frozenset(data["states"]),
                {(s, _decode(a)): d for s, a, d in data["transitions"]},
                data["initial"],
                frozenset(data["accepting"]),
            )
        if kind == "dpda":
            return make_dpda(
                [_decode(a) for a in data["input_alphabet"]],
                data["states"],
                data["stack_alphabet"],
                [(_decode(a), q, top, nxt, tuple(push)) for a, q, top, nxt, push in data["transitions"]],
                data["initial"],
                data["initial_stack"],
                [(s, tuple(stack)) for s, stack in data["accepting"]],
                bottom=data["bottom"],
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid automaton file: {exc}") from exc
    raise InputError(f"unknown automaton kind {kind!r}")
