"""
tmdyn - Unit Tests for finite automata, assembly, DPDAs, unary sets
and export.
"""

import json

import pytest


def _anbn():
    """a^n b^n over {a, b}, accepted on an empty stack."""
    from core.automata import BOTTOM, make_dpda

    rules = [
        ("a", "qa", BOTTOM, "qa", ("A", BOTTOM)),
        ("a", "qa", "A", "qa", ("A", "A")),
        ("b", "qa", "A", "qb", ()),
        ("b", "qb", "A", "qb", ()),
    ]
    return make_dpda(
        ["a", "b"],
        ["qa", "qb"],
        ["A", BOTTOM],
        rules,
        "qa",
        [BOTTOM],
        [("qa", [BOTTOM]), ("qb", [BOTTOM])],
    )


# ============================================================
# Finite Automata Tests
# ============================================================
class TestDfa:
    """Test the partial DFA."""

    def test_singleton(self):
        """singleton_dfa accepts exactly its word."""
        from core.automata import singleton_dfa

        dfa = singleton_dfa("ab", "ab")
        assert dfa.accepts("ab")
        assert not dfa.accepts("a")
        assert not dfa.accepts("abb")
        assert not dfa.accepts("ba")

    def test_words_of_length(self):
        """Slices list every accepted word of one length."""
        from core.automata import UnaryEventuallyPeriodicSet, words_of_length

        evens = UnaryEventuallyPeriodicSet(0, 2, frozenset(), frozenset({0})).to_dfa("a", ("a", "b"))
        assert words_of_length(evens, 4) == {("a",) * 4}
        assert words_of_length(evens, 3) == set()

    def test_reachable_drops_orphans(self):
        """Unreachable states are removed."""
        from core.automata import Dfa

        dfa = Dfa(("a",), frozenset({0, 1, 2}), {(0, "a"): 1, (2, "a"): 0}, 0, frozenset({1, 2}))
        trimmed = dfa.reachable()
        assert trimmed.states == {0, 1}
        assert trimmed.accepting == {1}

    def test_json_round_trip_keeps_language(self):
        """Renumbered states accept the same words."""
        from core.automata import automaton_from_json, singleton_dfa, words_of_length

        pairs = (("a", "q0"), ("a", "q1"))
        dfa = singleton_dfa([("a", "q0"), ("a", "q1")], pairs)
        loaded = automaton_from_json(dfa.to_json())
        assert words_of_length(loaded, 2) == {(("a", "q0"), ("a", "q1"))}

    def test_dot_one_state(self):
        """A one-state DFA draws one node with a self-loop per symbol."""
        from core.automata import Dfa, export_dot

        dfa = Dfa(("a", "b"), frozenset({0}), {(0, "a"): 0, (0, "b"): 0}, 0, frozenset({0}))
        dot = export_dot(dfa, "loop")
        assert "  0 [shape=doublecircle];" in dot
        assert '  0 -> 0 [label="a"];' in dot
        assert '  0 -> 0 [label="b"];' in dot
        assert dot.endswith("}\n")

    def test_bad_automaton_json(self):
        """Unknown kinds and missing fields are InputErrors."""
        from core.automata import automaton_from_json
        from core.errors import InputError

        with pytest.raises(InputError):
            automaton_from_json(json.dumps({"kind": "turing"}))
        with pytest.raises(InputError):
            automaton_from_json(json.dumps({"kind": "dfa"}))


class TestAssembly:
    """Test union/concatenation trees and determinization."""

    def test_union(self):
        """A union accepts the words of either part."""
        from core.automata import Union, nfa_concat_union, singleton_dfa

        dfa = nfa_concat_union(Union((singleton_dfa("ab", "ab"), singleton_dfa("b", "ab"))))
        assert dfa.accepts("ab")
        assert dfa.accepts("b")
        assert not dfa.accepts("a")

    def test_concat_of_unions(self):
        """(a|b)(a*)."""
        from core.automata import (
            Concat,
            Union,
            UnaryEventuallyPeriodicSet,
            nfa_concat_union,
            singleton_dfa,
            words_of_length,
        )

        star = UnaryEventuallyPeriodicSet(0, 1, frozenset(), frozenset({0})).to_dfa("a", "ab")
        expr = Concat((Union((singleton_dfa("a", "ab"), singleton_dfa("b", "ab"))), star))
        dfa = nfa_concat_union(expr)
        assert words_of_length(dfa, 3) == {("a", "a", "a"), ("b", "a", "a")}

    def test_shared_subexpression(self):
        """The same leaf may appear twice in one tree."""
        from core.automata import Concat, nfa_concat_union, singleton_dfa

        leaf = singleton_dfa("a", "ab")
        assert nfa_concat_union(Concat((leaf, leaf))).accepts("aa")

    def test_alphabet_mismatch(self):
        """Leaves over different alphabets cannot be assembled."""
        from core.automata import Union, nfa_concat_union, singleton_dfa
        from core.errors import ConstructionError

        with pytest.raises(ConstructionError):
            nfa_concat_union(Union((singleton_dfa("a", "ab"), singleton_dfa("a", "abc"))))


# ============================================================
# DPDA Tests
# ============================================================
class TestDpda:
    """Test the extended DPDA model."""

    @pytest.mark.parametrize(
        "word, accepted",
        [("", True), ("ab", True), ("aabb", True), ("aab", False), ("abb", False), ("ba", False)],
    )
    def test_anbn(self, word, accepted):
        """Acceptance on (state, stack) pairs."""
        from core.automata import dpda_accepts

        assert dpda_accepts(_anbn(), word) is accepted

    def test_run_tracks_stack(self):
        """Stack depth follows the unmatched a's."""
        from core.automata import BOTTOM, dpda_run

        ids = list(dpda_run(_anbn(), "aab"))
        assert [len(stack) for _, stack in ids] == [1, 2, 3, 2]
        assert ids[-1] == ("qb", ("A", BOTTOM))

    def test_step(self):
        """One move replaces the top; a missing rule stops the run."""
        from core.automata import BOTTOM, dpda_step

        dpda = _anbn()
        assert dpda_step(dpda, ("qa", (BOTTOM,)), "a") == ("qa", ("A", BOTTOM))
        assert dpda_step(dpda, ("qa", ("A", BOTTOM)), "b") == ("qb", (BOTTOM,))
        assert dpda_step(dpda, ("qb", (BOTTOM,)), "b") is None

    def test_bottom_discipline(self):
        """Pushes may not bury or duplicate the bottom symbol."""
        from core.automata import BOTTOM, make_dpda
        from core.errors import ConstructionError

        def build(rule):
            return make_dpda(["a"], ["q"], ["A", BOTTOM], [rule], "q", [BOTTOM], [])

        with pytest.raises(ConstructionError):
            build(("a", "q", BOTTOM, "q", ()))
        with pytest.raises(ConstructionError):
            build(("a", "q", "A", "q", ("A", BOTTOM)))
        with pytest.raises(ConstructionError):
            build(("a", "q", "A", "q", ("A", "A", "A")))

    def test_nondeterminism_rejected(self):
        """Two rules on the same (input, state, top) are an error."""
        from core.automata import BOTTOM, make_dpda
        from core.errors import ConstructionError

        rules = [("a", "q", BOTTOM, "q", (BOTTOM,)), ("a", "q", BOTTOM, "q", ("A", BOTTOM))]
        with pytest.raises(ConstructionError):
            make_dpda(["a"], ["q"], ["A", BOTTOM], rules, "q", [BOTTOM], [])

    def test_json_round_trip(self):
        """A DPDA survives JSON with its language intact."""
        from core.automata import automaton_from_json, dpda_accepts

        loaded = automaton_from_json(_anbn().to_json())
        assert dpda_accepts(loaded, "aaabbb")
        assert not dpda_accepts(loaded, "aaabb")

    def test_dot_labels(self):
        """DPDA arcs read 'input, top / push'."""
        from core.automata import export_dot

        dot = export_dot(_anbn(), "anbn")
        assert dot.startswith('digraph "anbn" {')
        assert 'label="a, ⊥ / A⊥"' in dot
        assert 'label="b, A / ε"' in dot
        assert dot == export_dot(_anbn(), "anbn")


# ============================================================
# Unary Set Tests
# ============================================================
class TestUnaryFit:
    """Test eventually periodic fitting."""

    def test_finite(self):
        """A single length fits as a finite set."""
        from core.automata import unary_fit

        fitted = unary_fit({3}, 12)
        assert fitted.is_finite()
        assert fitted.members_up_to(30) == [3]

    def test_periodic(self):
        """Odd lengths fit with period 2 and no preperiod."""
        from core.automata import unary_fit

        fitted = unary_fit(set(range(1, 13, 2)), 12)
        assert (fitted.preperiod, fitted.period) == (0, 2)
        assert 101 in fitted and 100 not in fitted

    def test_all_naturals(self):
        """Every length up to the horizon fits as all of N."""
        from core.automata import unary_fit

        fitted = unary_fit(set(range(13)), 12)
        assert fitted.is_all_naturals()

    def test_insufficient_horizon(self):
        """A lone length at the horizon edge cannot be committed."""
        from core.automata import unary_fit
        from core.errors import FitError

        with pytest.raises(FitError, match="insufficient horizon"):
            unary_fit({12}, 12, "R̄")

    def test_to_dfa(self):
        """The unary DFA accepts exactly the member lengths."""
        from core.automata import UnaryEventuallyPeriodicSet

        s = UnaryEventuallyPeriodicSet(2, 3, frozenset({1}), frozenset({0}))
        dfa = s.to_dfa("a", ("a",))
        assert [k for k in range(12) if dfa.accepts("a" * k)] == [1, 3, 6, 9]
        assert s.members_up_to(11) == [1, 3, 6, 9]
