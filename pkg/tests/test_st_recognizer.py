"""
tmdyn - Unit Tests for the S_T recognizers: window DFAs, excursion DPDAs
and the phase decider against the oracle.
"""

import pytest


def _partial(word, state, position):
    from core.st_recognizer import PartialConfiguration

    return PartialConfiguration(tuple(word), state, position)


def _excursion_automata(machine, N):
    """Every (outward direction, start, DPDA) that build_R or build_L accepts at radius N."""
    from core.errors import ConstructionError
    from core.st_recognizer import PartialConfiguration, all_partials, build_L, build_R

    built = []
    for outward, build in ((1, build_R), (-1, build_L)):
        for u in all_partials(machine, N, outward * N):
            home = PartialConfiguration(u.word, u.state, 0)
            try:
                built.append((outward, u, build(machine, N, u, home)))
            except ConstructionError:
                continue
    return built


def _table_entry(machine, N, outward, state, letter, top):
    """Expected move of an excursion automaton, read off the push/pop table."""
    from core.automata import BOTTOM
    from core.st_recognizer import REJECT

    if state == REJECT or state[0] == "H":
        return REJECT, (top,)
    _, ahead, q = state
    symbol, p = letter
    if p != q or (ahead and ahead[0] != symbol):
        return REJECT, (top,)
    written, nxt = machine.delta_A(symbol, p), machine.delta_Q(symbol, p)
    if machine.delta_D(symbol, p) == outward:
        return ("R", ahead[1:], nxt), (written, top)
    if top == BOTTOM:
        return ("H", (written,) + ahead[1:N], nxt), (BOTTOM,)
    # pop: the popped cell becomes the head cell, at most N cells kept
    return ("R", ((top, written) + ahead[1:N - 1])[:N], nxt), ()


def _fixture(name):
    from core.fixtures import fixture

    return fixture(name)


# ============================================================
# Partial Configuration Tests
# ============================================================
class TestPartialConfiguration:
    """Test windows with a head."""

    def test_cells_are_centered(self):
        """Cell i of a radius-N window is word[i + N]."""
        p = _partial("abc", "q", 1)
        assert p.radius == 1
        assert p.cells(-1, 1) == ("a", "b", "c")
        assert str(p) == "(abc, q, 1)"

    def test_invalid_shapes(self):
        """Even-length words and out-of-window heads are rejected."""
        from core.errors import InputError

        with pytest.raises(InputError):
            _partial("ab", "q", 0)
        with pytest.raises(InputError):
            _partial("abc", "q", 2)

    def test_reflect_partial(self):
        """Mirroring reverses the word and negates the position."""
        from core.st_recognizer import reflect_partial

        assert reflect_partial(_partial("abc", "q", 1)) == _partial("cba", "q", -1)


# ============================================================
# Window Phase Tests
# ============================================================
class TestBuildC:
    """Test the window-phase DFA."""

    def test_periodic_window_is_infinite(self):
        """PING_PONG at radius 2 loops forever inside the window."""
        from core.automata import words_of_length
        from core.fixtures import ping_pong
        from core.st_recognizer import build_C

        u = _partial("aaaaa", "q0", 0)
        dfa = build_C(ping_pong(), 2, u, u)
        assert words_of_length(dfa, 4) == {(("a", "q0"), ("a", "q1"), ("a", "q0"), ("a", "q1"))}
        assert words_of_length(dfa, 3) == set()
        assert words_of_length(dfa, 8)

    def test_exit_after_one_step(self):
        """LEFT leaves a radius-1 window after one read."""
        from core.automata import words_of_length
        from core.fixtures import left_mover
        from core.st_recognizer import build_C

        dfa = build_C(left_mover(), 1, _partial("aba", "q", 0), _partial("aba", "q", -1))
        assert words_of_length(dfa, 1) == {(("b", "q"),)}
        assert words_of_length(dfa, 2) == set()

    def test_radius_mismatch(self):
        """u and v must have the requested radius."""
        from core.errors import ConstructionError
        from core.fixtures import left_mover
        from core.st_recognizer import build_C

        with pytest.raises(ConstructionError):
            build_C(left_mover(), 2, _partial("aba", "q", 0), _partial("aba", "q", 0))


# ============================================================
# Excursion Tests
# ============================================================
class TestExcursions:
    """Test the right and left excursion DPDAs."""

    def test_ping_pong_right_excursion_returns(self):
        """From cell 1 in q1 the head is home after one read."""
        from core.automata import dpda_accepts
        from core.fixtures import ping_pong
        from core.st_recognizer import build_R

        dpda = build_R(ping_pong(), 1, _partial("aaa", "q1", 1), _partial("aaa", "q0", 0))
        assert dpda_accepts(dpda, [("a", "q1")])
        assert not dpda_accepts(dpda, [])
        assert not dpda_accepts(dpda, [("a", "q0")])
        assert not dpda_accepts(dpda, [("a", "q1"), ("a", "q0")])

    def test_stack_depth_is_head_position(self):
        """Stack depth above the bottom plus one is the head position."""
        from core.automata import dpda_run
        from core.fixtures import left_mover
        from core.machine import reflect_machine
        from core.st_recognizer import build_R

        right_mover = reflect_machine(left_mover())
        u = _partial("aab", "q", 1)
        dpda = build_R(right_mover, 1, u, _partial("aab", "q", 1))
        word = [("b", "q"), ("a", "q"), ("b", "q"), ("b", "q")]
        ids = list(dpda_run(dpda, word))
        assert len(ids) == 5
        assert [len(stack) - 1 + 1 for _, stack in ids] == [1, 2, 3, 4, 5]

    def test_left_excursion_is_mirrored(self):
        """build_L runs build_R on the mirror image."""
        from core.automata import dpda_accepts
        from core.fixtures import left_mover
        from core.st_recognizer import build_L

        u = _partial("aba", "q", -1)
        dpda = build_L(left_mover(), 1, u, u)
        assert dpda_accepts(dpda, [])
        assert not dpda_accepts(dpda, [("a", "q")])

    def test_preconditions(self):
        """Wrong start cell, disagreeing halves and unreachable starts are refused."""
        from core.errors import ConstructionError
        from core.fixtures import ping_pong
        from core.st_recognizer import build_L, build_R

        m = ping_pong()
        home = _partial("aaa", "q0", 0)
        with pytest.raises(ConstructionError):
            build_R(m, 1, _partial("aaa", "q1", 0), home)
        with pytest.raises(ConstructionError):
            build_R(m, 1, _partial("aaa", "q0", 1), home)
        with pytest.raises(ConstructionError):
            build_L(m, 1, _partial("aaa", "q1", 1), home)
        with pytest.raises(ConstructionError):
            build_R(m, 0, _partial("a", "q1", 0), _partial("a", "q1", 0))

    def test_zigzag_bound(self):
        """2^(|Q|^2 |Γ|^2 + 1) + 3."""
        from core.errors import InputError
        from core.st_recognizer import zigzag_bound_from_dpda

        assert zigzag_bound_from_dpda(1, 1) == 7
        assert zigzag_bound_from_dpda(2, 2) == 131075
        with pytest.raises(InputError):
            zigzag_bound_from_dpda(0, 1)


class TestExcursionTable:
    """Walk every excursion automaton against the push/pop table."""

    @pytest.mark.parametrize("name, N", [
        ("PING_PONG", 1),
        ("LEFT", 1),
        ("LEFT", 2),
        ("BOUNCE_SHIFT", 1),
        pytest.param("BOUNCE_SHIFT", 2, marks=pytest.mark.slow),
    ])
    def test_every_transition_matches_table(self, name, N):
        """Right move pushes, left move pops and truncates, anything else rejects."""
        from itertools import product

        from core.automata import BOTTOM

        machine = _fixture(name)
        built = _excursion_automata(machine, N)
        assert built
        for outward, u, dpda in built:
            assert dpda.stack_alphabet == machine.alphabet + (BOTTOM,)
            triples = set(product(dpda.input_alphabet, dpda.states, dpda.stack_alphabet))
            assert set(dpda.transitions) == triples
            for letter, state, top in triples:
                expected = _table_entry(machine, N, outward, state, letter, top)
                assert dpda.transitions[(letter, state, top)] == expected, (str(u), state, letter, top)

    @pytest.mark.parametrize("name, N", [("PING_PONG", 1), ("LEFT", 2), ("BOUNCE_SHIFT", 2)])
    def test_initial_description(self, name, N):
        """The start state holds the exit cell; the stack holds cells 1..N-1 nearest first."""
        from core.automata import BOTTOM

        machine = _fixture(name)
        for outward, u, dpda in _excursion_automata(machine, N):
            assert dpda.initial == ("R", (u.cell(outward * N),), u.state)
            inner = tuple(u.cell(outward * i) for i in range(N - 1, 0, -1))
            assert dpda.initial_stack == inner + (BOTTOM,)

    @pytest.mark.parametrize("name, N", [
        ("PING_PONG", 1),
        ("LEFT", 1),
        ("LEFT", 2),
        ("BOUNCE_SHIFT", 1),
        pytest.param("BOUNCE_SHIFT", 2, marks=pytest.mark.slow),
    ])
    def test_bottom_discipline_on_all_runs(self, name, N):
        """Along every run of length <= 8 the stack keeps one bottom symbol, last."""
        from core.automata import BOTTOM, dpda_step
        from core.st_recognizer import REJECT

        machine = _fixture(name)
        for _, u, dpda in _excursion_automata(machine, N):
            layer = {(dpda.initial, dpda.initial_stack)}
            for depth in range(1, 9):
                nxt = set()
                for description in layer:
                    for letter in dpda.input_alphabet:
                        moved = dpda_step(dpda, description, letter)
                        assert moved is not None, (str(u), description, letter)
                        state, stack = moved
                        assert stack[-1] == BOTTOM and stack.count(BOTTOM) == 1
                        assert len(stack) <= len(dpda.initial_stack) + depth
                        if state != REJECT:
                            nxt.add(moved)
                layer = nxt


# ============================================================
# Phase Decider Tests
# ============================================================
class TestPhaseDecider:
    """Test the guess-and-check decider."""

    def test_ping_pong_membership(self):
        """Alternating states are accepted, repeats are not."""
        from core.fixtures import ping_pong
        from core.st_recognizer import build_decider, st_membership

        decider = build_decider(ping_pong(), 1)
        assert decider.guess_count == 2
        assert st_membership(decider, [("a", "q0"), ("a", "q1"), ("a", "q0")])
        assert not st_membership(decider, [("a", "q0"), ("a", "q0")])

    def test_phases_of(self):
        """PING_PONG stays in the window at width 1."""
        from core.fixtures import ping_pong
        from core.st_recognizer import build_decider

        decider = build_decider(ping_pong(), 1)
        assert decider.phases_of([("a", "q0"), ("a", "q1")] * 3) == {"C"}

    def test_left_uses_one_excursion(self):
        """LEFT leaves its window to the left and stays out."""
        from core.fixtures import left_mover
        from core.st_recognizer import build_decider

        decider = build_decider(left_mover(), 0)
        assert decider.phases_of([("a", "q"), ("b", "q"), ("b", "q")]) == {"CL"}

    def test_describe(self):
        """The manifest lists width, radius and the nine phase cases."""
        from core.fixtures import ping_pong
        from core.st_recognizer import build_decider

        manifest = build_decider(ping_pong(), 1).describe()
        assert manifest["width"] == 1
        assert manifest["window_radius"] == 2
        assert len(manifest["cases"]) == 9

    def test_negative_width(self):
        """Width must be non-negative."""
        from core.errors import InputError
        from core.fixtures import ping_pong
        from core.st_recognizer import build_decider

        with pytest.raises(InputError):
            build_decider(ping_pong(), -1)


class TestStEquivalence:
    """Compare decider slices with the oracle."""

    def test_ping_pong_short(self):
        """PING_PONG at width 1 matches up to length 5."""
        from core.fixtures import ping_pong
        from core.st_recognizer import st_equivalence_check

        assert st_equivalence_check(ping_pong(), 1, 5).equal

    @pytest.mark.slow
    def test_ping_pong(self):
        """PING_PONG at width 1 matches up to length 8."""
        from core.fixtures import ping_pong
        from core.st_recognizer import st_equivalence_check

        report = st_equivalence_check(ping_pong(), 1, 8)
        assert report.equal
        assert [c.length for c in report.lengths] == list(range(1, 9))

    @pytest.mark.slow
    def test_left(self):
        """LEFT at width 0 matches up to length 8."""
        from core.fixtures import left_mover
        from core.st_recognizer import st_equivalence_check

        assert st_equivalence_check(left_mover(), 0, 8).equal

    @pytest.mark.slow
    def test_bounce_shift_falsified_at_window_radius_2(self):
        """BOUNCE_SHIFT zigzags wider than 1, so the width-1 decider (windows of radius 2) differs at length 6."""
        from core.fixtures import bounce_shift
        from core.st_recognizer import st_equivalence_check

        report = st_equivalence_check(bounce_shift(), 1, 8)
        assert not report.equal
        assert report.first_mismatch.length == 6
