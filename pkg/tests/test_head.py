"""
tmdyn - Unit Tests for head dynamics: cycles, zigzags, n-cycles,
visits, preperiodicity and window stability.
"""

import pytest


# ============================================================
# Bounds Tests
# ============================================================
class TestBounds:
    """Test the closed-form bounds."""

    def test_visit_bound(self):
        """2 n |A|^(2N+1)."""
        from core.head import visit_bound

        assert visit_bound(1, 1, 2) == 16
        assert visit_bound(2, 0, 3) == 12

    def test_isolation_length(self):
        """|Q| |A|^(p+1) (p+1)^2."""
        from core.errors import InputError
        from core.fixtures import ping_pong
        from core.head import isolation_length

        assert isolation_length(ping_pong(), 2) == 18
        with pytest.raises(InputError):
            isolation_length(ping_pong(), 0)

    def test_visit_times(self):
        """PING_PONG visits cell 1 at every odd step."""
        from core.fixtures import ping_pong
        from core.head import visit_times
        from core.machine import Configuration, Head

        c = Configuration.uniform("a", Head("q0", 0))
        assert visit_times(ping_pong(), c, 1, 7) == {1, 3, 5, 7}


# ============================================================
# Cycle Tests
# ============================================================
class TestFindCycle:
    """Test cycle detection from a configuration."""

    def test_bounce_shift_first_sweep(self):
        """Walls at +-3: out to cell 3 at t=3, back at t=6."""
        from core.fixtures import bounce_shift, walled_configuration
        from core.head import RIGHT_CYCLE, find_cycle

        m = bounce_shift()
        witness = find_cycle(m, walled_configuration(3), 10, 100)
        assert witness.kind == RIGHT_CYCLE
        assert witness.width == 3
        assert witness.stamps == (0, 3, 6)
        assert witness.verify(m)

    def test_bounce_shift_three_wide_cycles(self):
        """Three successive cycles of width >= 3 within 200 steps."""
        from core.fixtures import bounce_shift, walled_configuration
        from core.head import find_cycle
        from core.machine import run

        m = bounce_shift()
        orbit = run(m, walled_configuration(3), 200)
        t, found = 0, []
        while len(found) < 3:
            witness = find_cycle(m, orbit[t], 10, 200 - t, min_width=3)
            assert witness is not None
            found.append(witness.width)
            t += witness.stamps[-1]
        assert all(w >= 3 for w in found)
        assert t <= 200

    def test_left_has_no_cycle(self):
        """LEFT never comes back."""
        from core.fixtures import left_mover
        from core.head import find_cycle
        from core.machine import Configuration, Head

        assert find_cycle(left_mover(), Configuration.uniform("a", Head("q", 0)), 6, 500) is None

    def test_requires_head(self):
        """Cycle search needs a head."""
        from core.errors import InputError
        from core.fixtures import left_mover
        from core.head import find_cycle
        from core.machine import Configuration

        with pytest.raises(InputError):
            find_cycle(left_mover(), Configuration.uniform("a"), 3, 10)


class TestFindNCycle:
    """Test n-cycle detection."""

    def test_nlevel_two_rebounds_per_wall(self):
        """NLEVEL(2) bounces twice on each wall: a 4-cycle of width 2."""
        from core.fixtures import nlevel, nlevel_walled_configuration
        from core.head import N_CYCLE, find_n_cycle

        m = nlevel(2)
        config = nlevel_walled_configuration(2, 3)
        witness = find_n_cycle(m, config, 4, 2, 100)
        assert witness.kind == N_CYCLE
        assert witness.stamps == tuple(range(0, 25, 3))
        assert witness.verify(m)
        assert find_n_cycle(m, config, 5, 2, 100) is None

    def test_rejects_n_zero(self):
        """n must be positive."""
        from core.errors import InputError
        from core.fixtures import ping_pong
        from core.head import find_n_cycle
        from core.machine import Configuration, Head

        with pytest.raises(InputError):
            find_n_cycle(ping_pong(), Configuration.uniform("a", Head("q0", 0)), 0, 1, 10)


# ============================================================
# Zigzag Tests
# ============================================================
class TestFindZigzag:
    """Test the window-wide zigzag search."""

    def test_ping_pong_width_one(self):
        """PING_PONG zigzags with width 1 and never wider."""
        from core.fixtures import ping_pong
        from core.head import find_zigzag

        m = ping_pong()
        witness = find_zigzag(m, 1, 3, 50)
        assert witness.width == 1
        assert witness.stamps == (0, 1, 2)
        assert witness.verify(m)
        assert find_zigzag(m, 2, 3, 50) is None

    def test_left_has_no_zigzag(self):
        """LEFT never returns to cell 0."""
        from core.fixtures import left_mover
        from core.head import find_zigzag

        assert find_zigzag(left_mover(), 1, 3, 40) is None

    def test_bounce_shift_wide_zigzag(self):
        """Some window makes BOUNCE_SHIFT zigzag with width >= 3."""
        from core.fixtures import bounce_shift
        from core.head import find_zigzag

        m = bounce_shift()
        witness = find_zigzag(m, 3, 8, 400)
        assert witness is not None
        assert witness.width >= 3
        assert witness.verify(m)
        assert set(witness.to_dict()) == {"kind", "base", "width", "stamps", "window", "head"}

    def test_budget(self):
        """A tiny branch budget is a BudgetExceededError."""
        from core.errors import BudgetExceededError
        from core.fixtures import bounce_shift
        from core.head import find_zigzag

        with pytest.raises(BudgetExceededError):
            find_zigzag(bounce_shift(), 3, 8, 400, max_branches=10)


# ============================================================
# Preperiodicity Tests
# ============================================================
class TestPreperiodicity:
    """Test exact repeat detection."""

    def test_ping_pong_period_two(self):
        """PING_PONG repeats after two steps with no transient."""
        from core.fixtures import ping_pong
        from core.head import detect_preperiodicity
        from core.machine import Configuration, Head

        cert = detect_preperiodicity(ping_pong(), Configuration.uniform("a", Head("q0", 0)), 20)
        assert (cert.transient, cert.period) == (0, 2)
        assert cert.to_dict()["interval"] == [0, 1]

    def test_left_never_repeats(self):
        """The head position keeps changing."""
        from core.fixtures import left_mover
        from core.head import detect_preperiodicity
        from core.machine import Configuration, Head

        assert detect_preperiodicity(left_mover(), Configuration.uniform("a", Head("q", 0)), 50) is None


# ============================================================
# Property Tests
# ============================================================
class TestHeadProperties:
    """Check the boundedness, isolation and visit-count properties on the corpus."""

    @pytest.mark.slow
    def test_bounded_head_iff_preperiodic(self):
        """Over every window of radius <= 3, a bounded head is exactly a found repeat."""
        from core.fixtures import all_configurations, left_mover, ping_pong
        from core.head import detect_preperiodicity, head_positions

        horizon = 500
        for machine in (ping_pong(), left_mover()):
            q, a = len(machine.states), len(machine.alphabet)
            for radius in (1, 2, 3):
                limit = q * a ** (2 * radius + 1) * (2 * radius + 1)
                for config in all_configurations(machine, radius):
                    reach = max(abs(pos) for _, pos in head_positions(machine, config, horizon))
                    bounded = reach <= 2 * radius + 1
                    cert = detect_preperiodicity(machine, config, horizon)
                    assert (cert is not None) == bounded, (machine.name, config)
                    if cert is not None:
                        assert cert.transient + cert.period <= limit

    def test_periodic_column_trace_is_isolated(self):
        """A word of length 2L starting with PING_PONG's periodic column trace is that trace."""
        from core.fixtures import ping_pong
        from core.head import detect_preperiodicity, isolation_length
        from core.machine import Configuration, Head
        from core.traces import enumerate_LSH, trace_H

        m = ping_pong()
        L = isolation_length(m, 2)
        assert L == 18
        sample = enumerate_LSH(m, 2 * L)
        for state in m.states:
            config = Configuration.uniform("a", Head(state, 0))
            assert detect_preperiodicity(m, config, 10).period == 2
            trace = tuple(trace_H(m, config, 2 * L))
            assert trace in sample
            matching = [w for w in sample.words if w[:L] == trace[:L]]
            assert matching == [trace]

    @pytest.mark.slow
    def test_visit_counts_stay_under_bound(self):
        """Without an n-cycle of width N from a cell, its visits stay within visit_bound(n, N, |A|)."""
        from core.fixtures import bounce_shift, left_mover, nlevel, sample_configurations
        from core.head import detect_preperiodicity, find_n_cycle, head_positions, visit_bound
        from core.machine import run

        horizon = 120
        machines = (bounce_shift(), nlevel(2), nlevel(3), left_mover())
        checked = 0
        for seed, machine in enumerate(machines):
            for config in sample_configurations(machine, 1000, radius=4, seed=seed):
                if checked == 1000:
                    break
                if detect_preperiodicity(machine, config, horizon) is not None:
                    continue
                checked += 1
                visits: dict[int, list[int]] = {}
                for t, pos in head_positions(machine, config, horizon):
                    visits.setdefault(pos, []).append(t)
                orbit = None
                for cell, times in visits.items():
                    for n in (1, 2, 3):
                        for N in (0, 1, 2):
                            if len(times) <= visit_bound(n, N, len(machine.alphabet)):
                                continue
                            orbit = orbit or run(machine, config, horizon)
                            first = times[0]
                            witness = find_n_cycle(machine, orbit[first], n, N, horizon - first)
                            assert witness is not None, (machine.name, config, cell, n, N)
        assert checked == 1000


# ============================================================
# Window Stability Tests
# ============================================================
class TestWindowStability:
    """Test the bounded equicontinuity check."""

    def test_left_head_can_walk_in(self):
        """A head just outside [-1, 1] reaches cell 0 within two steps."""
        from core.fixtures import left_mover
        from core.head import check_window_stability
        from core.machine import Configuration

        assert check_window_stability(left_mover(), Configuration.uniform("a"), 0, 1, 2) is False

    def test_wide_window_is_stable(self):
        """With m = horizon no outside head can reach cell 0 in time."""
        from core.fixtures import left_mover
        from core.head import check_window_stability
        from core.machine import Configuration

        assert check_window_stability(left_mover(), Configuration.uniform("a"), 0, 2, 2) is True

    def test_m_below_k(self):
        """m < k is an input error."""
        from core.errors import InputError
        from core.fixtures import left_mover
        from core.head import check_window_stability
        from core.machine import Configuration

        with pytest.raises(InputError):
            check_window_stability(left_mover(), Configuration.uniform("a"), 2, 1, 3)

    def test_ping_pong_never_reads_outside(self):
        """PING_PONG with its head on cell 0 only touches cells 0 and 1."""
        from core.fixtures import ping_pong
        from core.head import check_window_stability
        from core.machine import Configuration, Head

        config = Configuration.uniform("a", Head("q0", 0))
        assert check_window_stability(ping_pong(), config, 1, 1, 50) is True

    def test_marked_agreement_excludes_heads_inside_window(self):
        """Agreeing on marked cells [-2, 2] rules out a LEFT head on cell 2; one on cell 3 walks in."""
        from core.fixtures import left_mover
        from core.head import check_window_stability
        from core.machine import Configuration

        blank = Configuration.uniform("a")
        assert check_window_stability(left_mover(), blank, 0, 2, 2) is True
        assert check_window_stability(left_mover(), blank, 0, 2, 3) is False

    @pytest.mark.parametrize("name", ["PING_PONG", "LEFT", "BOUNCE_SHIFT", "NLEVEL(2)"])
    def test_window_covering_light_cone(self, name):
        """k = 0 and m = horizon is stable for every machine, with or without a head."""
        from core.fixtures import fixture
        from core.head import check_window_stability
        from core.machine import Configuration, Head

        m = fixture(name)
        for horizon in (1, 2, 3):
            for head in (None, Head(m.states[0], 0), Head(m.states[-1], horizon + 2)):
                config = Configuration.uniform(m.blank, head)
                assert check_window_stability(m, config, 0, horizon, horizon) is True
