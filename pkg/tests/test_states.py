"""Circulation-state combinatorics and clock synthesis."""

import itertools
import math

import pytest

from sdlsim import (
    CirculationState,
    ConfigError,
    canonical_schedule,
    count_b_given_a,
    count_states,
    enumerate_states,
    is_admissible,
    reduce_network,
    reduced_circulation,
    state_from_dict,
    synth_schedule,
    validate_schedule,
)
from sdlsim.states import brute_force_count

from conftest import ideal_spec_n

CLOCKWISE_4 = {1: 2, 2: 3, 3: 4, 4: 1}
COUNTERCLOCKWISE_4 = {1: 4, 4: 3, 3: 2, 2: 1}


class TestAdmissibility:
    def test_clockwise_is_admissible(self, ideal_spec):
        ok, violations = is_admissible(CLOCKWISE_4, ideal_spec)
        assert ok and not violations

    def test_two_cycles_rejected(self, ideal_spec):
        ok, violations = is_admissible({1: 2, 2: 1, 3: 4, 4: 3}, ideal_spec)
        assert not ok
        assert any("two-cycle" in v for v in violations)

    def test_same_side_rejected(self, ideal_spec):
        ok, violations = is_admissible({1: 3, 3: 1, 2: 4, 4: 2}, ideal_spec)
        assert not ok
        assert any("same side" in v for v in violations)

    def test_non_bijection_rejected(self, ideal_spec):
        with pytest.raises(ConfigError, match="bijection"):
            is_admissible({1: 2, 3: 2, 2: 1, 4: 3}, ideal_spec)

    def test_admissible_states_have_even_alternating_cycles(self):
        spec = ideal_spec_n(3)
        for state in enumerate_states(3):
            for cyc in state.cycles():
                assert len(cyc) % 2 == 0 and len(cyc) >= 4
                sides = [p % 2 for p in cyc]
                assert all(sides[i] != sides[(i + 1) % len(sides)] for i in range(len(sides)))
            ok, _ = is_admissible(state, spec)
            assert ok


class TestCounting:
    @pytest.mark.parametrize("n,expect", [(0, 1), (1, 0), (2, 1), (3, 2), (4, 9), (5, 44)])
    def test_reverse_route_count(self, n, expect):
        assert count_b_given_a(n) == expect

    def test_reverse_route_count_matches_direct_enumeration(self):
        # oracle: permutations avoiding a fixed permutation's positions
        for n in range(0, 7):
            fixed = tuple(range(n))
            avoid = sum(
                1 for perm in itertools.permutations(range(n))
                if all(perm[i] != fixed[i] for i in range(n))
            )
            assert count_b_given_a(n) == avoid

    @pytest.mark.parametrize("n,expect", [(1, 0), (2, 2), (3, 12), (4, 216), (5, 5280)])
    def test_state_count(self, n, expect):
        assert count_states(n) == expect

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_formula_equals_brute_force(self, n):
        assert count_states(n) == brute_force_count(n)

    def test_exact_arbitrary_precision(self):
        # far beyond 64-bit range; formula identity count = n! * D_n
        n = 30
        val = count_states(n)
        assert val == math.factorial(n) * count_b_given_a(n)
        assert val > 2**200


class TestEnumeration:
    def test_four_port_states_are_the_two_rotations(self):
        states = [s.perm for s in enumerate_states(2)]
        assert len(states) == 2
        assert CLOCKWISE_4 in states and COUNTERCLOCKWISE_4 in states

    def test_single_line_yields_nothing(self):
        assert list(enumerate_states(1)) == []

    def test_limit_prefix(self):
        limited = list(enumerate_states(3, limit=5))
        assert len(limited) == 5
        assert limited == list(enumerate_states(3))[:5]
        assert len(set(limited)) == 5

    def test_complete_and_distinct_up_to_four_lines(self):
        for n in (2, 3, 4):
            states = list(enumerate_states(n))
            assert len(states) == count_states(n)
            assert len(set(states)) == len(states)

    def test_large_n_requires_limit(self):
        with pytest.raises(ConfigError, match="limit"):
            enumerate_states(9)

    def test_iterators_are_independent(self):
        it1 = enumerate_states(2)
        it2 = enumerate_states(2)
        first = next(it1)
        assert list(it2)[0] == first

    def test_sub_matrix_views(self):
        state = CirculationState.from_mapping(CLOCKWISE_4)
        a = state.matrix_a(2)
        b = state.matrix_b(2)
        # 1->2 and 3->4 forward; 2->3 and 4->1 reverse
        assert a.tolist() == [[1, 0], [0, 1]]
        assert b.tolist() == [[0, 1], [1, 0]]
        # nonreciprocity: no coincident entries between B and A-transposed
        assert not (a.T & b).any()

    def test_state_document_round_trip(self):
        state = CirculationState.from_mapping(CLOCKWISE_4)
        assert state_from_dict(state.to_dict()) == state


class TestSynthSchedule:
    def test_clockwise_reproduces_canonical(self, ideal_spec):
        state = CirculationState.from_mapping(CLOCKWISE_4)
        sched = synth_schedule(state, ideal_spec)
        assert sched == canonical_schedule(2, ideal_spec.delay)

    def test_two_cycle_state_uses_sub_periods(self):
        spec = ideal_spec_n(4)
        state = CirculationState.from_mapping(
            {1: 2, 2: 3, 3: 4, 4: 1, 5: 6, 6: 7, 7: 8, 8: 5}
        )
        sched = synth_schedule(state, spec)
        # two independent 4-port circulators, each with period 4*delta
        assert sched.hyperperiod == pytest.approx(4 * spec.delay, rel=1e-9)
        report = validate_schedule(sched, spec)
        assert report.ok
        for duty in report.duty_cycles.values():
            assert duty == pytest.approx(0.5, abs=1e-12)
        # first cycle on lines 1-2, second on lines 3-4
        assert {n for (p, n) in sched.switches if p <= 4} == {1, 2}
        assert {n for (p, n) in sched.switches if p >= 5} == {3, 4}

    def test_six_cycle_state(self):
        spec = ideal_spec_n(3)
        state = CirculationState.from_mapping({1: 4, 4: 5, 5: 2, 2: 3, 3: 6, 6: 1})
        sched = synth_schedule(state, spec)
        assert sched.hyperperiod == pytest.approx(6 * spec.delay, rel=1e-9)
        assert validate_schedule(sched, spec).ok

    def test_mixed_cycle_lengths_use_lcm_hyperperiod(self):
        spec = ideal_spec_n(5)
        # one 4-cycle (c=2) and one 6-cycle (c=3): lcm period = 12*delta
        state = CirculationState.from_mapping(
            {1: 2, 2: 3, 3: 4, 4: 1, 5: 6, 6: 7, 7: 8, 8: 9, 9: 10, 10: 5}
        )
        sched = synth_schedule(state, spec)
        assert sched.hyperperiod == pytest.approx(12 * spec.delay, rel=1e-9)
        report = validate_schedule(sched, spec)
        assert report.ok

    def test_every_three_line_state_validates(self):
        spec = ideal_spec_n(3)
        for state in enumerate_states(3):
            report = validate_schedule(synth_schedule(state, spec), spec)
            assert report.ok, state

    def test_inadmissible_state_rejected(self, ideal_spec):
        state = CirculationState.from_mapping({1: 2, 2: 1, 3: 4, 4: 3})
        with pytest.raises(ConfigError, match="inadmissible"):
            synth_schedule(state, ideal_spec)

    def test_reduced_network_rejected(self, ideal_spec):
        red = reduce_network(ideal_spec, 4)
        state = CirculationState.from_mapping(CLOCKWISE_4)
        with pytest.raises(ConfigError, match="2N ports"):
            synth_schedule(state, red)


class TestReducedCirculation:
    def test_skips_removed_port(self, ideal_spec):
        red = reduce_network(ideal_spec, 4)
        assert reduced_circulation(red) == {1: 2, 2: 3, 3: 1}

    def test_full_network_is_rotation(self, ideal_spec):
        assert reduced_circulation(ideal_spec) == CLOCKWISE_4
