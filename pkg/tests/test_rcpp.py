import random

import pytest
from hypothesis import given, settings, strategies as st

from parbisim import (
    Arbitrary,
    Common,
    NONE_LABEL,
    PolicyViolationError,
    PramEngine,
    Priority,
    RelationInput,
    SuperstepLimitError,
    block_count,
    brute_force_bisim_refining,
    is_stable,
    ks_sequential,
    partition_from_assignment,
    partitions_equal,
    rcpp_run,
    trivial_partition,
)
from parbisim.rcpp import (
    common_leader_election,
    phase_init,
    phase_mark,
    phase_select_splitter,
    phase_split,
)

from _support import (
    FIVE_STATE_FINAL,
    RefinementRecorder,
    assignment_for,
    five_state_input,
    five_state_relation,
    small_single_label_lts,
)

ALL_POLICIES = (Priority(), Arbitrary(seed=1), Arbitrary(seed=2), Common())


class TestPhaseInit:
    def test_discrete_pi0(self):
        mem = phase_init(RelationInput(3, (), partition_from_assignment([0, 1, 2])))
        assert mem["block"] == [0, 1, 2]
        assert mem["unstable"] == [True, True, True]
        assert mem["mark"] == [False, False, False]
        assert mem.scalar("C") == NONE_LABEL

    def test_single_block_pi0(self):
        mem = phase_init(RelationInput(3, (), trivial_partition(3)))
        assert sum(mem["unstable"]) == 1
        assert mem["unstable"][0]

    def test_pi0_normalized_to_leader_form(self):
        # assignment ids are arbitrary; memory must hold leader indices
        pi0 = partition_from_assignment([9, 9, 4])
        mem = phase_init(RelationInput(3, (), pi0))
        assert mem["block"] == [0, 0, 2]


class TestSelectSplitter:
    @staticmethod
    def _memory(assignment, n_override=None):
        n = n_override or len(assignment)
        return phase_init(RelationInput(n, (), partition_from_assignment(assignment)))

    def test_priority_picks_lowest_unstable(self):
        mem = self._memory([0, 0, 0, 1, 1, 1, 1, 2, 2, 2])
        mem.store(("unstable", 0), False)  # leave {3, 7} unstable
        engine = PramEngine(Priority())
        engine.begin_superstep()
        phase_select_splitter(mem, engine)
        assert mem.scalar("C") == 3

    def test_no_unstable_block_leaves_c_empty(self):
        mem = self._memory([0, 0])
        mem.store(("unstable", 0), False)
        engine = PramEngine(Priority())
        engine.begin_superstep()
        phase_select_splitter(mem, engine)
        assert mem.scalar("C") == NONE_LABEL

    def test_single_unstable_block_is_common_legal(self):
        mem = self._memory([0, 0, 0, 0, 0, 1])
        mem.store(("unstable", 0), False)  # only label 5 unstable
        engine = PramEngine(Common())
        engine.begin_superstep()
        phase_select_splitter(mem, engine)
        assert mem.scalar("C") == 5

    def test_two_unstable_blocks_conflict_under_plain_common(self):
        mem = self._memory([0, 0, 1, 1])
        engine = PramEngine(Common())
        engine.begin_superstep()
        with pytest.raises(PolicyViolationError) as err:
            phase_select_splitter(mem, engine)
        assert err.value.values == [0, 2]

    def test_election_makes_selection_common_legal(self):
        mem = self._memory([0, 0, 1, 1])
        engine = PramEngine(Common())
        engine.begin_superstep()
        phase_select_splitter(mem, engine, common_election=True)
        assert mem.scalar("C") in (0, 2)

    def test_marks_reset_by_selection(self):
        mem = self._memory([0, 0])
        mem["mark"][:] = [True, True]
        engine = PramEngine(Priority())
        engine.begin_superstep()
        phase_select_splitter(mem, engine)
        assert mem["mark"] == [False, False]


class TestMarkAndSplit:
    def test_golden_first_iteration(self):
        """Driving the block {3,4} as the first splitter must mark {0,1} and
        then separate state 2 from {0,1}."""
        rel = five_state_input()
        mem = phase_init(rel)
        mem.store(("unstable", 0), False)  # force the {3,4} block to go first
        engine = PramEngine(Priority())
        engine.begin_superstep()
        phase_select_splitter(mem, engine)
        assert mem.scalar("C") == 3

        phase_mark(mem, rel.edges, engine)
        assert mem["mark"] == [True, True, False, False, False]

        phase_split(mem, engine)
        assert mem["block"] == [0, 0, 2, 3, 3]
        # the split block and its offshoot become unstable, the splitter rests
        assert mem["unstable"] == [True, False, True, False, False]

    def test_mark_block_without_predecessors(self):
        rel = RelationInput(3, ((0, 1),), partition_from_assignment([0, 1, 2]))
        mem = phase_init(rel)
        mem.store("C", 2)  # nothing reaches state 2
        engine = PramEngine(Priority())
        phase_mark(mem, rel.edges, engine)
        assert mem["mark"] == [False, False, False]

    def test_duplicate_edges_mark_once(self):
        rel = RelationInput(2, ((0, 1), (0, 1), (0, 1)), partition_from_assignment([0, 1]))
        mem = phase_init(rel)
        mem.store("C", 1)
        engine = PramEngine(Priority())
        phase_mark(mem, rel.edges, engine)
        assert mem["mark"] == [True, False]

    def test_uniformly_marked_block_does_not_split(self):
        rel = RelationInput(4, ((0, 3), (1, 3), (2, 3)), partition_from_assignment([0, 0, 0, 1]))
        mem = phase_init(rel)
        engine = PramEngine(Priority())
        engine.begin_superstep()
        mem.store("C", 3)
        phase_mark(mem, rel.edges, engine)
        assert mem["mark"] == [True, True, True, False]
        phase_split(mem, engine)
        assert mem["block"] == [0, 0, 0, 3]
        assert mem["unstable"][3] is False  # splitter settled, nothing split

    def test_singleton_blocks_never_split(self):
        rel = RelationInput(2, ((0, 1),), partition_from_assignment([0, 1]))
        mem = phase_init(rel)
        engine = PramEngine(Priority())
        engine.begin_superstep()
        mem.store("C", 1)
        phase_mark(mem, rel.edges, engine)
        phase_split(mem, engine)
        assert mem["block"] == [0, 1]


class TestCommonElection:
    def test_smallest_splitter_survives(self):
        # block {0,1,2} with splitters {1,2}; block {3} is the splitter C
        rel = RelationInput(4, (), partition_from_assignment([0, 0, 0, 1]))
        mem = phase_init(rel)
        mem.store("C", 3)
        mem["mark"][:] = [False, True, True, False]
        engine = PramEngine(Common())
        common_leader_election(mem, engine)
        assert mem["new_leader"][0] == 1
        assert mem["unstable"][3] is False

    def test_single_splitter_elected(self):
        rel = RelationInput(3, (), partition_from_assignment([0, 0, 1]))
        mem = phase_init(rel)
        mem.store("C", 2)
        mem["mark"][:] = [False, True, False]
        engine = PramEngine(Common())
        common_leader_election(mem, engine)
        assert mem["new_leader"][0] == 1

    def test_plain_common_split_conflicts_on_two_splitters(self):
        rel = RelationInput(4, (), trivial_partition(4))
        mem = phase_init(rel)
        mem.store("C", 0)
        mem["mark"][:] = [False, True, True, False]
        engine = PramEngine(Common())
        with pytest.raises(PolicyViolationError) as err:
            phase_split(mem, engine)
        assert err.value.address == ("new_leader", 0)
        assert err.value.values == [1, 2]

    def test_full_run_equals_priority_run(self):
        rel = five_state_input()
        common_part, _ = rcpp_run(rel, Common())
        priority_part, _ = rcpp_run(rel, Priority())
        assert partitions_equal(common_part, priority_part)


class TestRcppRun:
    def test_five_state_final_partition(self):
        for policy in ALL_POLICIES:
            part, stats = rcpp_run(five_state_input(), policy)
            assert part.block == FIVE_STATE_FINAL
            assert stats.final_block_count == 4
            assert stats.initial_block_count == 2
            assert stats.supersteps <= 2 * 5 - 2

    def test_edge_free_single_block(self):
        part, stats = rcpp_run(RelationInput(4, (), trivial_partition(4)), Priority())
        assert part.block == (0, 0, 0, 0)
        # the only iteration selects the lone block, finds nothing to split
        # and retires it; the closing look-around is not counted
        assert stats.supersteps == 1
        assert stats.splits_per_iteration == (0,)

    def test_plain_common_violates_on_multi_state_split(self):
        # two states must move out of {0,1,2} at once: illegal common write
        rel = RelationInput(3, ((1, 0), (2, 0)), trivial_partition(3))
        with pytest.raises(PolicyViolationError):
            rcpp_run(rel, Common(), common_election=False)
        part, _ = rcpp_run(rel, Common(), common_election=True)
        assert partitions_equal(part, partition_from_assignment([0, 1, 1]))

    def test_arbitrary_runs_are_reproducible(self):
        rel = five_state_input()
        a_part, a_stats = rcpp_run(rel, Arbitrary(seed=99))
        b_part, b_stats = rcpp_run(rel, Arbitrary(seed=99))
        assert a_part == b_part
        assert a_stats == b_stats

    def test_superstep_guard_trips(self):
        with pytest.raises(SuperstepLimitError):
            rcpp_run(five_state_input(), Priority(), max_supersteps=1)

    def test_observer_sees_monotone_chain(self):
        rel = five_state_input()
        recorder = RefinementRecorder()
        part, stats = rcpp_run(rel, Priority(), observer=recorder)
        assert len(recorder.chain) == stats.supersteps
        assert recorder.chain[-1] == part
        final = brute_force_bisim_refining(five_state_relation(), rel.pi0)
        assert recorder.never_splits(final)

    def test_unstable_flags_all_false_on_exit(self):
        rel = five_state_input()
        mem = phase_init(rel)
        engine = PramEngine(Priority(), max_supersteps=3 * rel.n + 9)
        while True:
            engine.begin_superstep()
            phase_select_splitter(mem, engine)
            if mem.scalar("C") == NONE_LABEL:
                break
            phase_mark(mem, rel.edges, engine)
            phase_split(mem, engine)
        assert not any(mem["unstable"])
        assert is_stable(five_state_relation(),
                         partition_from_assignment(mem["block"]))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            RelationInput(2, ((0, 5),), trivial_partition(2))
        with pytest.raises(ValueError):
            RelationInput(2, (), trivial_partition(3))


@settings(max_examples=60, deadline=None)
@given(data=st.data(), lts=small_single_label_lts())
def test_matches_sequential_and_brute_force(data, lts):
    assignment = data.draw(assignment_for(lts.n))
    pi0 = partition_from_assignment(assignment)
    rel = RelationInput(lts.n, tuple((t.source, t.target) for t in lts.transitions), pi0)
    expected = brute_force_bisim_refining(lts, pi0)
    assert partitions_equal(ks_sequential(lts, pi0), expected)
    for policy in ALL_POLICIES:
        recorder = RefinementRecorder()
        part, stats = rcpp_run(rel, policy, observer=recorder)
        assert partitions_equal(part, expected)
        assert stats.supersteps <= 2 * lts.n - block_count(pi0)
        assert recorder.never_splits(expected)
        assert is_stable(lts, part)


@settings(max_examples=40, deadline=None)
@given(lts=small_single_label_lts(), seed=st.integers(0, 2 ** 32 - 1))
def test_policy_choice_never_changes_the_answer(lts, seed):
    rel = RelationInput(lts.n, tuple((t.source, t.target) for t in lts.transitions),
                        trivial_partition(lts.n))
    baseline, _ = rcpp_run(rel, Priority())
    seeded, _ = rcpp_run(rel, Arbitrary(seed=seed))
    common, _ = rcpp_run(rel, Common())
    assert partitions_equal(baseline, seeded)
    assert partitions_equal(baseline, common)
