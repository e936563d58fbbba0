"""Labeled bisimulation refinement on the PRAM engine.

Solves the bisimulation coarsest refinement problem for labeled systems.  The
single mark bit per state of the unlabeled algorithm becomes one mark slot
per (state, outgoing label) pair, laid out contiguously per state:

* transitions are sorted by (source, action id),
* ``action_switch[i]`` is 1 exactly when transition i starts a new label
  group within its source's run of transitions,
* ``order[i]`` (segmented inclusive sum of the switches) is the rank of
  transition i's label among its source's distinct labels,
* ``nr_marks[s]`` counts s's distinct outgoing labels and ``off`` is the
  exclusive prefix sum of ``nr_marks``, so transition i owns mark slot
  ``off[source] + order[i]``.

States only ever share a block with states of an equal outgoing-label set
(the preprocessing step splits by label sets before the main loop), which is
what makes "compare my slot against my leader's slot for the same label"
well defined: the leader's slot for that label sits at the same rank.

A main-loop iteration mirrors the unlabeled driver with two twists: marking
writes into per-label slots, and a separate tagging pass over transitions
derives the per-state ``split`` flag.  Because a block can be heterogeneous
across several labels at once, splitting by one label may leave the block
still unstable under C, so any split re-flags C unstable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .lts import Lts, Partition, RunStats, Transition, block_count
from .pram import Common, PramEngine, SharedMemory, WritePolicy
from .rcpp import NONE_LABEL, _splitter_elimination, pairwise_leader_election


@dataclass(frozen=True)
class BcrpAux:
    """Preprocessing tables; all of them are fixed once computed."""

    lts: Lts                        # transitions sorted by (source, action)
    action_switch: tuple[int, ...]
    order: tuple[int, ...]
    nr_marks: tuple[int, ...]
    off: tuple[int, ...]
    mark_length: int


def sort_transitions(lts: Lts) -> Lts:
    """Stable-sort transitions by (source, action id)."""
    ordered = sorted(lts.transitions, key=lambda t: (t.source, t.action))
    return replace(lts, transitions=tuple(ordered))


def compute_action_switch(transitions) -> list[int]:
    """1 where a transition starts a new label group inside its source's run."""
    out = []
    prev = None
    for t in transitions:
        if prev is None or t.source != prev.source or t.action == prev.action:
            out.append(0)
        else:
            out.append(1)
        prev = t
    return out


def segmented_prefix_sum(values, segment_starts, *, inclusive: bool = False) -> list[int]:
    """Running sums that restart at every flagged position.

    ``segment_starts[i]`` true means position i opens a new segment.  The
    exclusive variant reports the sum strictly before each position; the
    inclusive variant includes the position itself.
    """
    if len(values) != len(segment_starts):
        raise ValueError("values and segment flags differ in length")
    out = []
    run = 0
    for v, start in zip(values, segment_starts):
        if start:
            run = 0
        if inclusive:
            run += v
            out.append(run)
        else:
            out.append(run)
            run += v
    return out


def compute_order_and_offsets(action_switch, transitions, n: int):
    """Per-transition label ranks plus per-state slot counts and offsets.

    Returns ``(order, nr_marks, off, mark_length)``.  Requires transitions
    sorted by (source, action), matching ``action_switch``.
    """
    if len(action_switch) != len(transitions):
        raise ValueError("action_switch and transitions differ in length")
    starts = []
    prev_source = None
    for t in transitions:
        starts.append(t.source != prev_source)
        prev_source = t.source
    order = segmented_prefix_sum(action_switch, starts, inclusive=True)
    nr_marks = [0] * n
    for i, t in enumerate(transitions):
        nr_marks[t.source] = order[i] + 1   # last transition of the run wins
    off = []
    run = 0
    for v in nr_marks:
        off.append(run)
        run += v
    return order, nr_marks, off, run


def preprocess(lts: Lts) -> BcrpAux:
    sorted_lts = sort_transitions(lts)
    switch = compute_action_switch(sorted_lts.transitions)
    order, nr_marks, off, mark_length = compute_order_and_offsets(
        switch, sorted_lts.transitions, lts.n)
    return BcrpAux(lts=sorted_lts,
                   action_switch=tuple(switch),
                   order=tuple(order),
                   nr_marks=tuple(nr_marks),
                   off=tuple(off),
                   mark_length=mark_length)


def partition_by_outgoing_labels(lts: Lts, policy: WritePolicy, *,
                                 common_election: bool | None = None) -> Partition:
    """Group states by their set of outgoing action labels.

    One mark-and-split round per action: mark every state with at least one
    edge carrying that label, then split blocks whose members disagree with
    their leader.  After all rounds two states share a block iff their label
    sets are equal.
    """
    if common_election is None:
        common_election = isinstance(policy, Common)
    engine = PramEngine(policy, max_supersteps=len(lts.action_labels) + 1)
    return _label_partition(lts, engine, common_election)


def _label_partition(lts: Lts, engine: PramEngine, common_election: bool) -> Partition:
    n = lts.n
    transitions = lts.transitions
    mem = SharedMemory()
    mem.add_array("block", [0] * n)
    mem.add_array("mark", [False] * n)
    mem.add_array("new_leader", [NONE_LABEL] * n)

    def reset(i, mem_):
        return ((("mark", i), False, i),)

    def reassign(i, mem_):
        mark = mem_["mark"]
        block = mem_["block"]
        if mark[i] != mark[block[i]]:
            return ((("block", i), mem_["new_leader"][block[i]], i),)
        return ()

    for a in range(len(lts.action_labels)):
        engine.begin_superstep()
        engine.run_phase(reset, n, mem)

        def mark_label(i, mem_, a=a):
            t = transitions[i]
            if t.action == a:
                return ((("mark", t.source), True, i),)
            return ()
        engine.run_phase(mark_label, len(transitions), mem)

        if common_election and isinstance(engine.policy, Common):
            pairwise_leader_election(mem, engine, _mark_splitter)
        else:
            def elect(i, mem_):
                mark = mem_["mark"]
                block = mem_["block"]
                if mark[i] != mark[block[i]]:
                    return ((("new_leader", block[i]), i, i),)
                return ()
            engine.run_phase(elect, n, mem)
        engine.run_phase(reassign, n, mem)
    return Partition(mem["block"])


def _mark_splitter(i, mem):
    mark = mem["mark"]
    return mark[i] != mark[mem["block"][i]]


def bcrp_run(lts: Lts, policy: WritePolicy, *,
             common_election: bool | None = None,
             observer=None,
             max_supersteps: int | None = None) -> tuple[Partition, RunStats]:
    """Coarsest strong bisimulation of a labeled system.

    Preprocessing first groups states by outgoing-label set; the main loop
    then refines that partition.  ``RunStats.supersteps`` counts main-loop
    iterations that selected a splitter, and ``initial_block_count`` reports
    the partition size the main loop started from.
    """
    if common_election is None:
        common_election = isinstance(policy, Common)
    n = lts.n
    if max_supersteps is None:
        max_supersteps = 3 * n + len(lts.action_labels) + 8
    engine = PramEngine(policy, max_supersteps=max_supersteps)

    aux = preprocess(lts)
    pi0 = _label_partition(aux.lts, engine, common_election)
    sources = [t.source for t in aux.lts.transitions]
    targets = [t.target for t in aux.lts.transitions]
    off = aux.off
    order = aux.order
    m = len(sources)
    mark_length = aux.mark_length
    # the mark slot of transition i; fixed because off and order never change
    slot = [off[sources[i]] + order[i] for i in range(m)]

    mem = SharedMemory()
    mem.add_array("block", list(pi0.block))
    mem.add_array("mark", [False] * mark_length)
    mem.add_array("split", [False] * n)
    mem.add_array("new_leader", [NONE_LABEL] * n)
    unstable = [False] * n
    for leader in set(pi0.block):
        unstable[leader] = True
    mem.add_array("unstable", unstable)
    mem.add_scalar("C", NONE_LABEL)

    use_common = common_election and isinstance(policy, Common)
    select_procs = max(n, mark_length)

    def select(i, mem_):
        reqs = []
        if i < mark_length:
            reqs.append((("mark", i), False, i))
        if i < n:
            reqs.append((("split", i), False, i))
            if mem_["unstable"][i]:
                reqs.append(("C", i, i))
        return reqs

    def select_propose(i, mem_):
        reqs = []
        if i < mark_length:
            reqs.append((("mark", i), False, i))
        if i < n:
            reqs.append((("split", i), False, i))
            cand = i if mem_["unstable"][i] else NONE_LABEL
            reqs.append((("new_leader", i), cand, i))
        return reqs

    def mark_kernel(i, mem_):
        if mem_["block"][targets[i]] == mem_.scalar("C"):
            return ((("mark", slot[i]), True, i),)
        return ()

    def tag_kernel(i, mem_):
        mark = mem_["mark"]
        s = sources[i]
        if mark[slot[i]] != mark[off[mem_["block"][s]] + order[i]]:
            return ((("split", s), True, i),)
        return ()

    def sub_a(i, mem_):
        c = mem_.scalar("C")
        if mem_["split"][i]:
            return ((("unstable", c), False, i),
                    (("new_leader", mem_["block"][i]), i, i))
        return ((("unstable", c), False, i),)

    def sub_b(i, mem_):
        if mem_["split"][i]:
            block = mem_["block"]
            old = block[i]
            winner = mem_["new_leader"][old]
            return ((("unstable", old), True, i),
                    (("block", i), winner, i),
                    (("unstable", winner), True, i),
                    (("unstable", mem_.scalar("C")), True, i))
        return ()

    splits: list[int] = []
    while True:
        engine.begin_superstep()
        mem.set_scalar("C", NONE_LABEL)
        if use_common:
            _splitter_elimination(mem, engine, n, select_propose, select_procs)
        else:
            engine.run_phase(select, select_procs, mem)
        if mem.scalar("C") == NONE_LABEL:
            break
        before = list(mem["block"])
        engine.run_phase(mark_kernel, m, mem)
        engine.run_phase(tag_kernel, m, mem)
        if use_common:
            pairwise_leader_election(mem, engine, lambda i, mem_: mem_["split"][i],
                                     clear_unstable_c=True)
        else:
            engine.run_phase(sub_a, n, mem)
        engine.run_phase(sub_b, n, mem)
        after = mem["block"]
        split_blocks = {before[i] for i in range(n) if after[i] != before[i]}
        splits.append(len(split_blocks))
        if observer is not None:
            observer(len(splits), Partition(after))

    part = Partition(mem["block"])
    stats = RunStats(supersteps=len(splits),
                     splits_per_iteration=tuple(splits),
                     final_block_count=block_count(part),
                     initial_block_count=block_count(pi0))
    return part, stats
