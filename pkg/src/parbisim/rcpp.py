"""Single-relation partition refinement on the PRAM engine.

Solves the relational coarsest partition problem: refine an initial partition
until every block is stable under every block, where stability ignores edge
labels (there is a single relation).  Each loop iteration elects one unstable
block C as the splitter, marks the states with an edge into C, and splits
every block whose members disagree with their leader's mark.

The iteration is realized as barrier-separated phases:

1. clear marks and elect the splitter into the scalar cell ``C``
   (``C`` is first reset to :data:`NONE_LABEL` by the driver),
2. mark sources of edges into C,
3. split, sub-phase A: clear ``unstable[C]`` and elect one new leader per
   splitting block,
4. split, sub-phase B: move split-off states to their new leader and flag
   both affected blocks unstable.

Every kernel writes either to a private cell, or a policy-resolved cell, or
writes the same value as all its peers, which is what makes the run legal
under each supported write policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .lts import Partition, RunStats, block_count
from .pram import Common, PramEngine, SharedMemory, WritePolicy

# Block labels are state indices, so -1 is safely "no label": used both for
# the empty splitter cell and as the eliminated-candidate sentinel during
# leader election (0 would collide with the label of block 0).
NONE_LABEL = -1


@dataclass(frozen=True)
class RelationInput:
    """A binary relation over 0..n-1 plus the partition to refine."""

    n: int
    edges: tuple[tuple[int, int], ...]
    pi0: Partition

    def __post_init__(self):
        object.__setattr__(self, "edges",
                           tuple((int(s), int(t)) for s, t in self.edges))
        if self.n < 1:
            raise ValueError("state count must be at least 1")
        if len(self.pi0) != self.n:
            raise ValueError("pi0 covers a different number of states")
        for s, t in self.edges:
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise ValueError(f"edge ({s}, {t}) outside 0..{self.n - 1}")


def phase_init(rel: RelationInput) -> SharedMemory:
    """Initial memory image: leader-form blocks, every initial block unstable,
    marks clear, splitter cell empty."""
    n = rel.n
    mem = SharedMemory()
    blocks = list(rel.pi0.block)
    mem.add_array("block", blocks)
    mem.add_array("mark", [False] * n)
    mem.add_array("new_leader", [NONE_LABEL] * n)
    unstable = [False] * n
    for leader in set(blocks):
        unstable[leader] = True
    mem.add_array("unstable", unstable)
    mem.add_scalar("C", NONE_LABEL)
    return mem


def phase_select_splitter(memory: SharedMemory, engine: PramEngine, *,
                          common_election: bool = False) -> SharedMemory:
    """Clear marks; write some unstable block label into C (or leave it empty).

    Under Priority the lowest unstable label wins.  Under plain Common two or
    more unstable blocks make the concurrent write illegal; with
    ``common_election`` the choice runs as a pairwise elimination whose
    conflicting writes all carry the same sentinel, so it stays legal.
    """
    memory.set_scalar("C", NONE_LABEL)
    n = len(memory["block"])
    if common_election and isinstance(engine.policy, Common):
        def propose(i, mem):
            cand = i if mem["unstable"][i] else NONE_LABEL
            return ((("mark", i), False, i), (("new_leader", i), cand, i))
        _splitter_elimination(memory, engine, n, propose, n)
        return memory

    def kernel(i, mem):
        if mem["unstable"][i]:
            return ((("mark", i), False, i), ("C", i, i))
        return ((("mark", i), False, i),)
    engine.run_phase(kernel, n, memory)
    return memory


def _splitter_elimination(memory, engine, n, propose_kernel, propose_procs):
    # candidates live in new_leader[i]; larger-indexed candidates are knocked
    # out pairwise, then the sole survivor announces itself in C
    engine.run_phase(propose_kernel, propose_procs, memory)

    def eliminate(p, mem):
        i, j = divmod(p, n)
        nl = mem["new_leader"]
        if i < j and nl[i] != NONE_LABEL and nl[j] != NONE_LABEL:
            return ((("new_leader", j), NONE_LABEL, p),)
        return ()
    engine.run_phase(eliminate, n * n, memory)

    def announce(i, mem):
        if mem["new_leader"][i] != NONE_LABEL:
            return (("C", i, i),)
        return ()
    engine.run_phase(announce, n, memory)


def phase_mark(memory: SharedMemory, edges, engine: PramEngine) -> SharedMemory:
    """Set ``mark[s]`` for every edge (s, t) whose target lies in block C."""
    def kernel(i, mem):
        s, t = edges[i]
        if mem["block"][t] == mem.scalar("C"):
            return ((("mark", s), True, i),)
        return ()
    engine.run_phase(kernel, len(edges), memory)
    return memory


def _is_mark_splitter(i: int, mem: SharedMemory) -> bool:
    mark = mem["mark"]
    return mark[i] != mark[mem["block"][i]]


def pairwise_leader_election(memory: SharedMemory, engine: PramEngine,
                             is_splitter: Callable[[int, SharedMemory], bool], *,
                             clear_unstable_c: bool = False) -> SharedMemory:
    """Elect one new leader per splitting block without multi-value conflicts.

    Works under every policy, and in particular under Common: candidates first
    record their block label in their own ``new_leader`` cell, pairwise
    elimination then knocks out the higher-indexed of any two candidates of
    the same block (all such writes carry the sentinel), and each surviving
    candidate - the lowest-indexed splitter of its block - writes itself into
    ``new_leader[block]`` alone.
    """
    n = len(memory["block"])

    def propose(i, mem):
        cand = mem["block"][i] if is_splitter(i, mem) else NONE_LABEL
        if clear_unstable_c:
            return ((("unstable", mem.scalar("C")), False, i),
                    (("new_leader", i), cand, i))
        return ((("new_leader", i), cand, i),)
    engine.run_phase(propose, n, memory)

    def eliminate(p, mem):
        i, j = divmod(p, n)
        nl = mem["new_leader"]
        if i < j and nl[i] != NONE_LABEL and nl[i] == nl[j]:
            return ((("new_leader", j), NONE_LABEL, p),)
        return ()
    engine.run_phase(eliminate, n * n, memory)

    def announce(i, mem):
        nl = mem["new_leader"]
        if nl[i] != NONE_LABEL:
            return ((("new_leader", nl[i]), i, i),)
        return ()
    engine.run_phase(announce, n, memory)
    return memory


def common_leader_election(memory: SharedMemory, engine: PramEngine) -> SharedMemory:
    """Common-policy replacement for split sub-phase A (mark-based splitters)."""
    return pairwise_leader_election(memory, engine, _is_mark_splitter,
                                    clear_unstable_c=True)


def phase_split(memory: SharedMemory, engine: PramEngine, *,
                common_election: bool = False) -> SharedMemory:
    """Split every block whose members disagree with their leader's mark.

    Sub-phase A clears ``unstable[C]`` and elects one new leader per splitting
    block; sub-phase B moves each split-off state to the leader elected for
    its pre-split block and flags the old and new block labels unstable.
    Re-flagging of C itself (when C splits) lands in sub-phase B, so it
    overrides the clear from sub-phase A.
    """
    n = len(memory["block"])
    if common_election and isinstance(engine.policy, Common):
        common_leader_election(memory, engine)
    else:
        def sub_a(i, mem):
            c = mem.scalar("C")
            mark = mem["mark"]
            block = mem["block"]
            if mark[i] != mark[block[i]]:
                return ((("unstable", c), False, i),
                        (("new_leader", block[i]), i, i))
            return ((("unstable", c), False, i),)
        engine.run_phase(sub_a, n, memory)

    def sub_b(i, mem):
        mark = mem["mark"]
        block = mem["block"]
        if mark[i] != mark[block[i]]:
            old = block[i]
            winner = mem["new_leader"][old]
            return ((("unstable", old), True, i),
                    (("block", i), winner, i),
                    (("unstable", winner), True, i))
        return ()
    engine.run_phase(sub_b, n, memory)
    return memory


def rcpp_run(rel: RelationInput, policy: WritePolicy, *,
             common_election: bool | None = None,
             observer=None,
             max_supersteps: int | None = None) -> tuple[Partition, RunStats]:
    """Refine ``rel.pi0`` to the coarsest stable partition of the relation.

    ``observer``, when given, is called as ``observer(iteration, partition)``
    after every counted superstep.  ``common_election`` defaults to on exactly
    when the policy is Common; forcing it off demonstrates why the plain
    algorithm is illegal on a common CRCW machine.
    """
    if common_election is None:
        common_election = isinstance(policy, Common)
    n = rel.n
    if max_supersteps is None:
        max_supersteps = 3 * n + 9
    engine = PramEngine(policy, max_supersteps=max_supersteps)
    memory = phase_init(rel)

    splits: list[int] = []
    while True:
        engine.begin_superstep()
        phase_select_splitter(memory, engine, common_election=common_election)
        if memory.scalar("C") == NONE_LABEL:
            break
        before = list(memory["block"])
        phase_mark(memory, rel.edges, engine)
        phase_split(memory, engine, common_election=common_election)
        after = memory["block"]
        split_blocks = {before[i] for i in range(n) if after[i] != before[i]}
        splits.append(len(split_blocks))
        if observer is not None:
            observer(len(splits), Partition(after))

    part = Partition(memory["block"])
    stats = RunStats(supersteps=len(splits),
                     splits_per_iteration=tuple(splits),
                     final_block_count=block_count(part),
                     initial_block_count=block_count(rel.pi0))
    return part, stats
