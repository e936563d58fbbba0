"""Core domain types: transition systems, leader-labeled partitions, run stats.

States are plain integers ``0..n-1``.  A partition is stored as the array
``block`` where ``block[s]`` is the state index of the leader of the block
containing ``s``.  Leaders belong to their own block, so
``block[block[s]] == block[s]`` holds for every state; that invariant is what
lets block labels double as state indices inside the parallel kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

StateId = int
ActionId = int


class Transition(NamedTuple):
    source: StateId
    action: ActionId
    target: StateId


@dataclass(frozen=True)
class Lts:
    """Immutable labeled transition system.

    ``action_labels`` maps each action id to its label string.  Constructors
    that read labels from text keep this tuple sorted so that equal inputs get
    equal ids regardless of the order labels first appear in.  Duplicate
    transitions and self-loops are permitted.
    """

    n: int
    action_labels: tuple[str, ...]
    transitions: tuple[Transition, ...]
    initial_state: StateId = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("state count must be at least 1")
        if len(set(self.action_labels)) != len(self.action_labels):
            raise ValueError("duplicate action labels")
        if not 0 <= self.initial_state < self.n:
            raise ValueError("initial state out of range")
        num_actions = len(self.action_labels)
        for t in self.transitions:
            if not (0 <= t.source < self.n and 0 <= t.target < self.n):
                raise ValueError(f"transition {t} mentions a state outside 0..{self.n - 1}")
            if not 0 <= t.action < num_actions:
                raise ValueError(f"transition {t} uses an undeclared action id")

    @property
    def m(self) -> int:
        return len(self.transitions)


def lts_from_labeled_edges(n: int,
                           edges: Iterable[tuple[int, str, int]],
                           initial_state: int = 0,
                           extra_labels: Iterable[str] = ()) -> Lts:
    """Build an Lts from ``(source, label string, target)`` triples.

    Labels get ids in sorted order.  ``extra_labels`` declares labels that
    should exist even when no transition currently uses them.
    """
    edges = list(edges)
    labels = sorted({lab for _, lab, _ in edges} | set(extra_labels))
    index = {lab: i for i, lab in enumerate(labels)}
    transitions = tuple(Transition(s, index[lab], t) for s, lab, t in edges)
    return Lts(n=n, action_labels=tuple(labels), transitions=transitions,
               initial_state=initial_state)


class Partition:
    """A partition of ``0..n-1`` in leader representation.

    Instances are immutable; refinement drivers build a fresh one from their
    working arrays whenever a snapshot is needed.
    """

    __slots__ = ("block",)

    def __init__(self, block: Sequence[int]):
        block = tuple(block)
        if not block:
            raise ValueError("a partition needs at least one state")
        n = len(block)
        for s, b in enumerate(block):
            if not 0 <= b < n:
                raise ValueError(f"block label {b} of state {s} is out of range")
            if block[b] != b:
                raise ValueError(f"state {s} names leader {b}, which is not its own leader")
        self.block = block

    def __len__(self) -> int:
        return len(self.block)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.block == other.block

    def __hash__(self) -> int:
        return hash(self.block)

    def __repr__(self) -> str:
        return f"Partition({list(self.block)!r})"

    def blocks(self) -> dict[int, list[int]]:
        """Leader -> sorted member list."""
        out: dict[int, list[int]] = {}
        for s, b in enumerate(self.block):
            out.setdefault(b, []).append(s)
        return out


def partition_from_assignment(assignment: Sequence[int]) -> Partition:
    """Partition from an arbitrary block-id assignment.

    Ids may be any integers; states sharing an id share a block.  The leader
    of each block is its smallest state index.
    """
    if not assignment:
        raise ValueError("a partition needs at least one state")
    first_seen: dict[int, int] = {}
    for i, v in enumerate(assignment):
        first_seen.setdefault(v, i)
    return Partition([first_seen[v] for v in assignment])


def partitions_equal(p: Partition, q: Partition) -> bool:
    """True when p and q induce the same equivalence, leader names aside."""
    if len(p) != len(q):
        raise ValueError("partitions cover different numbers of states")
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    for a, b in zip(p.block, q.block):
        if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
            return False
    return True


def partition_refines(fine: Partition, coarse: Partition) -> bool:
    """True when every block of ``fine`` lies inside one block of ``coarse``."""
    if len(fine) != len(coarse):
        raise ValueError("partitions cover different numbers of states")
    cb = coarse.block
    return all(cb[s] == cb[leader] for s, leader in enumerate(fine.block))


def block_count(p: Partition) -> int:
    return len(set(p.block))


def trivial_partition(n: int) -> Partition:
    """Everything in one block led by state 0."""
    return Partition([0] * n)


def discrete_partition(n: int) -> Partition:
    return Partition(range(n))


@dataclass(frozen=True)
class RunStats:
    """Statistics of one refinement run.

    ``supersteps`` counts the loop iterations in which a splitter block was
    selected; the terminal pass that merely observes that every block is
    stable is not counted.  That is the quantity the linear iteration bounds
    are stated about.  ``splits_per_iteration`` records, per counted
    iteration, how many blocks were split.
    """

    supersteps: int
    splits_per_iteration: tuple[int, ...]
    final_block_count: int
    initial_block_count: int

    def __post_init__(self):
        if self.supersteps != len(self.splits_per_iteration):
            raise ValueError("supersteps must equal len(splits_per_iteration)")
        if self.initial_block_count < 1 or self.final_block_count < self.initial_block_count:
            raise ValueError("block counts cannot shrink during refinement")
