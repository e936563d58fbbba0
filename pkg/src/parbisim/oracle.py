"""Sequential reference algorithms the parallel drivers are checked against.

Everything here favours clarity over speed.  The brute-force fixed point in
particular works directly on the pair relation, so it shares no machinery
with the partition-refinement implementations it is used to validate.
"""

from __future__ import annotations

from collections import deque

from .lts import (Lts, Partition, partition_from_assignment, trivial_partition)


def ks_sequential(lts: Lts, pi0: Partition) -> Partition:
    """Coarsest refinement of ``pi0`` stable under its own blocks.

    Classic Kanellakis-Smolka refinement for a single relation: keep a FIFO
    worklist of possibly-unstable blocks; for each splitter, split every block
    that properly intersects the splitter's reverse image, and requeue both
    halves.  Inputs with more than one action label are rejected; the labeled
    problem is handled by the bcrp module.
    """
    part, _ = ks_sequential_trace(lts, pi0)
    return part


def ks_sequential_trace(lts: Lts, pi0: Partition) -> tuple[Partition, list[Partition]]:
    """Like :func:`ks_sequential`, also returning the partition after every
    splitter pass (used by trace-property tests)."""
    if len(lts.action_labels) > 1:
        raise ValueError("ks_sequential handles a single relation; "
                         "use bcrp for labeled systems")
    if len(pi0) != lts.n:
        raise ValueError("pi0 covers a different number of states")
    n = lts.n
    pred: list[list[int]] = [[] for _ in range(n)]
    for t in lts.transitions:
        pred[t.target].append(t.source)

    leader_of = list(pi0.block)
    members: dict[int, set[int]] = {}
    for s, b in enumerate(leader_of):
        members.setdefault(b, set()).add(s)

    work = deque(sorted(members))
    queued = set(work)
    trace: list[Partition] = []
    while work:
        lead = work.popleft()
        queued.remove(lead)
        reach: set[int] = set()
        for t in members[lead]:
            reach.update(pred[t])
        hits: dict[int, set[int]] = {}
        for s in reach:
            hits.setdefault(leader_of[s], set()).add(s)
        for bl, inter in hits.items():
            whole = members[bl]
            if len(inter) == len(whole):
                continue
            rest = whole - inter
            # the half keeping the old leader keeps the old label
            keep, moved = (inter, rest) if bl in inter else (rest, inter)
            new_lead = min(moved)
            members[bl] = keep
            members[new_lead] = moved
            for s in moved:
                leader_of[s] = new_lead
            for lab in (bl, new_lead):
                if lab not in queued:
                    work.append(lab)
                    queued.add(lab)
        trace.append(Partition(leader_of))
    return Partition(leader_of), trace


def brute_force_bisim(lts: Lts) -> Partition:
    """Coarsest strong bisimulation, computed on the pair relation."""
    return brute_force_bisim_refining(lts, trivial_partition(lts.n))


def brute_force_bisim_refining(lts: Lts, pi0: Partition) -> Partition:
    """Greatest fixed point of the bisimulation condition within pi0's blocks.

    Start from all pi0-compatible pairs and repeatedly delete pairs where one
    side has a move the other cannot answer, until nothing changes.  Intended
    for small systems (quadratically many pairs are touched per sweep).
    """
    n = lts.n
    if len(pi0) != n:
        raise ValueError("pi0 covers a different number of states")
    post: list[dict[int, set[int]]] = [{} for _ in range(n)]
    for s, a, t in lts.transitions:
        post[s].setdefault(a, set()).add(t)

    related = [[pi0.block[s] == pi0.block[t] for t in range(n)] for s in range(n)]

    def simulated(s: int, t: int) -> bool:
        # every move of s is answered by a related move of t
        for a, s_targets in post[s].items():
            t_targets = post[t].get(a)
            if not t_targets:
                return False
            for sp in s_targets:
                row = related[sp]
                if not any(row[tp] for tp in t_targets):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        for s in range(n):
            row = related[s]
            for t in range(s + 1, n):
                if row[t] and not (simulated(s, t) and simulated(t, s)):
                    row[t] = related[t][s] = False
                    changed = True

    reps = []
    for s in range(n):
        row = related[s]
        reps.append(next(t for t in range(n) if row[t]))
    return partition_from_assignment(reps)


def is_stable(lts: Lts, partition: Partition) -> bool:
    """True when every block is stable under every block of the partition.

    A block B is stable under a block U via action a when either all states of
    B have an a-transition into U or none do.  Equivalent formulation used
    here: all states of a block see the same set of (action, target block)
    pairs.
    """
    if len(partition) != lts.n:
        raise ValueError("partition covers a different number of states")
    sigs: list[set[tuple[int, int]]] = [set() for _ in range(lts.n)]
    for s, a, t in lts.transitions:
        sigs[s].add((a, partition.block[t]))
    return all(sigs[s] == sigs[partition.block[s]] for s in range(lts.n))


def is_stable_under(lts: Lts, partition: Partition, states) -> bool:
    """True when every block either wholly reaches ``states`` via each action
    or wholly avoids it."""
    if len(partition) != lts.n:
        raise ValueError("partition covers a different number of states")
    target = set(states)
    reach: list[set[int]] = [set() for _ in range(lts.n)]
    for s, a, t in lts.transitions:
        if t in target:
            reach[s].add(a)
    return all(reach[s] == reach[partition.block[s]] for s in range(lts.n))
