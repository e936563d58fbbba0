"""Bisimulation minimization of labeled transition systems on a simulated
CRCW PRAM, with sequential and brute-force reference implementations."""

from .aut import AutHeader, ParseError, parse_aut, quotient, read_partition, write_aut, write_partition
from .bcrp import BcrpAux, bcrp_run, partition_by_outgoing_labels, preprocess
from .lts import (
    Lts,
    Partition,
    RunStats,
    Transition,
    block_count,
    discrete_partition,
    lts_from_labeled_edges,
    partition_from_assignment,
    partition_refines,
    partitions_equal,
    trivial_partition,
)
from .oracle import brute_force_bisim, brute_force_bisim_refining, is_stable, is_stable_under, ks_sequential, ks_sequential_trace
from .pram import (
    Arbitrary,
    Common,
    PolicyViolationError,
    PramEngine,
    Priority,
    SharedMemory,
    SuperstepLimitError,
    WritePolicy,
    WriteRequest,
    resolve_writes,
    run_phase,
)
from .rcpp import NONE_LABEL, RelationInput, rcpp_run

__version__ = "0.1.0"

__all__ = [
    "Arbitrary",
    "AutHeader",
    "BcrpAux",
    "Common",
    "Lts",
    "NONE_LABEL",
    "ParseError",
    "Partition",
    "PolicyViolationError",
    "PramEngine",
    "Priority",
    "RelationInput",
    "RunStats",
    "SharedMemory",
    "SuperstepLimitError",
    "Transition",
    "WritePolicy",
    "WriteRequest",
    "bcrp_run",
    "block_count",
    "brute_force_bisim",
    "brute_force_bisim_refining",
    "discrete_partition",
    "is_stable",
    "is_stable_under",
    "ks_sequential",
    "ks_sequential_trace",
    "lts_from_labeled_edges",
    "parse_aut",
    "partition_by_outgoing_labels",
    "partition_from_assignment",
    "partition_refines",
    "partitions_equal",
    "preprocess",
    "quotient",
    "rcpp_run",
    "read_partition",
    "resolve_writes",
    "run_phase",
    "trivial_partition",
    "write_aut",
    "write_partition",
]
