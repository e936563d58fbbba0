"""Command-line front end: reduce, compare, stats, and instance generation.

Exit codes: 0 success (and agreement for ``compare``), 1 usage or input
problem, 2 parse error, 3 bound or agreement violation, 4 write-policy
violation, 5 internal superstep-guard trip.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .aut import ParseError, parse_aut, quotient, read_partition, write_aut, write_partition
from .bcrp import bcrp_run
from .lts import Lts, Partition, block_count, lts_from_labeled_edges, partitions_equal, trivial_partition
from .oracle import brute_force_bisim, brute_force_bisim_refining, ks_sequential, ks_sequential_trace
from .pram import Arbitrary, Common, PolicyViolationError, Priority, SuperstepLimitError, WritePolicy
from .rcpp import RelationInput, rcpp_run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_MISMATCH = 3
EXIT_POLICY = 4
EXIT_GUARD = 5

ORACLE_MAX_STATES = 200


@dataclass
class CliConfig:
    subcommand: str
    input_path: str | None = None
    output_path: str | None = None
    policy: WritePolicy = Priority()
    engine: str = "pram"            # pram | sequential | oracle (or auto for compare)
    pi0_path: str | None = None
    partition_out: str | None = None
    stats_out: str | None = None
    family: str | None = None
    size: int | None = None


def parse_policy(text: str) -> WritePolicy:
    if text == "priority":
        return Priority()
    if text == "common":
        return Common()
    if text.startswith("arbitrary:"):
        seed_text = text.split(":", 1)[1]
        try:
            return Arbitrary(int(seed_text))
        except ValueError:
            raise ValueError(f"bad arbitrary seed {seed_text!r}") from None
    if text == "arbitrary":
        raise ValueError("arbitrary policy needs an explicit seed: arbitrary:<seed>")
    raise ValueError(f"unknown policy {text!r}; "
                     "expected priority, arbitrary:<seed> or common")


def gen_fanout(n: int) -> Lts:
    """Fan-out family: two hub states with edges to every state, plus a chain.

    Needs n >= 3; has exactly 3n - 3 transitions, and both hubs have
    out-degree n.  Sequential minimizers take quadratic time on it while the
    parallel driver stays linear in supersteps, which is what makes it a
    useful benchmark family.
    """
    if n < 3:
        raise ValueError("fan-out family needs n >= 3")
    edges = [(i, "a", i + 1) for i in range(2, n - 1)]
    for hub in (0, 1):
        edges.extend((hub, "b", i) for i in range(n))
    return lts_from_labeled_edges(n, edges, initial_state=0, extra_labels=("a", "b"))


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_rcpp_input(lts: Lts, cfg: CliConfig) -> RelationInput:
    if len(lts.action_labels) > 1:
        raise ValueError("--pi0 selects single-relation mode, but the input has "
                         f"{len(lts.action_labels)} action labels; drop --pi0")
    pi0 = read_partition(_read_text(cfg.pi0_path), lts.n)
    edges = tuple((t.source, t.target) for t in lts.transitions)
    return RelationInput(n=lts.n, edges=edges, pi0=pi0)


def _run_selected(lts: Lts, cfg: CliConfig):
    """Run the configured engine; returns (partition, supersteps, stats or None)."""
    if cfg.pi0_path is not None:
        rel = _load_rcpp_input(lts, cfg)
        if cfg.engine == "pram":
            part, stats = rcpp_run(rel, cfg.policy)
            return part, stats.supersteps, stats
        if cfg.engine == "sequential":
            part, trace = ks_sequential_trace(lts, rel.pi0)
            return part, len(trace), None
        _require_oracle_size(lts)
        return brute_force_bisim_refining(lts, rel.pi0), 0, None
    if cfg.engine == "pram":
        part, stats = bcrp_run(lts, cfg.policy)
        return part, stats.supersteps, stats
    if cfg.engine == "sequential":
        if len(lts.action_labels) > 1:
            raise ValueError("the sequential engine handles a single relation; "
                             "use the pram engine for labeled input")
        part, trace = ks_sequential_trace(lts, trivial_partition(lts.n))
        return part, len(trace), None
    _require_oracle_size(lts)
    return brute_force_bisim(lts), 0, None


def _require_oracle_size(lts: Lts) -> None:
    if lts.n > ORACLE_MAX_STATES:
        raise ValueError(f"brute-force oracle refuses {lts.n} states "
                         f"(limit {ORACLE_MAX_STATES}); use the pram engine")


def cmd_reduce(cfg: CliConfig) -> int:
    lts = parse_aut(_read_text(cfg.input_path))
    part, supersteps, _ = _run_selected(lts, cfg)
    reduced = quotient(lts, part)
    _write_text(cfg.output_path, write_aut(reduced))
    if cfg.partition_out:
        _write_text(cfg.partition_out, write_partition(part))
    print(f"n={lts.n} m={lts.m} actions={len(lts.action_labels)} "
          f"blocks={block_count(part)} supersteps={supersteps}")
    return EXIT_OK


def _find_distinguishing_pair(p: Partition, q: Partition) -> tuple[int, int]:
    for s in range(len(p)):
        for t in range(s + 1, len(p)):
            if (p.block[s] == p.block[t]) != (q.block[s] == q.block[t]):
                return s, t
    raise AssertionError("partitions are equal, nothing distinguishes them")


def cmd_compare(cfg: CliConfig) -> int:
    lts = parse_aut(_read_text(cfg.input_path))
    single_label = len(lts.action_labels) <= 1
    if cfg.pi0_path is not None:
        rel = _load_rcpp_input(lts, cfg)
        pram_part, _ = rcpp_run(rel, cfg.policy)
        pi0 = rel.pi0
    else:
        pram_part, _ = bcrp_run(lts, cfg.policy)
        pi0 = trivial_partition(lts.n)

    references = []
    if cfg.engine in ("auto", "sequential"):
        if single_label:
            references.append(("sequential", ks_sequential(lts, pi0)))
        elif cfg.engine == "sequential":
            raise ValueError("the sequential reference handles a single relation only")
    if cfg.engine in ("auto", "oracle"):
        if lts.n <= ORACLE_MAX_STATES:
            references.append(("oracle", brute_force_bisim_refining(lts, pi0)))
        elif cfg.engine == "oracle":
            raise ValueError(f"brute-force oracle refuses {lts.n} states "
                             f"(limit {ORACLE_MAX_STATES})")
    if not references:
        raise ValueError(f"no reference applies: {len(lts.action_labels)} labels, "
                         f"{lts.n} states (oracle limit {ORACLE_MAX_STATES})")

    for name, ref_part in references:
        if not partitions_equal(pram_part, ref_part):
            s, t = _find_distinguishing_pair(pram_part, ref_part)
            print(f"disagreement with {name} reference: states {s} and {t} are "
                  f"{'together' if pram_part.block[s] == pram_part.block[t] else 'apart'} "
                  "under the pram engine and the opposite under the reference",
                  file=sys.stderr)
            return EXIT_MISMATCH
    checked = ", ".join(name for name, _ in references)
    print(f"agree blocks={block_count(pram_part)} references={checked}")
    return EXIT_OK


def cmd_stats(cfg: CliConfig) -> int:
    lts = parse_aut(_read_text(cfg.input_path))
    if cfg.pi0_path is not None:
        rel = _load_rcpp_input(lts, cfg)
        part, stats = rcpp_run(rel, cfg.policy)
        mode = "rcpp"
        bound = 2 * lts.n - stats.initial_block_count
    else:
        part, stats = bcrp_run(lts, cfg.policy)
        mode = "bcrp"
        bound = 3 * lts.n - stats.initial_block_count
    margin = bound - stats.supersteps
    lines = [
        f"mode={mode}",
        f"n={lts.n}",
        f"m={lts.m}",
        f"num_actions={len(lts.action_labels)}",
        f"initial_blocks={stats.initial_block_count}",
        f"supersteps={stats.supersteps}",
        f"supersteps_per_n={stats.supersteps / lts.n:.6f}",
        f"blocks={block_count(part)}",
        f"bound_margin={margin}",
    ]
    record = "\n".join(lines) + "\n"
    print(record, end="")
    if cfg.stats_out:
        _write_text(cfg.stats_out, record)
    if margin < 0:
        print(f"superstep bound violated by {-margin}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_gen(cfg: CliConfig) -> int:
    lts = gen_fanout(cfg.size)
    text = write_aut(lts)
    if cfg.output_path:
        _write_text(cfg.output_path, text)
    else:
        print(text, end="")
    return EXIT_OK


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="parbisim",
                     description="Minimize labeled transition systems modulo "
                                 "strong bisimulation on a simulated CRCW PRAM.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_policy(p):
        p.add_argument("--policy", default="priority", type=parse_policy,
                       help="priority | arbitrary:<seed> | common (default: priority)")

    reduce_p = sub.add_parser("reduce", help="write the minimized quotient system")
    reduce_p.add_argument("input")
    reduce_p.add_argument("-o", "--output", required=True)
    add_policy(reduce_p)
    reduce_p.add_argument("--engine", choices=("pram", "sequential", "oracle"),
                          default="pram")
    reduce_p.add_argument("--pi0", help="initial partition file (single-relation mode)")
    reduce_p.add_argument("--partition-out", help="also write the state partition")

    compare_p = sub.add_parser("compare", help="check the pram engine against references")
    compare_p.add_argument("input")
    add_policy(compare_p)
    compare_p.add_argument("--engine", choices=("auto", "sequential", "oracle"),
                           default="auto", help="which reference to insist on")
    compare_p.add_argument("--pi0", help="initial partition file (single-relation mode)")

    stats_p = sub.add_parser("stats", help="print run statistics as key=value lines")
    stats_p.add_argument("input")
    add_policy(stats_p)
    stats_p.add_argument("--pi0", help="initial partition file (single-relation mode)")
    stats_p.add_argument("--stats-out", help="also write the record to a file")

    gen_p = sub.add_parser("gen", help="generate benchmark instances")
    gen_p.add_argument("family", choices=("fanout",))
    gen_p.add_argument("size", type=int)
    gen_p.add_argument("-o", "--output")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = CliConfig(subcommand=args.subcommand,
                    input_path=getattr(args, "input", None),
                    output_path=getattr(args, "output", None),
                    policy=getattr(args, "policy", Priority()),
                    engine=getattr(args, "engine", "pram"),
                    pi0_path=getattr(args, "pi0", None),
                    partition_out=getattr(args, "partition_out", None),
                    stats_out=getattr(args, "stats_out", None),
                    family=getattr(args, "family", None),
                    size=getattr(args, "size", None))
    command = {"reduce": cmd_reduce, "compare": cmd_compare,
               "stats": cmd_stats, "gen": cmd_gen}[cfg.subcommand]
    try:
        return command(cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PolicyViolationError as exc:
        print(f"policy violation: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except SuperstepLimitError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
