"""Aldebaran ``.aut`` files, partition text files, and quotient systems.

An ``.aut`` file is one header line ``des (<initial>, <m>, <n>)`` followed by
exactly m lines ``(<source>, <label>, <target>)``.  Labels are bare tokens
(no commas, parentheses or quotes) or double-quoted strings; quotes are
stripped and nothing inside them is escape-processed.  The writer always
quotes.  Blank lines and \r\n endings are tolerated on input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lts import Lts, Partition, Transition, lts_from_labeled_edges, partition_from_assignment

_HEADER_RE = re.compile(r"des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")


class ParseError(ValueError):
    """Malformed .aut or partition text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class AutHeader:
    initial_state: int
    declared_m: int
    declared_n: int


def parse_header(line: str, lineno: int = 1) -> AutHeader:
    match = _HEADER_RE.match(line.strip())
    if not match:
        raise ParseError("malformed header, expected 'des (<initial>, <m>, <n>)'", lineno)
    initial, m, n = (int(g) for g in match.groups())
    if n < 1:
        raise ParseError("declared state count must be at least 1", lineno)
    if initial >= n:
        raise ParseError(f"initial state {initial} not below state count {n}", lineno)
    return AutHeader(initial_state=initial, declared_m=m, declared_n=n)


def _parse_transition(line: str, lineno: int, n: int) -> tuple[int, str, int]:
    body = line.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ParseError("expected '(<source>, <label>, <target>)'", lineno)
    body = body[1:-1]
    first = body.find(",")
    last = body.rfind(",")
    if first == -1 or first == last:
        raise ParseError("expected two commas separating source, label, target", lineno)
    src_text = body[:first].strip()
    label = body[first + 1:last].strip()
    dst_text = body[last + 1:].strip()
    try:
        src = int(src_text)
        dst = int(dst_text)
    except ValueError:
        raise ParseError(f"source and target must be integers, got {src_text!r} and {dst_text!r}",
                         lineno) from None
    if label.startswith('"'):
        if len(label) < 2 or not label.endswith('"'):
            raise ParseError("unterminated quoted label", lineno)
        label = label[1:-1]
    elif not label or any(ch in label for ch in '()"'):
        raise ParseError(f"malformed label {label!r}", lineno)
    if not (0 <= src < n and 0 <= dst < n):
        raise ParseError(f"state index out of range in ({src}, {label}, {dst});"
                         f" states are 0..{n - 1}", lineno)
    return src, label, dst


def parse_aut(text: str) -> Lts:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input, expected a 'des' header", 1)
    header = parse_header(lines[0], 1)
    triples = []
    for lineno, raw in enumerate(lines[1:], 2):
        if not raw.strip():
            continue
        triples.append(_parse_transition(raw, lineno, header.declared_n))
    if len(triples) != header.declared_m:
        raise ParseError(f"expected {header.declared_m} transitions, found {len(triples)}")
    return lts_from_labeled_edges(header.declared_n, triples,
                                  initial_state=header.initial_state)


def write_aut(lts: Lts) -> str:
    lines = [f"des ({lts.initial_state}, {lts.m}, {lts.n})"]
    labels = lts.action_labels
    for s, a, t in lts.transitions:
        lines.append(f'({s}, "{labels[a]}", {t})')
    return "\n".join(lines) + "\n"


def write_partition(p: Partition) -> str:
    return "".join(f"{s} {b}\n" for s, b in enumerate(p.block))


def read_partition(text: str, n: int) -> Partition:
    """Read '<state> <block-id>' lines; every state 0..n-1 exactly once."""
    assignment: list[int | None] = [None] * n
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected '<state> <block-id>'", lineno)
        try:
            s, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"expected integers, got {parts!r}", lineno) from None
        if not 0 <= s < n:
            raise ParseError(f"state {s} out of range 0..{n - 1}", lineno)
        if assignment[s] is not None:
            raise ParseError(f"state {s} assigned twice", lineno)
        assignment[s] = b
    for s, b in enumerate(assignment):
        if b is None:
            raise ParseError(f"state {s} missing from partition file")
    return partition_from_assignment(assignment)


def quotient(lts: Lts, p: Partition) -> Lts:
    """Quotient system: one state per block, duplicate transitions merged.

    Blocks are numbered densely in order of their leader index, so output
    state ids are deterministic.
    """
    if len(p) != lts.n:
        raise ValueError("partition covers a different number of states")
    leaders = sorted(set(p.block))
    index = {leader: i for i, leader in enumerate(leaders)}
    seen = set()
    merged = []
    for s, a, t in lts.transitions:
        key = (index[p.block[s]], a, index[p.block[t]])
        if key not in seen:
            seen.add(key)
            merged.append(Transition(*key))
    return Lts(n=len(leaders),
               action_labels=lts.action_labels,
               transitions=tuple(merged),
               initial_state=index[p.block[lts.initial_state]])
