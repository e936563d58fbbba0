"""Deterministic lock-step simulation of a CRCW PRAM.

A phase runs one kernel over a range of processor indices.  Kernels are pure
functions from ``(processor index, memory snapshot)`` to an iterable of write
requests; nothing is written while the phase runs.  The collected requests
are grouped per cell and exactly one winner per cell is applied, so the
outcome never depends on the order processor indices were visited in.

Concurrent writes to one cell are resolved by the selected policy:

* ``Priority``  - the request from the lowest processor index wins.
* ``Arbitrary`` - a winner is picked by a seeded deterministic hash of
  (seed, superstep counter, cell), making runs reproducible while still
  exercising "some processor wins" semantics.
* ``Common``    - all requests must agree on the value; disagreement raises
  :class:`PolicyViolationError` naming the cell.

A write request is the triple ``(address, value, processor)``.  Addresses are
``(array name, index)`` tuples for array cells, or the bare array name string
for scalar cells.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence, Union

Address = Union[tuple[str, int], str]


class WritePolicy:
    __slots__ = ()


@dataclass(frozen=True)
class Priority(WritePolicy):
    pass


@dataclass(frozen=True)
class Arbitrary(WritePolicy):
    seed: int


@dataclass(frozen=True)
class Common(WritePolicy):
    pass


class WriteRequest(NamedTuple):
    address: Address
    value: int
    processor: int


Kernel = Callable[[int, "SharedMemory"], Iterable[WriteRequest]]


class PolicyViolationError(RuntimeError):
    """Concurrent common-policy writes disagreed on a value."""

    def __init__(self, address: Address, values):
        self.address = address
        self.values = sorted(set(values))
        super().__init__(
            f"conflicting common writes to cell {address!r}: values {self.values}")


class SuperstepLimitError(RuntimeError):
    """The refinement loop exceeded its superstep guard; see max_supersteps."""


class SharedMemory:
    """Named integer arrays plus named scalar cells.

    The engine owns the memory between phases; kernels must treat the views
    they are handed as read-only snapshots.
    """

    __slots__ = ("_arrays", "_scalars")

    def __init__(self):
        self._arrays: dict[str, list[int]] = {}
        self._scalars: dict[str, int] = {}

    def add_array(self, name: str, values: Sequence[int]) -> None:
        if name in self._arrays or name in self._scalars:
            raise ValueError(f"cell name {name!r} already in use")
        self._arrays[name] = list(values)

    def add_scalar(self, name: str, value: int) -> None:
        if name in self._arrays or name in self._scalars:
            raise ValueError(f"cell name {name!r} already in use")
        self._scalars[name] = value

    def __getitem__(self, name: str) -> list[int]:
        return self._arrays[name]

    def scalar(self, name: str) -> int:
        return self._scalars[name]

    def set_scalar(self, name: str, value: int) -> None:
        # driver-level poke between phases
        if name not in self._scalars:
            raise KeyError(name)
        self._scalars[name] = value

    def store(self, address: Address, value: int) -> None:
        if type(address) is tuple:
            name, index = address
            self._arrays[name][index] = value
        else:
            if address not in self._scalars:
                raise KeyError(address)
            self._scalars[address] = value

    def copy(self) -> "SharedMemory":
        dup = SharedMemory()
        dup._arrays = {k: list(v) for k, v in self._arrays.items()}
        dup._scalars = dict(self._scalars)
        return dup

    def __eq__(self, other) -> bool:
        return (isinstance(other, SharedMemory)
                and self._arrays == other._arrays
                and self._scalars == other._scalars)

    def __repr__(self) -> str:
        return f"SharedMemory(arrays={self._arrays!r}, scalars={self._scalars!r})"


def _arbitrary_pick(seed: int, superstep: int, address: Address, count: int) -> int:
    digest = zlib.crc32(repr((seed, superstep, address)).encode("utf-8"))
    return digest % count


def resolve_writes(requests, policy: WritePolicy, *, superstep: int = 0) -> int:
    """Pick the value one cell ends up with, given all requests aimed at it.

    Resolution only looks at the request set, never at arrival order, so any
    enumeration order of processors yields the same result.
    """
    reqs = list(requests)
    if not reqs:
        raise ValueError("resolve_writes needs at least one request")
    if isinstance(policy, Common):
        value = reqs[0][1]
        for r in reqs[1:]:
            if r[1] != value:
                raise PolicyViolationError(reqs[0][0], [x[1] for x in reqs])
        return value
    if isinstance(policy, Priority):
        return min(reqs, key=lambda r: (r[2], r[1]))[1]
    if isinstance(policy, Arbitrary):
        ordered = sorted(reqs, key=lambda r: (r[2], r[1]))
        return ordered[_arbitrary_pick(policy.seed, superstep, ordered[0][0], len(ordered))][1]
    raise TypeError(f"unknown write policy {policy!r}")


def run_phase(kernel: Kernel, num_processors: int, memory: SharedMemory,
              policy: WritePolicy, *, superstep: int = 0) -> SharedMemory:
    """Execute one barrier-separated phase and apply the resolved writes."""
    if num_processors < 0:
        raise ValueError("num_processors must be >= 0")
    grouped: dict[Address, list] = {}
    setdefault = grouped.setdefault
    for p in range(num_processors):
        for req in kernel(p, memory):
            setdefault(req[0], []).append(req)
    for address, reqs in grouped.items():
        if len(reqs) == 1:
            memory.store(address, reqs[0][1])
        else:
            memory.store(address, resolve_writes(reqs, policy, superstep=superstep))
    return memory


class PramEngine:
    """Phase runner with a superstep guard and the arbitrary-choice salt.

    ``supersteps`` counts refinement iterations registered through
    :meth:`begin_superstep`; drivers default the guard to ``3n + |Act| + 8``,
    comfortably above the proven linear iteration bounds, so tripping it
    means the loop is not converging.  ``phases`` counts barriers and salts
    the Arbitrary policy so winners are not correlated across phases.
    """

    def __init__(self, policy: WritePolicy, *, max_supersteps: int | None = None):
        self.policy = policy
        self.max_supersteps = max_supersteps
        self.supersteps = 0
        self.phases = 0

    def begin_superstep(self) -> int:
        self.supersteps += 1
        if self.max_supersteps is not None and self.supersteps > self.max_supersteps:
            raise SuperstepLimitError(
                f"superstep guard exceeded ({self.supersteps} > {self.max_supersteps})")
        return self.supersteps

    def run_phase(self, kernel: Kernel, num_processors: int,
                  memory: SharedMemory) -> SharedMemory:
        self.phases += 1
        return run_phase(kernel, num_processors, memory, self.policy,
                         superstep=self.phases)
