"""DAG data model for architectures: op vocabulary, validity, identity, serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class OpType(IntEnum):
    INPUT = 0
    CONV3X3 = 1
    SEP3X3 = 2
    CONV5X5 = 3
    SEP5X5 = 4
    AVGPOOL = 5
    MAXPOOL = 6
    OUTPUT = 7


NUM_TYPES = 8
INTERNAL_TYPES = tuple(range(1, 7))
DEFAULT_MAX_NODES = 8

# Violation codes reported by validate().
NO_PRED = "NO_PRED"
NO_SUCC = "NO_SUCC"
BAD_INPUT = "BAD_INPUT"
BAD_OUTPUT = "BAD_OUTPUT"
BAD_TYPE = "BAD_TYPE"
TOO_MANY_NODES = "TOO_MANY_NODES"


@dataclass(frozen=True)
class Architecture:
    """A network cell: node types in topological position order plus forward edges.

    Edges are pairs (u, v) with u < v, so the graph is acyclic by construction.
    Instances are immutable and hashable; equality is literal representation
    equality (type sequence plus edge set), not graph isomorphism.
    """

    types: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(int(t) for t in self.types))
        object.__setattr__(
            self, "edges", frozenset((int(u), int(v)) for u, v in self.edges)
        )
        for u, v in self.edges:
            if not 0 <= u < v < len(self.types):
                raise ValueError(f"edge ({u}, {v}) is not a forward edge in range")

    @property
    def n_nodes(self) -> int:
        return len(self.types)

    def predecessors(self, v: int) -> list[int]:
        return sorted(u for u, w in self.edges if w == v)

    def successors(self, u: int) -> list[int]:
        return sorted(w for x, w in self.edges if x == u)


@dataclass
class ValidityReport:
    valid: bool
    violations: list[str] = field(default_factory=list)


def validate(arch: Architecture, max_nodes: int = DEFAULT_MAX_NODES) -> ValidityReport:
    """Check the well-formedness rules for a complete architecture.

    Valid means: exactly one INPUT at index 0, exactly one OUTPUT at the last
    index, internal types drawn from the six op codes, every non-INPUT node has
    a predecessor, every non-OUTPUT node has a successor, and the node count
    does not exceed ``max_nodes``.
    """
    violations = []
    n = arch.n_nodes
    if n > max_nodes:
        violations.append(TOO_MANY_NODES)
    if n == 0 or arch.types[0] != OpType.INPUT:
        violations.append(BAD_INPUT)
    if n == 0 or arch.types[-1] != OpType.OUTPUT:
        violations.append(BAD_OUTPUT)
    for i in range(1, n - 1):
        # Interior occurrences of INPUT/OUTPUT are type violations too.
        if arch.types[i] not in INTERNAL_TYPES:
            violations.append(BAD_TYPE)
    has_pred = {v for _, v in arch.edges}
    has_succ = {u for u, _ in arch.edges}
    for i in range(n):
        if i > 0 and i not in has_pred:
            violations.append(NO_PRED)
        if i < n - 1 and i not in has_succ:
            violations.append(NO_SUCC)
    return ValidityReport(valid=not violations, violations=violations)


def identity_key(arch: Architecture) -> str:
    """Canonical text key: equal architectures produce equal keys and vice versa."""
    types = ",".join(str(t) for t in arch.types)
    edges = ",".join(f"{u}-{v}" for u, v in sorted(arch.edges))
    return f"{types}|{edges}"


def to_record(arch: Architecture, perf: float | None = None, comp: float | None = None) -> dict:
    record = {
        "types": [int(t) for t in arch.types],
        "edges": [[u, v] for u, v in sorted(arch.edges)],
    }
    if perf is not None:
        record["perf"] = perf
    if comp is not None:
        record["comp"] = comp
    return record


def from_record(record: dict) -> Architecture:
    try:
        types = record["types"]
        edges = record["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"record missing required field: {exc}") from exc
    for t in types:
        if not isinstance(t, int) or not 0 <= t < NUM_TYPES:
            raise ValueError(f"unknown type code {t!r}")
    seen = set()
    for pair in edges:
        if len(pair) != 2:
            raise ValueError(f"malformed edge {pair!r}")
        u, v = pair
        if not (isinstance(u, int) and isinstance(v, int)) or u >= v:
            raise ValueError(f"edge [{u}, {v}] must satisfy u < v")
        if v >= len(types) or u < 0:
            raise ValueError(f"edge [{u}, {v}] references a missing node")
        if (u, v) in seen:
            raise ValueError(f"duplicate edge [{u}, {v}]")
        seen.add((u, v))
    return Architecture(types=tuple(types), edges=frozenset(seen))


def serialize(arch: Architecture, perf: float | None = None, comp: float | None = None) -> str:
    """One JSON-lines record for the architecture (labels optional)."""
    return json.dumps(to_record(arch, perf, comp), separators=(",", ":"), sort_keys=True)


def deserialize(text: str) -> Architecture:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed record: {exc}") from exc
    return from_record(record)


def random_architecture(
    rng: np.random.Generator, n_internal: int, max_nodes: int | None = None
) -> Architecture:
    """Draw a uniformly-typed random valid architecture with ``n_internal`` op nodes.

    Each internal node v gains edge (u, v) with probability 0.5 for every u < v,
    with (v-1, v) forced when nothing was drawn; the output node then collects
    an edge from every node still lacking a successor.
    """
    if n_internal < 1:
        raise ValueError("n_internal must be at least 1")
    n = n_internal + 2
    types = [int(OpType.INPUT)]
    types += [int(rng.integers(1, 7)) for _ in range(n_internal)]
    types.append(int(OpType.OUTPUT))
    edges = set()
    for v in range(1, n - 1):
        drew = False
        for u in range(v):
            if rng.random() < 0.5:
                edges.add((u, v))
                drew = True
        if not drew:
            edges.add((v - 1, v))
    has_succ = {u for u, _ in edges}
    for u in range(n - 1):
        if u not in has_succ:
            edges.add((u, n - 1))
    arch = Architecture(types=tuple(types), edges=frozenset(edges))
    if max_nodes is not None and arch.n_nodes > max_nodes:
        raise ValueError(f"n_internal={n_internal} exceeds max_nodes={max_nodes}")
    return arch
