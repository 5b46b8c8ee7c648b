"""Deterministic surrogate ground truth for performance and complexity labels.

Real labels for this search space would come from training each candidate
network, which is far outside desk scale. The surrogate scores an
architecture from closed forms over its op mix and wiring, so the whole
pipeline stays testable end to end: labels are pure functions of the graph,
bounded to [0, 1], and reproducible bit for bit. Externally labeled data can
be swapped in through the same JSON-lines format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .autodiff import logistic
from .graphs import Architecture, OpType, identity_key, random_architecture, to_record, from_record, validate

DEFAULT_COST = {
    OpType.INPUT: 0.0,
    OpType.CONV3X3: 2.0,
    OpType.SEP3X3: 1.0,
    OpType.CONV5X5: 5.0,
    OpType.SEP5X5: 2.5,
    OpType.AVGPOOL: 0.5,
    OpType.MAXPOOL: 0.5,
    OpType.OUTPUT: 0.0,
}

DEFAULT_QUALITY = {
    OpType.INPUT: 0.0,
    OpType.CONV3X3: 0.30,
    OpType.SEP3X3: 0.25,
    OpType.CONV5X5: 0.35,
    OpType.SEP5X5: 0.30,
    OpType.AVGPOOL: 0.10,
    OpType.MAXPOOL: 0.12,
    OpType.OUTPUT: 0.0,
}


@dataclass(frozen=True)
class OracleConfig:
    cost: dict = field(default_factory=lambda: dict(DEFAULT_COST))
    quality: dict = field(default_factory=lambda: dict(DEFAULT_QUALITY))
    quality_coeff: float = 0.6
    edge_coeff: float = 0.08
    cost_coeff: float = 0.02
    z_norm: float = 100.0

    def __post_init__(self):
        if self.z_norm <= 0:
            raise ValueError("z_norm must be positive")
        if any(c < 0 for c in self.cost.values()) or any(q < 0 for q in self.quality.values()):
            raise ValueError("costs and qualities must be non-negative")


DEFAULT_ORACLE = OracleConfig()


def _require_valid(arch: Architecture) -> None:
    report = validate(arch, max_nodes=arch.n_nodes)  # size-agnostic structural check
    if not report.valid:
        raise ValueError(f"invalid architecture: {report.violations}")


def raw_complexity(arch: Architecture, config: OracleConfig = DEFAULT_ORACLE) -> float:
    """Sum over nodes of op cost times indegree (unnormalized)."""
    indeg = {}
    for _, v in arch.edges:
        indeg[v] = indeg.get(v, 0) + 1
    return sum(config.cost[OpType(t)] * indeg.get(i, 0) for i, t in enumerate(arch.types))


def complexity(arch: Architecture, config: OracleConfig = DEFAULT_ORACLE) -> float:
    """Normalized complexity z in [0, 1]."""
    _require_valid(arch)
    return min(1.0, raw_complexity(arch, config) / config.z_norm)


def performance(arch: Architecture, config: OracleConfig = DEFAULT_ORACLE) -> float:
    """Surrogate accuracy y in (0, 1): rich ops and wiring help, cost hurts."""
    _require_valid(arch)
    total_quality = sum(config.quality[OpType(t)] for t in arch.types)
    logit = (config.quality_coeff * total_quality
             + config.edge_coeff * len(arch.edges)
             - config.cost_coeff * raw_complexity(arch, config))
    return logistic(logit)


@dataclass
class Dataset:
    """Labeled (architecture, performance, complexity) triplets with a fixed split."""

    train: list[tuple[Architecture, float, float]]
    test: list[tuple[Architecture, float, float]]
    seed: int = 0
    split_fraction: float = 0.9

    @property
    def n(self) -> int:
        return len(self.train) + len(self.test)

    def records(self):
        for arch, y, z in self.train:
            yield arch, y, z, "train"
        for arch, y, z in self.test:
            yield arch, y, z, "test"

    def training_keys(self) -> set[str]:
        return {identity_key(a) for a, _, _ in self.train}

    def to_jsonl(self) -> str:
        lines = []
        for arch, y, z, split in self.records():
            record = to_record(arch)
            record["perf"] = y
            record["comp"] = z
            record["split"] = split
            lines.append(jsonio.dumps(record))
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    def fingerprint(self) -> str:
        return jsonio.sha256_bytes(self.to_jsonl().encode())

    @classmethod
    def load(cls, path: str | Path, split_fraction: float = 0.9) -> "Dataset":
        """Read a JSON-lines dataset; honors per-record splits when present,
        otherwise splits by line order at ``split_fraction``."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed record: {exc}") from exc
            arch = from_record(record)
            if "perf" not in record or "comp" not in record:
                raise ValueError(f"line {lineno}: missing perf/comp labels")
            y, z = float(record["perf"]), float(record["comp"])
            if not (0.0 <= y <= 1.0 and 0.0 <= z <= 1.0):
                raise ValueError(f"line {lineno}: labels outside [0, 1]")
            split = record.get("split")
            if split not in (None, "train", "test"):
                raise ValueError(f"line {lineno}: unknown split {split!r}")
            rows.append((arch, y, z, split))
        tagged = sum(split is not None for _, _, _, split in rows)
        if tagged:
            if tagged != len(rows):
                raise ValueError("dataset mixes records with and without split tags")
            train = [(a, y, z) for a, y, z, s in rows if s == "train"]
            test = [(a, y, z) for a, y, z, s in rows if s == "test"]
        else:
            cut = int(len(rows) * split_fraction)
            train = [(a, y, z) for a, y, z, _ in rows[:cut]]
            test = [(a, y, z) for a, y, z, _ in rows[cut:]]
        return cls(train=train, test=test, split_fraction=split_fraction)


def build_dataset(n: int, n_internal: int = 6, seed: int = 0,
                  split_fraction: float = 0.9,
                  config: OracleConfig = DEFAULT_ORACLE) -> Dataset:
    """Collect ``n`` unique random architectures, label them, shuffle, split."""
    if n < 10:
        raise ValueError("need at least 10 architectures")
    rng = np.random.default_rng(seed)
    seen: set[str] = set()
    archs: list[Architecture] = []
    while len(archs) < n:
        arch = random_architecture(rng, n_internal)
        key = identity_key(arch)
        if key not in seen:
            seen.add(key)
            archs.append(arch)
    order = rng.permutation(n)
    labeled = [(archs[i], performance(archs[i], config), complexity(archs[i], config))
               for i in order]
    cut = int(n * split_fraction)
    return Dataset(train=labeled[:cut], test=labeled[cut:], seed=seed,
                   split_fraction=split_fraction)
