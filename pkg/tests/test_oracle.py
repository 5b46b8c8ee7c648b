"""Surrogate oracle: closed-form labels, monotonicity probes, dataset plumbing."""

import numpy as np
import pytest

from archspace.graphs import Architecture, OpType, identity_key, validate
from archspace.oracle import (
    Dataset,
    OracleConfig,
    build_dataset,
    complexity,
    performance,
    raw_complexity,
)

CHAIN = Architecture(types=(0, 1, 7), edges=frozenset({(0, 1), (1, 2)}))


class TestComplexity:
    def test_chain_closed_form(self):
        # conv3x3 costs 2.0 with indegree 1; output costs 0
        assert raw_complexity(CHAIN) == 2.0
        assert complexity(CHAIN) == pytest.approx(0.02)

    def test_pooling_chain_closed_form(self):
        arch = Architecture(types=(0, 5, 6, 7),
                            edges=frozenset({(0, 1), (1, 2), (2, 3)}))
        # avgpool 0.5*1 + maxpool 0.5*1 + output 0*1
        assert raw_complexity(arch) == 1.0
        assert complexity(arch) == pytest.approx(0.01)

    def test_extra_edge_into_conv5x5_adds_its_cost(self):
        base = Architecture(types=(0, 1, 3, 7),
                            edges=frozenset({(0, 1), (1, 2), (2, 3)}))
        more = Architecture(types=(0, 1, 3, 7),
                            edges=frozenset({(0, 1), (1, 2), (0, 2), (2, 3)}))
        assert raw_complexity(more) - raw_complexity(base) == pytest.approx(5.0)

    def test_clamped_to_one(self):
        config = OracleConfig(z_norm=1.0)
        assert complexity(CHAIN, config) == 1.0

    def test_invalid_architecture_rejected(self):
        broken = Architecture(types=(0, 1, 7), edges=frozenset({(0, 1)}))
        with pytest.raises(ValueError, match="invalid"):
            complexity(broken)


class TestPerformance:
    def test_chain_closed_form(self):
        # logistic(0.6*0.30 + 0.08*2 - 0.02*2.0) = logistic(0.30)
        assert performance(CHAIN) == pytest.approx(0.5744425168116590, abs=1e-15)

    def test_avgpool_swap_strictly_decreases(self):
        pool_chain = Architecture(types=(0, 5, 7), edges=frozenset({(0, 1), (1, 2)}))
        assert performance(pool_chain) < performance(CHAIN)

    def test_pure_function_bitwise_stable(self):
        assert performance(CHAIN) == performance(CHAIN)

    def test_conv5x5_swap_never_decreases_quality_sum(self):
        rng = np.random.default_rng(4)
        from archspace.graphs import random_architecture

        config = OracleConfig()
        for _ in range(50):
            arch = random_architecture(rng, 5)
            pooled = [i for i, t in enumerate(arch.types) if t in (5, 6)]
            if not pooled:
                continue
            types = list(arch.types)
            types[pooled[0]] = int(OpType.CONV5X5)
            upgraded = Architecture(types=tuple(types), edges=arch.edges)
            q = lambda a: sum(config.quality[OpType(t)] for t in a.types)
            assert q(upgraded) >= q(arch)


class TestDataset:
    def test_deterministic_bytes(self):
        a = build_dataset(60, n_internal=4, seed=7).to_jsonl()
        b = build_dataset(60, n_internal=4, seed=7).to_jsonl()
        assert a == b

    def test_labels_in_range_and_split_disjoint(self):
        ds = build_dataset(100, n_internal=6, seed=1)
        assert len(ds.train) == 90 and len(ds.test) == 10
        keys_train = {identity_key(a) for a, _, _ in ds.train}
        keys_test = {identity_key(a) for a, _, _ in ds.test}
        assert not keys_train & keys_test
        for _, y, z in ds.train + ds.test:
            assert 0.0 < y < 1.0
            assert 0.0 <= z <= 1.0

    def test_all_records_unique_and_valid(self):
        ds = build_dataset(100, n_internal=6, seed=2)
        keys = [identity_key(a) for a, _, _ in ds.train + ds.test]
        assert len(set(keys)) == len(keys) == 100
        assert all(validate(a).valid for a, _, _ in ds.train + ds.test)

    def test_reload_reproduces_labels(self, tmp_path):
        ds = build_dataset(40, n_internal=3, seed=3)
        path = tmp_path / "data.jsonl"
        ds.save(path)
        loaded = Dataset.load(path)
        assert len(loaded.train) == len(ds.train)
        for (a1, y1, z1), (a2, y2, z2) in zip(ds.train, loaded.train):
            assert a1 == a2 and y1 == y2 and z1 == z2
        assert loaded.fingerprint() == ds.fingerprint()

    def test_line_count_equals_n(self, tmp_path):
        ds = build_dataset(25, n_internal=2, seed=9)
        path = tmp_path / "data.jsonl"
        ds.save(path)
        lines = [l for l in path.read_text().splitlines() if l]
        assert len(lines) == 25

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            build_dataset(5)

    def test_split_fallback_without_split_field(self, tmp_path):
        from archspace.graphs import serialize

        path = tmp_path / "plain.jsonl"
        rng = np.random.default_rng(0)
        from archspace.graphs import random_architecture

        lines = []
        seen = set()
        while len(lines) < 20:
            arch = random_architecture(rng, 3)
            if identity_key(arch) in seen:
                continue
            seen.add(identity_key(arch))
            lines.append(serialize(arch, perf=performance(arch), comp=complexity(arch)))
        path.write_text("\n".join(lines) + "\n")
        ds = Dataset.load(path, split_fraction=0.9)
        assert len(ds.train) == 18 and len(ds.test) == 2
