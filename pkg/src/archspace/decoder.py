"""Autoregressive decoder: latent code to DAG, plus teacher-forced losses.

Generation emits one node at a time. The next node's type is drawn from a
softmax over the emittable op codes (1..7) conditioned on the previous node's
state; candidate incoming edges are then decided most-recent-first, with the
node's state refreshed after every accepted edge so later decisions see the
structure built so far. Connectivity fallbacks guarantee that every decode
path terminates in a valid architecture: a node that accepted nothing is wired
to its immediate predecessor, and the output node collects an edge from every
node still lacking a successor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import ParamStore, Tensor
from .encoder import gated_sum_cached
from .graphs import NUM_TYPES, Architecture, OpType, validate

# Emittable codes are 1..7: logit index i corresponds to op code i + 1.
N_EMITTABLE = NUM_TYPES - 1


def register_params(store: ParamStore, hidden_size: int, latent_size: int) -> None:
    ad.register_mlp(store, "dec.init", ad.MlpSpec((latent_size, hidden_size)))
    ad.register_gru(store, "dec.gru", NUM_TYPES, hidden_size)
    store.add("dec.gate.w", (hidden_size, hidden_size), hidden_size)
    store.add("dec.gate.b", (hidden_size,), hidden_size)
    store.add("dec.map.w", (hidden_size, hidden_size), hidden_size)
    store.add("dec.map.b", (hidden_size,), hidden_size)
    ad.register_mlp(store, "dec.addnode",
                    ad.MlpSpec((hidden_size, hidden_size, N_EMITTABLE)))
    store.add("dec.edge.wu", (hidden_size, hidden_size), hidden_size)
    store.add("dec.edge.wv", (hidden_size, hidden_size), hidden_size)
    store.add("dec.edge.b", (hidden_size,), hidden_size)
    store.add("dec.edge.out.w", (1, hidden_size), hidden_size)
    store.add("dec.edge.out.b", (1,), hidden_size)


def _init_state(s: Tensor, model) -> Tensor:
    return ad.mlp_forward(s, model.spec("dec.init"), model.params, "dec.init")


def _node_state(model, type_code: int, agg: Tensor) -> Tensor:
    x = Tensor(ad.one_hot(type_code, NUM_TYPES))
    return ad.gru_cell(x, agg, model.params, "dec.gru")


def _refresh_state(model, type_code: int, accepted: list[int], states: list[Tensor],
                   cache: dict[int, Tensor]) -> Tensor:
    agg = gated_sum_cached(accepted, states, model, "dec", cache)
    return _node_state(model, type_code, agg)


def _type_logits(model, h_prev: Tensor) -> Tensor:
    return ad.mlp_forward(h_prev, model.spec("dec.addnode"), model.params, "dec.addnode")


def _edge_logit(model, h_u: Tensor, h_v: Tensor) -> Tensor:
    p = model.params.node
    hidden = ad.tanh(ad.affine2(p("dec.edge.wu"), h_u, p("dec.edge.wv"), h_v,
                                p("dec.edge.b")))
    return ad.affine(p("dec.edge.out.w"), hidden, p("dec.edge.out.b"))


@dataclass
class GenerationTrace:
    """Decisions taken during one decode, sufficient to rebuild the result."""

    type_choices: list[int] = field(default_factory=list)
    edge_decisions: list[tuple[int, int, float, bool, bool]] = field(default_factory=list)
    # (u, v, probability, accepted, forced)
    closure_edges: list[tuple[int, int]] = field(default_factory=list)

    def replay(self) -> Architecture:
        types = [int(OpType.INPUT)] + list(self.type_choices)
        edges = {(u, v) for u, v, _, accepted, forced in self.edge_decisions
                 if accepted or forced}
        edges.update(self.closure_edges)
        return Architecture(types=tuple(types), edges=frozenset(edges))


def generate(s, model, rng: np.random.Generator,
             max_nodes: int | None = None) -> tuple[Architecture, GenerationTrace]:
    """Stochastic decode of a latent code; always yields a valid architecture."""
    return _decode(s, model, max_nodes, rng=rng)


def greedy_generate(s, model, max_nodes: int | None = None) -> Architecture:
    """Deterministic decode: argmax types (ties to the lower code), edges
    accepted only when their probability exceeds one half."""
    arch, _ = _decode(s, model, max_nodes, rng=None)
    return arch


def _decode(s, model, max_nodes, rng):
    if max_nodes is None:
        max_nodes = model.config.max_nodes
    if not isinstance(s, Tensor):
        s = Tensor(np.asarray(s, dtype=np.float64))
    trace = GenerationTrace()
    states = [_init_state(s, model)]
    types = [int(OpType.INPUT)]
    edges: set[tuple[int, int]] = set()
    cache: dict[int, Tensor] = {}

    for v in range(1, max_nodes):
        if v == max_nodes - 1:
            # node budget exhausted: append the output node and close the graph
            types.append(int(OpType.OUTPUT))
            trace.type_choices.append(int(OpType.OUTPUT))
            _close_graph(v, types, edges, trace)
            break
        logits = _type_logits(model, states[-1]).data
        if rng is None:
            code = int(np.argmax(logits)) + 1
        else:
            probs = ad.softmax_stable(logits)
            code = int(rng.choice(N_EMITTABLE, p=probs)) + 1
        types.append(code)
        trace.type_choices.append(code)

        h_v = _node_state(model, code, Tensor(model.zero_hidden))
        accepted: list[int] = []
        for u in range(v - 1, -1, -1):
            prob = ad.logistic(_edge_logit(model, states[u], h_v).data.item())
            take = (rng.random() < prob) if rng is not None else (prob > 0.5)
            trace.edge_decisions.append((u, v, prob, take, False))
            if take:
                edges.add((u, v))
                accepted.append(u)
                h_v = _refresh_state(model, code, accepted, states, cache)
        if not accepted:
            edges.add((v - 1, v))
            accepted.append(v - 1)
            h_v = _refresh_state(model, code, accepted, states, cache)
            trace.edge_decisions.append((v - 1, v, 1.0, False, True))
        states.append(h_v)

        if code == OpType.OUTPUT:
            _close_graph(v, types, edges, trace)
            break

    arch = Architecture(types=tuple(types), edges=frozenset(edges))
    report = validate(arch, max_nodes=max_nodes)
    assert report.valid, f"decoder emitted an invalid graph: {report.violations}"
    return arch, trace


def _close_graph(v: int, types: list[int], edges: set, trace: GenerationTrace) -> None:
    has_succ = {u for u, _ in edges}
    for u in range(v):
        if u not in has_succ:
            edges.add((u, v))
            trace.closure_edges.append((u, v))


def teacher_forced_loss(arch: Architecture, s: Tensor, model) -> tuple[Tensor, Tensor]:
    """Reconstruction losses with ground-truth decisions: categorical
    cross-entropy over node types and binary cross-entropy over every
    candidate edge slot, states following the true structure throughout."""
    report = validate(arch, max_nodes=model.config.max_nodes)
    if not report.valid:
        raise ValueError(f"cannot compute loss for invalid architecture: {report.violations}")
    if not isinstance(s, Tensor):
        s = Tensor(np.asarray(s, dtype=np.float64))

    states = [_init_state(s, model)]
    cache: dict[int, Tensor] = {}
    type_losses: list[Tensor] = []
    edge_losses: list[Tensor] = []
    for v in range(1, arch.n_nodes):
        true_code = arch.types[v]
        logits = _type_logits(model, states[-1])
        type_losses.append(ad.cross_entropy_logits(logits, true_code - 1))

        h_v = _node_state(model, true_code, Tensor(model.zero_hidden))
        accepted: list[int] = []
        for u in range(v - 1, -1, -1):
            logit = _edge_logit(model, states[u], h_v)
            present = (u, v) in arch.edges
            edge_losses.append(ad.bce_logits(logit, 1.0 if present else 0.0))
            if present:
                accepted.append(u)
                h_v = _refresh_state(model, true_code, accepted, states, cache)
        states.append(h_v)

    return ad.vsum(type_losses), ad.vsum(edge_losses)
