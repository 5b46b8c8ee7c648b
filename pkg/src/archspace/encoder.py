"""Architecture encoder: message passing along the DAG into a Gaussian posterior.

Node states are computed in index order (a topological order by construction):
each node's predecessors are aggregated with a gated sum and fused with the
node's type one-hot by a recurrent cell. The output node's state parameterizes
a diagonal Gaussian over the latent space.

All functions operate on autodiff tensors; run them inside a recording to get
gradients, or outside for plain evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import MlpSpec, ParamStore, Tensor
from .graphs import NUM_TYPES, Architecture, validate


def register_params(store: ParamStore, hidden_size: int, latent_size: int) -> None:
    store.add("enc.gate.w", (hidden_size, hidden_size), hidden_size)
    store.add("enc.gate.b", (hidden_size,), hidden_size)
    store.add("enc.map.w", (hidden_size, hidden_size), hidden_size)
    store.add("enc.map.b", (hidden_size,), hidden_size)
    ad.register_gru(store, "enc.gru", NUM_TYPES, hidden_size)
    ad.register_mlp(store, "enc.mean", MlpSpec((hidden_size, latent_size)))
    ad.register_mlp(store, "enc.logvar", MlpSpec((hidden_size, latent_size)))


def _term(h: Tensor, model, prefix: str) -> Tensor:
    p = model.params.node
    return ad.gated_term(p(f"{prefix}.gate.w"), p(f"{prefix}.gate.b"),
                         p(f"{prefix}.map.w"), p(f"{prefix}.map.b"), h)


def gated_sum(hiddens: list[Tensor], model, prefix: str) -> Tensor:
    """Permutation-invariant aggregation: sum of gate(h) * map(h) over members.

    Callers pass members in canonical (node-index) order so the float sum is
    bit-reproducible; the empty aggregation is the zero vector.
    """
    if not hiddens:
        return Tensor(model.zero_hidden)
    return ad.vsum([_term(h, model, prefix) for h in hiddens])


def gated_sum_cached(indices: list[int], states: list[Tensor], model, prefix: str,
                     cache: dict[int, Tensor]) -> Tensor:
    """Gated sum over node states, reusing each member's term across calls.

    States are final once written, so a member's gated term is a pure shared
    subexpression; the tape handles the fan-out.
    """
    if not indices:
        return Tensor(model.zero_hidden)
    terms = []
    for u in sorted(indices):
        t = cache.get(u)
        if t is None:
            t = cache[u] = _term(states[u], model, prefix)
        terms.append(t)
    return ad.vsum(terms)


def encode(arch: Architecture, model) -> Tensor:
    """Sweep the DAG in index order and return the output node's state."""
    report = validate(arch, max_nodes=model.config.max_nodes)
    if not report.valid:
        raise ValueError(f"cannot encode invalid architecture: {report.violations}")
    preds: dict[int, list[int]] = {v: [] for v in range(arch.n_nodes)}
    for u, v in arch.edges:
        preds[v].append(u)
    states: list[Tensor] = []
    cache: dict[int, Tensor] = {}
    for v in range(arch.n_nodes):
        agg = gated_sum_cached(sorted(preds[v]), states, model, "enc", cache)
        x = Tensor(ad.one_hot(arch.types[v], NUM_TYPES))
        states.append(ad.gru_cell(x, agg, model.params, "enc.gru"))
    return states[-1]


@dataclass
class Posterior:
    """Diagonal Gaussian over the latent space (autodiff tensors)."""

    mu: Tensor
    logvar: Tensor

    @property
    def mean(self) -> np.ndarray:
        return self.mu.data


def posterior(h_out: Tensor, model) -> Posterior:
    """Two heads on the graph state; log-variance clamped to a safe band."""
    cfg = model.config
    mu = ad.mlp_forward(h_out, model.spec("enc.mean"), model.params, "enc.mean")
    logvar = ad.mlp_forward(h_out, model.spec("enc.logvar"), model.params, "enc.logvar")
    logvar = ad.clamp(logvar, -cfg.logvar_bound, cfg.logvar_bound)
    return Posterior(mu=mu, logvar=logvar)


def sample_latent(post: Posterior, rng: np.random.Generator | None = None,
                  eps: np.ndarray | None = None) -> Tensor:
    """Reparameterized draw mu + exp(logvar/2) * eps; gradients reach both heads."""
    if eps is None:
        if rng is None:
            raise ValueError("sample_latent needs an rng or an explicit eps")
        eps = rng.standard_normal(post.mu.data.shape[0])
    std = ad.exp(ad.mul_const(post.logvar, 0.5))
    return ad.add(post.mu, ad.mul_const(std, eps))


def kl_divergence(post: Posterior) -> Tensor:
    """KL against the standard normal prior: -1/2 sum(1 + logvar - mu^2 - var)."""
    inner = ad.add_const(
        ad.sub(post.logvar, ad.add(ad.square(post.mu), ad.exp(post.logvar))), 1.0
    )
    return ad.mul_const(ad.sum_all(inner), -0.5)


def encode_posterior(arch: Architecture, model) -> Posterior:
    return posterior(encode(arch, model), model)
