"""Inference-time discovery: gradient ascent on the predictor surface, then decode."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import jsonio, oracle
from .autodiff import ComputationRecord, Tensor, recording
from .decoder import generate, greedy_generate
from .encoder import encode_posterior
from .graphs import Architecture, identity_key, to_record
from .predictors import combined_objective, predict_comp, predict_perf


@dataclass(frozen=True)
class SearchConfig:
    step_size: float = 0.01
    iterations: int = 100
    restarts: int = 10
    decode: str = "greedy"  # or "stochastic"
    n_decode: int = 10  # stochastic decodes per restart
    comp_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        # step_size 0 is allowed as the degenerate no-op (continuity checks)
        if self.step_size < 0:
            raise ValueError("step_size must be non-negative")
        if self.iterations < 1 or self.restarts < 1 or self.n_decode < 1:
            raise ValueError("iterations, restarts and n_decode must be at least 1")
        if self.decode not in ("greedy", "stochastic"):
            raise ValueError(f"unknown decode mode {self.decode!r}")


@dataclass
class SearchEntry:
    architecture: Architecture
    pred_perf: float
    pred_comp: float
    pred_objective: float
    restart: int
    trajectory: list[float]
    oracle_perf: float | None = None
    oracle_comp: float | None = None


@dataclass
class SearchResult:
    entries: list[SearchEntry]
    trajectories: list[list[float]]  # one per restart, before deduplication
    config: SearchConfig

    def best(self) -> SearchEntry:
        return self.entries[0]

    def to_json_obj(self) -> dict:
        return {
            "config": asdict(self.config),
            "entries": [
                {
                    "architecture": to_record(e.architecture),
                    "identity_key": identity_key(e.architecture),
                    "pred_perf": e.pred_perf,
                    "pred_comp": e.pred_comp,
                    "pred_objective": e.pred_objective,
                    "restart": e.restart,
                    "trajectory": e.trajectory,
                    "oracle_perf": e.oracle_perf,
                    "oracle_comp": e.oracle_comp,
                }
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return jsonio.dumps(self.to_json_obj())

    def trajectories_csv(self) -> str:
        lines = ["restart,step,f"]
        for r, traj in enumerate(self.trajectories):
            for step, f in enumerate(traj):
                lines.append(f"{r},{step},{jsonio.float_repr(f)}")
        return "\n".join(lines) + "\n"


def ascend(s0, model, config: SearchConfig) -> tuple[np.ndarray, list[float]]:
    """Plain gradient ascent on the combined objective from ``s0``.

    The trajectory holds the objective at every visited point, start and end
    included (``iterations + 1`` values).
    """
    s = np.array(s0, dtype=np.float64)
    trajectory = []
    for _ in range(config.iterations):
        record = ComputationRecord()
        with recording(record):
            leaf = Tensor(s.copy())
            f = combined_objective(leaf, model, config.comp_weight)
        trajectory.append(f.item())
        record.backward(f)
        grad = leaf.grad if leaf.grad is not None else np.zeros_like(s)
        s = s + config.step_size * grad
    trajectory.append(combined_objective(Tensor(s), model, config.comp_weight).item())
    return s, trajectory


def _score(arch: Architecture, model, comp_weight: float) -> tuple[float, float, float]:
    """Predicted labels for a concrete architecture via its posterior mean."""
    mu = encode_posterior(arch, model).mean
    perf = predict_perf(mu, model)
    comp = predict_comp(mu, model)
    return perf, comp, perf - comp_weight * comp


def search(model, config: SearchConfig,
           oracle_config: oracle.OracleConfig | None = None) -> SearchResult:
    """Restarted ascent from prior samples; decoded results ranked by predicted
    objective and deduplicated by identity key."""
    entries: list[SearchEntry] = []
    trajectories: list[list[float]] = []
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, 10, restart])
        s0 = rng.standard_normal(model.config.latent_size)
        s_final, trajectory = ascend(s0, model, config)
        trajectories.append(trajectory)

        if config.decode == "greedy":
            candidates = [greedy_generate(s_final, model)]
        else:
            candidates = [generate(s_final, model, rng)[0] for _ in range(config.n_decode)]
        scored = [(_score(a, model, config.comp_weight), a) for a in candidates]
        scored.sort(key=lambda item: (-item[0][2], identity_key(item[1])))
        (perf, comp, objective), arch = scored[0]
        entries.append(SearchEntry(architecture=arch, pred_perf=perf, pred_comp=comp,
                                   pred_objective=objective, restart=restart,
                                   trajectory=trajectory))

    deduped: dict[str, SearchEntry] = {}
    for entry in entries:
        key = identity_key(entry.architecture)
        if key not in deduped or entry.pred_objective > deduped[key].pred_objective:
            deduped[key] = entry
    ranked = sorted(deduped.values(),
                    key=lambda e: (-e.pred_objective, identity_key(e.architecture)))
    result = SearchResult(entries=ranked, trajectories=trajectories, config=config)
    if oracle_config is not None:
        score_with_oracle(result, oracle_config)
    return result


def score_with_oracle(result: SearchResult, config: oracle.OracleConfig) -> None:
    """Fill in ground-truth labels so the predicted-vs-actual gap is measurable."""
    for entry in result.entries:
        entry.oracle_perf = oracle.performance(entry.architecture, config)
        entry.oracle_comp = oracle.complexity(entry.architecture, config)
