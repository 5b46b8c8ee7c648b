"""Joint minibatch training of encoder, decoder and predictors."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import metrics
from .autodiff import AdamState, ComputationRecord, recording, sgd_step
from .decoder import teacher_forced_loss
from .encoder import encode_posterior, kl_divergence, sample_latent
from .jsonio import float_repr
from .model import Model, ModelConfig
from .predictors import squared_errors


class NumericalDivergenceError(RuntimeError):
    """Loss left the finite range; the run is unrecoverable."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 300
    kl_weight: float = 1.0
    optimizer: str = "sgd"  # "sgd" per the update rule, or "adam"
    clip_norm: float = 5.0
    seed: int = 0
    hidden_size: int = 64
    latent_size: int = 16
    predictor_hidden: int = 64
    max_nodes: int = 8
    eval_every: int = 50
    eval_latent_samples: int = 5
    eval_decodes: int = 5
    serial: bool = False  # byte-stable outputs: suppress wall-clock telemetry

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be at least 1")
        if self.kl_weight < 0:
            raise ValueError("kl_weight must be non-negative")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def model_config(self) -> ModelConfig:
        return ModelConfig(hidden_size=self.hidden_size, latent_size=self.latent_size,
                           predictor_hidden=self.predictor_hidden,
                           max_nodes=self.max_nodes, seed=self.seed)


@dataclass
class EpochRecord:
    epoch: int
    rec_loss: float
    kl: float
    pred_loss: float
    total: float
    seconds: float


@dataclass
class EvalRecord:
    epoch: int
    rmse_perf_test: float
    rmse_comp_test: float
    recon_accuracy_test: float


@dataclass
class TrainLog:
    epochs: list[EpochRecord] = field(default_factory=list)
    evals: list[EvalRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,rec_loss,kl,pred_loss,total,seconds"]
        for r in self.epochs:
            lines.append(f"{r.epoch},{float_repr(r.rec_loss)},{float_repr(r.kl)},"
                         f"{float_repr(r.pred_loss)},{float_repr(r.total)},"
                         f"{float_repr(r.seconds)}")
        return "\n".join(lines) + "\n"

    def evals_to_csv(self) -> str:
        lines = ["epoch,rmse_perf_test,rmse_comp_test,recon_accuracy_test"]
        for r in self.evals:
            lines.append(f"{r.epoch},{float_repr(r.rmse_perf_test)},"
                         f"{float_repr(r.rmse_comp_test)},{float_repr(r.recon_accuracy_test)}")
        return "\n".join(lines) + "\n"

    def eval_at(self, epoch: int) -> EvalRecord | None:
        for r in self.evals:
            if r.epoch == epoch:
                return r
        return None


def total_loss(arch, y: float, z: float, model, rng=None, eps=None,
               kl_weight: float = 1.0):
    """One stochastic pass: reconstruction + weighted KL + both squared errors.

    Returns the scalar loss tensor and a dict with the float parts
    (rec, kl, pred, total).
    """
    post = encode_posterior(arch, model)
    s = sample_latent(post, rng=rng, eps=eps)
    loss_nodes, loss_edges = teacher_forced_loss(arch, s, model)
    kl = kl_divergence(post)
    err_y, err_z = squared_errors(s, y, z, model)
    rec = ad.add(loss_nodes, loss_edges)
    pred = ad.add(err_y, err_z)
    total = ad.add(ad.add(rec, ad.mul_const(kl, kl_weight)), pred)
    parts = {
        "rec": rec.item(),
        "kl": kl.item(),
        "pred": pred.item(),
        "total": total.item(),
    }
    return total, parts


def train(dataset, config: TrainConfig) -> tuple[Model, TrainLog]:
    """Run the full optimization; returns the trained model and its log."""
    if not dataset.train:
        raise ValueError("dataset has no training records")
    model = Model(config.model_config())
    optimizer = AdamState(model.params) if config.optimizer == "adam" else None
    noise_rng = np.random.default_rng([config.seed, 1])
    log = TrainLog()
    items = dataset.train
    n = len(items)

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = np.random.default_rng([config.seed, 2, epoch]).permutation(n)
        sums = {"rec": 0.0, "kl": 0.0, "pred": 0.0, "total": 0.0}
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            model.params.zero_grads()
            for i in batch:
                arch, y, z = items[i]
                record = ComputationRecord()
                with recording(record):
                    loss, parts = total_loss(arch, y, z, model, rng=noise_rng,
                                             kl_weight=config.kl_weight)
                if not np.isfinite(parts["total"]):
                    raise NumericalDivergenceError(
                        f"non-finite loss at epoch {epoch}: {parts}")
                record.backward(loss, seed=1.0 / len(batch))
                for key in sums:
                    sums[key] += parts[key]
            if optimizer is not None:
                optimizer.step(model.params, config.learning_rate, config.clip_norm)
            else:
                sgd_step(model.params, config.learning_rate, config.clip_norm)
        seconds = 0.0 if config.serial else time.perf_counter() - started
        log.epochs.append(EpochRecord(
            epoch=epoch,
            rec_loss=sums["rec"] / n,
            kl=sums["kl"] / n,
            pred_loss=sums["pred"] / n,
            total=sums["total"] / n,
            seconds=seconds,
        ))
        if _due(epoch, config) and dataset.test:
            rmse_perf, rmse_comp = metrics.rmse(model, dataset.test)
            recon = metrics.reconstruction_accuracy(
                model, [a for a, _, _ in dataset.test],
                n_latent=config.eval_latent_samples, n_decode=config.eval_decodes,
                rng=np.random.default_rng([config.seed, 3]))
            log.evals.append(EvalRecord(epoch=epoch, rmse_perf_test=rmse_perf,
                                        rmse_comp_test=rmse_comp,
                                        recon_accuracy_test=recon))
    return model, log


def _due(epoch: int, config: TrainConfig) -> bool:
    if config.eval_every <= 0:
        return False
    return epoch % config.eval_every == 0 or epoch == config.epochs
