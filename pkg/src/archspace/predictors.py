"""Regression heads on the latent space: performance and complexity."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import MlpSpec, ParamStore, Tensor

HEADS = ("perf", "comp")


def register_params(store: ParamStore, latent_size: int, predictor_hidden: int) -> None:
    spec = MlpSpec((latent_size, predictor_hidden, predictor_hidden, 1),
                   hidden="tanh", final="logistic")
    for head in HEADS:
        ad.register_mlp(store, head, spec)


def predict(s: Tensor, model, head: str) -> Tensor:
    """Scalar prediction in (0, 1) for one head ("perf" or "comp")."""
    if head not in HEADS:
        raise ValueError(f"unknown head {head!r}")
    out = ad.mlp_forward(s, model.spec(head), model.params, head)
    return ad.sum_all(out)  # width-1 output to scalar


def predict_perf(s, model) -> float:
    return predict(_as_tensor(s), model, "perf").item()


def predict_comp(s, model) -> float:
    return predict(_as_tensor(s), model, "comp").item()


def squared_errors(s: Tensor, y: float, z: float, model) -> tuple[Tensor, Tensor]:
    if not (0.0 <= y <= 1.0 and 0.0 <= z <= 1.0):
        raise ValueError(f"labels must lie in [0, 1], got y={y}, z={z}")
    err_y = ad.square(ad.add_const(predict(s, model, "perf"), -y))
    err_z = ad.square(ad.add_const(predict(s, model, "comp"), -z))
    return err_y, err_z


def predictor_loss(batch, model) -> Tensor:
    """Sum over (s, y, z) items of both squared errors."""
    losses = []
    for s, y, z in batch:
        err_y, err_z = squared_errors(_as_tensor(s), y, z, model)
        losses.append(ad.add(err_y, err_z))
    if not losses:
        raise ValueError("empty batch")
    return ad.vsum(losses)


def combined_objective(s: Tensor, model, comp_weight: float = 1.0) -> Tensor:
    """Search objective: predicted performance minus weighted predicted complexity."""
    perf = predict(s, model, "perf")
    comp = predict(s, model, "comp")
    return ad.add(perf, ad.mul_const(comp, -comp_weight))


def _as_tensor(s) -> Tensor:
    return s if isinstance(s, Tensor) else Tensor(np.asarray(s, dtype=np.float64))
