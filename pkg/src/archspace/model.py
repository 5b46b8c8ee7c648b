"""The model bundle: configuration, one parameter store, checkpointing."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import decoder, encoder, jsonio, predictors
from .autodiff import MlpSpec, ParamStore
from .graphs import DEFAULT_MAX_NODES, NUM_TYPES


@dataclass(frozen=True)
class ModelConfig:
    hidden_size: int = 64
    latent_size: int = 16
    predictor_hidden: int = 64
    max_nodes: int = DEFAULT_MAX_NODES
    logvar_bound: float = 10.0
    seed: int = 0


class Model:
    """Encoder, decoder and predictor parameters behind one dotted-name store."""

    def __init__(self, config: ModelConfig, params: ParamStore | None = None):
        self.config = config
        h, j, p = config.hidden_size, config.latent_size, config.predictor_hidden
        if params is None:
            params = ParamStore(config.seed)
            encoder.register_params(params, h, j)
            decoder.register_params(params, h, j)
            predictors.register_params(params, j, p)
            params.freeze()
        self.params = params
        self.zero_hidden = np.zeros(h)
        self.zero_hidden.setflags(write=False)
        self._specs = {
            "enc.mean": MlpSpec((h, j)),
            "enc.logvar": MlpSpec((h, j)),
            "dec.init": MlpSpec((j, h)),
            "dec.addnode": MlpSpec((h, h, decoder.N_EMITTABLE)),
            "perf": MlpSpec((j, p, p, 1), hidden="tanh", final="logistic"),
            "comp": MlpSpec((j, p, p, 1), hidden="tanh", final="logistic"),
        }

    def spec(self, name: str) -> MlpSpec:
        return self._specs[name]

    def zero_all_params(self) -> None:
        """Testing hook: clears every parameter so closed-form cases apply."""
        for name in self.params.names():
            self.params.value(name)[...] = 0.0

    # -- persistence ---------------------------------------------------------

    def checkpoint_obj(self, epoch: int = 0, dataset_fingerprint: str = "") -> dict:
        return {
            "format": "archspace-checkpoint-v1",
            "config": asdict(self.config),
            "epoch": int(epoch),
            "dataset_fingerprint": dataset_fingerprint,
            "params": self.params.to_json_obj(),
        }

    def save(self, path: str | Path, epoch: int = 0, dataset_fingerprint: str = "") -> None:
        jsonio.write_json(path, self.checkpoint_obj(epoch, dataset_fingerprint))

    @classmethod
    def load(cls, path: str | Path) -> tuple["Model", dict]:
        """Restore a model; returns (model, metadata with epoch/fingerprint)."""
        obj = json.loads(Path(path).read_text())
        if obj.get("format") != "archspace-checkpoint-v1":
            raise ValueError(f"not a checkpoint file: {path}")
        config = ModelConfig(**obj["config"])
        params = ParamStore.from_json_obj(obj["params"], rng_seed=config.seed)
        model = cls(config, params=params)
        meta = {"epoch": obj.get("epoch", 0),
                "dataset_fingerprint": obj.get("dataset_fingerprint", "")}
        return model, meta
