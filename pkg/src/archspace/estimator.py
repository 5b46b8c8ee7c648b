"""Scikit-learn style front door for the whole pipeline.

``ArchitectureVAE`` behaves like any other estimator: constructor arguments are
hyper-parameters (visible to ``get_params``/``set_params``/``clone``), ``fit``
trains on labeled architectures, ``transform`` maps architectures to latent
codes, ``inverse_transform`` decodes codes back to architectures, and
``predict`` returns the two regression targets.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .encoder import encode_posterior
from .graphs import Architecture, validate
from .oracle import Dataset
from .predictors import predict_comp, predict_perf
from .search import SearchConfig, SearchResult
from .search import search as run_search
from .trainer import TrainConfig, train


def check_architectures(X, max_nodes: int) -> list[Architecture]:
    """Validation helper: coerce X to a list of valid architectures."""
    if isinstance(X, Architecture):
        X = [X]
    archs = list(X)
    for i, arch in enumerate(archs):
        if not isinstance(arch, Architecture):
            raise TypeError(f"X[{i}] is {type(arch).__name__}, expected Architecture")
        report = validate(arch, max_nodes=max_nodes)
        if not report.valid:
            raise ValueError(f"X[{i}] is invalid: {report.violations}")
    return archs


def check_labels(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} entries for {n} architectures")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


class ArchitectureVAE(TransformerMixin, BaseEstimator):
    """Latent-space architecture model with attached performance/complexity heads."""

    def __init__(self, hidden_size=64, latent_size=16, predictor_hidden=64,
                 learning_rate=1e-3, batch_size=32, epochs=300, kl_weight=1.0,
                 optimizer="sgd", clip_norm=5.0, max_nodes=8, eval_every=50,
                 seed=0):
        self.hidden_size = hidden_size
        self.latent_size = latent_size
        self.predictor_hidden = predictor_hidden
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.kl_weight = kl_weight
        self.optimizer = optimizer
        self.clip_norm = clip_norm
        self.max_nodes = max_nodes
        self.eval_every = eval_every
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            epochs=self.epochs, kl_weight=self.kl_weight, optimizer=self.optimizer,
            clip_norm=self.clip_norm, seed=self.seed, hidden_size=self.hidden_size,
            latent_size=self.latent_size, predictor_hidden=self.predictor_hidden,
            max_nodes=self.max_nodes, eval_every=self.eval_every,
        )

    def fit(self, X, y=None, z=None):
        """Train on a :class:`Dataset` or on (architectures, y, z) triplets."""
        if isinstance(X, Dataset):
            dataset = X
        else:
            archs = check_architectures(X, self.max_nodes)
            if y is None or z is None:
                raise ValueError("y (performance) and z (complexity) are required")
            y = check_labels(y, len(archs), "y")
            z = check_labels(z, len(archs), "z")
            dataset = Dataset(train=list(zip(archs, y, z)), test=[], seed=self.seed)
        self.model_, self.log_ = train(dataset, self._train_config())
        return self

    def transform(self, X) -> np.ndarray:
        """Posterior means, one row per architecture."""
        check_is_fitted(self, "model_")
        archs = check_architectures(X, self.max_nodes)
        return np.stack([encode_posterior(a, self.model_).mean for a in archs])

    def inverse_transform(self, S) -> list[Architecture]:
        """Greedy-decode each latent row back to an architecture."""
        check_is_fitted(self, "model_")
        from .decoder import greedy_generate

        S = np.atleast_2d(np.asarray(S, dtype=np.float64))
        if S.shape[1] != self.latent_size:
            raise ValueError(f"latent codes must have width {self.latent_size}")
        return [greedy_generate(s, self.model_) for s in S]

    def predict(self, X) -> np.ndarray:
        """Columns (predicted performance, predicted complexity)."""
        codes = self.transform(X)
        return np.array([[predict_perf(s, self.model_), predict_comp(s, self.model_)]
                         for s in codes])

    def search(self, config: SearchConfig | None = None, **overrides) -> SearchResult:
        """Gradient-ascent discovery in the fitted latent space."""
        check_is_fitted(self, "model_")
        if config is None:
            config = SearchConfig(seed=self.seed, **overrides)
        elif overrides:
            raise ValueError("pass either a config or keyword overrides, not both")
        return run_search(self.model_, config)
