"""Estimator facade: sklearn conventions, round trips through the latent space."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from archspace.estimator import ArchitectureVAE, check_architectures, check_labels
from archspace.graphs import Architecture, random_architecture, validate
from archspace.oracle import build_dataset

CHAIN = Architecture(types=(0, 1, 7), edges=frozenset({(0, 1), (1, 2)}))


def tiny_estimator(**overrides):
    base = dict(hidden_size=8, latent_size=4, predictor_hidden=6, epochs=5,
                batch_size=8, learning_rate=3e-3, kl_weight=0.05,
                optimizer="adam", seed=0)
    base.update(overrides)
    return ArchitectureVAE(**base)


@pytest.fixture(scope="module")
def fitted():
    ds = build_dataset(16, n_internal=3, seed=0)
    return tiny_estimator().fit(ds)


class TestSklearnConventions:
    def test_get_params_round_trip(self):
        est = tiny_estimator(epochs=9)
        params = est.get_params()
        assert params["epochs"] == 9
        est2 = ArchitectureVAE(**params)
        assert est2.get_params() == params

    def test_clone_preserves_hyperparameters(self):
        est = tiny_estimator(latent_size=5)
        assert clone(est).latent_size == 5

    def test_set_params(self):
        est = tiny_estimator()
        est.set_params(epochs=2)
        assert est.epochs == 2

    def test_unfitted_transform_raises(self):
        with pytest.raises(NotFittedError):
            tiny_estimator().transform([CHAIN])


class TestFitTransformPredict:
    def test_fit_on_triplets(self):
        rng = np.random.default_rng(1)
        archs, seen = [], set()
        from archspace.graphs import identity_key

        while len(archs) < 12:
            a = random_architecture(rng, 3)
            if identity_key(a) not in seen:
                seen.add(identity_key(a))
                archs.append(a)
        y = rng.uniform(0.2, 0.8, size=12)
        z = rng.uniform(0.0, 0.5, size=12)
        est = tiny_estimator(epochs=2).fit(archs, y, z)
        codes = est.transform(archs)
        assert codes.shape == (12, 4)

    def test_transform_rows_are_posterior_means(self, fitted):
        from archspace.encoder import encode_posterior

        codes = fitted.transform([CHAIN])
        np.testing.assert_array_equal(
            codes[0], encode_posterior(CHAIN, fitted.model_).mean)

    def test_predict_shape_and_range(self, fitted):
        out = fitted.predict([CHAIN])
        assert out.shape == (1, 2)
        assert np.all((out > 0) & (out < 1))

    def test_inverse_transform_decodes_validly(self, fitted):
        codes = np.random.default_rng(2).standard_normal((5, 4))
        archs = fitted.inverse_transform(codes)
        assert len(archs) == 5
        assert all(validate(a, max_nodes=8).valid for a in archs)

    def test_search_runs_on_fitted_model(self, fitted):
        result = fitted.search(restarts=2, iterations=3)
        assert len(result.entries) >= 1

    def test_missing_labels_rejected(self):
        with pytest.raises(ValueError, match="required"):
            tiny_estimator().fit([CHAIN])


class TestValidationHelpers:
    def test_invalid_architecture_message(self):
        broken = Architecture(types=(0, 1, 7), edges=frozenset({(0, 1)}))
        with pytest.raises(ValueError, match="invalid"):
            check_architectures([broken], max_nodes=8)

    def test_non_architecture_rejected(self):
        with pytest.raises(TypeError):
            check_architectures([object()], max_nodes=8)

    def test_label_range_enforced(self):
        with pytest.raises(ValueError):
            check_labels([0.5, 1.2], 2, "y")

    def test_label_length_enforced(self):
        with pytest.raises(ValueError):
            check_labels([0.5], 2, "y")
