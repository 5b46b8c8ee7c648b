"""Evaluation suite: reconstruction, prior sampling statistics, RMSE, latent sweeps."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import jsonio
from .decoder import generate
from .encoder import encode_posterior, sample_latent
from .graphs import identity_key, validate
from .predictors import predict_comp, predict_perf


class DegenerateDataError(ValueError):
    """Latent codes carry no variance; principal components are undefined."""


def reconstruction_accuracy(model, graphs, n_latent: int = 5, n_decode: int = 5,
                            rng: np.random.Generator | None = None) -> float:
    """Mean exact-match rate over graphs: encode, draw ``n_latent`` posterior
    samples, stochastically decode each ``n_decode`` times, score key equality."""
    if not graphs:
        raise ValueError("no graphs to reconstruct")
    if rng is None:
        rng = np.random.default_rng(0)
    scores = []
    for arch in graphs:
        key = identity_key(arch)
        post = encode_posterior(arch, model)
        hits = 0
        for _ in range(n_latent):
            s = sample_latent(post, rng).data
            for _ in range(n_decode):
                decoded, _ = generate(s, model, rng)
                hits += identity_key(decoded) == key
        scores.append(hits / (n_latent * n_decode))
    return float(np.mean(scores))


@dataclass
class PriorMetrics:
    validity: float
    uniqueness: float
    novelty: float


def prior_metrics(model, n_points: int = 1000, n_decode: int = 10,
                  rng: np.random.Generator | None = None,
                  training_keys: set[str] | frozenset[str] = frozenset()) -> PriorMetrics:
    """Decode prior samples and report the valid / unique / novel fractions."""
    if rng is None:
        rng = np.random.default_rng(0)
    latent = model.config.latent_size
    n_valid = 0
    unique: set[str] = set()
    for _ in range(n_points):
        s = rng.standard_normal(latent)
        for _ in range(n_decode):
            arch, _ = generate(s, model, rng)
            if validate(arch, max_nodes=model.config.max_nodes).valid:
                n_valid += 1
                unique.add(identity_key(arch))
    total = n_points * n_decode
    validity = n_valid / total if total else 0.0
    uniqueness = len(unique) / n_valid if n_valid else 0.0
    novel = {k for k in unique if k not in training_keys}
    novelty = len(novel) / len(unique) if unique else 0.0
    return PriorMetrics(validity=validity, uniqueness=uniqueness, novelty=novelty)


def rmse(model, labeled) -> tuple[float, float]:
    """Root-mean-square prediction errors from the posterior mean (no sampling)."""
    if not labeled:
        raise ValueError("empty labeled set")
    sq_perf = 0.0
    sq_comp = 0.0
    for arch, y, z in labeled:
        mu = encode_posterior(arch, model).mean
        sq_perf += (predict_perf(mu, model) - y) ** 2
        sq_comp += (predict_comp(mu, model) - z) ** 2
    n = len(labeled)
    return float(np.sqrt(sq_perf / n)), float(np.sqrt(sq_comp / n))


def _power_iteration(matrix: np.ndarray, rng: np.random.Generator,
                     n_iters: int = 200, tol: float = 1e-10) -> np.ndarray:
    v = rng.standard_normal(matrix.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(n_iters):
        w = matrix @ v
        norm = np.linalg.norm(w)
        if norm < 1e-14:
            raise DegenerateDataError("covariance has (numerically) no spectrum left")
        w /= norm
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    # deterministic sign: largest-magnitude coordinate is positive
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def _orthonormal_complement(c1: np.ndarray) -> np.ndarray:
    for i in range(c1.shape[0]):
        candidate = np.zeros_like(c1)
        candidate[i] = 1.0
        candidate -= np.dot(candidate, c1) * c1
        norm = np.linalg.norm(candidate)
        if norm > 1e-8:
            return candidate / norm
    raise DegenerateDataError("cannot build a second direction")


def top2_principal_components(codes, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """First two principal directions of the codes via power iteration.

    The second component comes from the deflated covariance; exactly rank-1
    data falls back to a deterministic orthonormal completion. Zero-variance
    data raises :class:`DegenerateDataError`.
    """
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 2 or codes.shape[0] < 3:
        raise ValueError("need at least 3 latent codes")
    centered = codes - codes.mean(axis=0)
    cov = centered.T @ centered / (codes.shape[0] - 1)
    if np.max(np.abs(cov)) < 1e-14:
        raise DegenerateDataError("latent codes have zero variance")
    rng = np.random.default_rng(seed)
    c1 = _power_iteration(cov, rng)
    lam1 = float(c1 @ cov @ c1)
    deflated = cov - lam1 * np.outer(c1, c1)
    try:
        c2 = _power_iteration(deflated, rng)
        c2 -= np.dot(c2, c1) * c1
        norm = np.linalg.norm(c2)
        if norm < 1e-8:
            raise DegenerateDataError("second component collapsed")
        c2 /= norm
    except DegenerateDataError:
        c2 = _orthonormal_complement(c1)
    return c1, c2


def pca_sweep(model, codes, center: np.ndarray | None = None,
              half_width: float = 3.0, resolution: int = 41,
              seed: int = 0) -> np.ndarray:
    """Predicted performance over a 2-D principal-component grid.

    Returns rows (a, b, f_perf) for a, b on the symmetric grid around
    ``center`` (origin by default), spanning ``half_width`` in each direction.
    """
    c1, c2 = top2_principal_components(codes, seed=seed)
    if center is None:
        center = np.zeros(model.config.latent_size)
    steps = np.linspace(-half_width, half_width, resolution)
    rows = np.empty((resolution * resolution, 3))
    i = 0
    for a in steps:
        for b in steps:
            s = center + a * c1 + b * c2
            rows[i] = (a, b, predict_perf(s, model))
            i += 1
    return rows


def sweep_to_csv(rows: np.ndarray) -> str:
    lines = ["a,b,f_perf"]
    for a, b, f in rows:
        lines.append(f"{jsonio.float_repr(a)},{jsonio.float_repr(b)},{jsonio.float_repr(f)}")
    return "\n".join(lines) + "\n"


@dataclass
class EvalReport:
    reconstruction_accuracy: float
    validity: float
    uniqueness: float
    novelty: float
    rmse_perf_train: float
    rmse_perf_test: float
    rmse_comp_train: float
    rmse_comp_test: float
    n_train: int
    n_test: int
    n_latent: int
    n_decode: int
    prior_points: int
    prior_decodes: int
    seed: int

    def to_json(self) -> str:
        return jsonio.dumps(asdict(self))


def evaluate(model, dataset, seed: int = 0, n_latent: int = 5, n_decode: int = 5,
             prior_points: int = 1000, prior_decodes: int = 10) -> EvalReport:
    """Full report on a labeled dataset; every protocol constant is embedded."""
    test_graphs = [a for a, _, _ in dataset.test] or [a for a, _, _ in dataset.train]
    recon = reconstruction_accuracy(model, test_graphs, n_latent=n_latent,
                                    n_decode=n_decode,
                                    rng=np.random.default_rng([seed, 1]))
    prior = prior_metrics(model, n_points=prior_points, n_decode=prior_decodes,
                          rng=np.random.default_rng([seed, 2]),
                          training_keys=dataset.training_keys())
    rmse_perf_train, rmse_comp_train = rmse(model, dataset.train)
    if dataset.test:
        rmse_perf_test, rmse_comp_test = rmse(model, dataset.test)
    else:
        rmse_perf_test, rmse_comp_test = rmse_perf_train, rmse_comp_train
    return EvalReport(
        reconstruction_accuracy=recon,
        validity=prior.validity,
        uniqueness=prior.uniqueness,
        novelty=prior.novelty,
        rmse_perf_train=rmse_perf_train,
        rmse_perf_test=rmse_perf_test,
        rmse_comp_train=rmse_comp_train,
        rmse_comp_test=rmse_comp_test,
        n_train=len(dataset.train),
        n_test=len(dataset.test),
        n_latent=n_latent,
        n_decode=n_decode,
        prior_points=prior_points,
        prior_decodes=prior_decodes,
        seed=seed,
    )
