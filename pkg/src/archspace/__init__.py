"""archspace: gradient-based architecture optimization in a graph-VAE latent space."""

from .autodiff import (
    ComputationRecord,
    GradCheckReport,
    ParamStore,
    Tensor,
    grad_check,
    grad_check_params,
    logistic,
    recording,
    sgd_step,
    softmax_stable,
)
from .decoder import generate, greedy_generate, teacher_forced_loss
from .encoder import Posterior, encode, encode_posterior, kl_divergence, sample_latent
from .estimator import ArchitectureVAE
from .graphs import (
    Architecture,
    OpType,
    ValidityReport,
    deserialize,
    identity_key,
    random_architecture,
    serialize,
    validate,
)
from .metrics import EvalReport, evaluate, pca_sweep, prior_metrics, reconstruction_accuracy, rmse, top2_principal_components
from .model import Model, ModelConfig
from .oracle import Dataset, OracleConfig, build_dataset, complexity, performance
from .predictors import combined_objective, predict_comp, predict_perf, predictor_loss
from .search import SearchConfig, SearchResult, ascend, search
from .trainer import TrainConfig, TrainLog, total_loss, train

__version__ = "0.1.0"
