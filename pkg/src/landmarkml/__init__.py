"""Landmark-based multi-label learning.

Jointly learns (1) a small set of landmark labels worth predicting,
(2) an embedding that predicts those landmarks from features, and (3) a
linear recovery of the full label set from the landmark predictions, by
alternating gradient updates on the three blocks of one objective.
"""

from .backend import BACKEND_NAME
from .data import (
    FeatureScaler,
    FoldAssignment,
    MultiLabelDataset,
    SynthesisConfig,
    label_cardinality,
    load_dataset,
    parse_arff,
    parse_label_header,
    serialize_arff,
    serialize_label_header,
    split_folds,
    standardize_features,
    synthesize,
)
from .embedding import (
    EmbeddingGradients,
    EmbeddingParams,
    backward,
    forward,
    init_params,
    leaky_relu,
    leaky_relu_grad,
    sgd_step,
)
from .landmarks import LandmarkReport, cooccurrence, recovery_weights, select_landmarks
from .metrics import (
    MetricReport,
    average_precision,
    evaluate,
    hamming_loss,
    macro_f1,
    micro_f1,
    ranking_loss,
    threshold_scores,
)
from .objective import Hyperparams, grad_A, grad_B, grad_F, loss, norm_21
from .trainer import (
    CVResult,
    ModelState,
    TrainConfig,
    TrainReport,
    cross_validate,
    enforce_diagonal,
    predict_scores,
    train,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
