"""Noise-robust classification via loss-distribution noise-rate estimation and sample selection."""

from .data import (Dataset, Sample, SyntheticSpec, generate_synthetic, load_dataset, load_idx_pair,
                   save_dataset, split_dataset, write_idx)
from .errors import (ArgumentError, ConsistencyError, DataError, FormatError, NoiselabError, RangeError,
                     RunError, TrainingError, UsageError)
from .estimator import (EstimatorModel, EstimatorTrainingRow, LossHistogramFeatures, NoiseRateEstimate,
                        build_training_rows, estimate_noise_rate, featurize_losses, fit_estimator)
from .metrics import MetricSet, binary_auc, compute_metrics
from .model import MlpSpec, ModelParams, backward, forward, init_params, predict_proba, sgd_step, tempered_softmax
from .noise import CorruptionRecord, NoiseSpec, inject_noise
from .objective import ObjectiveConfig, ce_loss, gce_loss, lp_penalty, total_loss, total_loss_grad
from .pipeline import (RunConfig, RunReport, SelectionResult, ablate_forget_rate, phase1_pretrain,
                       phase2_select, phase2_train, phase3_train, run_pipeline, selection_quality)
from .rng import Rng, derive_seed

__version__ = "0.1.0"
