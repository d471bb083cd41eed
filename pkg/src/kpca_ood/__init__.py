"""Kernel-PCA out-of-distribution detection on penultimate-layer features.

Detectors score new feature vectors by reconstruction error in a mapped
space (cosine normalization, optionally followed by random Fourier
features), with a Gram-matrix scoring path, classic baselines (KNN, MSP,
energy, regularized reconstruction error, score fusion), detection
metrics, synthetic generators, and binary file formats behind a CLI.
"""

from . import (
    baselines,
    cli,
    detector,
    errors,
    featmap,
    fileio,
    kernelspace,
    linalg,
    metrics,
    rng,
    synth,
)
from .baselines import (
    KnnScorer,
    build_knn,
    energy_score,
    fuse,
    knn_score,
    msp_score,
    reg_pca_error,
)
from .detector import (
    DetectorModel,
    choose_q,
    fit,
    reconstruction_errors,
    score_reconstruction,
    score_residual,
)
from .featmap import (
    FeatureMapSpec,
    RffMap,
    cosine_apply,
    cosine_rff_spec,
    cosine_spec,
    identity_spec,
    map_apply,
    median_heuristic_gamma,
    rff_apply,
    rff_build,
)
from .kernelspace import (
    KernelSpaceModel,
    fit_kernelspace,
    gram,
    score_kernelspace,
)
from .linalg import SymEigResult, as_feature_matrix, sym_eig
from .metrics import (
    BenchReport,
    EvalReport,
    auroc,
    bench_scorers,
    evaluate,
    fpr_at_tpr,
)
from .rng import make_prng, sample_cauchy, sample_gaussian, sample_uniform
from .synth import SynthSpec, generate

__version__ = "0.1.0"
