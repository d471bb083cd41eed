"""Covariance-path detector: PCA in a mapped feature space.

Fitting maps every training row through the configured feature map,
accumulates the unnormalized scatter matrix sum((phi - mu)(phi - mu)^T),
eigendecomposes it, and keeps the leading q eigenvectors chosen by an
explained-variance target. Scoring negates the reconstruction error
||U_q U_q^T (phi - mu) - (phi - mu)||_2, so higher scores mean more
in-distribution. The trailing eigenvectors can optionally be retained;
projecting onto them yields the same error (residual-subspace identity),
which doubles as a cross-check and costs p*D extra memory.

The scatter matrix is deliberately left unnormalized (no 1/N): scores are
invariant to that scaling, and the Gram-spectrum correspondence exercised
in the tests depends on this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroSpectrumError,
    DegenerateSpectrumError,
    MissingResidualBasisError,
)
from .featmap import FeatureMapSpec, map_apply
from .linalg import as_feature_matrix, sym_eig

# Total variance below this means every mapped row is identical.
DEGENERATE_VARIANCE = 1e-20

DEFAULT_EVR = 0.90


@dataclass(eq=False)
class DetectorModel:
    """Fitted artifacts: map, mean, retained basis, full spectrum.

    ``eigenvalues`` hold the full descending spectrum with negative
    rounding noise clamped to zero. ``residual_basis`` is None unless the
    model was fitted with store_residual=True.
    """

    map_spec: FeatureMapSpec
    mean: np.ndarray
    basis: np.ndarray
    residual_basis: np.ndarray | None
    eigenvalues: np.ndarray
    q: int
    evr_target: float

    @property
    def feature_dim(self) -> int:
        return self.mean.shape[0]


def choose_q(eigenvalues, evr_target: float) -> int:
    """Smallest q whose cumulative eigenvalue mass reaches evr_target.

    Expects a non-increasing, non-negative spectrum. With evr_target=1.0
    this returns the count of strictly positive eigenvalues (trailing
    exact zeros never help the cumulative ratio).
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError(f"expected a non-empty 1-D spectrum, got shape {lam.shape}")
    if not 0.0 < evr_target <= 1.0:
        raise ValueError(f"evr_target must be in (0, 1], got {evr_target}")
    if np.any(lam < 0.0):
        raise ValueError("spectrum must be clamped non-negative")
    if np.any(np.diff(lam) > 0.0):
        raise ValueError("spectrum must be non-increasing")
    total = lam.sum()
    if total <= 0.0:
        raise AllZeroSpectrumError("all eigenvalues are zero")
    ratios = np.cumsum(lam) / total
    return int(np.searchsorted(ratios, evr_target, side="left")) + 1


def fit(
    train,
    map_spec: FeatureMapSpec,
    evr_target: float = DEFAULT_EVR,
    store_residual: bool = False,
) -> DetectorModel:
    """Fit the mapped-space PCA model on in-distribution training rows."""
    x = as_feature_matrix(train, "train")
    if x.shape[0] < 2:
        raise ValueError(f"need at least 2 training rows, got {x.shape[0]}")
    if not 0.0 < evr_target <= 1.0:
        raise ValueError(f"evr_target must be in (0, 1], got {evr_target}")

    phi = map_apply(map_spec, x)
    mu = phi.mean(axis=0)
    centered = phi - mu
    scatter = centered.T @ centered

    eig = sym_eig(scatter)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    if float(lam.sum()) < DEGENERATE_VARIANCE:
        raise DegenerateSpectrumError(
            "total mapped variance is numerically zero (identical rows?)"
        )
    q = choose_q(lam, evr_target)
    basis = np.ascontiguousarray(eig.eigenvectors[:, :q])
    residual = (
        np.ascontiguousarray(eig.eigenvectors[:, q:]) if store_residual else None
    )
    return DetectorModel(
        map_spec=map_spec,
        mean=mu,
        basis=basis,
        residual_basis=residual,
        eigenvalues=lam,
        q=q,
        evr_target=float(evr_target),
    )


def reconstruction_errors(model: DetectorModel, x) -> np.ndarray:
    """Per-row distance between the mapped row and its projection."""
    phi = map_apply(model.map_spec, as_feature_matrix(x))
    centered = phi - model.mean
    projected = (centered @ model.basis) @ model.basis.T
    return np.linalg.norm(projected - centered, axis=1)


def score_reconstruction(model: DetectorModel, x) -> np.ndarray:
    """Negated reconstruction error; higher means more in-distribution."""
    return -reconstruction_errors(model, x)


def score_residual(model: DetectorModel, x) -> np.ndarray:
    """Negated norm of the projection onto the discarded eigenvectors.

    Identical to score_reconstruction up to rounding; kept as the
    independent formulation for cross-checks and as the bridge to the
    Gram-matrix scoring path.
    """
    if model.residual_basis is None:
        raise MissingResidualBasisError(
            "model was fitted without store_residual=True"
        )
    phi = map_apply(model.map_spec, as_feature_matrix(x))
    centered = phi - model.mean
    return -np.linalg.norm(centered @ model.residual_basis, axis=1)
