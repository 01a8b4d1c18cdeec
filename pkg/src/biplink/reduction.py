"""Single-feature linear reductions of the pair-feature matrix: PCA and LDA.

Both standardize features internally (zero mean, unit variance; constant
columns get weight zero) and fix orientation so the positive training class
projects higher. The projection value is used directly as a ranking score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError, DegenerateLabelsError, SchemaError
from .features import PairFeatures

_RIDGE = 1e-8


@dataclass(frozen=True)
class LinearReduction:
    kind: str
    weights: np.ndarray
    offset: float
    orientation: float
    mean: np.ndarray
    scale: np.ndarray

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"kind": self.kind, "weights": self.weights.tolist(),
                   "offset": self.offset, "orientation": self.orientation,
                   "mean": self.mean.tolist(), "scale": self.scale.tolist()}
        path.write_text(json.dumps(payload, indent=1) + "\n")

    @classmethod
    def load(cls, path: Path | str) -> "LinearReduction":
        payload = json.loads(Path(path).read_text())
        if payload.get("kind") not in ("pca", "lda"):
            raise SchemaError(f"{path}: not a linear-reduction model file")
        return cls(payload["kind"], np.array(payload["weights"]), payload["offset"],
                   payload["orientation"], np.array(payload["mean"]),
                   np.array(payload["scale"]))


def _standardize_stats(x: np.ndarray):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    # exact constancy test: a constant column's std can round to ~1e-16, not 0
    varying = x.min(axis=0) < x.max(axis=0)
    scale = np.where(varying, std, 1.0)
    return mean, scale, varying


def _leading_eigvec(cov: np.ndarray, iters: int = 5000, tol: float = 1e-12) -> np.ndarray:
    """Power iteration on a PSD matrix; fine at 13x13."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(cov.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise DegenerateDataError("covariance matrix is zero")
        w /= norm
        if min(np.abs(w - v).max(), np.abs(w + v).max()) < tol:
            return w
        v = w
    return v


def fit_reduction(data: PairFeatures, kind: str) -> LinearReduction:
    """First principal component (pca) or Fisher direction (lda) of the data."""
    if kind not in ("pca", "lda"):
        raise ValueError(f"unknown reduction kind {kind!r}")
    x = np.asarray(data.features, dtype=np.float64)
    if len(x) < 2:
        raise DegenerateDataError("need at least two rows")
    y = data.labels.astype(bool)
    mean, scale, varying = _standardize_stats(x)
    z = (x - mean) / scale
    z[:, ~varying] = 0.0

    if kind == "pca":
        cov = (z.T @ z) / (len(z) - 1)
        w = _leading_eigvec(cov)
        w = w / np.linalg.norm(w)
    else:
        if y.all() or not y.any():
            raise DegenerateLabelsError("lda needs both classes present")
        mu_pos = z[y].mean(axis=0)
        mu_neg = z[~y].mean(axis=0)
        centered_pos = z[y] - mu_pos
        centered_neg = z[~y] - mu_neg
        s_w = centered_pos.T @ centered_pos + centered_neg.T @ centered_neg
        s_w = s_w + _RIDGE * np.trace(s_w) / len(s_w) * np.eye(len(s_w)) \
            + _RIDGE * np.eye(len(s_w))
        try:
            w = np.linalg.solve(s_w, mu_pos - mu_neg)
        except np.linalg.LinAlgError as exc:
            raise DegenerateDataError(f"within-class scatter is singular: {exc}") from exc
        if not np.isfinite(w).all() or not w.any():
            raise DegenerateDataError("degenerate discriminant direction")

    w[~varying] = 0.0
    if not w.any():
        raise DegenerateDataError("all informative feature columns are constant")
    if kind == "pca":
        w = w / np.linalg.norm(w)
    proj = z @ w
    if y.any() and not y.all():
        orientation = 1.0 if proj[y].mean() >= proj[~y].mean() else -1.0
    else:
        orientation = 1.0  # single-class pca: no class contrast to orient by
    return LinearReduction(kind, w, 0.0, orientation, mean, scale)


def score_reduction(model: LinearReduction, features: np.ndarray) -> np.ndarray:
    """orientation * w . standardized(x), rank-ready real scores."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.weights.size:
        raise SchemaError(
            f"expected {model.weights.size} features, got shape {features.shape}")
    z = (features - model.mean) / model.scale
    return model.orientation * (z @ model.weights + model.offset)
