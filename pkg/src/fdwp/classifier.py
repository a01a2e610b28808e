"""Gaussian naive Bayes with leave-one-out validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

VARIANCE_FLOOR = 1e-9


class ClassifierError(ValueError):
    """Violated classifier precondition (too few samples, shape mismatch)."""


@dataclass(frozen=True)
class GaussianClassModel:
    classes: tuple
    priors: np.ndarray    # (k,)
    means: np.ndarray     # (k, n)
    variances: np.ndarray # (k, n)
    feature_names: tuple = ()

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def log_scores(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise ClassifierError(f"expected {self.n_features} features, got shape {x.shape}")
        ll = -0.5 * (np.log(2.0 * np.pi * self.variances) + (x - self.means) ** 2 / self.variances)
        return np.log(self.priors) + ll.sum(axis=1)


def as_arrays(vectors):
    """Stack FeatureVector-like records into ``(X, labels, names)``."""
    vectors = list(vectors)
    if not vectors:
        raise ClassifierError("no feature vectors")
    lengths = {len(v.values) for v in vectors}
    if len(lengths) != 1:
        raise ClassifierError(f"inconsistent feature vector lengths {sorted(lengths)}")
    X = np.array([v.values for v in vectors], dtype=np.float64)
    return X, [v.label for v in vectors], tuple(vectors[0].names)


def fit_nbc(X, labels, feature_names=()) -> GaussianClassModel:
    """Fit class priors and per-feature Gaussian parameters.

    Variances are unbiased (ddof=1) and floored at
    ``max(1e-9, 1e-9 * global feature variance)``.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ClassifierError(f"feature matrix {X.shape} does not match {labels.shape[0]} labels")
    classes = tuple(sorted(set(labels.tolist())))
    if len(classes) < 2:
        raise ClassifierError(f"need at least 2 classes, got {len(classes)}")
    counts = {c: int(np.sum(labels == c)) for c in classes}
    small = [c for c, n in counts.items() if n < 2]
    if small:
        raise ClassifierError(f"classes with fewer than 2 samples: {small}")

    def canonical(rows):
        # sorted rows make the float sums independent of sample order
        return rows[np.lexsort(rows.T[::-1])]

    floor = np.maximum(VARIANCE_FLOOR, VARIANCE_FLOOR * canonical(X).var(axis=0))
    groups = [canonical(X[labels == c]) for c in classes]
    means = np.array([g.mean(axis=0) for g in groups])
    variances = np.array([np.maximum(g.var(axis=0, ddof=1), floor) for g in groups])

    priors = np.array([counts[c] for c in classes], dtype=np.float64) / len(labels)
    return GaussianClassModel(classes, priors, means, variances, tuple(feature_names))


def predict_nbc(model: GaussianClassModel, x):
    """Return ``(label, posteriors)`` for one sample.

    Posteriors are normalized with log-sum-exp; ties go to the first class in
    sorted order.
    """
    s = model.log_scores(x)
    post = np.exp(s - s.max())
    post /= post.sum()
    return model.classes[int(np.argmax(s))], post


@dataclass
class ClassificationReport:
    classes: tuple
    confusion: np.ndarray
    predictions: list = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return int(self.confusion.sum())

    @property
    def per_class_accuracy(self) -> np.ndarray:
        return np.diag(self.confusion) / self.confusion.sum(axis=1)

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.n_samples)

    def table(self) -> str:
        """Per-class accuracy (%) plus a Total Accuracy column."""
        head = "\t".join(list(self.classes) + ["Total Accuracy"])
        row = "\t".join([f"{100 * a:.2f}" for a in self.per_class_accuracy] + [f"{100 * self.overall_accuracy:.2f}%"])
        return head + "\n" + row + "\n"

    def to_dict(self, config=None) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": {c: float(a) for c, a in zip(self.classes, self.per_class_accuracy)},
            "overall_accuracy": self.overall_accuracy,
            "n_samples": self.n_samples,
            "config": dict(config or {}),
        }

    def to_json(self, config=None) -> str:
        return json.dumps(self.to_dict(config), indent=2, sort_keys=True) + "\n"


def loocv(X, labels, feature_names=()) -> ClassificationReport:
    """Leave-one-out: each sample is predicted by a model fit on the rest."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    n = len(labels)
    classes = tuple(sorted(set(labels.tolist())))
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    predictions = []
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        try:
            model = fit_nbc(X[keep], labels[keep], feature_names)
        except ClassifierError as exc:
            raise ClassifierError(f"fold {i}: {exc}") from None
        finally:
            keep[i] = True
        pred, _ = predict_nbc(model, X[i])
        if pred not in index:
            raise ClassifierError(f"fold {i}: predicted unknown class {pred!r}")
        confusion[index[labels[i]], index[pred]] += 1
        predictions.append(pred)
    return ClassificationReport(classes, confusion, predictions)
