"""Linear classifiers trained by SGD, and stratified k-fold evaluation.

Labels are encoded TRANSLATED = 1, ORIGINAL = 0.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .chunking import DirectionLabel
from .errors import ConfigError, DataError
from .features import FeatureVector, to_matrix
from .seeding import derive_seed


class ModelKind(enum.Enum):
    LOGISTIC = "logistic"
    LINEAR_SVM = "linear_svm"


@dataclass(frozen=True)
class Hyperparams:
    model_kind: ModelKind = ModelKind.LOGISTIC
    l2_lambda: float = 1e-4
    epochs: int = 20
    learning_rate_eta0: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be >= 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.learning_rate_eta0 > 0:
            raise ConfigError("learning rate must be > 0")

    def to_dict(self):
        d = asdict(self)
        d["model_kind"] = self.model_kind.value
        return d


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    spec_hash: str = ""
    hyperparams: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return len(self.weights)

    def decision(self, X):
        return X @ self.weights + self.bias

    def to_dict(self):
        return {"weights": [float(w) for w in self.weights], "bias": float(self.bias),
                "spec_hash": self.spec_hash, "hyperparams": self.hyperparams}

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(np.asarray(d["weights"], dtype=float), float(d["bias"]),
                   d.get("spec_hash", ""), d.get("hyperparams", {}))


def _as_arrays(dataset):
    if isinstance(dataset, tuple):
        X, y = dataset
        return np.asarray(X, dtype=float), np.asarray(y, dtype=int)
    return to_matrix(list(dataset))


def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _log_loss(margins, y):
    # log(1 + exp(-s z)) with s = +1 for y=1 and -1 for y=0
    s = np.where(y == 1, 1.0, -1.0)
    return float(np.mean(np.logaddexp(0.0, -s * margins)))


def _hinge_loss(margins, y):
    s = np.where(y == 1, 1.0, -1.0)
    return float(np.mean(np.maximum(0.0, 1.0 - s * margins)))


def train(dataset, hp, spec_hash="", trace=None):
    """Fit a linear model by SGD on log-loss or hinge loss plus (lambda/2)||w||^2.

    ``dataset`` is a list of labelled :class:`FeatureVector` or an ``(X, y)``
    pair. The step size is eta0 / (1 + eta0 * lambda * t) with t counting
    updates across epochs. If ``trace`` is a list, the unpenalized mean
    training loss is appended after every epoch.
    """
    X, y = _as_arrays(dataset)
    if len(y) == 0:
        raise DataError("empty training set")
    if len(set(y.tolist())) < 2:
        raise ConfigError("training data must contain both classes")
    n, d = X.shape
    w = np.zeros(d)
    # w is kept as scale * v so the L2 shrink step is O(1) instead of O(d)
    v, scale, b = w, 1.0, 0.0
    signs = np.where(y == 1, 1.0, -1.0)
    lam, eta0 = hp.l2_lambda, hp.learning_rate_eta0
    rng = np.random.default_rng(hp.seed)
    logistic = hp.model_kind is ModelKind.LOGISTIC
    t = 0
    for _ in range(hp.epochs):
        for i in rng.permutation(n):
            eta = eta0 / (1.0 + eta0 * lam * t)
            xi = X[i]
            z = scale * float(xi @ v) + b
            if logistic:
                g = _sigmoid(z) - y[i]
            else:
                g = -signs[i] if signs[i] * z < 1.0 else 0.0
            shrink = 1.0 - eta * lam
            if shrink <= 0.0:
                v, scale = np.zeros(d), 1.0
            else:
                scale *= shrink
            if g != 0.0:
                v = v - (eta * g / scale) * xi
                b -= eta * g
            if scale < 1e-9:
                v, scale = v * scale, 1.0
            t += 1
        if trace is not None:
            margins = X @ (scale * v) + b
            trace.append(_log_loss(margins, y) if logistic else _hinge_loss(margins, y))
    w = scale * v
    if not np.all(np.isfinite(w)) or not math.isfinite(b):
        raise DataError("training diverged (non-finite weights); lower the learning rate")
    return LinearModel(w, float(b), spec_hash, hp.to_dict())


def predict(model, x):
    """TRANSLATED iff w.x + b > 0; an exact zero is ORIGINAL."""
    if isinstance(x, FeatureVector):
        if x.dimension != model.dimension:
            raise DataError(f"vector dimension {x.dimension} != model dimension {model.dimension}")
        z = sum(model.weights[i] * v for i, v in zip(x.indices, x.values)) + model.bias
    else:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != model.dimension:
            raise DataError(f"vector dimension {x.shape[-1]} != model dimension {model.dimension}")
        z = float(x @ model.weights + model.bias)
    return DirectionLabel.TRANSLATED if z > 0 else DirectionLabel.ORIGINAL


def predict_many(model, X):
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.dimension:
        raise DataError(f"data dimension {X.shape[1]} != model dimension {model.dimension}")
    return (model.decision(X) > 0).astype(int)


def accuracy(predictions, golds):
    predictions, golds = list(predictions), list(golds)
    if len(predictions) != len(golds):
        raise DataError(f"{len(predictions)} predictions for {len(golds)} gold labels")
    if not golds:
        raise DataError("accuracy of an empty set is undefined")
    return sum(int(p) == int(g) for p, g in zip(predictions, golds)) / len(golds)


def stratified_folds(labels, k, seed):
    """Fold index per sample: shuffle each class, then deal round-robin.

    The dealing position carries over from one class to the next, so fold
    sizes differ by at most one and so do per-class counts.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ConfigError("need at least 2 folds")
    if len(labels) < k:
        raise ConfigError(f"{len(labels)} samples cannot fill {k} folds")
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ConfigError("stratified folds need both classes")
    if k > counts.min():
        raise ConfigError(f"k={k} exceeds the size of the smallest class ({counts.min()})")
    rng = np.random.default_rng(derive_seed(seed, "folds"))
    folds = np.empty(len(labels), dtype=int)
    pos = 0
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = (pos + np.arange(len(idx))) % k
        pos += len(idx)
    return folds


@dataclass
class CvReport:
    k: int
    per_fold_accuracy: list[float]
    mean: float
    std: float
    tp: int
    fp: int
    tn: int
    fn: int
    n_samples: int
    seed: int

    def to_dict(self):
        return asdict(self)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def _pipeline_matrix(pipeline, items):
    if hasattr(pipeline, "matrix"):
        return pipeline.matrix(items)
    return to_matrix(pipeline.transform(items))


def cross_validate(dataset, k, hp, pipeline=None, labels=None):
    """Stratified k-fold CV.

    Without a ``pipeline``, ``dataset`` holds labelled feature vectors (or an
    ``(X, y)`` pair). With one, ``dataset`` holds chunks and the pipeline is
    refit on each training fold (``fit`` then ``transform``), which keeps
    fold-external data out of the n-gram vocabulary.
    """
    if pipeline is None:
        X, y = _as_arrays(dataset)
    else:
        items = list(dataset)
        y = np.asarray([int(c.label) for c in items] if labels is None else labels, dtype=int)
    folds = stratified_folds(y, k, hp.seed)
    accs = []
    tp = fp = tn = fn = 0
    for f in range(k):
        test = folds == f
        train_idx, test_idx = np.flatnonzero(~test), np.flatnonzero(test)
        fold_hp = Hyperparams(hp.model_kind, hp.l2_lambda, hp.epochs, hp.learning_rate_eta0,
                              derive_seed(hp.seed, "fold", f))
        if pipeline is None:
            Xtr, ytr, Xte, yte = X[train_idx], y[train_idx], X[test_idx], y[test_idx]
        else:
            train_items = [items[i] for i in train_idx]
            pipeline.fit(train_items)
            Xtr, ytr = _pipeline_matrix(pipeline, train_items)
            Xte, yte = _pipeline_matrix(pipeline, [items[i] for i in test_idx])
        model = train((Xtr, ytr), fold_hp)
        pred = predict_many(model, Xte)
        accs.append(accuracy(pred, yte))
        tp += int(np.sum((pred == 1) & (yte == 1)))
        fp += int(np.sum((pred == 1) & (yte == 0)))
        tn += int(np.sum((pred == 0) & (yte == 0)))
        fn += int(np.sum((pred == 0) & (yte == 1)))
    return CvReport(k, accs, float(np.mean(accs)), float(np.std(accs)),
                    tp, fp, tn, fn, len(y), hp.seed)
