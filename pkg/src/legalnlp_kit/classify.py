"""Document-status classification over embedding features.

The demonstration pipeline embeds each document (doc2vec inference, or the
mean of its token vectors), fits a multinomial logistic ("softmax")
classifier by full-batch gradient descent, and reports accuracy, macro-F1,
and support-weighted F1 with the full confusion matrix.

Metric arithmetic is done in plain Python floats with the textbook
formulas, so results are reproducible digit for digit across platforms.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import TextRecord
from .embeddings import EmbeddingModel, fasttext_vector, infer_doc_vector

logger = logging.getLogger(__name__)

# Class proportions of the proceeding-status demo: archived, active, suspended.
DEMO_LABELS = ("arquivado", "ativo", "suspenso")
DEMO_PROPORTIONS = (0.4714, 0.4523, 0.0763)


@dataclass(frozen=True)
class ClassifierConfig:
    lr: float = 0.5
    epochs: int = 500
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")


@dataclass
class ClassifierModel:
    """Softmax weights over document features; bias folded into column 0."""

    labels: tuple[str, ...]
    weights: np.ndarray  # |labels| x (dim + 1)
    train_config: ClassifierConfig
    loss_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class EvalReport:
    """Test-set metrics; confusion rows are true labels, columns predicted."""

    accuracy: float
    f1_macro: float
    f1_weighted: float
    confusion: tuple[tuple[int, ...], ...]
    per_class: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "f1_weighted": self.f1_weighted,
            "confusion": [list(row) for row in self.confusion],
            "per_class": [dict(entry) for entry in self.per_class],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def featurize(
    docs: Sequence[TextRecord],
    model: EmbeddingModel,
    infer_steps: int = 50,
    seed: int = 0,
) -> tuple[np.ndarray, int]:
    """One feature row per document.

    Doc2vec models infer a fresh document vector; word-level models average
    token vectors (fasttext covers unknown tokens through subwords). A
    document with no usable token gets the zero vector; the count of such
    documents is returned alongside the matrix.
    """
    features = np.zeros((len(docs), model.dim), dtype=np.float64)
    oov_docs = 0
    for i, doc in enumerate(docs):
        tokens = doc.text.split()
        if model.config.is_doc2vec:
            known = [t for t in tokens if t in model.vocab.index]
            if not known:
                oov_docs += 1
                logger.warning("document %s has no in-vocabulary token", doc.id)
                continue
            features[i] = infer_doc_vector(model, known, steps=infer_steps, seed=seed)
        elif model.config.is_fasttext:
            vecs = [fasttext_vector(model, t) for t in tokens if t]
            vecs = [v for v in vecs if np.any(v)]
            if not vecs:
                oov_docs += 1
                logger.warning("document %s has no usable token", doc.id)
                continue
            features[i] = np.mean(vecs, axis=0)
        else:
            idx = [model.vocab.index[t] for t in tokens if t in model.vocab.index]
            if not idx:
                oov_docs += 1
                logger.warning("document %s has no in-vocabulary token", doc.id)
                continue
            features[i] = model.input_vectors[idx].mean(axis=0)
    return features, oov_docs


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def classifier_loss_and_gradient(
    weights: np.ndarray, features: np.ndarray, label_idx: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy with L2 on non-bias weights, and its gradient.

    ``features`` must already carry the bias column. Exposed so the
    analytic gradient can be checked against finite differences.
    """
    n = features.shape[0]
    probs = _softmax(features @ weights.T)
    loss = float(-np.log(probs[np.arange(n), label_idx] + 1e-300).mean())
    penalty = weights.copy()
    penalty[:, 0] = 0.0  # bias not regularized
    loss += 0.5 * l2 * float((penalty**2).sum())
    one_hot = np.zeros_like(probs)
    one_hot[np.arange(n), label_idx] = 1.0
    grad = (probs - one_hot).T @ features / n + l2 * penalty
    return loss, grad


def _augment(features: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((features.shape[0], 1)), np.asarray(features, dtype=np.float64)])


def fit_classifier(
    features: np.ndarray,
    labels: Sequence[str],
    config: ClassifierConfig = ClassifierConfig(),
) -> ClassifierModel:
    """Full-batch gradient descent on the softmax objective.

    Deterministic per seed (the seed only sets the tiny symmetric-breaking
    init). Requires at least two classes, each present in the data.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != len(labels):
        raise ValueError("features and labels disagree on the number of rows")
    label_set = tuple(sorted(set(labels)))
    if len(label_set) < 2:
        raise ValueError(f"need at least 2 classes, got {label_set}")
    label_to_idx = {lab: i for i, lab in enumerate(label_set)}
    y = np.array([label_to_idx[lab] for lab in labels], dtype=np.int64)
    x = _augment(features)
    rng = np.random.default_rng(config.seed)
    weights = rng.normal(scale=1e-3, size=(len(label_set), x.shape[1]))
    history = []
    for _ in range(config.epochs):
        loss, grad = classifier_loss_and_gradient(weights, x, y, config.l2)
        weights -= config.lr * grad
        history.append(loss)
    if history and history[-1] > history[0]:
        logger.warning(
            "training loss rose from %.6f to %.6f; lr %.3g may be too large",
            history[0],
            history[-1],
            config.lr,
        )
    return ClassifierModel(
        labels=label_set, weights=weights, train_config=config, loss_history=history
    )


def predict(model: ClassifierModel, features: np.ndarray) -> list[str]:
    x = _augment(features)
    if x.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"feature dim {x.shape[1] - 1} does not match model "
            f"dim {model.weights.shape[1] - 1}"
        )
    idx = np.argmax(x @ model.weights.T, axis=1)
    return [model.labels[i] for i in idx]


def confusion_matrix(
    truth: Sequence[str], predicted: Sequence[str], labels: Sequence[str]
) -> tuple[tuple[int, ...], ...]:
    index = {lab: i for i, lab in enumerate(labels)}
    matrix = [[0] * len(labels) for _ in labels]
    for t, p in zip(truth, predicted):
        matrix[index[t]][index[p]] += 1
    return tuple(tuple(row) for row in matrix)


def metrics_from_confusion(
    confusion: Sequence[Sequence[int]], labels: Sequence[str]
) -> EvalReport:
    """Accuracy, per-class precision/recall/F1, macro and weighted F1.

    Zero-denominator cases score 0; classes absent from the truth get F1 0
    with a warning. Weighted F1 uses true-label support as weights.
    """
    n_classes = len(labels)
    total = sum(sum(row) for row in confusion)
    correct = sum(confusion[i][i] for i in range(n_classes))
    accuracy = correct / total if total else 0.0
    per_class = []
    f1_sum = 0.0
    weighted_sum = 0.0
    for i, label in enumerate(labels):
        tp = confusion[i][i]
        support = sum(confusion[i])
        predicted = sum(confusion[r][i] for r in range(n_classes))
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        if support == 0:
            logger.warning("class %r absent from the truth; F1 set to 0", label)
        per_class.append(
            {
                "label": label,
                "precision": precision,
                "recall": recall,
                "f1": f1,
                "support": support,
            }
        )
        f1_sum += f1
        weighted_sum += support * f1
    return EvalReport(
        accuracy=accuracy,
        f1_macro=f1_sum / n_classes if n_classes else 0.0,
        f1_weighted=weighted_sum / total if total else 0.0,
        confusion=tuple(tuple(int(c) for c in row) for row in confusion),
        per_class=tuple(per_class),
    )


def evaluate(
    model: ClassifierModel, features: np.ndarray, labels: Sequence[str]
) -> EvalReport:
    """Predict and score against ``labels``; order of rows is irrelevant."""
    predicted = predict(model, features)
    known = set(model.labels)
    extra = sorted(set(labels) - known)
    all_labels = tuple(model.labels) + tuple(extra)
    return metrics_from_confusion(confusion_matrix(labels, predicted, all_labels), all_labels)


def make_demo_corpus(
    n: int,
    proportions: Sequence[float] = DEMO_PROPORTIONS,
    seed: int = 0,
    labels: Sequence[str] = DEMO_LABELS,
    doc_length: tuple[int, int] = (9, 14),
    specificity: float = 0.7,
) -> list[TextRecord]:
    """Synthetic labeled corpus with class-specific vocabulary mixtures.

    Class sizes follow ``proportions`` by largest-remainder rounding, so
    they sum to ``n`` exactly. Each document mixes tokens from its class's
    own pool (probability ``specificity``) with shared filler tokens.
    Deterministic per seed.
    """
    if len(labels) != len(proportions):
        raise ValueError("labels and proportions must have the same length")
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {sum(proportions)}")
    if n < len(labels):
        raise ValueError(f"need at least {len(labels)} records, got {n}")
    raw = [p * n for p in proportions]
    counts = [int(x) for x in raw]
    remainders = sorted(
        range(len(labels)), key=lambda i: (raw[i] - counts[i], -i), reverse=True
    )
    for i in range(n - sum(counts)):
        counts[remainders[i % len(labels)]] += 1

    rng = np.random.default_rng(seed)
    shared = [f"termo{j}" for j in range(40)]
    pools = {
        label: [f"{label}_{j}" for j in range(18)] for label in labels
    }
    records = []
    doc_id = 0
    for label, count in zip(labels, counts):
        pool = pools[label]
        for _ in range(count):
            length = int(rng.integers(doc_length[0], doc_length[1] + 1))
            tokens = []
            for _ in range(length):
                if rng.random() < specificity:
                    tokens.append(pool[int(rng.integers(0, len(pool)))])
                else:
                    tokens.append(shared[int(rng.integers(0, len(shared)))])
            records.append(TextRecord(id=str(doc_id), text=" ".join(tokens), label=label))
            doc_id += 1
    return records


def run_demo(
    n: int = 1200,
    seed: int = 7,
    dim: int = 48,
    embed_epochs: int = 25,
    infer_steps: int = 40,
    classifier_epochs: int = 400,
) -> dict:
    """End-to-end demonstration: synthetic corpus, Doc2Vec features, softmax.

    70/30 stratified split; embeddings train on the training texts only.
    DBOW is used because its document vectors are the sole input of every
    update, so they separate the classes in few epochs. Returns the report
    plus split sizes and warning counts. Fully deterministic for a given
    argument tuple.
    """
    from .corpus import train_test_split
    from .embeddings import TrainConfig, train

    records = make_demo_corpus(n, seed=seed)
    train_recs, test_recs = train_test_split(records, 0.7, seed=seed, stratify=True)
    embed_config = TrainConfig(
        dim=dim,
        window=5,
        epochs=embed_epochs,
        min_count=2,
        negative_samples=5,
        seed=seed,
        variant="d2v-dbow",
    )
    model = train([r.text.split() for r in train_recs], embed_config)
    train_x, oov_train = featurize(train_recs, model, infer_steps=infer_steps, seed=seed)
    test_x, oov_test = featurize(test_recs, model, infer_steps=infer_steps, seed=seed)
    clf = fit_classifier(
        train_x,
        [r.label for r in train_recs],
        ClassifierConfig(epochs=classifier_epochs, seed=seed),
    )
    report = evaluate(clf, test_x, [r.label for r in test_recs])
    return {
        "report": report,
        "train_size": len(train_recs),
        "test_size": len(test_recs),
        "oov_train_docs": oov_train,
        "oov_test_docs": oov_test,
    }
