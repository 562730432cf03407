"""Word, document, and subword embeddings trained by negative-sampling SGD.

Six variants share one objective. For an observed (input, target) pair with
input representation ``v`` (a word vector, a document vector, or the mean of
several rows) and target output vector ``u``, the pair loss is

    L = -log sigmoid(u . v) - sum_k log sigmoid(-u_k . v)

with ``k`` negative targets drawn from the unigram^(3/4) noise distribution.
Variants differ only in how ``v`` is assembled and which pairs a window
produces:

* ``w2v-sg``     the center word predicts each context word;
* ``w2v-cbow``   the mean of the context words predicts the center;
* ``d2v-dm``     the mean of context words plus the document vector
                 predicts the center;
* ``d2v-dbow``   the document vector predicts each word of the document;
* ``fasttext-*`` like the w2v variants, but every word is represented by
                 the mean of its own row and its hashed character-n-gram
                 bucket rows, so unseen words still get vectors.

Training is plain SGD: one update per corpus position, all pairs sharing a
center updated from the same parameter snapshot, learning rate decaying
linearly from ``initial_lr`` to ``initial_lr / 1e4`` over the scheduled
updates. Single-worker runs are bitwise reproducible for a fixed seed;
multi-worker runs update parameters without locks and are only
statistically reproducible.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Vocabulary, count_vocab
from .exceptions import EmptyCorpusError, LegalNlpError, ModelFormatError
from . import serialization as ser

logger = logging.getLogger(__name__)

VARIANTS = ("w2v-sg", "w2v-cbow", "d2v-dm", "d2v-dbow", "fasttext-sg", "fasttext-cbow")

LR_FLOOR_RATIO = 1e-4  # final lr = initial_lr * LR_FLOOR_RATIO
NOISE_EXPONENT = 0.75
_SCORE_CLIP = 30.0  # sigmoid saturates well before this; keeps exp() finite


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train`.

    Defaults follow the training setup used for the full-scale legal
    corpora (window 15, 20 epochs, min count 50, mean combination);
    desk-scale runs usually override ``min_count`` and ``dim``.
    ``sample`` enables frequent-word subsampling when > 0. The subword
    settings only apply to the fasttext variants.
    """

    dim: int = 100
    window: int = 15
    epochs: int = 20
    min_count: int = 50
    negative_samples: int = 5
    initial_lr: float = 0.025
    seed: int = 1
    variant: str = "w2v-sg"
    combine_mode: str = "mean"
    sample: float = 0.0
    subword_min_n: int = 3
    subword_max_n: int = 6
    subword_buckets: int = 2_000_000
    dbow_words: bool = False

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError(f"dim must be > 0, got {self.dim}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.negative_samples < 1:
            raise ValueError(f"negative_samples must be >= 1, got {self.negative_samples}")
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.sample < 0:
            raise ValueError(f"sample must be >= 0, got {self.sample}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.combine_mode not in ("mean", "sum"):
            raise ValueError(f"combine_mode must be 'mean' or 'sum', got {self.combine_mode!r}")
        if not 1 <= self.subword_min_n <= self.subword_max_n:
            raise ValueError("need 1 <= subword_min_n <= subword_max_n")
        if self.subword_buckets < 1:
            raise ValueError("subword_buckets must be >= 1")
        if self.variant == "d2v-dm" and self.combine_mode != "mean":
            raise ValueError("d2v-dm requires combine_mode='mean'")

    @property
    def is_fasttext(self) -> bool:
        return self.variant.startswith("fasttext")

    @property
    def is_doc2vec(self) -> bool:
        return self.variant.startswith("d2v")


@dataclass
class EmbeddingModel:
    """A trained model: vocabulary, parameter matrices, and its config.

    ``subword_table`` is present exactly for fasttext variants and
    ``doc_vectors`` exactly for doc2vec variants. ``epoch_losses`` holds
    the mean pair loss of each training epoch.
    """

    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    variant: str
    config: TrainConfig
    subword_table: np.ndarray | None = None
    doc_vectors: np.ndarray | None = None
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def vector(self, token: str) -> np.ndarray:
        """Vector for ``token``; fasttext models also cover unseen tokens."""
        if self.config.is_fasttext:
            return fasttext_vector(self, token)
        idx = self.vocab.index.get(token)
        if idx is None:
            raise KeyError(f"token {token!r} not in vocabulary")
        return self.input_vectors[idx]

    def save(self, path: str | Path) -> None:
        save_model(self, path)


# ---------------------------------------------------------------------------
# objective and analytic gradients
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_SCORE_CLIP, _SCORE_CLIP)))


@dataclass(frozen=True)
class PairGradients:
    """Loss and analytic partials of the pair objective."""

    loss: float
    d_center: np.ndarray
    d_context: np.ndarray
    d_negatives: np.ndarray  # (k, dim); empty for k = 0


def negative_sampling_loss(
    center: np.ndarray, context: np.ndarray, negatives: Sequence[np.ndarray] | np.ndarray
) -> float:
    """Pair loss -log s(u.v) - sum_k log s(-u_k.v)."""
    negatives = np.atleast_2d(np.asarray(negatives)) if len(negatives) else np.empty((0, len(center)))
    loss = float(np.logaddexp(0.0, -float(context @ center)))
    if negatives.size:
        loss += float(np.logaddexp(0.0, negatives @ center).sum())
    return loss


def negative_sampling_gradient(
    center: np.ndarray, context: np.ndarray, negatives: Sequence[np.ndarray] | np.ndarray
) -> PairGradients:
    """Analytic partials of the pair loss for every participating vector.

    With no negatives the gradient reduces to the positive term alone; a
    saturated positive pair (sigmoid = 1) contributes zero gradient.
    """
    center = np.asarray(center)
    negatives = (
        np.atleast_2d(np.asarray(negatives))
        if len(negatives)
        else np.empty((0, center.shape[0]), dtype=center.dtype)
    )
    g_pos = _sigmoid(np.asarray(context @ center)) - 1.0  # dL/d(u.v), in (-1, 0]
    d_center = g_pos * context
    d_context = g_pos * center
    loss = float(np.logaddexp(0.0, -float(context @ center)))
    if negatives.size:
        g_neg = _sigmoid(negatives @ center)  # (k,)
        d_center = d_center + g_neg @ negatives
        d_negatives = g_neg[:, None] * center[None, :]
        loss += float(np.logaddexp(0.0, negatives @ center).sum())
    else:
        d_negatives = np.empty((0, center.shape[0]), dtype=center.dtype)
    return PairGradients(loss=loss, d_center=d_center, d_context=d_context, d_negatives=d_negatives)


def combined_input_gradient(
    rows: np.ndarray,
    context: np.ndarray,
    negatives: Sequence[np.ndarray] | np.ndarray,
    combine_mode: str = "mean",
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients when the input is the mean (or sum) of several rows.

    Covers cbow, dm, and fasttext inputs: ``rows`` are the contributing
    vectors (context words, document vector, subword buckets). Returns
    (loss, d_rows, d_context, d_negatives) where d_rows[i] is the exact
    partial for rows[i]: the chain rule divides the combined gradient by
    the row count in mean mode.
    """
    rows = np.atleast_2d(np.asarray(rows))
    if combine_mode == "mean":
        h = rows.mean(axis=0)
        scale = 1.0 / rows.shape[0]
    elif combine_mode == "sum":
        h = rows.sum(axis=0)
        scale = 1.0
    else:
        raise ValueError(f"combine_mode must be 'mean' or 'sum', got {combine_mode!r}")
    base = negative_sampling_gradient(h, context, negatives)
    d_rows = np.repeat((scale * base.d_center)[None, :], rows.shape[0], axis=0)
    return base.loss, d_rows, base.d_context, base.d_negatives


# ---------------------------------------------------------------------------
# subword hashing
# ---------------------------------------------------------------------------


def _fnv1a(data: bytes) -> int:
    h = 0x811C9DC5
    for byte in data:
        h ^= byte
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def subword_ngrams(token: str, n_min: int = 3, n_max: int = 6, buckets: int = 2_000_000) -> list[int]:
    """Hashed bucket indices of the character n-grams of ``<token>``.

    The token is wrapped in ``<`` ``>`` boundary markers, every n-gram with
    n in [n_min, n_max] is extracted left to right (shortest first), and
    each is hashed with 32-bit FNV-1a over its UTF-8 bytes, modulo
    ``buckets``. Deterministic; repeated n-grams keep their duplicates.
    """
    if not token:
        raise ValueError("token must be non-empty")
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    if buckets < 1:
        raise ValueError("buckets must be >= 1")
    wrapped = "<" + token + ">"
    out = []
    for n in range(n_min, n_max + 1):
        for i in range(len(wrapped) - n + 1):
            out.append(_fnv1a(wrapped[i : i + n].encode("utf-8")) % buckets)
    return out


def fasttext_vector(model: EmbeddingModel, token: str) -> np.ndarray:
    """Vector for any non-empty token: mean of its word row (if in vocab)
    and its subword bucket rows. Out-of-vocabulary tokens use the bucket
    rows alone; a token too short to produce n-grams gets the zero vector.
    """
    if not model.config.is_fasttext or model.subword_table is None:
        raise ValueError(f"model variant {model.variant!r} has no subword table")
    if not token:
        raise ValueError("token must be non-empty")
    cfg = model.config
    grams = subword_ngrams(token, cfg.subword_min_n, cfg.subword_max_n, cfg.subword_buckets)
    rows = [model.subword_table[grams]] if grams else []
    idx = model.vocab.index.get(token)
    if idx is not None:
        rows.append(model.input_vectors[idx : idx + 1])
    if not rows:
        return np.zeros(model.dim, dtype=model.input_vectors.dtype)
    stacked = np.concatenate(rows, axis=0)
    return stacked.mean(axis=0)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def build_noise_distribution(vocab: Vocabulary, exponent: float = NOISE_EXPONENT) -> np.ndarray:
    """Cumulative unigram^exponent distribution used for negative draws."""
    weights = vocab.counts.astype(np.float64) ** exponent
    cum = np.cumsum(weights)
    return cum / cum[-1]


class _Trainer:
    """Mutable training state; one instance per train()/infer call."""

    def __init__(self, vocab: Vocabulary, config: TrainConfig, n_docs: int):
        self.vocab = vocab
        self.cfg = config
        self.rng = np.random.default_rng(config.seed)
        dim = config.dim
        scale = 0.5 / dim
        self.syn0 = self.rng.uniform(-scale, scale, size=(len(vocab), dim)).astype(np.float32)
        self.syn1 = np.zeros((len(vocab), dim), dtype=np.float32)
        self.docvecs = None
        self.buckets = None
        if config.is_doc2vec:
            self.docvecs = self.rng.uniform(-scale, scale, size=(n_docs, dim)).astype(np.float32)
        if config.is_fasttext:
            self.buckets = self.rng.uniform(
                -scale, scale, size=(config.subword_buckets, dim)
            ).astype(np.float32)
            self.gram_ids = [
                np.array(
                    subword_ngrams(
                        tok, config.subword_min_n, config.subword_max_n, config.subword_buckets
                    ),
                    dtype=np.int64,
                )
                for tok in vocab.tokens
            ]
        self.noise_cum = build_noise_distribution(vocab)
        self.keep_prob = self._keep_probabilities()

    def _keep_probabilities(self) -> np.ndarray | None:
        # Frequent-word subsampling (disabled when sample == 0): keep
        # probability min(1, (sqrt(f/s) + 1) * s / f) for corpus frequency f.
        if self.cfg.sample <= 0:
            return None
        freqs = self.vocab.counts / max(1, int(self.vocab.counts.sum()))
        ratio = freqs / self.cfg.sample
        return np.minimum(1.0, (np.sqrt(ratio) + 1.0) / ratio)

    # -- noise and window helpers -------------------------------------

    def draw_negatives(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.searchsorted(self.noise_cum, rng.random(n), side="right")

    @staticmethod
    def context_slice(sent: np.ndarray, pos: int, span: int) -> np.ndarray:
        lo = max(0, pos - span)
        hi = min(len(sent), pos + span + 1)
        return np.concatenate([sent[lo:pos], sent[pos + 1 : hi]])

    # -- one-position updates ------------------------------------------

    def _update_sg(self, rng, alpha: float, center: int, ctx: np.ndarray) -> tuple[float, int]:
        # All context targets of one center share the same input snapshot.
        # Drawn negatives that collide with their positive target are skipped.
        k = self.cfg.negative_samples
        negs = self.draw_negatives(rng, len(ctx) * k)
        rows = np.concatenate([ctx, negs[negs != np.repeat(ctx, k)]])
        if self.cfg.is_fasttext:
            in_rows = np.concatenate([[center], len(self.vocab) + self.gram_ids[center]])
            v = self._gather_combined(in_rows)
        else:
            v = self.syn0[center]
        u = self.syn1[rows]
        s = u @ v
        labels = np.zeros(len(rows), dtype=np.float32)
        labels[: len(ctx)] = 1.0
        g = (labels - _sigmoid(s)) * alpha
        loss = float(np.logaddexp(0.0, -s[: len(ctx)].astype(np.float64)).sum())
        loss += float(np.logaddexp(0.0, s[len(ctx) :].astype(np.float64)).sum())
        np.add.at(self.syn1, rows, g[:, None] * v[None, :])
        d_v = g @ u
        if self.cfg.is_fasttext:
            self._scatter_combined(in_rows, d_v)
        else:
            self.syn0[center] += d_v
        return loss, len(ctx)

    def _update_cbow(
        self, rng, alpha: float, center: int, ctx: np.ndarray, doc_id: int | None
    ) -> tuple[float, int]:
        # One positive pair: combined context (plus doc vector for dm)
        # predicts the center word.
        in_rows = self._input_rows(ctx, doc_id)
        if in_rows is None:
            return 0.0, 0
        k = self.cfg.negative_samples
        negs = self.draw_negatives(rng, k)
        rows = np.concatenate([[center], negs[negs != center]])
        v = self._gather_combined(in_rows)
        u = self.syn1[rows]
        s = u @ v
        labels = np.zeros(len(rows), dtype=np.float32)
        labels[0] = 1.0
        g = (labels - _sigmoid(s)) * alpha
        loss = float(np.logaddexp(0.0, -float(s[0])))
        loss += float(np.logaddexp(0.0, s[1:].astype(np.float64)).sum())
        np.add.at(self.syn1, rows, g[:, None] * v[None, :])
        self._scatter_combined(in_rows, g @ u)
        return loss, 1

    def _input_rows(self, ctx: np.ndarray, doc_id: int | None) -> np.ndarray | None:
        # Row ids into the concatenated (syn0 | buckets | docvecs) space.
        parts = []
        if self.cfg.is_fasttext:
            for w in ctx:
                parts.append([w])
                parts.append(len(self.vocab) + self.gram_ids[w])
        elif len(ctx):
            parts.append(ctx)
        if doc_id is not None:
            offset = len(self.vocab) + (self.cfg.subword_buckets if self.cfg.is_fasttext else 0)
            parts.append([offset + doc_id])
        if not parts:
            return None
        return np.concatenate([np.asarray(p, dtype=np.int64) for p in parts])

    def _tables_for_rows(self) -> tuple[np.ndarray, ...]:
        tables = [self.syn0]
        if self.cfg.is_fasttext:
            tables.append(self.buckets)
        if self.docvecs is not None:
            tables.append(self.docvecs)
        return tuple(tables)

    def _gather_combined(self, rows: np.ndarray) -> np.ndarray:
        vecs = np.empty((len(rows), self.cfg.dim), dtype=np.float32)
        self._split_apply(
            self._tables_for_rows(), rows, lambda tbl, idx, sel: vecs.__setitem__(sel, tbl[idx])
        )
        if self.cfg.combine_mode == "sum":
            return vecs.sum(axis=0)
        return vecs.mean(axis=0)

    def _scatter_combined(self, rows: np.ndarray, d_v: np.ndarray) -> None:
        share = d_v if self.cfg.combine_mode == "sum" else d_v / len(rows)
        self._split_apply(
            self._tables_for_rows(),
            rows,
            lambda tbl, idx, sel: np.add.at(tbl, idx, share),
        )

    def _split_apply(self, tables, rows: np.ndarray, fn) -> None:
        # rows index the concatenation of `tables`; dispatch per table.
        start = 0
        for tbl in tables:
            end = start + tbl.shape[0]
            sel = (rows >= start) & (rows < end)
            if sel.any():
                fn(tbl, rows[sel] - start, sel)
            start = end

    # -- epoch loops ----------------------------------------------------

    def train_epoch(
        self,
        rng: np.random.Generator,
        sentences: list[np.ndarray],
        doc_ids: list[int],
        alpha_fn,
        step_offset: int,
    ) -> tuple[float, int, int]:
        cfg = self.cfg
        loss_sum = 0.0
        pairs = 0
        step = step_offset
        for sent, doc_id in zip(sentences, doc_ids):
            length = len(sent)
            if length == 0:
                continue
            if self.keep_prob is not None:
                sent = sent[rng.random(length) < self.keep_prob[sent]]
                length = len(sent)
                if length == 0:
                    continue
            spans = rng.integers(1, cfg.window + 1, size=length)
            for pos in range(length):
                alpha = alpha_fn(step)
                step += 1
                center = int(sent[pos])
                if cfg.variant == "d2v-dbow":
                    loss, n = self._dbow_position(rng, alpha, center, doc_id)
                    if cfg.dbow_words:
                        ctx = self.context_slice(sent, pos, int(spans[pos]))
                        if len(ctx):
                            more_loss, more = self._update_sg(rng, alpha, center, ctx)
                            loss, n = loss + more_loss, n + more
                elif cfg.variant in ("w2v-sg", "fasttext-sg"):
                    ctx = self.context_slice(sent, pos, int(spans[pos]))
                    if len(ctx) == 0:
                        continue
                    loss, n = self._update_sg(rng, alpha, center, ctx)
                else:  # cbow family: w2v-cbow, fasttext-cbow, d2v-dm
                    ctx = self.context_slice(sent, pos, int(spans[pos]))
                    did = doc_id if cfg.variant == "d2v-dm" else None
                    if len(ctx) == 0 and did is None:
                        continue
                    loss, n = self._update_cbow(rng, alpha, center, ctx, did)
                loss_sum += loss
                pairs += n
        return loss_sum, pairs, step

    def _dbow_position(self, rng, alpha: float, word: int, doc_id: int) -> tuple[float, int]:
        # The document vector predicts this word.
        k = self.cfg.negative_samples
        negs = self.draw_negatives(rng, k)
        rows = np.concatenate([[word], negs[negs != word]])
        v = self.docvecs[doc_id]
        u = self.syn1[rows]
        s = u @ v
        labels = np.zeros(len(rows), dtype=np.float32)
        labels[0] = 1.0
        g = (labels - _sigmoid(s)) * alpha
        loss = float(np.logaddexp(0.0, -float(s[0])))
        loss += float(np.logaddexp(0.0, s[1:].astype(np.float64)).sum())
        np.add.at(self.syn1, rows, g[:, None] * v[None, :])
        self.docvecs[doc_id] += g @ u
        return loss, 1

    def check_finite(self) -> None:
        mats = [self.syn0, self.syn1, self.docvecs, self.buckets]
        for mat in mats:
            if mat is not None and not np.isfinite(mat).all():
                raise LegalNlpError(
                    "NaN or Inf detected in model parameters during training; "
                    "lower initial_lr or check the corpus"
                )


def _index_sentences(
    sentences: Sequence[Sequence[str]], vocab: Vocabulary
) -> list[np.ndarray]:
    index = vocab.index
    return [
        np.array([index[t] for t in sent if t in index], dtype=np.int64)
        for sent in sentences
    ]


def train(
    sentences: Sequence[Sequence[str]],
    config: TrainConfig,
    workers: int = 1,
) -> EmbeddingModel:
    """Train an embedding model over token lists (one list per document).

    For doc2vec variants each list is a document whose vector is trained at
    the list's position in ``doc_vectors``. Raises
    :class:`EmptyCorpusError` when nothing survives min-count pruning.
    ``workers > 1`` trades bitwise determinism for speed.
    """
    sentences = [list(s) for s in sentences]
    vocab = count_vocab(sentences, config.min_count)
    if len(vocab) == 0:
        raise EmptyCorpusError("empty corpus")
    trainer = _Trainer(vocab, config, n_docs=len(sentences))
    indexed = _index_sentences(sentences, vocab)
    doc_ids = list(range(len(indexed)))
    total_positions = sum(len(s) for s in indexed)
    if total_positions == 0:
        raise EmptyCorpusError("empty corpus")
    total_steps = config.epochs * total_positions
    lr0 = config.initial_lr
    lr_min = lr0 * LR_FLOOR_RATIO

    def alpha_fn(step: int, _total=total_steps) -> float:
        return lr0 - (lr0 - lr_min) * min(1.0, step / _total)

    epoch_losses: list[float] = []
    if workers <= 1:
        step = 0
        for _ in range(config.epochs):
            loss, pairs, step = trainer.train_epoch(
                trainer.rng, indexed, doc_ids, alpha_fn, step
            )
            trainer.check_finite()
            epoch_losses.append(loss / max(1, pairs))
    else:
        chunk = max(1, (len(indexed) + workers - 1) // workers)
        parts = [
            (indexed[i : i + chunk], doc_ids[i : i + chunk])
            for i in range(0, len(indexed), chunk)
        ]
        for epoch in range(config.epochs):
            results: list[tuple[float, int]] = [(0.0, 0)] * len(parts)
            offset = epoch * total_positions
            stride = len(parts)

            def run(slot: int) -> None:
                # Workers sweep the epoch's lr range in parallel strides.
                rng = np.random.default_rng((config.seed, epoch, slot))
                loss, pairs, _ = trainer.train_epoch(
                    rng,
                    parts[slot][0],
                    parts[slot][1],
                    lambda s: alpha_fn(offset + (s - offset) * stride),
                    offset,
                )
                results[slot] = (loss, pairs)

            threads = [threading.Thread(target=run, args=(i,)) for i in range(len(parts))]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            trainer.check_finite()
            loss = sum(r[0] for r in results)
            pairs = sum(r[1] for r in results)
            epoch_losses.append(loss / max(1, pairs))

    return EmbeddingModel(
        vocab=vocab,
        input_vectors=trainer.syn0,
        output_vectors=trainer.syn1,
        variant=config.variant,
        config=config,
        subword_table=trainer.buckets,
        doc_vectors=trainer.docvecs,
        epoch_losses=epoch_losses,
    )


def infer_doc_vector(
    model: EmbeddingModel, tokens: Sequence[str], steps: int = 50, seed: int = 0
) -> np.ndarray:
    """Infer a vector for an unseen document with word matrices frozen.

    Runs ``steps`` epochs of the model's own objective, updating only a
    freshly initialized document vector. ``steps=0`` returns the seeded
    initialization. Raises ``ValueError`` when every token is unknown.
    """
    if not model.config.is_doc2vec:
        raise ValueError(f"model variant {model.variant!r} has no document vectors")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    cfg = model.config
    idx = [model.vocab.index[t] for t in tokens if t in model.vocab.index]
    rng = np.random.default_rng(seed)
    scale = 0.5 / cfg.dim
    doc = rng.uniform(-scale, scale, size=cfg.dim).astype(np.float32)
    if not idx:
        raise ValueError("cannot infer: all tokens out of vocabulary")
    if steps == 0:
        return doc
    sent = np.array(idx, dtype=np.int64)
    noise_cum = build_noise_distribution(model.vocab)
    lr0 = cfg.initial_lr
    lr_min = lr0 * LR_FLOOR_RATIO
    total = steps * len(sent)
    k = cfg.negative_samples
    step = 0
    for _ in range(steps):
        spans = rng.integers(1, cfg.window + 1, size=len(sent))
        for pos in range(len(sent)):
            alpha = lr0 - (lr0 - lr_min) * min(1.0, step / total)
            step += 1
            center = int(sent[pos])
            negs = np.searchsorted(noise_cum, rng.random(k), side="right")
            rows = np.concatenate([[center], negs[negs != center]])
            u = model.output_vectors[rows]
            if cfg.variant == "d2v-dbow":
                v = doc
                n_rows = 1
            else:  # d2v-dm: mean of frozen context rows and the doc vector
                ctx = _Trainer.context_slice(sent, pos, int(spans[pos]))
                rows_in = model.input_vectors[ctx]
                v = (rows_in.sum(axis=0) + doc) / (len(ctx) + 1)
                n_rows = len(ctx) + 1
            s = u @ v
            labels = np.zeros(len(rows), dtype=np.float32)
            labels[0] = 1.0
            g = (labels - _sigmoid(s)) * alpha
            doc += (g @ u) / n_rows
    return doc


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Write the versioned binary format (magic LNLP, section EMBD)."""
    cfg = model.config
    with Path(path).open("wb") as fh:
        ser.write_header(fh, ser.SECTION_EMBEDDINGS)
        ser.write_str(fh, model.variant)
        for value in (cfg.dim, cfg.window, cfg.epochs, cfg.min_count, cfg.negative_samples):
            ser.write_u32(fh, value)
        ser.write_f64(fh, cfg.initial_lr)
        ser.write_i64(fh, cfg.seed)
        ser.write_str(fh, cfg.combine_mode)
        ser.write_f64(fh, cfg.sample)
        ser.write_u32(fh, cfg.subword_min_n)
        ser.write_u32(fh, cfg.subword_max_n)
        ser.write_u32(fh, cfg.subword_buckets)
        ser.write_u8(fh, 0 if model.subword_table is None else 1)
        ser.write_u8(fh, 0 if model.doc_vectors is None else 1)
        ser.write_u8(fh, 1 if cfg.dbow_words else 0)
        ser.write_u64(fh, model.vocab.total_tokens)
        ser.write_u32(fh, len(model.vocab))
        for token, count in model.vocab.entries:
            ser.write_str(fh, token)
            ser.write_u64(fh, count)
        ser.write_matrix(fh, model.input_vectors)
        ser.write_matrix(fh, model.output_vectors)
        if model.subword_table is not None:
            ser.write_matrix(fh, model.subword_table)
        if model.doc_vectors is not None:
            ser.write_matrix(fh, model.doc_vectors)


def load_model(path: str | Path) -> EmbeddingModel:
    with Path(path).open("rb") as fh:
        ser.read_header(fh, ser.SECTION_EMBEDDINGS, path)
        variant = ser.read_str(fh)
        dim, window, epochs, min_count, negative = (ser.read_u32(fh) for _ in range(5))
        initial_lr = ser.read_f64(fh)
        seed = ser.read_i64(fh)
        combine_mode = ser.read_str(fh)
        sample = ser.read_f64(fh)
        sub_args = {
            "subword_min_n": ser.read_u32(fh),
            "subword_max_n": ser.read_u32(fh),
            "subword_buckets": ser.read_u32(fh),
        }
        has_subwords = ser.read_u8(fh)
        has_docs = ser.read_u8(fh)
        dbow_words = bool(ser.read_u8(fh))
        total_tokens = ser.read_u64(fh)
        n_tokens = ser.read_u32(fh)
        entries = []
        for _ in range(n_tokens):
            tok = ser.read_str(fh)
            entries.append((tok, ser.read_u64(fh)))
        vocab = Vocabulary(
            entries=tuple(entries),
            index={tok: i for i, (tok, _) in enumerate(entries)},
            total_tokens=total_tokens,
        )
        if variant not in VARIANTS:
            raise ModelFormatError(f"{path}: unknown variant {variant!r}")
        config = TrainConfig(
            dim=dim,
            window=window,
            epochs=epochs,
            min_count=min_count,
            negative_samples=negative,
            initial_lr=initial_lr,
            seed=seed,
            variant=variant,
            combine_mode=combine_mode,
            sample=sample,
            dbow_words=dbow_words,
            **sub_args,
        )
        input_vectors = ser.read_matrix(fh)
        output_vectors = ser.read_matrix(fh)
        subword = ser.read_matrix(fh) if has_subwords else None
        docvecs = ser.read_matrix(fh) if has_docs else None
    return EmbeddingModel(
        vocab=vocab,
        input_vectors=input_vectors,
        output_vectors=output_vectors,
        variant=variant,
        config=config,
        subword_table=subword,
        doc_vectors=docvecs,
    )


def save_text(model: EmbeddingModel, path: str | Path) -> None:
    """Interoperable text format: header ``|V| dim``, then one token and its
    input vector per line. Floats print via repr, which round-trips f32."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(model.vocab)} {model.dim}\n")
        for i, (token, _) in enumerate(model.vocab.entries):
            values = " ".join(repr(float(x)) for x in model.input_vectors[i])
            fh.write(f"{token} {values}\n")


def load_text(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read the text format back as (tokens, float32 matrix)."""
    with Path(path).open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ModelFormatError(f"{path}: bad text-format header")
        n, dim = int(header[0]), int(header[1])
        tokens = []
        matrix = np.empty((n, dim), dtype=np.float32)
        for i in range(n):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ModelFormatError(f"{path}: bad vector line {i + 2}")
            tokens.append(parts[0])
            matrix[i] = np.array([float(x) for x in parts[1:]], dtype=np.float32)
    return tokens, matrix
