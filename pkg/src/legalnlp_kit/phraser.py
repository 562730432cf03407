"""Collocation detection: score adjacent token pairs and merge the strong ones.

A fitted :class:`PhraseModel` holds exact unigram and bigram counts for a
corpus. A pair ``(a, b)`` is merged into the single token ``a_b`` when

    score(a, b) = (count(a, b) - min_count) * vocab_size / (count(a) * count(b))

exceeds the threshold. Applying a model twice in sequence (two separately
fitted models, the second fitted on the first's output) grows merged tokens
up to quadrigrams, and lets the second pass pick up pairs whose statistics
only clear the threshold after the first pass has merged their neighbors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .exceptions import EmptyCorpusError, ModelFormatError
from . import serialization as ser

DEFAULT_MIN_COUNT = 5
DEFAULT_THRESHOLD = 10.0

Scorer = Callable[[int, int, int, int, int], float]


def plain_scorer(
    count_a: int, count_b: int, count_ab: int, vocab_size: int, min_count: int
) -> float:
    """Default collocation score; pairs at or below min_count score <= 0."""
    return (count_ab - min_count) * vocab_size / (count_a * count_b)


@dataclass
class PhraseModel:
    """Exact pair statistics plus the merge threshold.

    ``vocab_size`` is the number of distinct unigrams seen during fit;
    ``total_tokens`` the raw token count. Instances are immutable in use:
    fit once, then only read.
    """

    unigram_counts: dict[str, int]
    bigram_counts: dict[tuple[str, str], int]
    min_count: int = DEFAULT_MIN_COUNT
    threshold: float = DEFAULT_THRESHOLD
    delimiter: str = "_"
    total_tokens: int = 0
    scorer: Scorer = field(default=plain_scorer, repr=False)

    @property
    def vocab_size(self) -> int:
        return len(self.unigram_counts)

    @classmethod
    def fit(
        cls,
        sentences: Iterable[Sequence[str]],
        min_count: int = DEFAULT_MIN_COUNT,
        threshold: float = DEFAULT_THRESHOLD,
        delimiter: str = "_",
        scorer: Scorer = plain_scorer,
    ) -> "PhraseModel":
        """Count unigrams and adjacent pairs in one pass over the corpus.

        Pairs never cross sentence boundaries. Stopwords are not treated
        specially; every token is counted.
        """
        if min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {min_count}")
        if threshold <= 0:
            raise ValueError(f"threshold must be > 0, got {threshold}")
        unigrams: Counter = Counter()
        bigrams: Counter = Counter()
        total = 0
        for sentence in sentences:
            unigrams.update(sentence)
            total += len(sentence)
            for a, b in zip(sentence, sentence[1:]):
                bigrams[(a, b)] += 1
        if not unigrams:
            raise EmptyCorpusError("empty corpus")
        return cls(
            unigram_counts=dict(unigrams),
            bigram_counts=dict(bigrams),
            min_count=min_count,
            threshold=threshold,
            delimiter=delimiter,
            total_tokens=total,
            scorer=scorer,
        )

    def score(self, a: str, b: str) -> float:
        """Collocation score of the adjacent pair ``(a, b)``.

        Pairs with an out-of-vocabulary member score 0.0 (never merged);
        an unseen bigram over known unigrams scores negative.
        """
        count_a = self.unigram_counts.get(a)
        count_b = self.unigram_counts.get(b)
        if count_a is None or count_b is None:
            return 0.0
        count_ab = self.bigram_counts.get((a, b), 0)
        return self.scorer(count_a, count_b, count_ab, self.vocab_size, self.min_count)

    def apply(self, tokens: Sequence[str]) -> list[str]:
        """Greedy left-to-right merge of pairs scoring above the threshold.

        A merged token never re-merges within the same pass, so one pass
        turns at most two adjacent tokens into one.
        """
        out: list[str] = []
        i = 0
        n = len(tokens)
        while i < n:
            if i + 1 < n and self.score(tokens[i], tokens[i + 1]) > self.threshold:
                out.append(tokens[i] + self.delimiter + tokens[i + 1])
                i += 2
            else:
                out.append(tokens[i])
                i += 1
        return out

    def apply_corpus(self, sentences: Iterable[Sequence[str]]) -> Iterable[list[str]]:
        for sentence in sentences:
            yield self.apply(sentence)

    def save(self, path: str | Path) -> None:
        save_models([self], path)

    @classmethod
    def load(cls, path: str | Path) -> "PhraseModel":
        models = load_models(path)
        if len(models) != 1:
            raise ModelFormatError(
                f"{path}: holds {len(models)} phrase models, expected exactly 1"
            )
        return models[0]

    def dump_text(self, path: str | Path) -> None:
        """Human-readable token<TAB>count dump for diffing.

        Unigrams come first, then bigrams joined by the delimiter, each
        block sorted by descending count then token.
        """
        with Path(path).open("w", encoding="utf-8") as fh:
            for tok, count in sorted(
                self.unigram_counts.items(), key=lambda kv: (-kv[1], kv[0])
            ):
                fh.write(f"{tok}\t{count}\n")
            for (a, b), count in sorted(
                self.bigram_counts.items(), key=lambda kv: (-kv[1], kv[0])
            ):
                fh.write(f"{a}{self.delimiter}{b}\t{count}\n")


def fit_two_pass(
    sentences: Sequence[Sequence[str]],
    min_count: int = DEFAULT_MIN_COUNT,
    threshold: float = DEFAULT_THRESHOLD,
    delimiter: str = "_",
) -> tuple[PhraseModel, PhraseModel]:
    """Fit the bigram model, then a second model on its merged output.

    The corpus must be re-iterable (two passes). Applying both models in
    sequence yields up to quadrigrams.
    """
    first = PhraseModel.fit(
        sentences, min_count=min_count, threshold=threshold, delimiter=delimiter
    )
    second = PhraseModel.fit(
        first.apply_corpus(sentences),
        min_count=min_count,
        threshold=threshold,
        delimiter=delimiter,
    )
    return first, second


def apply_all(models: Sequence[PhraseModel], tokens: Sequence[str]) -> list[str]:
    """Apply phrase models in sequence to one token list."""
    out = list(tokens)
    for model in models:
        out = model.apply(out)
    return out


def save_models(models: Sequence[PhraseModel], path: str | Path) -> None:
    """Write one or more phrase models (e.g. a two-pass bundle) to one file."""
    if not models:
        raise ValueError("no models to save")
    with Path(path).open("wb") as fh:
        ser.write_header(fh, ser.SECTION_PHRASER)
        ser.write_u8(fh, len(models))
        for model in models:
            ser.write_u32(fh, model.min_count)
            ser.write_f64(fh, model.threshold)
            ser.write_str(fh, model.delimiter)
            ser.write_u64(fh, model.total_tokens)
            tokens = sorted(model.unigram_counts)
            index = {tok: i for i, tok in enumerate(tokens)}
            ser.write_u32(fh, len(tokens))
            for tok in tokens:
                ser.write_str(fh, tok)
                ser.write_u64(fh, model.unigram_counts[tok])
            ser.write_u64(fh, len(model.bigram_counts))
            for (a, b), count in sorted(model.bigram_counts.items()):
                ser.write_u32(fh, index[a])
                ser.write_u32(fh, index[b])
                ser.write_u64(fh, count)


def load_models(path: str | Path) -> list[PhraseModel]:
    with Path(path).open("rb") as fh:
        ser.read_header(fh, ser.SECTION_PHRASER, path)
        n_models = ser.read_u8(fh)
        models = []
        for _ in range(n_models):
            min_count = ser.read_u32(fh)
            threshold = ser.read_f64(fh)
            delimiter = ser.read_str(fh)
            total = ser.read_u64(fh)
            n_unigrams = ser.read_u32(fh)
            tokens = []
            unigrams: dict[str, int] = {}
            for _ in range(n_unigrams):
                tok = ser.read_str(fh)
                tokens.append(tok)
                unigrams[tok] = ser.read_u64(fh)
            bigrams: dict[tuple[str, str], int] = {}
            for _ in range(ser.read_u64(fh)):
                ia = ser.read_u32(fh)
                ib = ser.read_u32(fh)
                bigrams[(tokens[ia], tokens[ib])] = ser.read_u64(fh)
            models.append(
                PhraseModel(
                    unigram_counts=unigrams,
                    bigram_counts=bigrams,
                    min_count=min_count,
                    threshold=threshold,
                    delimiter=delimiter,
                    total_tokens=total,
                )
            )
    return models
