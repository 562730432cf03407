"""Corpus ingestion, vocabulary counting, splitting, and MLM masking.

Corpora are streams of :class:`TextRecord`. Two file formats are supported:
``plain-lines`` (one raw text per line, ids assigned sequentially) and
``json-lines`` (one JSON object per line with fields ``id``, ``text`` and an
optional ``label``). Ingestion is streaming and keeps memory constant in the
corpus size.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import CorpusFormatError

FORMATS = ("plain-lines", "json-lines")

MASK_TOKEN = "[MASK]"


@dataclass(frozen=True)
class TextRecord:
    """One document: an id, its text, and an optional class label."""

    id: str
    text: str
    label: str | None = None


@dataclass(frozen=True)
class Vocabulary:
    """Token counts after min-count pruning.

    ``entries`` is ordered by descending count (ties broken by token string)
    so that serialized vocabularies are diff-stable. ``total_tokens`` is the
    raw token count *before* pruning, which scorers need.
    """

    entries: tuple[tuple[str, int], ...]
    index: dict[str, int]
    total_tokens: int

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def count(self, token: str) -> int:
        """Count for ``token``, or 0 if it was pruned / never seen."""
        pos = self.index.get(token)
        return 0 if pos is None else self.entries[pos][1]

    @property
    def tokens(self) -> list[str]:
        return [tok for tok, _ in self.entries]

    @property
    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=np.int64)


def ingest(path: str | Path, format: str = "plain-lines") -> Iterator[TextRecord]:
    """Stream records from ``path``.

    plain-lines: one record per line, ids "0", "1", ..., no label.
    json-lines: objects with ``id`` (non-empty string), ``text``, optional
    ``label``. Malformed lines raise :class:`CorpusFormatError` naming the
    1-based line number.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        try:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if format == "plain-lines":
                    yield TextRecord(id=str(lineno - 1), text=line)
                    continue
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(
                        f"{path}: malformed JSON at line {lineno}: {exc.msg}"
                    ) from exc
                if not isinstance(obj, dict):
                    raise CorpusFormatError(
                        f"{path}: line {lineno} is not a JSON object"
                    )
                rec_id = obj.get("id")
                if not isinstance(rec_id, str) or not rec_id:
                    raise CorpusFormatError(
                        f"{path}: line {lineno} has a missing or empty 'id'"
                    )
                text = obj.get("text")
                if not isinstance(text, str):
                    raise CorpusFormatError(
                        f"{path}: line {lineno} has a missing or non-string 'text'"
                    )
                label = obj.get("label")
                if label is not None and not isinstance(label, str):
                    raise CorpusFormatError(
                        f"{path}: line {lineno} has a non-string 'label'"
                    )
                yield TextRecord(id=rec_id, text=text, label=label)
        except UnicodeDecodeError as exc:
            raise CorpusFormatError(f"{path}: invalid UTF-8: {exc}") from exc


def write_records(
    records: Iterable[TextRecord], path: str | Path, format: str = "json-lines"
) -> int:
    """Write records to ``path``; inverse of :func:`ingest`. Returns the count.

    plain-lines drops ids and labels, so the round trip is the identity only
    for label-free records with sequential ids and newline-free text.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            if format == "plain-lines":
                fh.write(rec.text + "\n")
            else:
                obj: dict[str, str] = {"id": rec.id, "text": rec.text}
                if rec.label is not None:
                    obj["label"] = rec.label
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
            n += 1
    return n


def _count_chunk(chunk: list[Sequence[str]]) -> Counter:
    counter: Counter = Counter()
    for tokens in chunk:
        counter.update(tokens)
    return counter


def count_vocab(
    token_lists: Iterable[Sequence[str]], min_count: int = 1, workers: int = 1
) -> Vocabulary:
    """Count tokens and prune those seen fewer than ``min_count`` times.

    ``workers > 1`` shards the counting and merges; the result is identical
    to single-threaded counting. An empty stream yields an empty Vocabulary.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    if workers <= 1:
        counter = _count_chunk(list(token_lists))
    else:
        materialized = list(token_lists)
        size = max(1, (len(materialized) + workers - 1) // workers)
        chunks = [materialized[i : i + size] for i in range(0, len(materialized), size)]
        counter = Counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_count_chunk, chunks):
                counter.update(part)
    total = sum(counter.values())
    kept = sorted(
        ((tok, c) for tok, c in counter.items() if c >= min_count),
        key=lambda item: (-item[1], item[0]),
    )
    index = {tok: i for i, (tok, _) in enumerate(kept)}
    return Vocabulary(entries=tuple(kept), index=index, total_tokens=total)


def train_test_split(
    records: Sequence[TextRecord],
    train_fraction: float,
    seed: int,
    stratify: bool = False,
) -> tuple[list[TextRecord], list[TextRecord]]:
    """Random partition into (train, test) with |train| = round(fraction * N).

    Deterministic for a fixed seed. With ``stratify=True`` the split is done
    per label, keeping each class's train fraction within one item of the
    requested fraction; records must then all carry labels.
    """
    if not records:
        raise ValueError("cannot split an empty record list")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    if not stratify:
        order = rng.permutation(len(records))
        n_train = round(train_fraction * len(records))
        train_idx = sorted(order[:n_train].tolist())
        test_idx = sorted(order[n_train:].tolist())
        return [records[i] for i in train_idx], [records[i] for i in test_idx]

    by_label: dict[str, list[int]] = {}
    for i, rec in enumerate(records):
        if rec.label is None:
            raise ValueError("stratified split requires a label on every record")
        by_label.setdefault(rec.label, []).append(i)
    train_idx, test_idx = [], []
    for label in sorted(by_label):
        idx = np.array(by_label[label])
        order = rng.permutation(len(idx))
        n_train = round(train_fraction * len(idx))
        train_idx.extend(idx[order[:n_train]].tolist())
        test_idx.extend(idx[order[n_train:]].tolist())
    return (
        [records[i] for i in sorted(train_idx)],
        [records[i] for i in sorted(test_idx)],
    )


def mlm_mask(
    tokens: Sequence[str],
    mask_prob: float,
    seed: int,
    vocab: Sequence[str] | None = None,
    proportions: tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> tuple[list[str], list[tuple[int, str]]]:
    """Masking sampler: pick positions i.i.d. with ``mask_prob`` and corrupt them.

    A selected position becomes ``[MASK]`` with probability ``proportions[0]``,
    a random vocabulary token with ``proportions[1]``, and stays unchanged
    otherwise. ``targets`` lists every selected (position, original token).
    ``vocab`` defaults to the distinct tokens of the input sequence.
    Deterministic per seed. Pure-mask mode is ``proportions=(1, 0, 0)``.
    """
    if not 0.0 <= mask_prob <= 1.0:
        raise ValueError(f"mask_prob must be in [0, 1], got {mask_prob}")
    if abs(sum(proportions) - 1.0) > 1e-9 or min(proportions) < 0:
        raise ValueError(f"proportions must be non-negative and sum to 1, got {proportions}")
    if not tokens:
        return [], []
    pool = list(vocab) if vocab is not None else sorted(set(tokens))
    if not pool:
        raise ValueError("vocab must be non-empty")
    rng = np.random.default_rng(seed)
    select = rng.random(len(tokens))
    action = rng.random(len(tokens))
    pick = rng.integers(0, len(pool), size=len(tokens))
    masked = list(tokens)
    targets: list[tuple[int, str]] = []
    for i, tok in enumerate(tokens):
        if select[i] >= mask_prob:
            continue
        targets.append((i, tok))
        if action[i] < proportions[0]:
            masked[i] = MASK_TOKEN
        elif action[i] < proportions[0] + proportions[1]:
            masked[i] = pool[pick[i]]
        # else: keep the original token
    return masked, targets
