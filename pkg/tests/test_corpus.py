import json
from collections import Counter

import numpy as np
import pytest

from legalnlp_kit.corpus import (
    MASK_TOKEN,
    TextRecord,
    count_vocab,
    ingest,
    mlm_mask,
    train_test_split,
    write_records,
)
from legalnlp_kit.exceptions import CorpusFormatError


def brute_vocab(token_lists, min_count):
    # independent reference: flat Counter, prune, sort by (-count, token)
    counter = Counter()
    total = 0
    for tokens in token_lists:
        counter.update(tokens)
        total += len(tokens)
    kept = sorted(
        [(t, c) for t, c in counter.items() if c >= min_count],
        key=lambda item: (-item[1], item[0]),
    )
    return kept, total


class TestIngest:
    def test_plain_lines_sequential_ids(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("primeira linha\nsegunda linha\n\nquarta\n", encoding="utf-8")
        records = list(ingest(path, "plain-lines"))
        assert [r.id for r in records] == ["0", "1", "2", "3"]
        assert records[1].text == "segunda linha"
        assert records[2].text == ""
        assert all(r.label is None for r in records)

    def test_json_lines_fields(self, tmp_path):
        path = tmp_path / "c.jsonl"
        rows = [
            {"id": "a", "text": "um texto"},
            {"id": "b", "text": "outro", "label": "ativo"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
        records = list(ingest(path, "json-lines"))
        assert records[0] == TextRecord(id="a", text="um texto")
        assert records[1] == TextRecord(id="b", text="outro", label="ativo")

    def test_json_lines_skips_blank_lines(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "a", "text": "x"}\n\n   \n', encoding="utf-8")
        assert len(list(ingest(path, "json-lines"))) == 1

    @pytest.mark.parametrize(
        "line, fragment",
        [
            ("not json", "malformed JSON at line 2"),
            ("[1, 2]", "line 2 is not a JSON object"),
            ('{"text": "x"}', "line 2 has a missing or empty 'id'"),
            ('{"id": "", "text": "x"}', "line 2 has a missing or empty 'id'"),
            ('{"id": 3, "text": "x"}', "line 2 has a missing or empty 'id'"),
            ('{"id": "a"}', "line 2 has a missing or non-string 'text'"),
            ('{"id": "a", "text": 5}', "line 2 has a missing or non-string 'text'"),
            ('{"id": "a", "text": "x", "label": 1}', "line 2 has a non-string 'label'"),
        ],
    )
    def test_json_lines_errors_carry_line_numbers(self, tmp_path, line, fragment):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "ok", "text": "y"}\n' + line + "\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match=fragment.replace("[", "\\[")):
            list(ingest(path, "json-lines"))

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("x\n")
        with pytest.raises(ValueError, match="unknown corpus format"):
            list(ingest(path, "csv"))

    def test_write_records_round_trip_json(self, tmp_path):
        records = [
            TextRecord(id="r1", text="olá mundo", label="a"),
            TextRecord(id="r2", text="sem label"),
        ]
        path = tmp_path / "out.jsonl"
        assert write_records(records, path, "json-lines") == 2
        assert list(ingest(path, "json-lines")) == records

    def test_write_records_round_trip_plain(self, tmp_path):
        records = [TextRecord(id="0", text="um"), TextRecord(id="1", text="dois")]
        path = tmp_path / "out.txt"
        write_records(records, path, "plain-lines")
        assert list(ingest(path, "plain-lines")) == records


class TestCountVocab:
    def test_matches_brute_force_on_random_corpora(self):
        rng = np.random.default_rng(11)
        words = [f"w{i}" for i in range(30)]
        for trial in range(20):
            corpus = [
                [words[int(rng.integers(0, 30))] for _ in range(int(rng.integers(1, 12)))]
                for _ in range(int(rng.integers(1, 40)))
            ]
            min_count = int(rng.integers(1, 4))
            vocab = count_vocab(corpus, min_count=min_count)
            kept, total = brute_vocab(corpus, min_count)
            assert list(vocab.entries) == kept
            assert vocab.total_tokens == total
            assert vocab.index == {t: i for i, (t, _) in enumerate(kept)}

    def test_total_tokens_counts_pruned_tokens(self):
        vocab = count_vocab([["a", "a", "b"]], min_count=2)
        assert vocab.tokens == ["a"]
        assert vocab.total_tokens == 3
        assert vocab.count("b") == 0

    def test_order_is_count_then_token(self):
        vocab = count_vocab([["b", "b", "a", "a", "c"]])
        assert vocab.tokens == ["a", "b", "c"]

    def test_workers_match_single_thread(self):
        rng = np.random.default_rng(5)
        corpus = [
            [f"t{int(rng.integers(0, 50))}" for _ in range(8)] for _ in range(200)
        ]
        single = count_vocab(corpus, min_count=2, workers=1)
        sharded = count_vocab(corpus, min_count=2, workers=4)
        assert single == sharded

    def test_empty_stream_gives_empty_vocab(self):
        vocab = count_vocab([])
        assert len(vocab) == 0
        assert vocab.total_tokens == 0

    def test_min_count_validation(self):
        with pytest.raises(ValueError, match="min_count"):
            count_vocab([["a"]], min_count=0)


class TestSplit:
    def test_sizes_at_paper_scale(self):
        records = [TextRecord(id=str(i), text="t") for i in range(6449)]
        train, test = train_test_split(records, 0.7, seed=0)
        assert len(train) == 4514
        assert len(test) == 1935

    def test_partition_is_disjoint_and_complete(self):
        records = [TextRecord(id=str(i), text="t") for i in range(101)]
        train, test = train_test_split(records, 0.33, seed=3)
        ids = sorted(int(r.id) for r in train + test)
        assert ids == list(range(101))
        assert not {r.id for r in train} & {r.id for r in test}

    def test_deterministic_per_seed(self):
        records = [TextRecord(id=str(i), text="t") for i in range(50)]
        a = train_test_split(records, 0.5, seed=9)
        b = train_test_split(records, 0.5, seed=9)
        c = train_test_split(records, 0.5, seed=10)
        assert a == b
        assert a != c

    def test_stratified_keeps_class_fractions(self):
        records = [
            TextRecord(id=str(i), text="t", label="x" if i < 80 else "y")
            for i in range(100)
        ]
        train, test = train_test_split(records, 0.7, seed=1, stratify=True)
        x_train = sum(r.label == "x" for r in train)
        y_train = sum(r.label == "y" for r in train)
        assert x_train == round(0.7 * 80)
        assert y_train == round(0.7 * 20)
        assert len(train) + len(test) == 100

    def test_stratified_requires_labels(self):
        records = [TextRecord(id="0", text="t")]
        with pytest.raises(ValueError, match="label"):
            train_test_split(records * 4, 0.5, seed=0, stratify=True)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_fraction_bounds(self, fraction):
        records = [TextRecord(id="0", text="t")] * 5
        with pytest.raises(ValueError, match="train_fraction"):
            train_test_split(records, fraction, seed=0)

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            train_test_split([], 0.5, seed=0)


class TestMlmMask:
    def test_targets_record_originals(self):
        tokens = [f"w{i}" for i in range(200)]
        masked, targets = mlm_mask(tokens, 0.3, seed=4)
        assert len(masked) == len(tokens)
        for pos, original in targets:
            assert tokens[pos] == original
        untouched = set(range(len(tokens))) - {p for p, _ in targets}
        for i in untouched:
            assert masked[i] == tokens[i]

    def test_masking_rate_statistics(self):
        tokens = ["tok"] * 20000
        _, targets = mlm_mask(tokens, 0.15, seed=0)
        rate = len(targets) / len(tokens)
        assert abs(rate - 0.15) < 0.01

    def test_action_split_statistics(self):
        n = 30000
        tokens = [f"w{i % 50}" for i in range(n)]
        masked, targets = mlm_mask(tokens, 1.0, seed=2)
        n_mask = sum(masked[p] == MASK_TOKEN for p, _ in targets)
        n_keep = sum(masked[p] == orig for p, orig in targets)
        assert abs(n_mask / n - 0.8) < 0.02
        # keep + "random draw happened to pick the original" both leave the
        # token unchanged, so the keep rate sits slightly above 0.10
        assert 0.08 < n_keep / n < 0.15

    def test_pure_mask_mode(self):
        tokens = ["a", "b", "c", "d"] * 10
        masked, targets = mlm_mask(tokens, 1.0, seed=1, proportions=(1.0, 0.0, 0.0))
        assert len(targets) == len(tokens)
        assert all(tok == MASK_TOKEN for tok in masked)

    def test_zero_prob_is_identity(self):
        tokens = ["a", "b", "c"]
        masked, targets = mlm_mask(tokens, 0.0, seed=1)
        assert masked == tokens
        assert targets == []

    def test_deterministic_per_seed(self):
        tokens = [f"w{i}" for i in range(100)]
        assert mlm_mask(tokens, 0.5, seed=7) == mlm_mask(tokens, 0.5, seed=7)
        assert mlm_mask(tokens, 0.5, seed=7) != mlm_mask(tokens, 0.5, seed=8)

    def test_random_replacements_come_from_vocab(self):
        tokens = ["orig"] * 5000
        vocab = ["v1", "v2"]
        masked, targets = mlm_mask(
            tokens, 1.0, seed=3, vocab=vocab, proportions=(0.0, 1.0, 0.0)
        )
        assert set(masked) <= {"v1", "v2"}
        assert len(targets) == len(tokens)

    def test_empty_inputs(self):
        assert mlm_mask([], 0.5, seed=0) == ([], [])
        with pytest.raises(ValueError, match="vocab"):
            mlm_mask(["a"], 0.5, seed=0, vocab=[])

    @pytest.mark.parametrize("prob", [-0.1, 1.1])
    def test_prob_bounds(self, prob):
        with pytest.raises(ValueError, match="mask_prob"):
            mlm_mask(["a"], prob, seed=0)

    def test_proportions_must_sum_to_one(self):
        with pytest.raises(ValueError, match="proportions"):
            mlm_mask(["a"], 0.5, seed=0, proportions=(0.5, 0.1, 0.1))
