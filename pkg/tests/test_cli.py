import json
import subprocess
import sys

import numpy as np
import pytest

from legalnlp_kit.cleaner import clean, clean_bert
from legalnlp_kit.cli import main
from legalnlp_kit.embeddings import load_model, load_text
from legalnlp_kit.phraser import apply_all, fit_two_pass, load_models
from legalnlp_kit.query import KeyedVectors, most_similar

RAW_LINES = [
    "Processo 0001234-56.2019.8.26.0100, valor R$ 1.500,00 em 12/03/2020",
    "Contato: advogado@escritorio.com.br ou www.tjsp.jus.br",
    "Direito do Consumidor origem: Bangu",
]


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def phrase_corpus():
    sents = [["juizado", "especial", "civel", "ação"]] * 60
    sents += [["foro", "bangu"]] * 40
    sents += [["bangu", "regional"]] * 12
    sents += [[f"filler{i}"] for i in range(693)]
    return sents


def embed_corpus():
    rng = np.random.default_rng(5)
    words = [f"w{j}" for j in range(30)]
    sents = []
    for _ in range(150):
        sub = rng.choice(30, size=5, replace=False)
        sents.append(" ".join(words[int(i)] for i in rng.choice(sub, size=10)))
    return sents


class TestClean:
    def test_word_mode_matches_library(self, tmp_path):
        src, out = tmp_path / "raw.txt", tmp_path / "clean.txt"
        write_lines(src, RAW_LINES)
        assert main(["clean", "--in", str(src), "--out", str(out)]) == 0
        got = out.read_text(encoding="utf-8").splitlines()
        assert got == [clean(line) for line in RAW_LINES]
        assert "[numero_processo]" in got[0]

    def test_bert_mode_and_keep_case(self, tmp_path):
        src, out = tmp_path / "raw.txt", tmp_path / "bert.txt"
        write_lines(src, RAW_LINES)
        assert main(["clean", "--in", str(src), "--out", str(out), "--mode", "bert"]) == 0
        got = out.read_text(encoding="utf-8").splitlines()
        assert got == [clean_bert(line) for line in RAW_LINES]
        assert "Bangu" in got[2]

    def test_mask_subset(self, tmp_path):
        src, out = tmp_path / "raw.txt", tmp_path / "sub.txt"
        write_lines(src, ["Audiência em 12/03/2020 custa R$ 10,00"])
        code = main(["clean", "--in", str(src), "--out", str(out), "--mask", "date"])
        assert code == 0
        line = out.read_text(encoding="utf-8").strip()
        assert "[data]" in line
        assert "[valor]" not in line

    def test_run_config_written(self, tmp_path):
        src, out = tmp_path / "raw.txt", tmp_path / "clean.txt"
        write_lines(src, RAW_LINES)
        main(["clean", "--in", str(src), "--out", str(out)])
        config = json.loads((tmp_path / "run.json").read_text(encoding="utf-8"))
        assert config["subcommand"] == "clean"
        assert config["mode"] == "word"
        assert config["out"] == str(out)
        assert "func" not in config


class TestExitCodes:
    def test_missing_input_file_is_runtime_error(self, tmp_path, capsys):
        missing = tmp_path / "nope.txt"
        code = main(["clean", "--in", str(missing), "--out", str(tmp_path / "o.txt")])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "nope.txt" in err

    def test_usage_errors_exit_two(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["clean", "--in", "x", "--out", "y", "--bogus-flag"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["clean", "--out", "y"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 2

    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "legalnlp_kit.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "subcommand" in proc.stdout or "usage" in proc.stdout

    def test_unknown_log_level_warns_but_runs(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LEGALNLP_LOG", "loud")
        src, out = tmp_path / "raw.txt", tmp_path / "clean.txt"
        write_lines(src, ["texto simples"])
        assert main(["clean", "--in", str(src), "--out", str(out)]) == 0
        assert "unknown LEGALNLP_LOG" in capsys.readouterr().err


class TestPhraserCommands:
    def test_train_and_apply_round_trip(self, tmp_path):
        src = tmp_path / "corpus.txt"
        write_lines(src, [" ".join(s) for s in phrase_corpus()])
        model_path = tmp_path / "phraser.bin"
        code = main(
            ["train-phraser", "--in", str(src), "--out", str(model_path),
             "--passes", "2", "--dump-text", str(tmp_path / "counts.txt")]
        )
        assert code == 0
        assert (tmp_path / "counts.txt.pass1").exists()
        assert (tmp_path / "counts.txt.pass2").exists()

        merged_path = tmp_path / "merged.txt"
        code = main(
            ["apply-phraser", "--in", str(src), "--out", str(merged_path),
             "--model", str(model_path)]
        )
        assert code == 0
        got = merged_path.read_text(encoding="utf-8").splitlines()
        models = fit_two_pass(phrase_corpus())
        want = [" ".join(apply_all(list(models), s)) for s in phrase_corpus()]
        assert got == want
        assert got[0] == "juizado_especial_civel_ação"

        loaded = load_models(model_path)
        assert len(loaded) == 2

    def test_single_pass_dump_uses_plain_path(self, tmp_path):
        src = tmp_path / "corpus.txt"
        write_lines(src, [" ".join(s) for s in phrase_corpus()])
        code = main(
            ["train-phraser", "--in", str(src), "--out", str(tmp_path / "p.bin"),
             "--passes", "1", "--dump-text", str(tmp_path / "counts.txt")]
        )
        assert code == 0
        assert (tmp_path / "counts.txt").exists()


class TestEmbeddingCommands:
    @pytest.fixture()
    def trained(self, tmp_path):
        src = tmp_path / "corpus.txt"
        write_lines(src, embed_corpus())
        model_path = tmp_path / "emb.bin"
        text_path = tmp_path / "emb.txt"
        code = main(
            ["train-embeddings", "--in", str(src), "--out", str(model_path),
             "--dim", "12", "--window", "3", "--epochs", "2", "--min-count", "1",
             "--seed", "4", "--text-out", str(text_path)]
        )
        assert code == 0
        return model_path, text_path

    def test_model_and_text_outputs_agree(self, trained):
        model_path, text_path = trained
        model = load_model(model_path)
        assert model.variant == "w2v-sg"
        assert model.config.dim == 12
        tokens, vectors = load_text(text_path)
        assert tokens == model.vocab.tokens
        assert np.array_equal(vectors.astype(np.float32), model.input_vectors)

    def test_similar_output_matches_library(self, trained, tmp_path):
        model_path, _ = trained
        out = tmp_path / "similar.tsv"
        code = main(
            ["similar", "--model", str(model_path), "--token", "w3", "--k", "4",
             "--out", str(out)]
        )
        assert code == 0
        model = load_model(model_path)
        kv = KeyedVectors.from_model(model)
        want = [f"{t}\t{s:.6f}" for t, s in most_similar(kv, "w3", 4, model=model)]
        assert out.read_text(encoding="utf-8").splitlines() == want

    def test_similar_unknown_token_fails_cleanly(self, trained, capsys):
        model_path, _ = trained
        code = main(["similar", "--model", str(model_path), "--token", "nope", "--k", "3"])
        assert code == 1
        assert "not in vocabulary" in capsys.readouterr().err

    def test_project_plain_and_centers(self, trained, tmp_path):
        model_path, _ = trained
        out = tmp_path / "proj.tsv"
        assert main(["project", "--model", str(model_path), "--out", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "token\tx\ty"
        model = load_model(model_path)
        assert len(lines) == 1 + len(model.vocab)

        out2 = tmp_path / "report.tsv"
        code = main(
            ["project", "--model", str(model_path), "--centers", "w1,w2", "--k", "3",
             "--out", str(out2)]
        )
        assert code == 0
        lines = out2.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "center\ttoken\tcos\tx\ty"
        assert len(lines) == 1 + 2 * 4


class TestClassifyCommand:
    def write_labeled(self, tmp_path):
        rng = np.random.default_rng(6)
        rows = []
        for i in range(120):
            label = "deferido" if i % 2 == 0 else "negado"
            pool = ["ganho", "provido", "exito"] if label == "deferido" else ["perda", "negativa", "recusa"]
            text = " ".join(pool[int(j)] for j in rng.integers(0, 3, size=8))
            rows.append(json.dumps({"id": str(i), "text": text, "label": label}))
        path = tmp_path / "labeled.jsonl"
        write_lines(path, rows)
        return path

    def test_end_to_end(self, tmp_path, capsys):
        labeled = self.write_labeled(tmp_path)
        emb = tmp_path / "emb.bin"
        code = main(
            ["train-embeddings", "--in", str(labeled), "--format", "json-lines",
             "--out", str(emb), "--dim", "10", "--window", "2", "--epochs", "3",
             "--min-count", "1", "--seed", "0"]
        )
        assert code == 0
        report_path = tmp_path / "report.json"
        code = main(
            ["classify", "--in", str(labeled), "--embeddings", str(emb),
             "--out", str(report_path), "--epochs", "200"]
        )
        assert code == 0
        assert "accuracy" in capsys.readouterr().out
        report = json.loads(report_path.read_text(encoding="utf-8"))
        assert sorted(report) == ["accuracy", "confusion", "f1_macro", "f1_weighted", "per_class"]
        assert report["accuracy"] >= 0.9  # two well-separated vocabularies

    def test_unlabeled_records_rejected(self, tmp_path, capsys):
        rows = [json.dumps({"id": "0", "text": "sem rotulo"})]
        path = tmp_path / "nolabel.jsonl"
        write_lines(path, rows)
        code = main(
            ["classify", "--in", str(path), "--embeddings", str(tmp_path / "emb.bin"),
             "--out", str(tmp_path / "r.json")]
        )
        assert code == 1
        assert "lack labels" in capsys.readouterr().err


class TestDemoCommand:
    def test_report_and_determinism(self, tmp_path, capsys):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        assert main(["demo", "--n", "90", "--seed", "3", "--out", str(out1)]) == 0
        err = capsys.readouterr().err
        assert "accuracy=" in err and "n=90" in err
        assert main(["demo", "--n", "90", "--seed", "3", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        report = json.loads(out1.read_text(encoding="utf-8"))
        assert sorted(report) == ["accuracy", "confusion", "f1_macro", "f1_weighted", "per_class"]

    def test_stdout_when_no_out(self, capsys):
        assert main(["demo", "--n", "80", "--seed", "2"]) == 0
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        assert "accuracy" in report
