import json
import math
import os
from pathlib import Path

import pytest

import readability_ensemble as rd

DATA = Path(os.environ.get("READABILITY_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))

WORDS = ["der", "die", "Hund", "Haus", "läuft", "schnell", "Verwaltung", "Entscheidung", "Zusammenhang", "grün"]


def write_corpus(path, n=60):
    lines = ["id,sentence,mos"]
    for i in range(n):
        words = [WORDS[(i * 7 + j * 3) % len(WORDS)] for j in range(3 + i % 9)]
        mos = min(7.0, 1.0 + 0.3 * len(words) + 0.05 * sum(len(w) for w in words) / len(words))
        lines.append(f's{i},"{" ".join(words)}.",{mos:.3f}')
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_lexicon(path):
    path.write_text("".join(f"{w}\t{10 ** (3 - 0.25 * len(w)):.6g}\n" for w in WORDS), encoding="utf-8")


def test_metrics():
    assert rd.rmse([1, 3], [2, 5]) == pytest.approx(1.581139, abs=1e-6)
    m = rd.mapped_rmse([1, 2, 3], [1, 1, 3])
    assert m["a"] == pytest.approx(0.75)
    assert m["b"] == pytest.approx(0.75)
    assert m["mapped_rmse"] == pytest.approx(math.sqrt(1 / 6))
    with pytest.raises(rd.Error):
        rd.rmse([1, 2], [1])


def test_ensemble_predict():
    assert rd.ensemble_predict([0.8, 1.2, 2.0]) == pytest.approx(1.6)
    assert rd.ensemble_predict([1.5]) == 1.5
    assert rd.ensemble_predict([0.5, 0.9]) == 1.0
    assert rd.ensemble_predict([0.5, 0.9], floor=0.6) == 0.9


def test_features():
    lexicon = rd.Lexicon()
    lexicon.insert("hund", 500.0)
    names = rd.feature_names()
    values = rd.extract_features("Der Hund bellt.", lexicon)
    assert len(values) == len(names)
    assert dict(zip(names, values))["token_count"] == 3


def test_embeddings_jsonl_round_trip(tmp_path):
    rows = rd.load_embeddings(DATA / "embeddings_1024.jsonl")
    assert [r[0] for r in rows] == [f"e{i}" for i in range(10)]
    assert all(len(r[1]) == 1024 for r in rows)
    out = tmp_path / "copy.jsonl"
    rd.write_embeddings(out, rows)
    assert rd.load_embeddings(out) == rows
    first = json.loads(out.read_text().splitlines()[0])
    assert first["id"] == "e0" and first["dim"] == 1024
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id":"a","dim":2,"values":[1.0]}\n')
    with pytest.raises(rd.FormatError):
        rd.load_embeddings(bad)


def test_splits_cover_corpus(tmp_path):
    corpus = tmp_path / "corpus.csv"
    write_corpus(corpus, 50)
    splits = rd.cv_splits(corpus, k=5, seed=3)
    assert len(splits) == 5
    validation = sorted(i for s in splits for i in s["validation"])
    assert validation == sorted(r[0] for r in rd.load_corpus(corpus))
    assert rd.cv_splits(corpus, k=5, seed=3) == splits
    with pytest.raises(rd.ConfigError):
        rd.cv_splits(corpus, k=100)


def test_cli_train_predict_and_study(tmp_path):
    corpus = tmp_path / "corpus.csv"
    lexicon = tmp_path / "lexicon.tsv"
    write_corpus(corpus)
    write_lexicon(lexicon)
    common = [
        "--seed", "5", "--output-dir", str(tmp_path / "out"),
        "--set", f"corpus={corpus}", "--set", f"lexicon={lexicon}", "--set", "split.k=3",
        "--set", "encoder.model_dim=8", "--set", "encoder.num_heads=2", "--set", "encoder.num_layers=1",
        "--set", "encoder.feedforward_dim=16", "--set", "training.phase1_max_epochs=1",
        "--set", "training.phase2_max_epochs=20",
    ]
    for family in ("a", "b"):
        for fold in ("0", "1", "2"):
            code, _, err = rd.run(["train", "--fold", fold, "--family", family, "--members", "2", *common])
            assert code == 0, err
    code, out, err = rd.run(["train", "--final", "--encoder", "random-projection", *common])
    assert code == 0, err
    manifest = Path(out.strip())
    model = rd.load_model(manifest, lexicon)
    assert model.provider == "random-projection"
    score = model.predict("Der Hund läuft schnell.")
    assert math.isfinite(score)
    assert model.predict("Der Hund läuft schnell.") == score

    rows = rd.bootstrap_study(tmp_path / "out" / "pool", corpus, sizes=[2, 4], resamples=50, seed=1)
    assert [(r["composition"], r["size"]) for r in rows] == [
        ("a", 2), ("a", 4), ("b", 2), ("b", 4), ("mixed", 2), ("mixed", 4)]
    assert all(r["std_rmse"] >= 0 for r in rows)

    code, _, err = rd.run(["split", *common, "--set", "split.k=1"])
    assert code == 2 and "error" in err
