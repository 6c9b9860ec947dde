import json

import pytest

import factkb
from factkb import _core

KEPLER = "Johannes Kepler\tborn in\tItaly\nJohannes Kepler\tauthor of\tAstronomia nova\n"


def k4():
    return "".join(
        f"n{i}\tlinks to\tn{j}\n" for i in range(4) for j in range(4) if i != j
    )


def test_kb_stats_and_neighbors():
    kb = factkb.KnowledgeBase.from_text(KEPLER)
    assert kb.num_entities == 3
    assert kb.num_triples == 2
    assert kb.stats()["num_entities_with_out_edges"] == 1
    assert kb.neighbors("Johannes Kepler") == [
        ("born in", "Italy"),
        ("author of", "Astronomia nova"),
    ]
    with pytest.raises(_core.LookupError):
        kb.neighbors("Tycho Brahe")


def test_parse_error_is_raised():
    with pytest.raises(_core.ParseError):
        factkb.KnowledgeBase.from_text("A\tr\n")


def test_entity_wiki_record():
    kb = factkb.KnowledgeBase.from_text(KEPLER)
    (record,) = factkb.synthesize(kb, "entity_wiki", seed=1, mask_prob=0.0)
    assert record.text == (
        "Johannes Kepler born in Italy [SEP] Johannes Kepler author of Astronomia nova [SEP]"
    )
    assert record.masked_text == record.text
    assert record.source_entities == ["Johannes Kepler", "Italy", "Astronomia nova"]


def test_walks_roundtrip_and_determinism(tmp_path):
    kb = factkb.KnowledgeBase.from_text(k4())
    a = factkb.synthesize(kb, "knowledge_walk", n=200, k=2, seed=7)
    b = factkb.synthesize(kb, "knowledge_walk", n=200, k=2, seed=7, workers=4)
    assert a == b
    for r in a:
        assert len(r.text.split()) == 7  # n0 links to n1 links to n2
        assert factkb.unmask(r) == r.text
    path = tmp_path / "corpus.jsonl"
    assert factkb.write_corpus(a, str(path)) == 200
    assert factkb.read_corpus(str(path)) == a
    first = json.loads(path.read_text().splitlines()[0])
    assert list(first) == [
        "id",
        "strategy",
        "text",
        "masked_text",
        "targets",
        "source_entities",
        "seed",
    ]


def test_evidence_needs_descriptions(tmp_path):
    kb = factkb.KnowledgeBase.from_text("A\tlikes\tB\n")
    with pytest.raises(_core.ConfigError):
        factkb.synthesize(kb, "evidence", n=1)
    desc = tmp_path / "desc.tsv"
    desc.write_text("A\tA is a test.\n")
    (r,) = factkb.synthesize(kb, "evidence", n=1, mask_prob=0.0, descriptions=str(desc))
    assert r.masked_text == "A likes [MASK] A is a test."


def test_metrics_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    x = [0.1, 0.4, 0.35, 0.8, 0.9, 0.05, 0.6, 0.7, 0.2, 0.55]
    y = [0.0, 0.5, 0.25, 1.0, 0.75, 0.0, 0.5, 1.0, 0.25, 0.25]
    r, p = factkb.pearson(x, y)
    ref = scipy_stats.pearsonr(x, y)
    assert r == pytest.approx(ref[0], abs=1e-12)
    assert p == pytest.approx(ref[1], rel=1e-9)
    rho, p = factkb.spearman(x, y)
    ref = scipy_stats.spearmanr(x, y)
    assert rho == pytest.approx(ref[0], abs=1e-12)
    assert p == pytest.approx(ref[1], rel=1e-9)


def test_classification_metrics():
    gold = ["factual", "factual", "non_factual", "non_factual"]
    pred = ["factual", "non_factual", "non_factual", "non_factual"]
    assert factkb.balanced_accuracy(gold, pred) == 0.75
    assert factkb.micro_f1(gold, pred) == 0.75
    with pytest.raises(_core.UndefinedMetricError):
        factkb.balanced_accuracy(["factual"], ["factual"])


def test_pairs_and_cli(tmp_path):
    src = tmp_path / "healthver.jsonl"
    src.write_text(
        "\n".join(
            json.dumps(r)
            for r in [
                {"id": "1", "claim": "c1", "evidence": "e1", "label": "Supports"},
                {"id": "2", "claim": "c2", "evidence": "e2", "label": "Neutral"},
                {"id": "3", "claim": "c3", "evidence": "e3", "label": "Refutes"},
            ]
        )
        + "\n"
    )
    pairs = factkb.load_pairs(str(src), "healthver", drop_nei=True)
    assert [p.id for p in pairs] == ["1", "3"]
    assert [p.label for p in pairs] == ["factual", "non_factual"]
    assert factkb.format_pair_input(pairs[0]) == "c1 [SEP] e1"

    gold = tmp_path / "gold.jsonl"
    factkb.write_pairs(pairs, str(gold))
    assert [p.id for p in factkb.read_pairs(str(gold))] == ["1", "3"]

    pred = tmp_path / "pred.jsonl"
    pred.write_text(
        '{"id":"1","pred_label":"factual","score_factual":0.8}\n'
        '{"id":"3","pred_label":"non_factual","score_factual":0.3}\n'
    )
    code, out, err = factkb.run_cli(
        ["eval", "classify", "--gold", str(gold), "--pred", str(pred)]
    )
    assert code == 0, err
    assert json.loads(out)["rows"][0]["balanced_accuracy"] == 1.0
    assert factkb.run_cli(["synth", "walk", "--k", "0"])[0] == 2
