import json

import pytest

from conftest import fig1_corpus_row, fig1_gold_row, fig1_script
from mmee.cli import EXIT_BACKEND, EXIT_INPUT, EXIT_OK, EXIT_USAGE, load_config_file, main
from mmee.schema import bundled_schema_path

SCHEMA = str(bundled_schema_path())


@pytest.fixture
def fig1_files(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text(json.dumps(fig1_corpus_row()) + "\n")
    script = tmp_path / "script.json"
    script.write_text(json.dumps(fig1_script()))
    gold = tmp_path / "gold.jsonl"
    gold.write_text(json.dumps(fig1_gold_row()) + "\n")
    return corpus, script, gold


def test_extract_writes_output_and_manifest(tmp_path, fig1_files):
    corpus, script, _ = fig1_files
    out = tmp_path / "pred.jsonl"
    code = main(
        ["extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(script), "--out", str(out)]
    )
    assert code == EXIT_OK
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(rows) == 1
    assert rows[0]["events"][0]["type"] == "Conflict.Attack"
    manifest = json.loads((tmp_path / "pred.jsonl.manifest.json").read_text())
    assert manifest["config"]["mode"] == "stepwise"
    assert manifest["schema"]["sha256"]
    assert manifest["per_doc_chat_calls"]["doc1"] == 6
    assert manifest["call_counts"]["chat"] == 6


def test_extract_missing_schema_flag_is_usage_error(tmp_path):
    assert main(["extract", "--input", "x", "--backend", "y", "--out", "z"]) == EXIT_USAGE


def test_extract_unreadable_input(tmp_path, fig1_files):
    _, script, _ = fig1_files
    code = main(
        ["extract", "--schema", SCHEMA, "--input", str(tmp_path / "nope.jsonl"), "--backend", str(script), "--out", str(tmp_path / "o")]
    )
    assert code == EXIT_INPUT


def test_extract_script_miss_is_backend_error(tmp_path, fig1_files):
    corpus, _, _ = fig1_files
    empty_script = tmp_path / "empty.json"
    empty_script.write_text("{}")
    code = main(
        ["extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(empty_script), "--out", str(tmp_path / "o.jsonl")]
    )
    assert code == EXIT_BACKEND


def test_extract_idempotent(tmp_path, fig1_files):
    corpus, script, _ = fig1_files
    outs = []
    for name in ("a.jsonl", "b.jsonl"):
        out = tmp_path / name
        assert main(
            ["extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(script), "--out", str(out)]
        ) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_eval_command(tmp_path, fig1_files, capsys):
    corpus, script, gold = fig1_files
    pred = tmp_path / "pred.jsonl"
    main(["extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(script), "--out", str(pred)])
    report_path = tmp_path / "report.json"
    code = main(["eval", "--pred", str(pred), "--gold", str(gold), "--out", str(report_path)])
    assert code == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["med"]["f1"] == 1.0
    assert report["meae"]["f1"] == 1.0
    printed = capsys.readouterr().out
    assert "MED" in printed and "MEAE" in printed and "1.0000" in printed


def test_eval_misaligned_files(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    code = main(["eval", "--pred", str(bad), "--gold", str(bad), "--out", str(tmp_path / "r.json")])
    assert code == EXIT_INPUT


def test_config_file_precedence(tmp_path, fig1_files):
    corpus, script, _ = fig1_files
    config = tmp_path / "run.conf"
    config.write_text('mode = "jall"  # overridden by flag\njobs = 2\n')
    parsed = load_config_file(config)
    assert parsed == {"mode": "jall", "jobs": "2"}
    out = tmp_path / "o.jsonl"
    code = main(
        [
            "extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(script),
            "--out", str(out), "--config", str(config), "--mode", "stepwise",
        ]
    )
    assert code == EXIT_OK
    manifest = json.loads((tmp_path / "o.jsonl.manifest.json").read_text())
    assert manifest["config"]["mode"] == "stepwise"  # flag wins over config file
    assert manifest["config"]["jobs"] == 2


def test_visualize(tmp_path, fig1_files):
    corpus, script, gold = fig1_files
    pred = tmp_path / "pred.jsonl"
    main(["extract", "--schema", SCHEMA, "--input", str(corpus), "--backend", str(script), "--out", str(pred)])
    out_dir = tmp_path / "overlays"
    code = main(["visualize", "--extraction", str(pred), "--gold", str(gold), "--out-dir", str(out_dir)])
    assert code == EXIT_OK
    overlay = json.loads((out_dir / "doc1.json").read_text())
    assert len(overlay["overlays"]) == 1
    entry = overlay["overlays"][0]
    assert entry["role"] == "Instrument"
    assert entry["label"] == "machine gun"
    assert entry["iou"] == 1.0


def test_visualize_no_events(tmp_path):
    pred = tmp_path / "pred.jsonl"
    pred.write_text(json.dumps({"doc_id": "d", "events": [], "diagnostics": []}) + "\n")
    out_dir = tmp_path / "ov"
    assert main(["visualize", "--extraction", str(pred), "--out-dir", str(out_dir)]) == EXIT_OK
    assert json.loads((out_dir / "d.json").read_text())["overlays"] == []


def _dataset_fixture(tmp_path):
    sentences = tmp_path / "sentences.jsonl"
    rows = []
    for i in range(3):
        text = f"Rebels attack the city number {i}."
        rows.append(
            {
                "id": f"s{i:02d}",
                "text": text,
                "event_type": "Conflict.Attack",
                "trigger": {"start": 7, "end": 13},
                "args": [{"role": "Target", "start": 14, "end": 22}],
            }
        )
    sentences.write_text("".join(json.dumps(r) + "\n" for r in rows))
    images = tmp_path / "images.jsonl"
    images.write_text(
        "".join(
            json.dumps({"id": f"i{k:02d}", "path": f"i{k:02d}.jpg", "event_label": "attacking",
                        "args": [{"role": "tool", "box": [10, 20, 80, 90]}]}) + "\n"
            for k in range(2)
        )
    )
    mapping = tmp_path / "mapping.json"
    mapping.write_text(
        json.dumps(
            [
                {"source": "ace", "label": "Conflict.Attack", "target": "Conflict.Attack"},
                {"source": "swig", "label": "attacking", "target": "Conflict.Attack"},
            ]
        )
    )
    role_mapping = tmp_path / "roles.json"
    role_mapping.write_text(json.dumps({"tool": "Instrument"}))
    script = {}
    for r in rows:
        script[f"embed|text|{r['text']}"] = [1.0, 0.0]
    script["embed|image|i00.jpg"] = [0.8, 0.6]
    script["embed|image|i01.jpg"] = [0.6, 0.8]
    for k in range(2):
        script[f"caption|i{k:02d}.jpg|10,20,80,90"] = f"object {k}"
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(script))
    return sentences, images, mapping, role_mapping, script_path


def test_dataset_build_and_emit(tmp_path):
    sentences, images, mapping, role_mapping, script = _dataset_fixture(tmp_path)
    alignments = tmp_path / "alignments.jsonl"
    code = main(
        [
            "dataset", "build", "--schema", SCHEMA, "--sentences", str(sentences), "--images", str(images),
            "--mapping", str(mapping), "--embedder", str(script), "--out", str(alignments),
        ]
    )
    assert code == EXIT_OK
    rows = [json.loads(l) for l in alignments.read_text().splitlines()]
    assert len(rows) == 3
    assert all(r["image_id"] == "i00" for r in rows)  # highest cosine score

    out_dir = tmp_path / "instructions"
    code = main(
        [
            "dataset", "emit", "--alignments", str(alignments), "--schema", SCHEMA,
            "--sentences", str(sentences), "--images", str(images), "--captioner", str(script),
            "--role-mapping", str(role_mapping), "--out-dir", str(out_dir),
        ]
    )
    assert code == EXIT_OK
    counts = json.loads((out_dir / "counts.json").read_text())
    assert counts == {"etsgp": 3, "arsgp": 3 * 5}


def test_dataset_build_empty_corpus(tmp_path):
    sentences, images, mapping, _, script = _dataset_fixture(tmp_path)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    alignments = tmp_path / "alignments.jsonl"
    code = main(
        [
            "dataset", "build", "--schema", SCHEMA, "--sentences", str(empty), "--images", str(images),
            "--mapping", str(mapping), "--embedder", str(script), "--out", str(alignments),
        ]
    )
    assert code == EXIT_OK
    assert alignments.read_text() == ""
    report = json.loads((tmp_path / "alignments.report.json").read_text())
    assert report["aligned"] == 0
