"""Walk through extraction and scoring on a tiny scripted corpus.

A scripted backend stands in for a live vision-language model, so the demo
runs offline and deterministically.  One document goes through event
detection, role-by-role argument extraction, and text-bridged grounding,
and the result is then scored against its gold annotation.

Run with:  python3 demos/extract_and_score.py
"""

import json
import tempfile
from pathlib import Path

from mmee.evaluation import evaluate_corpus
from mmee.gateway import ModelGateway, ScriptedBackend
from mmee.orchestrator import (
    ExtractionConfig,
    extract_corpus,
    load_corpus,
    write_extraction,
)
from mmee.prompts import PromptMode
from mmee.schema import bundled_schema_path, load_schema

SENTENCE = "Taleban insurgents fight government forces in Kabul."

# Canned model replies, keyed by service and document.  The chat replies use
# the two response grammars: "Type; trigger" segments for detection, and
# "text args <seg> region descriptions" for each role.
SCRIPT = {
    "chat|doc1|etsgp": "Attack; fight",
    "chat|doc1|arsgp|Conflict.Attack|fight|Attacker": "None <seg> None",
    "chat|doc1|arsgp|Conflict.Attack|fight|Target": "Taleban insurgents <seg> None",
    "chat|doc1|arsgp|Conflict.Attack|fight|Instrument": "None <seg> machine gun",
    "chat|doc1|arsgp|Conflict.Attack|fight|Victim": "None <seg> None",
    "chat|doc1|arsgp|Conflict.Attack|fight|Place": "Kabul <seg> None",
    "ground|img1.jpg|machine gun": [120.0, 80.0, 360.0, 240.0],
}

# Input corpus row (what the extractor consumes).
CORPUS_ROW = {"id": "doc1", "sentence": SENTENCE, "image": "img1.jpg"}

# Gold annotation in extraction shape (what the scorer consumes).
GOLD_ROW = {
    "doc_id": "doc1",
    "events": [
        {
            "type": "Conflict.Attack",
            "trigger": {"start": 19, "end": 24, "surface": "fight"},
            "args": [
                {"role": "Target", "text": {"surface": "Taleban insurgents", "start": 0, "end": 18}},
                {"role": "Place", "text": {"surface": "Kabul", "start": 45, "end": 50}},
                {"role": "Instrument", "region": {"box": [120.0, 80.0, 360.0, 240.0]}},
            ],
        }
    ],
}


def main() -> None:
    schema = load_schema(bundled_schema_path())
    gateway = ModelGateway(ScriptedBackend(SCRIPT))

    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "corpus.jsonl"
        corpus_path.write_text(json.dumps(CORPUS_ROW) + "\n", encoding="utf-8")
        gold_path = Path(tmp) / "gold.jsonl"
        gold_path.write_text(json.dumps(GOLD_ROW) + "\n", encoding="utf-8")

        docs = load_corpus(corpus_path)
        print(f"Loaded {len(docs)} document(s); sentence: {docs[0].sentence!r}")

        cfg = ExtractionConfig(mode=PromptMode.STEPWISE, grounding=True)
        results = extract_corpus(docs, schema, gateway, cfg)

        for result in results:
            print(f"\n{result.doc_id}: {result.chat_calls} chat calls")
            for ev in result.events:
                print(f"  {ev.type} triggered by {ev.trigger.surface!r}")
                for arg in ev.arguments:
                    if arg.text is not None:
                        print(f"    {arg.role}: text {arg.text.surface!r}")
                    if arg.region is not None:
                        print(f"    {arg.role}: region {arg.region.description!r} -> {arg.region.box}")

        pred_path = Path(tmp) / "pred.jsonl"
        write_extraction(results, pred_path)
        report = evaluate_corpus(pred_path, gold_path)

        print("\nScores against gold:")
        for name, counts in (("MED", report.med), ("MEAE", report.meae)):
            p, r, f1 = counts.prf()
            print(f"  {name}: P={p:.3f} R={r:.3f} F1={f1:.3f}")


if __name__ == "__main__":
    main()
