"""Build a weakly aligned instruction-tuning set from annotated corpora.

Sentences annotated with source-schema event labels are paired with images
that map to the same target event type, picking the image whose embedding
is closest to the sentence embedding.  Each aligned pair is then emitted as
detection and argument instruction records whose gold answers follow the
same response grammars the extractor parses.

A scripted backend supplies the embeddings and region captions so the demo
is offline and deterministic.

Run with:  python3 demos/build_instruction_data.py
"""

import json
import tempfile
from pathlib import Path

from mmee.dataset import (
    build_weak_alignments,
    emit_instruction_dataset,
    load_images,
    load_sentences,
)
from mmee.gateway import ModelGateway, ScriptedBackend
from mmee.schema import bundled_schema_path, load_mapping, load_schema

SENTENCES = [
    {
        "id": "s1",
        "text": "Rebels attacked the convoy near the border.",
        "event_type": "Conflict.Attack",
        "trigger": {"start": 7, "end": 15},
        "args": [{"role": "Attacker", "start": 0, "end": 6}],
    },
    {
        "id": "s2",
        "text": "The two leaders met in Geneva on Tuesday.",
        "event_type": "Contact.Meet",
        "trigger": {"start": 16, "end": 19},
        "args": [{"role": "Place", "start": 23, "end": 29}],
    },
]

IMAGES = [
    {"id": "im_a", "path": "im_a.jpg", "event_label": "attacking",
     "args": [{"role": "weapon", "box": [10.0, 10.0, 90.0, 70.0]}]},
    {"id": "im_b", "path": "im_b.jpg", "event_label": "attacking", "args": []},
    {"id": "im_c", "path": "im_c.jpg", "event_label": "meeting", "args": []},
]

# Embeddings are unit-normalized by the gateway, so plain basis-ish vectors
# are enough to make im_a beat im_b for s1.
SCRIPT = {
    "embed|text|Rebels attacked the convoy near the border.": [1.0, 0.1, 0.0],
    "embed|text|The two leaders met in Geneva on Tuesday.": [0.0, 0.0, 1.0],
    "embed|image|im_a.jpg": [1.0, 0.0, 0.0],
    "embed|image|im_b.jpg": [0.5, 0.9, 0.0],
    "embed|image|im_c.jpg": [0.1, 0.0, 1.0],
    "caption|im_a.jpg|10,10,90,70": "a rifle held by a masked man",
}


def main() -> None:
    schema = load_schema(bundled_schema_path())
    mapping = load_mapping(
        Path(bundled_schema_path()).parent / "sample_type_mapping.json", schema
    )
    role_mapping = json.loads(
        (Path(bundled_schema_path()).parent / "sample_role_mapping.json").read_text()
    )
    gateway = ModelGateway(ScriptedBackend(SCRIPT), embed_dim=3)

    with tempfile.TemporaryDirectory() as tmp:
        sent_path = Path(tmp) / "sentences.jsonl"
        img_path = Path(tmp) / "images.jsonl"
        sent_path.write_text("".join(json.dumps(r) + "\n" for r in SENTENCES))
        img_path.write_text("".join(json.dumps(r) + "\n" for r in IMAGES))

        samples, report = build_weak_alignments(
            load_sentences(sent_path), load_images(img_path), mapping, mapping, gateway
        )
        print(f"Aligned {report.aligned} sentence/image pairs:")
        for s in samples:
            print(f"  {s.sentence.id} -> {s.image.id}  ({s.event_type}, score={s.score:.3f})")

        out_dir = Path(tmp) / "instructions"
        emission = emit_instruction_dataset(samples, schema, gateway, out_dir, role_mapping)
        print(f"\nEmitted {emission.etsgp_records} detection and "
              f"{emission.arsgp_records} argument records.")

        for name in ("etsgp.jsonl", "arsgp.jsonl"):
            print(f"\nFirst record of {name}:")
            row = json.loads((out_dir / name).read_text().splitlines()[0])
            print(f"  id:   {row['id']}")
            print(f"  gold: {row['gold']!r}")


if __name__ == "__main__":
    main()
