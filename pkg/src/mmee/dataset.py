"""Weak crossmodal alignment and instruction-tuning data emission.

Bridges a text-annotated sentence corpus with an image-annotated corpus:
each in-schema sentence is paired with the highest-scoring same-event-type
image candidate under cosine similarity of unit-normalized embeddings, then
every pair is expanded into detection and per-role argument instruction
records whose gold answers follow the output grammars exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mmee.boxes import BoundingBox
from mmee.gateway import ModelGateway
from mmee.prompts import build_arsgp_prompt, build_etsgp_prompt, format_arsgp_gold, format_etsgp_gold
from mmee.schema import EventSchema, SchemaMapping

INSTRUCTION_RECORD_SCHEMA = {
    "type": "object",
    "required": ["id", "task", "image", "prompt", "gold", "meta"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "task": {"enum": ["etsgp", "arsgp"]},
        "image": {"type": "string"},
        "prompt": {"type": "string", "minLength": 1},
        "gold": {"type": "string", "minLength": 1},
        "meta": {
            "type": "object",
            "required": ["event_type"],
            "properties": {
                "event_type": {"type": "string", "minLength": 1},
                "role": {"type": "string", "minLength": 1},
            },
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class SentenceArg:
    role: str
    start: int
    end: int


@dataclass(frozen=True)
class AnnotatedSentence:
    id: str
    text: str
    event_type: str  # source-schema label
    trigger_start: int
    trigger_end: int
    args: tuple[SentenceArg, ...] = ()

    @property
    def trigger_surface(self) -> str:
        return self.text[self.trigger_start : self.trigger_end]

    def arg_surfaces(self, role: str) -> list[str]:
        return [self.text[a.start : a.end] for a in self.args if a.role == role]


@dataclass(frozen=True)
class ImageArg:
    role: str
    box: BoundingBox


@dataclass(frozen=True)
class AnnotatedImage:
    id: str
    path: str
    event_label: str  # source-schema label
    args: tuple[ImageArg, ...] = ()


@dataclass(frozen=True)
class WeaklyAlignedSample:
    sentence: AnnotatedSentence
    image: AnnotatedImage
    event_type: str  # mapped schema type, equal across both modalities
    score: float


@dataclass
class BuildReport:
    aligned: int = 0
    skipped: list[dict] = field(default_factory=list)
    image_reuse: dict[str, int] = field(default_factory=dict)


@dataclass
class EmissionReport:
    etsgp_records: int = 0
    arsgp_records: int = 0


def load_sentences(path: str | Path) -> list[AnnotatedSentence]:
    """Read sentence-corpus JSONL: {id,text,event_type,trigger:{start,end},args:[{role,start,end}]}."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        trig = row["trigger"]
        out.append(
            AnnotatedSentence(
                id=row["id"],
                text=row["text"],
                event_type=row["event_type"],
                trigger_start=int(trig["start"]),
                trigger_end=int(trig["end"]),
                args=tuple(
                    SentenceArg(role=a["role"], start=int(a["start"]), end=int(a["end"]))
                    for a in row.get("args", [])
                ),
            )
        )
    return out


def load_images(path: str | Path) -> list[AnnotatedImage]:
    """Read image-corpus JSONL: {id,path,event_label,args:[{role,box:[x1,y1,x2,y2]}]}."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        out.append(
            AnnotatedImage(
                id=row["id"],
                path=row.get("path", row["id"]),
                event_label=row["event_label"],
                args=tuple(
                    ImageArg(role=a["role"], box=BoundingBox.from_list(a["box"]))
                    for a in row.get("args", [])
                ),
            )
        )
    return out


def select_matching_image(
    sentence: AnnotatedSentence,
    candidates: list[AnnotatedImage],
    gateway: ModelGateway,
    event_type: str,
) -> WeaklyAlignedSample:
    """Pick the candidate with the highest cosine score; ties go to the lowest index."""
    if not candidates:
        raise ValueError(f"no image candidates for sentence {sentence.id}")
    text_vec = gateway.embed("text", sentence.text)
    best_idx, best_score = 0, -np.inf
    for idx, image in enumerate(candidates):
        score = float(np.dot(text_vec, gateway.embed("image", image.path)))
        if score > best_score:
            best_idx, best_score = idx, score
    return WeaklyAlignedSample(
        sentence=sentence, image=candidates[best_idx], event_type=event_type, score=best_score
    )


def build_weak_alignments(
    sentences: list[AnnotatedSentence],
    images: list[AnnotatedImage],
    sentence_mapping: SchemaMapping,
    image_mapping: SchemaMapping,
    gateway: ModelGateway,
    sentence_source: str = "ace",
    image_source: str = "swig",
) -> tuple[list[WeaklyAlignedSample], BuildReport]:
    """Align every in-schema sentence with its best same-type image candidate.

    Sentences whose label is unmapped, or whose mapped type has no candidate
    images, are skipped with a report entry. Images may be reused across
    sentences; the reuse histogram is reported.
    """
    report = BuildReport()
    by_type: dict[str, list[AnnotatedImage]] = {}
    for image in images:
        mapped = image_mapping.lookup(image_source, image.event_label)
        if mapped is not None:
            by_type.setdefault(mapped, []).append(image)

    samples = []
    for sentence in sorted(sentences, key=lambda s: s.id):
        mapped = sentence_mapping.lookup(sentence_source, sentence.event_type)
        if mapped is None:
            report.skipped.append({"sentence": sentence.id, "reason": "unmapped event type"})
            continue
        candidates = by_type.get(mapped, [])
        if not candidates:
            report.skipped.append({"sentence": sentence.id, "reason": f"no image candidates for {mapped}"})
            continue
        sample = select_matching_image(sentence, candidates, gateway, mapped)
        samples.append(sample)
        report.image_reuse[sample.image.id] = report.image_reuse.get(sample.image.id, 0) + 1
    report.aligned = len(samples)
    return samples, report


def generate_gold_region_description(image: AnnotatedImage, box: BoundingBox, gateway: ModelGateway) -> str:
    """Caption the cropped argument region to obtain its gold description."""
    return gateway.caption_region(image.path, box)


def emit_instruction_dataset(
    samples: list[WeaklyAlignedSample],
    schema: EventSchema,
    gateway: ModelGateway,
    out_dir: str | Path,
    role_mapping: dict[str, str] | None = None,
) -> EmissionReport:
    """Write etsgp.jsonl and arsgp.jsonl instruction files.

    Per sample: one detection record, then one argument record per role of the
    sample's event type, whose gold combines the sentence's text arguments and
    captions of the image's visual arguments for that role. Output order is
    stable (sentence id, then schema role order), so identical inputs with a
    scripted gateway produce byte-identical files.
    """
    role_mapping = role_mapping or {}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = EmissionReport()

    def image_role(source_role: str) -> str:
        return role_mapping.get(source_role, source_role)

    with open(out_dir / "etsgp.jsonl", "w", encoding="utf-8") as etsgp_fh, open(
        out_dir / "arsgp.jsonl", "w", encoding="utf-8"
    ) as arsgp_fh:
        for sample in sorted(samples, key=lambda s: s.sentence.id):
            sent = sample.sentence
            type_id = sample.event_type
            prompt = build_etsgp_prompt(schema, sent.text, image=sample.image.path)
            record = {
                "id": f"{sent.id}:etsgp",
                "task": "etsgp",
                "image": sample.image.path,
                "prompt": prompt.text,
                "gold": format_etsgp_gold([(type_id, sent.trigger_surface)]),
                "meta": {"event_type": type_id},
            }
            etsgp_fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            report.etsgp_records += 1

            for role in schema.roles_of(type_id):
                text_args = sent.arg_surfaces(role.name)
                image_descs = [
                    generate_gold_region_description(sample.image, arg.box, gateway)
                    for arg in sample.image.args
                    if image_role(arg.role) == role.name
                ]
                prompt = build_arsgp_prompt(
                    schema, type_id, sent.trigger_surface, role, sent.text, image=sample.image.path
                )
                record = {
                    "id": f"{sent.id}:arsgp:{role.name}",
                    "task": "arsgp",
                    "image": sample.image.path,
                    "prompt": prompt.text,
                    "gold": format_arsgp_gold(text_args, image_descs),
                    "meta": {"event_type": type_id, "role": role.name},
                }
                arsgp_fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                report.arsgp_records += 1
    return report


def write_alignments(samples: list[WeaklyAlignedSample], report: BuildReport, path: str | Path) -> None:
    """Persist alignments as JSONL with a trailing report line."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(
                json.dumps(
                    {
                        "sentence_id": sample.sentence.id,
                        "image_id": sample.image.id,
                        "event_type": sample.event_type,
                        "score": sample.score,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    report_path = Path(path).with_suffix(".report.json")
    report_path.write_text(
        json.dumps(
            {"aligned": report.aligned, "skipped": report.skipped, "image_reuse": report.image_reuse},
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
