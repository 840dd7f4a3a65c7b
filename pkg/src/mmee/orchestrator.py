"""Per-document extraction orchestration.

Runs the stepwise state machine: one detection call, then one argument call
per (mention, role), with text-bridged grounding of image argument
descriptions. Two single-call ablation modes are supported: jall (detection
and arguments in one response) and jmeae (detection step kept, all roles of a
mention in one response).

With a scripted backend the whole pipeline is a deterministic pure function
of (document, schema, config, script table).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from mmee.boxes import BoundingBox
from mmee.gateway import ChatVisionRequest, ModelGateway, NoRegionFoundError
from mmee.parsing import TextSpan, normalize_trigger, parse_arsgp, parse_etsgp
from mmee.prompts import PromptMode, build_arsgp_prompt, build_etsgp_prompt, build_joint_prompt
from mmee.schema import EventSchema

GROUNDED = "grounded"
NO_REGION = "no-region"
SKIPPED = "skipped"


@dataclass(frozen=True)
class GoldEvent:
    type: str
    trigger: TextSpan


@dataclass(frozen=True)
class Document:
    id: str
    sentence: str
    image: str = ""
    gold: tuple[GoldEvent, ...] = ()


@dataclass
class Region:
    description: str
    box: BoundingBox | None
    status: str  # grounded | no-region | skipped


@dataclass
class TextArg:
    surface: str
    start: int | None = None
    end: int | None = None


@dataclass
class Argument:
    role: str
    text: TextArg | None = None
    region: Region | None = None


@dataclass
class EventMention:
    type: str
    trigger: TextSpan
    arguments: list[Argument] = field(default_factory=list)
    provenance: dict[str, str] = field(default_factory=dict)  # step key -> raw response


@dataclass
class ExtractionConfig:
    mode: PromptMode = PromptMode.STEPWISE
    teacher_forcing: bool = False
    grounding: bool = True
    parallelism: int = 4


@dataclass
class DocumentResult:
    doc_id: str
    events: list[EventMention] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    chat_calls: int = 0
    error: str | None = None


def detect_events(
    doc: Document, schema: EventSchema, gateway: ModelGateway, cfg: ExtractionConfig
) -> tuple[list[tuple[str, TextSpan]], list[str], str]:
    """Detection step: returns anchored (type, trigger span) mentions."""
    prompt = build_etsgp_prompt(schema, doc.sentence, image=doc.image)
    raw = gateway.chat_vision(
        ChatVisionRequest(prompt=prompt.text, image=doc.image, key=f"{doc.id}|etsgp")
    )
    parse = parse_etsgp(raw, schema)
    diagnostics = list(parse.diagnostics)
    mentions = []
    for type_id, trigger in parse.mentions:
        span = normalize_trigger(trigger, doc.sentence)
        if span is None:
            diagnostics.append(f"trigger {trigger!r} not found in sentence; mention dropped")
            continue
        mentions.append((type_id, span))
    return mentions, diagnostics, raw


def _anchor_text_arg(surface: str, sentence: str) -> TextArg:
    span = normalize_trigger(surface, sentence)
    if span is None:
        return TextArg(surface=surface)  # surface-only; scored by string match
    return TextArg(surface=span.surface, start=span.start, end=span.end)


def _ground_description(
    doc: Document, desc: str, gateway: ModelGateway, cfg: ExtractionConfig, diagnostics: list[str]
) -> Region:
    if not cfg.grounding:
        return Region(description=desc, box=None, status=SKIPPED)
    try:
        box = gateway.ground(doc.image, desc)
    except NoRegionFoundError:
        diagnostics.append(f"no region found for description {desc!r}")
        return Region(description=desc, box=None, status=NO_REGION)
    return Region(description=desc, box=box, status=GROUNDED)


def _args_from_sides(
    doc: Document,
    role_name: str,
    text_args: list[str],
    image_descs: list[str],
    gateway: ModelGateway,
    cfg: ExtractionConfig,
    diagnostics: list[str],
) -> list[Argument]:
    args = []
    for surface in text_args:
        args.append(Argument(role=role_name, text=_anchor_text_arg(surface, doc.sentence)))
    for desc in image_descs:
        region = _ground_description(doc, desc, gateway, cfg, diagnostics)
        args.append(Argument(role=role_name, region=region))
    return args


def extract_arguments(
    doc: Document,
    type_id: str,
    trigger: TextSpan,
    schema: EventSchema,
    gateway: ModelGateway,
    cfg: ExtractionConfig,
) -> tuple[list[Argument], list[str], dict[str, str], int]:
    """Stepwise argument extraction: one call per role, assembled in role order."""
    roles = schema.roles_of(type_id)

    def run_role(role):
        key = f"{doc.id}|arsgp|{type_id}|{trigger.surface}|{role.name}"
        prompt = build_arsgp_prompt(schema, type_id, trigger.surface, role, doc.sentence, image=doc.image)
        raw = gateway.chat_vision(ChatVisionRequest(prompt=prompt.text, image=doc.image, key=key))
        return role, key, raw

    if cfg.parallelism > 1 and len(roles) > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            step_results = list(pool.map(run_role, roles))
    else:
        step_results = [run_role(role) for role in roles]

    arguments: list[Argument] = []
    diagnostics: list[str] = []
    provenance: dict[str, str] = {}
    for role, key, raw in step_results:
        provenance[key] = raw
        parse = parse_arsgp(raw)
        diagnostics.extend(f"{role.name}: {d}" for d in parse.diagnostics)
        arguments.extend(
            _args_from_sides(doc, role.name, parse.text_args, parse.image_descs, gateway, cfg, diagnostics)
        )
    return arguments, diagnostics, provenance, len(roles)


def _parse_role_lines(
    doc: Document,
    type_id: str,
    lines: list[str],
    schema: EventSchema,
    gateway: ModelGateway,
    cfg: ExtractionConfig,
    diagnostics: list[str],
) -> list[Argument]:
    """Parse "Role :: <argument grammar>" lines from joint-mode responses."""
    known = {r.name.lower(): r.name for r in schema.roles_of(type_id)}
    arguments = []
    for line in lines:
        line = line.strip().lstrip("-").strip()
        if not line:
            continue
        role_surface, sep, rest = line.partition("::")
        if not sep:
            diagnostics.append(f"unparseable role line dropped: {line!r}")
            continue
        role_name = known.get(role_surface.strip().lower())
        if role_name is None:
            diagnostics.append(f"unknown role {role_surface.strip()!r} for {type_id}")
            continue
        parse = parse_arsgp(rest.strip())
        diagnostics.extend(f"{role_name}: {d}" for d in parse.diagnostics)
        arguments.extend(
            _args_from_sides(doc, role_name, parse.text_args, parse.image_descs, gateway, cfg, diagnostics)
        )
    return arguments


def _mentions_for_arguments(
    doc: Document, detected: list[tuple[str, TextSpan]], cfg: ExtractionConfig
) -> list[tuple[str, TextSpan]]:
    if cfg.teacher_forcing:
        return [(g.type, g.trigger) for g in doc.gold]
    return detected


def extract_document(
    doc: Document, schema: EventSchema, gateway: ModelGateway, cfg: ExtractionConfig
) -> DocumentResult:
    """Full per-document pipeline in the configured mode."""
    result = DocumentResult(doc_id=doc.id)
    if cfg.teacher_forcing and not doc.gold and cfg.mode != PromptMode.JOINT_ALL:
        result.diagnostics.append("teacher forcing requested but document carries no gold events")

    if cfg.mode == PromptMode.JOINT_ALL:
        prompt = build_joint_prompt(PromptMode.JOINT_ALL, schema, doc.sentence, image=doc.image)
        raw = gateway.chat_vision(
            ChatVisionRequest(prompt=prompt.text, image=doc.image, key=f"{doc.id}|jall")
        )
        result.chat_calls = 1
        stripped = raw.strip()
        if not stripped or stripped.lower().rstrip(".") == "none":
            return result
        for block in stripped.split("\n\n"):
            lines = [ln for ln in block.splitlines() if ln.strip()]
            if not lines:
                continue
            head = parse_etsgp(lines[0], schema)
            result.diagnostics.extend(head.diagnostics)
            if not head.mentions:
                continue
            type_id, trigger_surface = head.mentions[0]
            span = normalize_trigger(trigger_surface, doc.sentence)
            if span is None:
                result.diagnostics.append(
                    f"trigger {trigger_surface!r} not found in sentence; event dropped"
                )
                continue
            mention = EventMention(type=type_id, trigger=span, provenance={f"{doc.id}|jall": raw})
            mention.arguments = _parse_role_lines(
                doc, type_id, lines[1:], schema, gateway, cfg, result.diagnostics
            )
            result.events.append(mention)
        return result

    detected, diags, etsgp_raw = detect_events(doc, schema, gateway, cfg)
    result.diagnostics.extend(diags)
    result.chat_calls = 1
    mentions = _mentions_for_arguments(doc, detected, cfg)

    for type_id, span in mentions:
        mention = EventMention(type=type_id, trigger=span, provenance={f"{doc.id}|etsgp": etsgp_raw})
        if cfg.mode == PromptMode.JOINT_MEAE:
            key = f"{doc.id}|jmeae|{type_id}|{span.surface}"
            prompt = build_joint_prompt(
                PromptMode.JOINT_MEAE, schema, doc.sentence, context=(type_id, span.surface), image=doc.image
            )
            raw = gateway.chat_vision(ChatVisionRequest(prompt=prompt.text, image=doc.image, key=key))
            result.chat_calls += 1
            mention.provenance[key] = raw
            lines = [ln for ln in raw.splitlines() if ln.strip()]
            mention.arguments = _parse_role_lines(
                doc, type_id, lines, schema, gateway, cfg, result.diagnostics
            )
        else:
            args, diags, provenance, n_calls = extract_arguments(doc, type_id, span, schema, gateway, cfg)
            result.chat_calls += n_calls
            result.diagnostics.extend(diags)
            mention.provenance.update(provenance)
            mention.arguments = args
        result.events.append(mention)
    return result


def extract_corpus(
    docs: list[Document], schema: EventSchema, gateway: ModelGateway, cfg: ExtractionConfig
) -> list[DocumentResult]:
    """Extract every document; one failing document never aborts the rest."""

    def run(doc: Document) -> DocumentResult:
        try:
            return extract_document(doc, schema, gateway, cfg)
        except Exception as exc:  # per-document error report, run continues
            return DocumentResult(doc_id=doc.id, error=f"{type(exc).__name__}: {exc}")

    if cfg.parallelism > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            return list(pool.map(run, docs))
    return [run(doc) for doc in docs]


# --- corpus and result file formats -----------------------------------------


def load_corpus(path: str | Path) -> list[Document]:
    """Read a corpus JSONL file: {id, sentence, image?, gold?: [events]}."""
    docs = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        row = json.loads(line)
        if not row.get("id") or not row.get("sentence"):
            raise ValueError(f"{path}:{line_no}: document needs non-empty id and sentence")
        gold = []
        for ev in row.get("gold", []):
            trig = ev["trigger"]
            start, end = int(trig["start"]), int(trig["end"])
            surface = trig.get("surface", row["sentence"][start:end])
            gold.append(GoldEvent(type=ev["type"], trigger=TextSpan(start, end, surface)))
        docs.append(
            Document(id=row["id"], sentence=row["sentence"], image=row.get("image", ""), gold=tuple(gold))
        )
    return docs


def result_to_dict(result: DocumentResult) -> dict:
    events = []
    for ev in result.events:
        args = []
        for arg in ev.arguments:
            entry: dict = {"role": arg.role, "text": None, "region": None}
            if arg.text is not None:
                entry["text"] = {"surface": arg.text.surface, "start": arg.text.start, "end": arg.text.end}
            if arg.region is not None:
                entry["region"] = {
                    "desc": arg.region.description,
                    "box": arg.region.box.as_list() if arg.region.box else None,
                    "status": arg.region.status,
                }
            args.append(entry)
        events.append(
            {
                "type": ev.type,
                "trigger": {"start": ev.trigger.start, "end": ev.trigger.end, "surface": ev.trigger.surface},
                "args": args,
            }
        )
    out = {"doc_id": result.doc_id, "events": events, "diagnostics": result.diagnostics}
    if result.error:
        out["error"] = result.error
    return out


def write_extraction(results: list[DocumentResult], path: str | Path) -> None:
    """Write extraction results as JSONL, one document per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(result_to_dict(result), ensure_ascii=False) + "\n")
