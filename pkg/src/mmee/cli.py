"""Command-line surface: extract, eval, dataset build/emit, visualize.

Exit codes: 0 success, 1 usage error, 2 input error, 3 backend error.
Every run writes a manifest (config snapshot, schema hash, backend identity,
call counts) next to its output so scripted runs are reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from mmee import dataset as ds
from mmee.evaluation import EvalInputError, evaluate_corpus
from mmee.gateway import GatewayError, HttpBackend, ModelGateway, ScriptedBackend
from mmee.orchestrator import extract_corpus, load_corpus, write_extraction
from mmee.prompts import PromptMode
from mmee.orchestrator import ExtractionConfig
from mmee.schema import SchemaError, load_mapping, load_schema
from mmee.boxes import BoundingBox, iou

log = logging.getLogger("mmee")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_BACKEND = 3

AUTH_TOKEN_ENV = "MMEE_API_TOKEN"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a key = value config file ('#' starts a comment)."""
    config: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key = value")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip().strip('"')
    return config


def _resolve(flag_value, config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def make_backend(spec: str, model: str = "default"):
    """A backend flag is a base URL (live) or a script file path (scripted)."""
    if spec.startswith(("http://", "https://")):
        return HttpBackend(spec, model=model, token=os.environ.get(AUTH_TOKEN_ENV))
    return ScriptedBackend.from_file(spec)


def _schema_hash(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(out_path: Path, manifest: dict) -> None:
    manifest_path = out_path.with_suffix(out_path.suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_extract(args: argparse.Namespace) -> int:
    config = load_config_file(args.config) if args.config else {}
    mode = PromptMode(_resolve(args.mode, config, "mode", "stepwise"))
    jobs = int(_resolve(args.jobs, config, "jobs", 4))
    try:
        schema = load_schema(args.schema)
        docs = load_corpus(args.input)
    except (SchemaError, ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    try:
        backend = make_backend(args.backend)
    except (OSError, json.JSONDecodeError) as exc:
        log.error("cannot initialize backend: %s", exc)
        return EXIT_INPUT

    gateway = ModelGateway(backend, max_parallel=jobs)
    cfg = ExtractionConfig(
        mode=mode,
        teacher_forcing=args.teacher_forcing,
        grounding=not args.no_grounding,
        parallelism=jobs,
    )
    started = time.time()
    results = extract_corpus(docs, schema, gateway, cfg)
    failures = [r for r in results if r.error]
    out_path = Path(args.out)
    write_extraction(results, out_path)
    _write_manifest(
        out_path,
        {
            "command": "extract",
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "duration_s": round(time.time() - started, 3),
            "config": {
                "mode": mode.value,
                "teacher_forcing": cfg.teacher_forcing,
                "grounding": cfg.grounding,
                "jobs": jobs,
            },
            "schema": {"path": args.schema, "sha256": _schema_hash(args.schema)},
            "backend": {"kind": backend.name, "spec": args.backend},
            "input": args.input,
            "output": str(out_path),
            "documents": len(results),
            "call_counts": gateway.counter.snapshot(),
            "per_doc_chat_calls": {r.doc_id: r.chat_calls for r in results},
        },
    )
    if failures:
        for r in failures:
            log.error("document %s failed: %s", r.doc_id, r.error)
        return EXIT_BACKEND
    log.info("extracted %d documents -> %s", len(results), out_path)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        report = evaluate_corpus(args.pred, args.gold)
    except (EvalInputError, OSError, KeyError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    out = report.to_dict()
    Path(args.out).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    print(f"{'':8s} {'P':>8s} {'R':>8s} {'F1':>8s}")
    for task in ("med", "meae"):
        block = out[task]
        print(f"{task.upper():8s} {block['p']:8.4f} {block['r']:8.4f} {block['f1']:8.4f}")
    return EXIT_OK


def cmd_dataset_build(args: argparse.Namespace) -> int:
    try:
        schema = load_schema(args.schema)
        sentences = ds.load_sentences(args.sentences)
        images = ds.load_images(args.images)
        mapping = load_mapping(args.mapping, schema)
        backend = make_backend(args.embedder)
    except (SchemaError, OSError, ValueError, json.JSONDecodeError, KeyError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    gateway = ModelGateway(backend)
    try:
        samples, report = ds.build_weak_alignments(
            sentences, images, mapping, mapping, gateway,
            sentence_source=args.sentence_source, image_source=args.image_source,
        )
    except GatewayError as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND
    ds.write_alignments(samples, report, args.out)
    log.info("aligned %d sentences (%d skipped) -> %s", report.aligned, len(report.skipped), args.out)
    return EXIT_OK


def cmd_dataset_emit(args: argparse.Namespace) -> int:
    try:
        schema = load_schema(args.schema)
        sentences = {s.id: s for s in ds.load_sentences(args.sentences)}
        images = {i.id: i for i in ds.load_images(args.images)}
        role_mapping = json.loads(Path(args.role_mapping).read_text()) if args.role_mapping else {}
        backend = make_backend(args.captioner)
        rows = [
            json.loads(line)
            for line in Path(args.alignments).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        samples = [
            ds.WeaklyAlignedSample(
                sentence=sentences[row["sentence_id"]],
                image=images[row["image_id"]],
                event_type=row["event_type"],
                score=row["score"],
            )
            for row in rows
        ]
    except (SchemaError, OSError, ValueError, json.JSONDecodeError, KeyError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    gateway = ModelGateway(backend)
    try:
        report = ds.emit_instruction_dataset(samples, schema, gateway, args.out_dir, role_mapping)
    except GatewayError as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND
    counts = {"etsgp": report.etsgp_records, "arsgp": report.arsgp_records}
    Path(args.out_dir, "counts.json").write_text(json.dumps(counts, indent=2) + "\n", encoding="utf-8")
    log.info("emitted %s", counts)
    return EXIT_OK


def cmd_visualize(args: argparse.Namespace) -> int:
    try:
        pred_lines = Path(args.extraction).read_text(encoding="utf-8").splitlines()
        gold_by_doc = {}
        if args.gold:
            for line in Path(args.gold).read_text(encoding="utf-8").splitlines():
                if line.strip():
                    row = json.loads(line)
                    gold_by_doc[row["doc_id"]] = row
    except (OSError, json.JSONDecodeError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for line in pred_lines:
        if not line.strip():
            continue
        row = json.loads(line)
        overlays = []
        gold_boxes = []
        for ev in gold_by_doc.get(row["doc_id"], {}).get("events", []):
            for arg in ev.get("args", []):
                region = arg.get("region") or {}
                if region.get("box"):
                    gold_boxes.append((arg["role"], BoundingBox.from_list(region["box"])))
        for ev in row.get("events", []):
            for arg in ev.get("args", []):
                region = arg.get("region") or {}
                if not region.get("box"):
                    continue
                box = BoundingBox.from_list(region["box"])
                entry = {
                    "event_type": ev["type"],
                    "role": arg["role"],
                    "label": region.get("desc", ""),
                    "box": region["box"],
                }
                same_role = [iou(box, gb) for role, gb in gold_boxes if role == arg["role"]]
                if same_role:
                    entry["iou"] = max(same_role)
                overlays.append(entry)
        out_file = out_dir / f"{row['doc_id']}.json"
        out_file.write_text(
            json.dumps({"doc_id": row["doc_id"], "overlays": overlays}, indent=2) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="mmee", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run extraction over a corpus")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True, help="corpus JSONL")
    p.add_argument("--backend", required=True, help="base URL or script file path")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=[m.value for m in PromptMode], default=None)
    p.add_argument("--teacher-forcing", action="store_true")
    p.add_argument("--no-grounding", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None, help="key = value config file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dataset", help="weak-alignment dataset construction")
    dsub = p.add_subparsers(dest="subcommand", required=True)

    b = dsub.add_parser("build", help="align sentences with images")
    b.add_argument("--schema", required=True)
    b.add_argument("--sentences", required=True)
    b.add_argument("--images", required=True)
    b.add_argument("--mapping", required=True)
    b.add_argument("--embedder", required=True, help="base URL or script file path")
    b.add_argument("--out", required=True)
    b.add_argument("--sentence-source", default="ace")
    b.add_argument("--image-source", default="swig")
    b.set_defaults(func=cmd_dataset_build)

    e = dsub.add_parser("emit", help="emit instruction-tuning JSONL")
    e.add_argument("--alignments", required=True)
    e.add_argument("--schema", required=True)
    e.add_argument("--sentences", required=True)
    e.add_argument("--images", required=True)
    e.add_argument("--captioner", required=True, help="base URL or script file path")
    e.add_argument("--role-mapping", default=None)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=cmd_dataset_emit)

    p = sub.add_parser("visualize", help="export box overlays for rendering")
    p.add_argument("--extraction", required=True)
    p.add_argument("--gold", default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_visualize)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except GatewayError as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
