"""Micro-averaged P/R/F1 scoring for event detection and argument extraction.

Protocol: a predicted event matches a gold event iff types are equal and
trigger surfaces are equal case-insensitively (with offset equality when the
prediction carries offsets). Arguments are scored only within correctly
detected events; a text argument matches on role + normalized surface string,
a visual argument matches on role + IoU strictly above 0.5. All matching is
greedy one-to-one in prediction order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from mmee.boxes import BoundingBox, iou

IOU_THRESHOLD = 0.5  # strict: a visual argument counts only when iou > 0.5


class EvalInputError(ValueError):
    pass


@dataclass(frozen=True)
class PredArg:
    role: str
    text: str | None = None
    box: BoundingBox | None = None


@dataclass(frozen=True)
class GoldArg:
    role: str
    text: str | None = None
    box: BoundingBox | None = None


@dataclass
class PredEvent:
    type: str
    trigger: str
    start: int | None = None
    end: int | None = None
    args: list[PredArg] = field(default_factory=list)


@dataclass
class GoldEvent:
    type: str
    trigger: str
    start: int = 0
    end: int = 0
    args: list[GoldArg] = field(default_factory=list)


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "Counts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn

    def prf(self) -> tuple[float, float, float]:
        p = self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0
        r = self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0
        return p, r, f1_score(p, r)


def f1_score(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    return 2 * p * r / (p + r) if (p + r) else 0.0


def _norm_text(s: str) -> str:
    return " ".join(s.split()).lower()


def _trigger_match(pred: PredEvent, gold: GoldEvent) -> bool:
    if pred.type != gold.type:
        return False
    if _norm_text(pred.trigger) != _norm_text(gold.trigger):
        return False
    if pred.start is not None and pred.end is not None:
        return pred.start == gold.start and pred.end == gold.end
    return True


def _arg_match(pred: PredArg, gold: GoldArg) -> tuple[bool, str]:
    if pred.role != gold.role:
        return False, ""
    if pred.text is not None and gold.text is not None:
        return _norm_text(pred.text) == _norm_text(gold.text), "role+text"
    if pred.box is not None and gold.box is not None:
        return iou(pred.box, gold.box) > IOU_THRESHOLD, "role+iou"
    return False, ""


def score_med(
    preds: list[PredEvent], golds: list[GoldEvent]
) -> tuple[Counts, list[tuple[int, int]]]:
    """Greedy one-to-one event matching; returns counts and (pred, gold) index pairs."""
    pairs: list[tuple[int, int]] = []
    taken: set[int] = set()
    for pi, pred in enumerate(preds):
        for gi, gold in enumerate(golds):
            if gi in taken:
                continue
            if _trigger_match(pred, gold):
                pairs.append((pi, gi))
                taken.add(gi)
                break
    tp = len(pairs)
    return Counts(tp=tp, fp=len(preds) - tp, fn=len(golds) - tp), pairs


def score_meae(
    preds: list[PredEvent], golds: list[GoldEvent], event_pairs: list[tuple[int, int]]
) -> tuple[Counts, list[dict]]:
    """Argument scoring within matched events.

    Every predicted argument counts toward the precision denominator and every
    gold argument toward recall, but a match is only possible inside an event
    pair from *event_pairs*; arguments of missed gold events are unmatchable
    false negatives, arguments of spurious predictions are false positives.
    """
    total_pred = sum(len(ev.args) for ev in preds)
    total_gold = sum(len(ev.args) for ev in golds)
    ledger: list[dict] = []
    tp = 0
    for pi, gi in event_pairs:
        taken: set[int] = set()
        for pa_idx, parg in enumerate(preds[pi].args):
            for ga_idx, garg in enumerate(golds[gi].args):
                if ga_idx in taken:
                    continue
                matched, basis = _arg_match(parg, garg)
                if matched:
                    taken.add(ga_idx)
                    tp += 1
                    ledger.append(
                        {"pred_event": pi, "gold_event": gi, "pred_arg": pa_idx, "gold_arg": ga_idx, "basis": basis}
                    )
                    break
    return Counts(tp=tp, fp=total_pred - tp, fn=total_gold - tp), ledger


@dataclass
class EvalReport:
    med: Counts
    meae: Counts
    per_type: dict[str, dict[str, Counts]]
    ledgers: dict[str, list]

    def to_dict(self) -> dict:
        def block(c: Counts) -> dict:
            p, r, f1 = c.prf()
            return {"p": p, "r": r, "f1": f1, "tp": c.tp, "fp": c.fp, "fn": c.fn}

        return {
            "med": block(self.med),
            "meae": block(self.meae),
            "per_type": {
                t: {task: block(c) for task, c in tasks.items()} for t, tasks in self.per_type.items()
            },
        }


def evaluate_documents(
    pred_docs: dict[str, list[PredEvent]], gold_docs: dict[str, list[GoldEvent]]
) -> EvalReport:
    """Micro-aggregate over documents; missing pred doc means empty prediction."""
    med = Counts()
    meae = Counts()
    per_type: dict[str, dict[str, Counts]] = {}
    ledgers: dict[str, list] = {"med": [], "meae": []}

    def type_counts(type_id: str, task: str) -> Counts:
        return per_type.setdefault(type_id, {}).setdefault(task, Counts())

    for doc_id in sorted(gold_docs.keys() | pred_docs.keys()):
        preds = pred_docs.get(doc_id, [])
        golds = gold_docs.get(doc_id, [])
        doc_med, pairs = score_med(preds, golds)
        doc_meae, arg_ledger = score_meae(preds, golds, pairs)
        med.add(doc_med)
        meae.add(doc_meae)
        ledgers["med"].extend({"doc": doc_id, "pred": pi, "gold": gi} for pi, gi in pairs)
        ledgers["meae"].extend(dict(rec, doc=doc_id) for rec in arg_ledger)

        matched_preds = {pi for pi, _ in pairs}
        matched_golds = {gi for _, gi in pairs}
        for pi, ev in enumerate(preds):
            c = type_counts(ev.type, "med")
            if pi in matched_preds:
                c.tp += 1
            else:
                c.fp += 1
        for gi, ev in enumerate(golds):
            if gi not in matched_golds:
                type_counts(ev.type, "med").fn += 1
        arg_tp_by_event: dict[int, int] = {}
        for rec in arg_ledger:
            arg_tp_by_event[rec["pred_event"]] = arg_tp_by_event.get(rec["pred_event"], 0) + 1
        for pi, ev in enumerate(preds):
            c = type_counts(ev.type, "meae")
            matched = arg_tp_by_event.get(pi, 0)
            c.tp += matched
            c.fp += len(ev.args) - matched
        gold_tp_by_event: dict[int, int] = {}
        for rec in arg_ledger:
            gold_tp_by_event[rec["gold_event"]] = gold_tp_by_event.get(rec["gold_event"], 0) + 1
        for gi, ev in enumerate(golds):
            type_counts(ev.type, "meae").fn += len(ev.args) - gold_tp_by_event.get(gi, 0)

    return EvalReport(med=med, meae=meae, per_type=per_type, ledgers=ledgers)


def _parse_args(raw_args: list[dict], gold: bool) -> list:
    out = []
    for a in raw_args or []:
        role = a["role"]
        text = (a.get("text") or {}).get("surface") if a.get("text") else None
        box = None
        region = a.get("region")
        if region and region.get("box"):
            box = BoundingBox.from_list(region["box"])
        if gold:
            if text is not None:
                out.append(GoldArg(role=role, text=text))
            if box is not None:
                out.append(GoldArg(role=role, box=box))
        else:
            # Ungrounded visual predictions (no box) are excluded from scoring.
            if text is not None:
                out.append(PredArg(role=role, text=text))
            if box is not None:
                out.append(PredArg(role=role, box=box))
    return out


def load_eval_file(path: str | Path, gold: bool) -> dict[str, list]:
    """Read an extraction-shaped JSONL file into per-document event lists."""
    docs: dict[str, list] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EvalInputError(f"{path}:{line_no}: {exc}") from exc
        doc_id = row.get("doc_id")
        if not doc_id:
            raise EvalInputError(f"{path}:{line_no}: missing doc_id")
        if doc_id in docs:
            raise EvalInputError(f"{path}:{line_no}: duplicate doc_id {doc_id}")
        events = []
        for ev in row.get("events", []):
            trig = ev["trigger"]
            if gold:
                events.append(
                    GoldEvent(
                        type=ev["type"],
                        trigger=trig["surface"],
                        start=int(trig["start"]),
                        end=int(trig["end"]),
                        args=_parse_args(ev.get("args", []), gold=True),
                    )
                )
            else:
                events.append(
                    PredEvent(
                        type=ev["type"],
                        trigger=trig["surface"],
                        start=trig.get("start"),
                        end=trig.get("end"),
                        args=_parse_args(ev.get("args", []), gold=False),
                    )
                )
        docs[doc_id] = events
    return docs


def evaluate_corpus(pred_path: str | Path, gold_path: str | Path) -> EvalReport:
    """Score a prediction file against a gold file (both extraction-shaped JSONL)."""
    preds = load_eval_file(pred_path, gold=False)
    golds = load_eval_file(gold_path, gold=True)
    return evaluate_documents(preds, golds)
