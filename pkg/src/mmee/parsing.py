"""Parsers for model responses in the detection and argument grammars.

Both parsers are total: any input string yields a parse, with recoverable
problems reported as diagnostics instead of exceptions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from mmee.prompts import SEG
from mmee.schema import EventSchema

_NONE_RE = re.compile(r"^\s*none\s*\.?\s*$", re.IGNORECASE)
_SEG_RE = re.compile(r"\s*" + re.escape(SEG) + r"\s*")


@dataclass(frozen=True)
class TextSpan:
    """Character span [start, end) in a sentence, with its surface string."""

    start: int
    end: int
    surface: str


@dataclass
class EtsgpParse:
    mentions: list[tuple[str, str]] = field(default_factory=list)  # (type id, trigger surface)
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class ArsgpParse:
    text_args: list[str] = field(default_factory=list)
    image_descs: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def _is_none(text: str) -> bool:
    return bool(_NONE_RE.match(text)) or not text.strip()


def parse_etsgp(response: str, schema: EventSchema) -> EtsgpParse:
    """Parse a detection response into (event type, trigger) mentions.

    Segments are split on the separator token, each segment on its first
    semicolon. Type surfaces are resolved through the schema's resolver;
    unresolvable or trigger-less segments are dropped with a diagnostic, and
    duplicate mentions are de-duplicated keeping the first occurrence.
    """
    parse = EtsgpParse()
    if _is_none(response):
        return parse
    seen: set[tuple[str, str]] = set()
    for segment in _SEG_RE.split(response.strip()):
        segment = segment.strip()
        if not segment or _is_none(segment):
            continue
        type_surface, _, trigger = segment.partition(";")
        trigger = trigger.strip()
        type_id = schema.resolve_type(type_surface)
        if type_id is None:
            parse.diagnostics.append(f"unknown event type: {type_surface.strip()!r}")
            continue
        if not trigger:
            parse.diagnostics.append(f"mention of {type_id} with empty trigger dropped")
            continue
        key = (type_id, trigger)
        if key in seen:
            parse.diagnostics.append(f"duplicate mention dropped: {type_id}; {trigger}")
            continue
        seen.add(key)
        parse.mentions.append(key)
    return parse


def _split_items(side: str) -> list[str]:
    items = []
    for item in side.split(";"):
        item = item.strip()
        if item and not _is_none(item):
            items.append(item)
    return items


def parse_arsgp(response: str) -> ArsgpParse:
    """Parse a single-role argument response into text and image sides.

    Only the first separator token splits the response; later occurrences
    stay inside the image side and are flagged. A response with no separator
    is treated as text-only, with a diagnostic.
    """
    parse = ArsgpParse()
    text_side, sep, image_side = response.partition(SEG)
    if not sep:
        parse.diagnostics.append("missing separator token; whole response treated as text side")
        image_side = ""
    elif SEG in image_side:
        parse.diagnostics.append("multiple separator tokens; extras kept inside image side")
    parse.text_args = _split_items(text_side)
    parse.image_descs = _split_items(image_side)
    return parse


def normalize_trigger(trigger: str, sentence: str) -> TextSpan | None:
    """Anchor a trigger (or text argument) surface into the sentence.

    The first exact occurrence wins; otherwise the first case-insensitive
    occurrence; otherwise None. The returned surface is taken from the
    sentence, so it always equals sentence[start:end].
    """
    if not trigger:
        return None
    start = sentence.find(trigger)
    if start < 0:
        start = sentence.lower().find(trigger.lower())
    if start < 0:
        return None
    end = start + len(trigger)
    return TextSpan(start=start, end=end, surface=sentence[start:end])
