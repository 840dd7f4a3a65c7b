"""Prompt construction and gold-answer formatting.

Prompt templates live in versioned text files under ``templates/`` with
``{{placeholder}}`` substitution; builders are pure functions of their inputs,
so identical inputs yield byte-identical prompts. Gold formatters emit the
exact output grammar the response parser accepts:

  detection:  "<type>; <trigger>" per mention, joined by " <seg> ", or "None"
  arguments:  "<t1>; <t2> <seg> <d1>; <d2>", empty sides rendered "None"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from mmee.schema import ArgumentRoleDef, EventSchema

SEG = "<seg>"

_TEMPLATE_DIR = Path(__file__).parent / "templates"
_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


class PromptMode(str, Enum):
    STEPWISE = "stepwise"
    JOINT_ALL = "jall"
    JOINT_MEAE = "jmeae"


@dataclass(frozen=True)
class Prompt:
    text: str
    image: str  # opaque image handle (path or id)


def _render(template_name: str, **fields: str) -> str:
    text = (_TEMPLATE_DIR / f"{template_name}.txt").read_text(encoding="utf-8")

    def sub(match: re.Match) -> str:
        key = match.group(1)
        if key not in fields:
            raise KeyError(f"template {template_name} references unknown placeholder {key}")
        return fields[key]

    return _PLACEHOLDER_RE.sub(sub, text)


def _type_blocks(schema: EventSchema, with_roles: bool = False) -> str:
    blocks = []
    for tid in schema.type_ids():
        tdef = schema.types[tid]
        block = f"- {tid}: {tdef.definition}"
        if with_roles:
            roles = ", ".join(f"{r.name} ({r.definition})" for r in tdef.roles)
            block += f"\n  Roles: {roles}"
        blocks.append(block)
    return "\n".join(blocks)


def build_etsgp_prompt(schema: EventSchema, sentence: str, image: str = "") -> Prompt:
    """Detection prompt listing every event type with its definition."""
    if not len(schema):
        raise ValueError("schema is empty")
    if not sentence:
        raise ValueError("sentence is empty")
    text = _render("etsgp", type_blocks=_type_blocks(schema), sentence=sentence)
    return Prompt(text=text, image=image)


def build_arsgp_prompt(
    schema: EventSchema,
    type_id: str,
    trigger: str,
    role: ArgumentRoleDef,
    sentence: str,
    image: str = "",
) -> Prompt:
    """Single-role argument prompt for one detected event mention."""
    if not trigger:
        raise ValueError("trigger is empty")
    text = _render(
        "arsgp",
        event_type=type_id,
        event_definition=schema.types[type_id].definition,
        trigger=trigger,
        role_name=role.name,
        role_definition=role.definition,
        sentence=sentence,
    )
    return Prompt(text=text, image=image)


def build_joint_prompt(
    mode: PromptMode,
    schema: EventSchema,
    sentence: str,
    context: tuple[str, str] | None = None,
    image: str = "",
) -> Prompt:
    """Single-call ablation prompts.

    jall carries all types and all roles; jmeae carries all roles of the
    event given in *context* as (type id, trigger).
    """
    if mode == PromptMode.STEPWISE:
        raise ValueError("stepwise mode has no joint prompt")
    if mode == PromptMode.JOINT_ALL:
        text = _render("joint_all", type_blocks=_type_blocks(schema, with_roles=True), sentence=sentence)
        return Prompt(text=text, image=image)
    if context is None:
        raise ValueError("jmeae mode requires an (event type, trigger) context")
    type_id, trigger = context
    role_blocks = "\n".join(f"- {r.name}: {r.definition}" for r in schema.roles_of(type_id))
    text = _render(
        "joint_meae",
        event_type=type_id,
        trigger=trigger,
        role_blocks=role_blocks,
        sentence=sentence,
    )
    return Prompt(text=text, image=image)


def sanitize_argument(value: str) -> str:
    """Make a free-text argument safe for the output grammar.

    Grammar collisions are resolved by replacing ";" with "," and stripping
    any embedded separator token, then collapsing whitespace.
    """
    value = value.replace(SEG, " ").replace(";", ",")
    return " ".join(value.split())


def format_etsgp_gold(mentions: list[tuple[str, str]]) -> str:
    """Gold detection answer: "type; trigger" segments, or "None"."""
    if not mentions:
        return "None"
    for _, trigger in mentions:
        if not trigger:
            raise ValueError("gold mention with empty trigger")
    return f" {SEG} ".join(f"{tid}; {trigger}" for tid, trigger in mentions)


def format_arsgp_gold(text_args: list[str], image_descs: list[str]) -> str:
    """Gold single-role answer: text side, separator, image side."""
    text_side = "; ".join(sanitize_argument(a) for a in text_args) or "None"
    image_side = "; ".join(sanitize_argument(d) for d in image_descs) or "None"
    return f"{text_side} {SEG} {image_side}"
