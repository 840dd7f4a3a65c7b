"""Event schema registry.

Loads and validates the event ontology (event types, definitions, and each
type's ordered argument roles) plus cross-dataset label mappings. Schemas are
immutable after load and safe for shared concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class SchemaError(Exception):
    """Malformed or inconsistent schema file."""


class UnknownEventTypeError(KeyError):
    """Lookup of an event type id absent from the schema."""


@dataclass(frozen=True)
class ArgumentRoleDef:
    name: str
    definition: str


@dataclass(frozen=True)
class EventTypeDef:
    id: str
    definition: str
    roles: tuple[ArgumentRoleDef, ...]


@dataclass(frozen=True)
class EventSchema:
    """Immutable map of event type id -> definition, in declared order.

    Role order within a type is stable: it drives the per-role step order
    during argument extraction.
    """

    types: dict[str, EventTypeDef] = field(default_factory=dict)

    def __contains__(self, type_id: str) -> bool:
        return type_id in self.types

    def __len__(self) -> int:
        return len(self.types)

    def type_ids(self) -> list[str]:
        return list(self.types.keys())

    def roles_of(self, type_id: str) -> list[ArgumentRoleDef]:
        """Ordered role list of *type_id*; raises on unknown types."""
        if type_id not in self.types:
            raise UnknownEventTypeError(type_id)
        return list(self.types[type_id].roles)

    def role_names_of(self, type_id: str) -> list[str]:
        return [r.name for r in self.roles_of(type_id)]

    def resolve_type(self, surface: str) -> str | None:
        """Resolve a model-emitted type surface form to a schema type id.

        Accepts the qualified id ("Conflict.Attack") or the bare subtype
        ("Attack"), case-insensitively. The bare form must match a unique
        suffix; ambiguous or unknown surfaces resolve to None.
        """
        needle = surface.strip().rstrip(".").strip().lower()
        if not needle:
            return None
        for tid in self.types:
            if tid.lower() == needle:
                return tid
        candidates = [tid for tid in self.types if tid.lower().split(".")[-1] == needle]
        if len(candidates) == 1:
            return candidates[0]
        return None


@dataclass(frozen=True)
class SchemaMapping:
    """Map of (source dataset tag, source label) -> schema event type id."""

    entries: dict[tuple[str, str], str] = field(default_factory=dict)

    def lookup(self, source: str, label: str) -> str | None:
        return self.entries.get((source, label))


def _parse_schema_obj(obj: dict) -> EventSchema:
    if not isinstance(obj, dict) or not isinstance(obj.get("types"), list):
        raise SchemaError('schema file must be an object with a "types" list')
    types: dict[str, EventTypeDef] = {}
    for entry in obj["types"]:
        tid = entry.get("id")
        if not tid or not isinstance(tid, str):
            raise SchemaError(f"event type with missing/empty id: {entry!r}")
        if tid in types:
            raise SchemaError(f"duplicate event type id: {tid}")
        definition = entry.get("definition", "")
        if not definition:
            raise SchemaError(f"event type {tid} has an empty definition")
        raw_roles = entry.get("roles") or []
        if not raw_roles:
            raise SchemaError(f"event type {tid} has no roles")
        roles = []
        seen = set()
        for r in raw_roles:
            name = r.get("name")
            rdef = r.get("definition")
            if not name:
                raise SchemaError(f"event type {tid} has a role with empty name")
            if not rdef:
                raise SchemaError(f"role {tid}/{name} has an empty definition")
            if name in seen:
                raise SchemaError(f"duplicate role {name} in event type {tid}")
            seen.add(name)
            roles.append(ArgumentRoleDef(name=name, definition=rdef))
        types[tid] = EventTypeDef(id=tid, definition=definition, roles=tuple(roles))
    return EventSchema(types=types)


def load_schema(path: str | Path) -> EventSchema:
    """Load and validate a schema JSON file."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cannot parse schema file {path}: {exc}") from exc
    return _parse_schema_obj(obj)


def write_schema(schema: EventSchema, path: str | Path) -> None:
    """Serialize a schema back to the JSON file format (load round-trips)."""
    obj = {
        "types": [
            {
                "id": t.id,
                "definition": t.definition,
                "roles": [{"name": r.name, "definition": r.definition} for r in t.roles],
            }
            for t in schema.types.values()
        ]
    }
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_mapping(path: str | Path, schema: EventSchema) -> SchemaMapping:
    """Load a label mapping file and validate every target against *schema*."""
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cannot parse mapping file {path}: {exc}") from exc
    if not isinstance(rows, list):
        raise SchemaError("mapping file must be a JSON array")
    entries: dict[tuple[str, str], str] = {}
    for row in rows:
        source, label, target = row.get("source"), row.get("label"), row.get("target")
        if not source or not label or not target:
            raise SchemaError(f"mapping row missing source/label/target: {row!r}")
        if target not in schema:
            raise SchemaError(f"mapping target {target} not in schema")
        entries[(source, label)] = target
    return SchemaMapping(entries=entries)


def bundled_schema_path() -> Path:
    """Path of the bundled 8-type news event schema fixture."""
    return Path(__file__).parent / "data" / "m2e2_schema.json"
