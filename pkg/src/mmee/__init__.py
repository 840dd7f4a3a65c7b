"""Multimedia event extraction pipeline.

Schema-guided prompting, structured response parsing, stepwise extraction
orchestration against pluggable vision-language backends, weak crossmodal
alignment for training-data construction, and strict P/R/F1 evaluation.
"""

from mmee.schema import EventSchema, EventTypeDef, ArgumentRoleDef, SchemaMapping, load_schema
from mmee.boxes import BoundingBox, iou

__all__ = [
    "EventSchema",
    "EventTypeDef",
    "ArgumentRoleDef",
    "SchemaMapping",
    "load_schema",
    "BoundingBox",
    "iou",
]

__version__ = "0.1.0"
