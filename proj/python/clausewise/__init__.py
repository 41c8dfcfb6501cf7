"""Step-by-step SQL explanations and explanation-driven query refinement."""

import json

from ._core import (
    ClausewiseError,
    Schema,
    corrupt,
    exact_set_match,
    generate_clause,
    infer_clause_type,
    load_schema,
    load_schema_json,
    normalize_sql,
    sqlite_sql,
)
from . import _core

__all__ = [
    "ClausewiseError",
    "Schema",
    "component_match",
    "corrupt",
    "edit",
    "exact_set_match",
    "explain",
    "generate_clause",
    "infer_clause_type",
    "load_schema",
    "load_schema_json",
    "normalize_sql",
    "refinement_loop",
    "sqlite_sql",
    "steps",
]


def explain(sql: str, schema: Schema) -> dict:
    """Explanation of `sql` as {steps: [{index, text, clause_kind, spans}], ...}."""
    return json.loads(_core._explain(sql, schema))


def steps(sql: str, schema: Schema) -> list[str]:
    return [s["text"] for s in explain(sql, schema)["steps"]]


def edit(sql: str, schema: Schema, step: int, text: str = "", op: str = "replace") -> dict:
    """Refines `sql` after replacing, inserting before, or deleting 1-based `step`."""
    return json.loads(_core._edit(sql, schema, op, step, text))


def component_match(predicted: str, gold: str, schema: Schema) -> dict[str, bool]:
    return json.loads(_core._component_match(predicted, gold, schema))


def refinement_loop(predicted: str, gold: str, schema: Schema, rounds: int = 3,
                    paraphrase: bool = False, seed: int = 0) -> dict:
    return json.loads(_core._refinement_loop(predicted, gold, schema, rounds, paraphrase, seed))
