"""Declarative graph-query language over API snapshot pairs.

A query is a brace-nested selection tree in GraphQL-like syntax with
directives (@filter, @tag, @output, @fold, @transform, @optional) and type
coercions (`... on Enum`).  Queries are parsed (syntax.py), checked against a
vertex schema (schema.py), and lazily interpreted over a pluggable adapter
(engine.py).  adapter.py ships the snapshot-pair adapter that exposes a
baseline/current crate pair under the schema in docs/schema.txt.
"""

from __future__ import annotations

from .adapter import AdapterContract, SnapshotPairAdapter
from .engine import execute_query
from .schema import SNAPSHOT_PAIR_SCHEMA, CheckedQuery, Schema, check_query, render_schema
from .syntax import QueryDocument, parse_query

__all__ = [
    "AdapterContract",
    "CheckedQuery",
    "QueryDocument",
    "Schema",
    "SNAPSHOT_PAIR_SCHEMA",
    "SnapshotPairAdapter",
    "check_query",
    "execute_query",
    "parse_query",
    "render_schema",
]
