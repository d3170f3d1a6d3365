"""Query-engine test fixtures: a single-crate schema/adapter and a recorder.

The engine is schema-agnostic, so unit tests run queries rooted at a single
Crate rather than a CrateDiff pair; the recorder wraps any adapter to expose
the exact call sequence the interpreter makes.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

from semverlint.query.adapter import (
    AttributeVertex,
    CrateVertex,
    ItemVertex,
    MetaItemVertex,
    ParameterVertex,
    PathVertex,
    SnapshotPairAdapter,
    SpanVertex,
)
from semverlint.query.schema import SNAPSHOT_PAIR_SCHEMA, Schema
from semverlint.snapshot import ApiSnapshot, load_snapshot

SINGLE_CRATE_SCHEMA = Schema(SNAPSHOT_PAIR_SCHEMA.types.values(), root_type="Crate")


class SingleCrateAdapter(SnapshotPairAdapter):
    """Adapter whose starting vertex is one crate rather than a pair."""

    def __init__(self, snapshot: ApiSnapshot) -> None:
        super().__init__(snapshot, snapshot)
        self.snapshot = snapshot

    def resolve_starting_vertices(
        self, root_type: str, arguments: Mapping[str, Any]
    ) -> Iterable[Any]:
        if root_type != "Crate":
            raise ValueError(f"unsupported root type {root_type!r}")
        return (CrateVertex(self.snapshot),)


def describe_vertex(vertex: Any, sides: dict[int, str] | None = None) -> str:
    """A short stable label for a vertex, for call traces in tests."""
    if isinstance(vertex, CrateVertex):
        if sides:
            return sides.get(id(vertex.snapshot), "crate")
        return "crate"
    if isinstance(vertex, ItemVertex):
        return f"item:{vertex.item.id}"
    if isinstance(vertex, PathVertex):
        return "path:" + "::".join(vertex.path.segments)
    if isinstance(vertex, SpanVertex):
        return f"span:{vertex.span.begin_line}"
    if isinstance(vertex, AttributeVertex):
        return f"attr:{vertex.attribute.raw_value}"
    if isinstance(vertex, MetaItemVertex):
        return f"meta:{vertex.node.base}"
    if isinstance(vertex, ParameterVertex):
        return f"param:{vertex.name}"
    return type(vertex).__name__


class RecordingAdapter:
    """Wrap an adapter, recording every call the engine makes, in order.

    Neighbor iterables are wrapped so that each individual vertex pulled
    from them is recorded too (as a "yield" entry), which is what the
    laziness tests assert on.
    """

    def __init__(self, inner: Any, sides: dict[int, str] | None = None) -> None:
        self.inner = inner
        self.sides = sides or {}
        self.calls: list[tuple] = []

    def count(self, kind: str) -> int:
        return sum(1 for call in self.calls if call[0] == kind)

    def resolve_starting_vertices(self, root_type, arguments):
        self.calls.append(("starting", root_type))
        for vertex in self.inner.resolve_starting_vertices(root_type, arguments):
            yield vertex

    def resolve_property(self, vertex, type_name, property_name):
        self.calls.append(
            ("property", type_name, property_name, describe_vertex(vertex, self.sides))
        )
        return self.inner.resolve_property(vertex, type_name, property_name)

    def resolve_neighbors(self, vertex, type_name, edge_name):
        self.calls.append(
            ("neighbors", type_name, edge_name, describe_vertex(vertex, self.sides))
        )
        for neighbor in self.inner.resolve_neighbors(vertex, type_name, edge_name):
            self.calls.append(("yield", edge_name, describe_vertex(neighbor, self.sides)))
            yield neighbor

    def resolve_coercion(self, vertex, from_type, to_type):
        self.calls.append(
            ("coercion", from_type, to_type, describe_vertex(vertex, self.sides))
        )
        return self.inner.resolve_coercion(vertex, from_type, to_type)


def snapshot_of(builder) -> ApiSnapshot:
    """Load a CrateBuilder's document through the real loader."""
    return load_snapshot(builder.to_bytes())
