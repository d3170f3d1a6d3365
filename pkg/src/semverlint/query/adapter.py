"""Adapters connect the query interpreter to concrete data.

An adapter implements four methods (the full contract the engine relies on):

* ``resolve_starting_vertices(root_type, arguments)`` - iterable of root
  vertices;
* ``resolve_property(vertex, type_name, property_name)`` - the property's
  value (None models a null);
* ``resolve_neighbors(vertex, type_name, edge_name)`` - iterable of
  neighboring vertices along the named edge;
* ``resolve_coercion(vertex, from_type, to_type)`` - whether the vertex is
  an instance of ``to_type``.

``SnapshotPairAdapter`` is the shipped adapter exposing a baseline/current
pair of API snapshots under ``SNAPSHOT_PAIR_SCHEMA``.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Iterable, Mapping, Protocol, runtime_checkable

from ..snapshot import (
    ApiItem,
    ApiSnapshot,
    AttributeNode,
    EnumData,
    FunctionData,
    ImplData,
    ImportablePath,
    Span,
    StructData,
    TraitData,
    VariantData,
)
from .schema import SNAPSHOT_PAIR_SCHEMA


@runtime_checkable
class AdapterContract(Protocol):
    """The pluggable data-provider interface the interpreter drives."""

    def resolve_starting_vertices(
        self, root_type: str, arguments: Mapping[str, Any]
    ) -> Iterable[Any]: ...

    def resolve_property(self, vertex: Any, type_name: str, property_name: str) -> Any: ...

    def resolve_neighbors(
        self, vertex: Any, type_name: str, edge_name: str
    ) -> Iterable[Any]: ...

    def resolve_coercion(self, vertex: Any, from_type: str, to_type: str) -> bool: ...


# Vertex wrappers.  Each carries exactly the payload its type's properties
# and edges need; items also carry their snapshot so edges can follow ids.


@dataclasses.dataclass(frozen=True)
class DiffVertex:
    baseline: ApiSnapshot
    current: ApiSnapshot


@dataclasses.dataclass(frozen=True)
class CrateVertex:
    snapshot: ApiSnapshot


@dataclasses.dataclass(frozen=True)
class ItemVertex:
    snapshot: ApiSnapshot
    item: ApiItem


@dataclasses.dataclass(frozen=True)
class PathVertex:
    path: ImportablePath


@dataclasses.dataclass(frozen=True)
class SpanVertex:
    span: Span


@dataclasses.dataclass(frozen=True)
class AttributeVertex:
    attribute: AttributeNode


@dataclasses.dataclass(frozen=True)
class MetaItemVertex:
    node: AttributeNode


@dataclasses.dataclass(frozen=True)
class ParameterVertex:
    name: str


@dataclasses.dataclass(frozen=True)
class ImplementedTraitVertex:
    name: str
    path: tuple[str, ...] | None


_KIND_TO_TYPE = {
    "struct": "Struct",
    "enum": "Enum",
    "variant-plain": "PlainVariant",
    "variant-tuple": "TupleVariant",
    "variant-struct": "StructVariant",
    "field": "Field",
    "function": "Function",
    "method": "Method",
    "trait": "Trait",
    "impl": "Impl",
    "module": "Module",
}


def concrete_type_of(item: ApiItem) -> str:
    """The schema type an item vertex coerces to."""
    return _KIND_TO_TYPE[item.kind]


class SnapshotPairAdapter:
    """Expose a (baseline, current) snapshot pair to the query engine."""

    def __init__(self, baseline: ApiSnapshot, current: ApiSnapshot) -> None:
        self.pair = DiffVertex(baseline=baseline, current=current)

    def resolve_starting_vertices(
        self, root_type: str, arguments: Mapping[str, Any]
    ) -> Iterable[Any]:
        if root_type != "CrateDiff":
            raise ValueError(f"unsupported root type {root_type!r}")
        return (self.pair,)

    def resolve_property(self, vertex: Any, type_name: str, property_name: str) -> Any:
        if isinstance(vertex, ItemVertex):
            return self._item_property(vertex.item, property_name)
        if isinstance(vertex, PathVertex):
            if property_name == "path":
                return vertex.path.segments
            if property_name == "public_api":
                return vertex.path.public_api
        elif isinstance(vertex, SpanVertex):
            if property_name == "filename":
                return vertex.span.filename
            if property_name == "begin_line":
                return vertex.span.begin_line
        elif isinstance(vertex, AttributeVertex):
            if property_name == "raw_value":
                return vertex.attribute.raw_value
        elif isinstance(vertex, MetaItemVertex):
            if property_name == "base":
                return vertex.node.base
            if property_name == "assigned_item":
                return vertex.node.assigned_value
        elif isinstance(vertex, ParameterVertex):
            if property_name == "name":
                return vertex.name
        elif isinstance(vertex, ImplementedTraitVertex):
            if property_name == "name":
                return vertex.name
            if property_name == "path":
                return vertex.path
        raise ValueError(f"no property {property_name!r} on {type_name}")

    @staticmethod
    def _item_property(item: ApiItem, property_name: str) -> Any:
        if property_name == "name":
            return item.name
        if property_name == "visibility_limit":
            return item.visibility
        if property_name == "doc_hidden":
            return item.doc_hidden
        data = item.data
        if property_name == "struct_kind" and isinstance(data, StructData):
            return data.struct_kind
        if property_name == "repr_int" and isinstance(data, EnumData):
            return data.repr_int
        if property_name == "unsafe":
            if isinstance(data, (FunctionData, TraitData, ImplData)):
                return data.is_unsafe
        if property_name == "const" and isinstance(data, FunctionData):
            return data.is_const
        if property_name == "negative" and isinstance(data, ImplData):
            return data.is_negative
        if property_name == "provenance" and isinstance(data, ImplData):
            return data.provenance
        raise ValueError(f"no property {property_name!r} on item kind {item.kind!r}")

    def resolve_neighbors(
        self, vertex: Any, type_name: str, edge_name: str
    ) -> Iterable[Any]:
        if isinstance(vertex, DiffVertex):
            if edge_name == "baseline":
                return (CrateVertex(vertex.baseline),)
            if edge_name == "current":
                return (CrateVertex(vertex.current),)
        elif isinstance(vertex, CrateVertex):
            if edge_name == "item":
                snapshot = vertex.snapshot
                return (ItemVertex(snapshot, item) for item in snapshot.items.values())
        elif isinstance(vertex, ItemVertex):
            return self._item_neighbors(vertex, edge_name)
        elif isinstance(vertex, AttributeVertex):
            if edge_name == "content":
                return (MetaItemVertex(vertex.attribute),)
        elif isinstance(vertex, MetaItemVertex):
            if edge_name == "argument":
                return (MetaItemVertex(child) for child in vertex.node.arguments)
        raise ValueError(f"no edge {edge_name!r} on {type_name}")

    def _item_neighbors(self, vertex: ItemVertex, edge_name: str) -> Iterable[Any]:
        snapshot, item = vertex.snapshot, vertex.item
        if edge_name == "importable_path":
            return (PathVertex(p) for p in snapshot.paths_for(item.id))
        if edge_name == "span":
            return (SpanVertex(item.span),) if item.span is not None else ()
        if edge_name == "attribute":
            return (AttributeVertex(a) for a in item.attributes)
        if edge_name == "impl":
            return (ItemVertex(snapshot, i) for i in snapshot.impls_of(item))
        if edge_name == "field":
            return (ItemVertex(snapshot, f) for f in snapshot.fields_of(item))
        if edge_name == "variant":
            return (ItemVertex(snapshot, v) for v in snapshot.variants_of(item))
        if edge_name == "parameter":
            if isinstance(item.data, FunctionData):
                return (ParameterVertex(n) for n in item.data.parameter_names)
        if edge_name == "method":
            if isinstance(item.data, (TraitData, ImplData)):
                return (
                    ItemVertex(snapshot, snapshot.item(m)) for m in item.data.methods
                )
        if edge_name == "implemented_trait":
            if isinstance(item.data, ImplData) and item.data.implemented_trait_name:
                return (
                    ImplementedTraitVertex(
                        name=item.data.implemented_trait_name,
                        path=item.data.implemented_trait_path,
                    ),
                )
            if isinstance(item.data, ImplData):
                return ()
        raise ValueError(f"no edge {edge_name!r} on item kind {item.kind!r}")

    def resolve_coercion(self, vertex: Any, from_type: str, to_type: str) -> bool:
        if isinstance(vertex, ItemVertex):
            concrete = concrete_type_of(vertex.item)
            return SNAPSHOT_PAIR_SCHEMA.is_subtype(concrete, to_type)
        # Non-item vertices only ever face their own concrete type.
        return False
