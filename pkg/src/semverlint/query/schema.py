"""Vertex schemas and static query checking.

A :class:`Schema` names the vertex types an adapter exposes: their
properties (with value kinds), their edges (with target types), and a
single-inheritance subtype hierarchy used by coercions.  ``check_query``
validates a parsed document against a schema and returns a
:class:`CheckedQuery`, the annotated form the interpreter executes.

``SNAPSHOT_PAIR_SCHEMA`` is the shipped schema for baseline/current crate
pairs; ``render_schema`` prints any schema in the stable textual form kept
under docs/schema.txt.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Union

from ..errors import (
    DuplicateTagName,
    TagUsedBeforeDefinition,
    TypeMismatch,
    UnknownField,
    UnknownType,
)
from .syntax import (
    FilterDirective,
    FoldDirective,
    Operand,
    OptionalDirective,
    OutputDirective,
    QueryDocument,
    Selection,
    TagDirective,
    TransformDirective,
)

TEXT = "Text"
INT = "Int"
BOOLEAN = "Boolean"
LIST_TEXT = "[Text]"

_ORDERED_KINDS = (INT,)
_LIST_KINDS = {LIST_TEXT: TEXT, "[Int]": INT, "[Boolean]": BOOLEAN}


def element_kind(kind: str) -> str | None:
    """The element kind of a list kind, or None for scalars."""
    return _LIST_KINDS.get(kind)


@dataclasses.dataclass(frozen=True)
class PropertyDef:
    name: str
    kind: str
    nullable: bool = False


@dataclasses.dataclass(frozen=True)
class EdgeDef:
    name: str
    target: str
    multiplicity: str = "many"  # "many" | "one" | "at_most_one"


@dataclasses.dataclass(frozen=True)
class VertexDef:
    name: str
    parent: str | None = None
    abstract: bool = False
    properties: tuple[PropertyDef, ...] = ()
    edges: tuple[EdgeDef, ...] = ()


class Schema:
    """A set of vertex definitions with one designated root type."""

    def __init__(self, vertices: Iterable[VertexDef], root_type: str) -> None:
        self.types: dict[str, VertexDef] = {}
        for vertex in vertices:
            if vertex.name in self.types:
                raise ValueError(f"duplicate vertex type {vertex.name!r}")
            self.types[vertex.name] = vertex
        for vertex in self.types.values():
            if vertex.parent is not None and vertex.parent not in self.types:
                raise ValueError(
                    f"vertex {vertex.name!r} names unknown parent {vertex.parent!r}"
                )
        if root_type not in self.types:
            raise ValueError(f"unknown root type {root_type!r}")
        self.root_type = root_type

    def _chain(self, type_name: str) -> Iterable[VertexDef]:
        current: str | None = type_name
        while current is not None:
            vertex = self.types[current]
            yield vertex
            current = vertex.parent

    def property_def(self, type_name: str, prop_name: str) -> PropertyDef | None:
        for vertex in self._chain(type_name):
            for prop in vertex.properties:
                if prop.name == prop_name:
                    return prop
        return None

    def edge_def(self, type_name: str, edge_name: str) -> EdgeDef | None:
        for vertex in self._chain(type_name):
            for edge in vertex.edges:
                if edge.name == edge_name:
                    return edge
        return None

    def is_subtype(self, sub: str, sup: str) -> bool:
        """True when ``sub`` equals ``sup`` or inherits from it."""
        return any(vertex.name == sup for vertex in self._chain(sub))

    def subtypes_of(self, type_name: str) -> tuple[str, ...]:
        """All types coercible from ``type_name``, itself included, sorted."""
        found = [
            name for name in self.types if self.is_subtype(name, type_name)
        ]
        return tuple(sorted(found))


def render_schema(schema: Schema) -> str:
    """Render a schema in the stable text form used for documentation."""
    lines: list[str] = []
    for name in sorted(schema.types):
        vertex = schema.types[name]
        head = "abstract vertex" if vertex.abstract else "vertex"
        suffix = ""
        if vertex.parent is not None:
            suffix += f" : {vertex.parent}"
        if name == schema.root_type:
            suffix += " (root)"
        lines.append(f"{head} {name}{suffix}")
        for prop in vertex.properties:
            nullable = "?" if prop.nullable else ""
            lines.append(f"  property {prop.name}: {prop.kind}{nullable}")
        for edge in vertex.edges:
            if edge.multiplicity == "many":
                target = f"[{edge.target}]"
            elif edge.multiplicity == "at_most_one":
                target = f"{edge.target} [0..1]"
            else:
                target = f"{edge.target} [1]"
            lines.append(f"  edge {edge.name}: {target}")
        lines.append("")
    return "\n".join(lines)


_ITEM = VertexDef(
    "Item",
    abstract=True,
    properties=(
        PropertyDef("name", TEXT),
        PropertyDef("visibility_limit", TEXT),
        PropertyDef("doc_hidden", BOOLEAN),
    ),
    edges=(
        EdgeDef("importable_path", "ImportablePath"),
        EdgeDef("span", "Span", multiplicity="at_most_one"),
        EdgeDef("attribute", "Attribute"),
    ),
)

SNAPSHOT_PAIR_SCHEMA = Schema(
    [
        VertexDef(
            "CrateDiff",
            edges=(
                EdgeDef("baseline", "Crate", multiplicity="one"),
                EdgeDef("current", "Crate", multiplicity="one"),
            ),
        ),
        VertexDef("Crate", edges=(EdgeDef("item", "Item"),)),
        _ITEM,
        VertexDef(
            "ImplOwner",
            parent="Item",
            abstract=True,
            edges=(EdgeDef("impl", "Impl"),),
        ),
        VertexDef(
            "Struct",
            parent="ImplOwner",
            properties=(PropertyDef("struct_kind", TEXT),),
            edges=(EdgeDef("field", "Field"),),
        ),
        VertexDef(
            "Enum",
            parent="ImplOwner",
            properties=(PropertyDef("repr_int", TEXT, nullable=True),),
            edges=(EdgeDef("variant", "Variant"),),
        ),
        VertexDef(
            "Variant",
            parent="Item",
            abstract=True,
            edges=(EdgeDef("field", "Field"),),
        ),
        VertexDef("PlainVariant", parent="Variant"),
        VertexDef("TupleVariant", parent="Variant"),
        VertexDef("StructVariant", parent="Variant"),
        VertexDef("Field", parent="Item"),
        VertexDef(
            "Function",
            parent="Item",
            properties=(
                PropertyDef("unsafe", BOOLEAN),
                PropertyDef("const", BOOLEAN),
            ),
            edges=(EdgeDef("parameter", "Parameter"),),
        ),
        VertexDef(
            "Method",
            parent="Item",
            properties=(
                PropertyDef("unsafe", BOOLEAN),
                PropertyDef("const", BOOLEAN),
            ),
            edges=(EdgeDef("parameter", "Parameter"),),
        ),
        VertexDef(
            "Trait",
            parent="Item",
            properties=(PropertyDef("unsafe", BOOLEAN),),
            edges=(EdgeDef("method", "Method"),),
        ),
        VertexDef(
            "Impl",
            parent="Item",
            properties=(
                PropertyDef("unsafe", BOOLEAN),
                PropertyDef("negative", BOOLEAN),
                PropertyDef("provenance", TEXT),
            ),
            edges=(
                EdgeDef("implemented_trait", "ImplementedTrait", multiplicity="at_most_one"),
                EdgeDef("method", "Method"),
            ),
        ),
        VertexDef("Module", parent="Item"),
        VertexDef(
            "ImplementedTrait",
            properties=(
                PropertyDef("name", TEXT),
                PropertyDef("path", LIST_TEXT, nullable=True),
            ),
        ),
        VertexDef(
            "ImportablePath",
            properties=(
                PropertyDef("path", LIST_TEXT),
                PropertyDef("public_api", BOOLEAN),
            ),
        ),
        VertexDef(
            "Span",
            properties=(
                PropertyDef("filename", TEXT),
                PropertyDef("begin_line", INT),
            ),
        ),
        VertexDef(
            "Attribute",
            properties=(PropertyDef("raw_value", TEXT),),
            edges=(EdgeDef("content", "AttributeMetaItem", multiplicity="one"),),
        ),
        VertexDef(
            "AttributeMetaItem",
            properties=(
                PropertyDef("base", TEXT),
                PropertyDef("assigned_item", TEXT, nullable=True),
            ),
            edges=(EdgeDef("argument", "AttributeMetaItem"),),
        ),
        VertexDef("Parameter", properties=(PropertyDef("name", TEXT),)),
    ],
    root_type="CrateDiff",
)


# --------------------------------------------------------------------------
# Checked query representation


@dataclasses.dataclass(frozen=True)
class CheckedProperty:
    name: str
    kind: str
    nullable: bool
    filters: tuple[FilterDirective, ...]
    tag_names: tuple[str, ...]
    output_names: tuple[str, ...]


@dataclasses.dataclass(frozen=True)
class CheckedCoercion:
    target: str
    children: tuple["CheckedNode", ...]


@dataclasses.dataclass(frozen=True)
class CheckedEdge:
    name: str
    target: str
    fold: bool
    optional: bool
    counted: bool
    count_filters: tuple[FilterDirective, ...]
    count_tag_names: tuple[str, ...]
    count_output_names: tuple[str, ...]
    children: tuple["CheckedNode", ...]
    subtree_output_names: tuple[str, ...]
    subtree_tag_names: tuple[str, ...]


CheckedNode = Union[CheckedProperty, CheckedCoercion, CheckedEdge]


@dataclasses.dataclass(frozen=True)
class CheckedQuery:
    root_type: str
    selections: tuple[CheckedNode, ...]
    declared_parameters: frozenset[str]
    output_names: tuple[str, ...]
    # (parameter name, filter op, required kind or None when unconstrained)
    parameter_expectations: tuple[tuple[str, str, str | None], ...]


def _literal_kind(value: object) -> str | None:
    if isinstance(value, bool):
        return BOOLEAN
    if isinstance(value, int):
        return INT
    if isinstance(value, str):
        return TEXT
    if isinstance(value, tuple):
        inner = {_literal_kind(item) for item in value}
        if len(inner) == 1:
            element = inner.pop()
            for list_kind, elem in _LIST_KINDS.items():
                if elem == element:
                    return list_kind
        return "[?]" if not inner else None
    return None


class _Checker:
    def __init__(self, document: QueryDocument, schema: Schema) -> None:
        self.document = document
        self.schema = schema
        self.tags: dict[str, str] = {}  # visible tags: name -> kind
        self.declared_tags: set[str] = set()
        self.param_expectations: list[tuple[str, str, str | None]] = []

    def check(self) -> CheckedQuery:
        if self.document.root_type not in self.schema.types:
            raise UnknownType(f"unknown root type {self.document.root_type!r}")
        if self.document.root_type != self.schema.root_type:
            raise UnknownType(
                f"queries against this schema must start at "
                f"{self.schema.root_type!r}, not {self.document.root_type!r}"
            )
        selections = self._check_block(self.document.root_type, self.document.selections)
        return CheckedQuery(
            root_type=self.document.root_type,
            selections=selections,
            declared_parameters=self.document.declared_parameters,
            output_names=self.document.output_names,
            parameter_expectations=tuple(self.param_expectations),
        )

    def _check_block(
        self, type_name: str, selections: tuple[Selection, ...]
    ) -> tuple[CheckedNode, ...]:
        return tuple(self._check_selection(type_name, node) for node in selections)

    def _check_selection(self, type_name: str, node: Selection) -> CheckedNode:
        if node.is_coercion:
            return self._check_coercion(type_name, node)
        prop = self.schema.property_def(type_name, node.name)
        if prop is not None:
            return self._check_property(type_name, prop, node)
        edge = self.schema.edge_def(type_name, node.name)
        if edge is not None:
            return self._check_edge(type_name, edge, node)
        raise UnknownField(type_name, node.name)

    def _check_coercion(self, type_name: str, node: Selection) -> CheckedCoercion:
        target = node.name
        if target not in self.schema.types:
            raise UnknownType(f"unknown type {target!r} in coercion")
        if not self.schema.is_subtype(target, type_name):
            raise TypeMismatch(
                f"cannot coerce {type_name} to {target}: not a subtype"
            )
        children = self._check_block(target, node.children or ())
        return CheckedCoercion(target=target, children=children)

    def _check_property(
        self, type_name: str, prop: PropertyDef, node: Selection
    ) -> CheckedProperty:
        if node.children is not None:
            raise TypeMismatch(
                f"property {type_name}.{prop.name} cannot have a selection block"
            )
        filters: list[FilterDirective] = []
        tag_names: list[str] = []
        output_names: list[str] = []
        for directive in node.directives:
            if isinstance(directive, FilterDirective):
                self._check_filter(directive, prop.kind, f"{type_name}.{prop.name}")
                filters.append(directive)
            elif isinstance(directive, TagDirective):
                tag_names.append(self._declare_tag(directive, node.name, prop.kind))
            elif isinstance(directive, OutputDirective):
                output_names.append(directive.name or node.name)
            else:
                label = type(directive).__name__.replace("Directive", "").lower()
                raise TypeMismatch(
                    f"@{label} does not apply to property {type_name}.{prop.name}"
                )
        return CheckedProperty(
            name=prop.name,
            kind=prop.kind,
            nullable=prop.nullable,
            filters=tuple(filters),
            tag_names=tuple(tag_names),
            output_names=tuple(output_names),
        )

    def _check_edge(
        self, type_name: str, edge: EdgeDef, node: Selection
    ) -> CheckedEdge:
        fold = any(isinstance(d, FoldDirective) for d in node.directives)
        optional = any(isinstance(d, OptionalDirective) for d in node.directives)
        counted = any(isinstance(d, TransformDirective) for d in node.directives)
        where = f"{type_name}.{edge.name}"
        if fold and optional:
            raise TypeMismatch(f"@fold and @optional cannot combine on edge {where}")
        count_filters: list[FilterDirective] = []
        count_tag_names: list[str] = []
        count_output_names: list[str] = []
        count_tag_directives: list[TagDirective] = []
        for directive in node.directives:
            if isinstance(directive, (FoldDirective, OptionalDirective, TransformDirective)):
                continue
            if not counted:
                label = type(directive).__name__.replace("Directive", "").lower()
                raise TypeMismatch(
                    f"@{label} on edge {where} requires @fold "
                    f"@transform(op: \"count\") first"
                )
            if isinstance(directive, FilterDirective):
                self._check_filter(directive, INT, f"count of {where}")
                count_filters.append(directive)
            elif isinstance(directive, TagDirective):
                count_tag_directives.append(directive)
            elif isinstance(directive, OutputDirective):
                count_output_names.append(directive.name or node.name)
        if fold:
            visible_before = set(self.tags)
            children = self._check_block(edge.target, node.children or ())
            # Tags declared inside a fold are not visible past its closing
            # brace: the fold's bindings are materialized, so there is no
            # single value a later filter could compare against.
            for tag_name in [t for t in self.tags if t not in visible_before]:
                del self.tags[tag_name]
        else:
            children = self._check_block(edge.target, node.children or ())
        # A fold's count tag becomes visible only after the fold closes, so
        # it is declared after the children are checked.
        for directive in count_tag_directives:
            count_tag_names.append(self._declare_tag(directive, node.name, INT))
        subtree_outputs: list[str] = []
        subtree_tags: list[str] = []
        _collect_subtree(children, subtree_outputs, subtree_tags)
        return CheckedEdge(
            name=edge.name,
            target=edge.target,
            fold=fold,
            optional=optional,
            counted=counted,
            count_filters=tuple(count_filters),
            count_tag_names=tuple(count_tag_names),
            count_output_names=tuple(count_output_names),
            children=children,
            subtree_output_names=tuple(subtree_outputs),
            subtree_tag_names=tuple(subtree_tags),
        )

    def _declare_tag(self, directive: TagDirective, default: str, kind: str) -> str:
        name = directive.name or default
        if name in self.declared_tags:
            raise DuplicateTagName(f"tag {name!r} is declared more than once")
        self.declared_tags.add(name)
        self.tags[name] = kind
        return name

    def _check_filter(self, directive: FilterDirective, kind: str, where: str) -> None:
        op = directive.op
        if op in ("is_null", "is_not_null"):
            return
        operand = directive.operands[0]
        if op in (">", ">=", "<", "<="):
            if kind not in _ORDERED_KINDS:
                raise TypeMismatch(
                    f"op {op!r} on {where} requires an {INT} value, got {kind}"
                )
            self._check_operand(operand, INT, op, where)
        elif op in ("=", "!="):
            self._check_operand(operand, kind, op, where)
        elif op == "one_of":
            wanted = None
            for list_kind, elem in _LIST_KINDS.items():
                if elem == kind:
                    wanted = list_kind
            if wanted is None:
                raise TypeMismatch(f"op one_of on {where} has no list kind for {kind}")
            self._check_operand(operand, wanted, op, where)
        elif op in ("contains", "not_contains"):
            elem = element_kind(kind)
            if elem is None:
                raise TypeMismatch(
                    f"op {op!r} on {where} requires a list value, got {kind}"
                )
            self._check_operand(operand, elem, op, where)
        elif op == "regex":
            if kind != TEXT:
                raise TypeMismatch(
                    f"op regex on {where} requires a {TEXT} value, got {kind}"
                )
            self._check_operand(operand, TEXT, op, where)

    def _check_operand(self, operand: Operand, wanted: str, op: str, where: str) -> None:
        if operand.kind == "parameter":
            self.param_expectations.append((operand.value, op, wanted))
            return
        if operand.kind == "tag":
            declared = self.tags.get(operand.value)
            if declared is None:
                raise TagUsedBeforeDefinition(
                    f"tag {operand.value!r} is not visible at {where}"
                )
            if declared != wanted:
                raise TypeMismatch(
                    f"op {op!r} on {where} needs a {wanted} operand; "
                    f"tag {operand.value!r} holds {declared}"
                )
            return
        got = _literal_kind(operand.value)
        if got == "[?]" and element_kind(wanted) is not None:
            return  # the empty list matches any list kind
        if got != wanted:
            raise TypeMismatch(
                f"op {op!r} on {where} needs a {wanted} operand, got {got or 'an unsupported literal'}"
            )


def _collect_subtree(
    nodes: tuple[CheckedNode, ...], outputs: list[str], tags: list[str]
) -> None:
    for node in nodes:
        if isinstance(node, CheckedProperty):
            outputs.extend(node.output_names)
            tags.extend(node.tag_names)
        elif isinstance(node, CheckedCoercion):
            _collect_subtree(node.children, outputs, tags)
        else:
            outputs.extend(node.count_output_names)
            tags.extend(node.count_tag_names)
            outputs.extend(node.subtree_output_names)
            tags.extend(node.subtree_tag_names)


def check_query(document: QueryDocument, schema: Schema) -> CheckedQuery:
    """Validate ``document`` against ``schema``.

    Raises UnknownType, UnknownField, TypeMismatch, TagUsedBeforeDefinition,
    or DuplicateTagName; returns the annotated query on success.
    """
    return _Checker(document, schema).check()
