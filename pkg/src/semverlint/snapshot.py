"""Normalized API snapshots of a single crate version.

A snapshot is a flat table of items (structs, enums, traits, functions,
methods, fields, variants, impls, modules) keyed by opaque ids, plus a root
module from which importable paths are derived.  Item ids are meaningful only
within one snapshot; across snapshots, items are identified by importable
path.  The JSON wire format is documented in docs/snapshot-format.md and
machine-checkable via docs/snapshot.schema.json.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Union

from .errors import DanglingEdge, MalformedInput, UnknownItem, UnsupportedFormatVersion

__all__ = [
    "AUTO_TRAITS",
    "FORMAT_VERSION",
    "ApiItem",
    "ApiSnapshot",
    "AttributeNode",
    "EnumData",
    "FieldData",
    "FunctionData",
    "ImplData",
    "ImportablePath",
    "ModuleData",
    "Reexport",
    "Span",
    "StructData",
    "TraitData",
    "VariantData",
    "dump_snapshot",
    "is_public_api",
    "item_importable_paths",
    "load_snapshot",
]

FORMAT_VERSION = 1

KINDS = frozenset({
    "struct", "enum", "variant-plain", "variant-tuple", "variant-struct",
    "field", "function", "method", "trait", "impl", "module",
})
VISIBILITIES = frozenset({"public", "crate", "private"})
STRUCT_KINDS = frozenset({"unit", "tuple", "plain"})
IMPL_PROVENANCES = frozenset({"auto-trait", "derive", "ordinary"})

# Traits the compiler implements automatically whenever a type's contents
# permit; losing one is a breaking change no source diff shows directly.
AUTO_TRAITS = frozenset({"Send", "Sync", "Unpin", "UnwindSafe", "RefUnwindSafe"})

VARIANT_KINDS = frozenset({"variant-plain", "variant-tuple", "variant-struct"})


@dataclass(frozen=True)
class Span:
    filename: str
    begin_line: int


@dataclass(frozen=True)
class AttributeNode:
    """One attribute as a small tree, e.g. #[repr(C)] or #[doc(hidden)]."""

    raw_value: str
    base: str
    assigned_value: str | None = None
    arguments: tuple[AttributeNode, ...] = ()


@dataclass(frozen=True)
class Reexport:
    """A `use` declaration inside a module.

    Exactly one of target (an item id in this snapshot) and external (an
    unresolved cross-crate path) is set.  External re-exports never
    contribute importable paths.
    """

    name: str
    target: str | None
    external: str | None
    public: bool


@dataclass(frozen=True)
class ModuleData:
    items: tuple[str, ...]
    reexports: tuple[Reexport, ...]


@dataclass(frozen=True)
class StructData:
    struct_kind: str
    fields: tuple[str, ...]
    impls: tuple[str, ...]


@dataclass(frozen=True)
class EnumData:
    repr_int: str | None
    variants: tuple[str, ...]
    impls: tuple[str, ...]


@dataclass(frozen=True)
class VariantData:
    fields: tuple[str, ...]


@dataclass(frozen=True)
class FieldData:
    type_text: str


@dataclass(frozen=True)
class FunctionData:
    # The receiver (self) is not listed; a method's arity at call sites
    # equals len(parameter_names).
    parameter_names: tuple[str, ...]
    is_unsafe: bool
    is_const: bool


@dataclass(frozen=True)
class TraitData:
    is_unsafe: bool
    methods: tuple[str, ...]


@dataclass(frozen=True)
class ImplData:
    is_unsafe: bool
    is_negative: bool
    implemented_trait_name: str | None
    implemented_trait_path: tuple[str, ...] | None
    methods: tuple[str, ...]
    provenance: str


KindData = Union[
    ModuleData, StructData, EnumData, VariantData, FieldData,
    FunctionData, TraitData, ImplData,
]


@dataclass(frozen=True)
class ApiItem:
    id: str
    kind: str
    name: str
    visibility: str
    doc_hidden: bool
    attributes: tuple[AttributeNode, ...]
    span: Span | None
    data: KindData


@dataclass(frozen=True)
class ImportablePath:
    """A path at which an item can be imported by downstream code.

    Enumeration only ever produces publicly importable paths, so public_api
    is true for every path this library derives; the flag is part of the
    format so producers with richer visibility models stay representable.
    """

    segments: tuple[str, ...]
    public_api: bool


class ApiSnapshot:
    """Immutable view of one crate version's public surface."""

    def __init__(
        self,
        crate_name: str,
        crate_version: str,
        items: dict[str, ApiItem],
        root_module: str,
        format_version: int = FORMAT_VERSION,
    ) -> None:
        self.format_version = format_version
        self.crate_name = crate_name
        self.crate_version = crate_version
        self.items = items
        self.root_module = root_module

    def item(self, item_id: str) -> ApiItem:
        try:
            return self.items[item_id]
        except KeyError:
            raise UnknownItem(item_id) from None

    @cached_property
    def _path_table(self) -> dict[str, tuple[ImportablePath, ...]]:
        collected: dict[str, set[tuple[str, ...]]] = {}
        root_path = (self.crate_name,)
        collected[self.root_module] = {root_path}
        # Paths follow simple module chains: expansion never re-enters a
        # module already on the current prefix, so cycles stay finite.
        stack: list[tuple[str, tuple[str, ...], frozenset[str]]] = [
            (self.root_module, root_path, frozenset({self.root_module}))
        ]
        while stack:
            module_id, prefix, chain = stack.pop()
            module = self.items[module_id]
            assert isinstance(module.data, ModuleData)
            hops: list[tuple[str, str]] = []
            for child_id in module.data.items:
                child = self.items[child_id]
                if child.visibility == "public":
                    hops.append((child_id, child.name))
            for reexport in module.data.reexports:
                if not reexport.public or reexport.target is None:
                    continue
                # Re-exporting anything less than public is rejected by the
                # compiler, so such edges grant no path.
                if self.items[reexport.target].visibility == "public":
                    hops.append((reexport.target, reexport.name))
            for target_id, segment in hops:
                path = prefix + (segment,)
                collected.setdefault(target_id, set()).add(path)
                if self.items[target_id].kind == "module" and target_id not in chain:
                    stack.append((target_id, path, chain | {target_id}))
        return {
            item_id: tuple(
                ImportablePath(segments=p, public_api=True) for p in sorted(paths)
            )
            for item_id, paths in collected.items()
        }

    @cached_property
    def _item_by_path(self) -> dict[tuple[str, ...], str]:
        table: dict[tuple[str, ...], str] = {}
        for item_id, paths in self._path_table.items():
            for path in paths:
                table[path.segments] = item_id
        return table

    def paths_for(self, item_id: str) -> tuple[ImportablePath, ...]:
        self.item(item_id)
        return self._path_table.get(item_id, ())

    def item_at_path(self, segments: tuple[str, ...] | list[str]) -> ApiItem | None:
        item_id = self._item_by_path.get(tuple(segments))
        return None if item_id is None else self.items[item_id]

    # Child lookups used by the checker's hidden-item filter and by witness
    # generation; they read the same tables the adapter exposes to queries.

    def variants_of(self, enum_item: ApiItem) -> tuple[ApiItem, ...]:
        if not isinstance(enum_item.data, EnumData):
            return ()
        return tuple(self.items[v] for v in enum_item.data.variants)

    def fields_of(self, item: ApiItem) -> tuple[ApiItem, ...]:
        if isinstance(item.data, (StructData, VariantData)):
            return tuple(self.items[f] for f in item.data.fields)
        return ()

    def impls_of(self, item: ApiItem) -> tuple[ApiItem, ...]:
        if isinstance(item.data, (StructData, EnumData)):
            return tuple(self.items[i] for i in item.data.impls)
        return ()

    def inherent_methods_of(self, item: ApiItem) -> tuple[ApiItem, ...]:
        methods: list[ApiItem] = []
        for impl in self.impls_of(item):
            assert isinstance(impl.data, ImplData)
            if impl.data.implemented_trait_name is None:
                methods.extend(self.items[m] for m in impl.data.methods)
        return tuple(methods)


def item_importable_paths(snapshot: ApiSnapshot, item_id: str) -> tuple[ImportablePath, ...]:
    """All publicly importable paths of an item, lexicographically ordered."""
    return snapshot.paths_for(item_id)


def is_public_api(snapshot: ApiSnapshot, item_id: str) -> bool:
    """True when downstream code can reach the item and docs admit it exists."""
    item = snapshot.item(item_id)
    if item.visibility != "public" or item.doc_hidden:
        return False
    return any(p.public_api for p in snapshot.paths_for(item_id))


# --- loading ----------------------------------------------------------------

_TOP_KEYS = {"format_version", "crate_name", "crate_version", "root_module", "items"}
_ITEM_REQUIRED = {"kind", "name", "visibility", "attributes", "data"}
_ITEM_OPTIONAL = {"span"}


def _fail(message: str) -> MalformedInput:
    return MalformedInput(message)


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise _fail(message)


def _str_field(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    _expect(isinstance(value, str), f"{where}: {key} must be a string")
    return value


def _parse_attribute(raw: Any, where: str) -> AttributeNode:
    _expect(isinstance(raw, dict), f"{where}: attribute must be an object")
    unknown = set(raw) - {"raw_value", "base", "assigned_value", "arguments"}
    _expect(not unknown, f"{where}: unknown attribute keys {sorted(unknown)}")
    raw_value = _str_field(raw, "raw_value", where)
    base = _str_field(raw, "base", where)
    assigned = raw.get("assigned_value")
    _expect(
        assigned is None or isinstance(assigned, str),
        f"{where}: assigned_value must be a string or null",
    )
    arguments_raw = raw.get("arguments", [])
    _expect(isinstance(arguments_raw, list), f"{where}: arguments must be a list")
    arguments = tuple(
        _parse_attribute(a, f"{where}/arguments[{i}]") for i, a in enumerate(arguments_raw)
    )
    return AttributeNode(
        raw_value=raw_value, base=base, assigned_value=assigned, arguments=arguments
    )


def _parse_span(raw: Any, where: str) -> Span | None:
    if raw is None:
        return None
    _expect(isinstance(raw, dict), f"{where}: span must be an object or null")
    unknown = set(raw) - {"filename", "begin_line"}
    _expect(not unknown, f"{where}: unknown span keys {sorted(unknown)}")
    filename = _str_field(raw, "filename", where)
    begin_line = raw.get("begin_line")
    _expect(
        isinstance(begin_line, int) and not isinstance(begin_line, bool) and begin_line >= 1,
        f"{where}: begin_line must be a positive integer",
    )
    return Span(filename=filename, begin_line=begin_line)


def _id_list(raw: Any, where: str, key: str) -> tuple[str, ...]:
    value = raw.get(key)
    _expect(
        isinstance(value, list) and all(isinstance(x, str) for x in value),
        f"{where}: {key} must be a list of item ids",
    )
    return tuple(value)


def _bool_field(raw: dict, key: str, where: str) -> bool:
    value = raw.get(key)
    _expect(isinstance(value, bool), f"{where}: {key} must be a boolean")
    return value


def _check_keys(raw: dict, allowed: set[str], where: str) -> None:
    unknown = set(raw) - allowed
    _expect(not unknown, f"{where}: unknown keys {sorted(unknown)}")
    missing = allowed - set(raw)
    _expect(not missing, f"{where}: missing keys {sorted(missing)}")


def _parse_data(kind: str, raw: Any, where: str) -> KindData:
    _expect(isinstance(raw, dict), f"{where}: data must be an object")
    if kind == "module":
        _check_keys(raw, {"items", "reexports"}, where)
        reexports_raw = raw["reexports"]
        _expect(isinstance(reexports_raw, list), f"{where}: reexports must be a list")
        reexports = []
        for i, entry in enumerate(reexports_raw):
            sub = f"{where}/reexports[{i}]"
            _expect(isinstance(entry, dict), f"{sub}: must be an object")
            _check_keys(entry, {"name", "target", "external", "public"}, sub)
            target = entry["target"]
            external = entry["external"]
            _expect(
                target is None or isinstance(target, str),
                f"{sub}: target must be an id or null",
            )
            _expect(
                external is None or isinstance(external, str),
                f"{sub}: external must be a path string or null",
            )
            _expect(
                (target is None) != (external is None),
                f"{sub}: exactly one of target and external must be set",
            )
            reexports.append(
                Reexport(
                    name=_str_field(entry, "name", sub),
                    target=target,
                    external=external,
                    public=_bool_field(entry, "public", sub),
                )
            )
        return ModuleData(items=_id_list(raw, where, "items"), reexports=tuple(reexports))
    if kind == "struct":
        _check_keys(raw, {"struct_kind", "fields", "impls"}, where)
        struct_kind = _str_field(raw, "struct_kind", where)
        _expect(struct_kind in STRUCT_KINDS, f"{where}: bad struct_kind {struct_kind!r}")
        return StructData(
            struct_kind=struct_kind,
            fields=_id_list(raw, where, "fields"),
            impls=_id_list(raw, where, "impls"),
        )
    if kind == "enum":
        _check_keys(raw, {"repr_int", "variants", "impls"}, where)
        repr_int = raw["repr_int"]
        _expect(
            repr_int is None or isinstance(repr_int, str),
            f"{where}: repr_int must be a string or null",
        )
        return EnumData(
            repr_int=repr_int,
            variants=_id_list(raw, where, "variants"),
            impls=_id_list(raw, where, "impls"),
        )
    if kind in VARIANT_KINDS:
        _check_keys(raw, {"fields"}, where)
        return VariantData(fields=_id_list(raw, where, "fields"))
    if kind == "field":
        _check_keys(raw, {"type_text"}, where)
        return FieldData(type_text=_str_field(raw, "type_text", where))
    if kind in ("function", "method"):
        _check_keys(raw, {"parameter_names", "is_unsafe", "is_const"}, where)
        params = raw["parameter_names"]
        _expect(
            isinstance(params, list) and all(isinstance(p, str) for p in params),
            f"{where}: parameter_names must be a list of strings",
        )
        return FunctionData(
            parameter_names=tuple(params),
            is_unsafe=_bool_field(raw, "is_unsafe", where),
            is_const=_bool_field(raw, "is_const", where),
        )
    if kind == "trait":
        _check_keys(raw, {"is_unsafe", "methods"}, where)
        return TraitData(
            is_unsafe=_bool_field(raw, "is_unsafe", where),
            methods=_id_list(raw, where, "methods"),
        )
    assert kind == "impl"
    _check_keys(
        raw,
        {
            "is_unsafe", "is_negative", "implemented_trait_name",
            "implemented_trait_path", "methods", "provenance",
        },
        where,
    )
    trait_name = raw["implemented_trait_name"]
    _expect(
        trait_name is None or isinstance(trait_name, str),
        f"{where}: implemented_trait_name must be a string or null",
    )
    trait_path_raw = raw["implemented_trait_path"]
    trait_path: tuple[str, ...] | None
    if trait_path_raw is None:
        trait_path = None
    else:
        _expect(
            isinstance(trait_path_raw, list)
            and all(isinstance(s, str) for s in trait_path_raw),
            f"{where}: implemented_trait_path must be a list of strings or null",
        )
        trait_path = tuple(trait_path_raw)
    provenance = _str_field(raw, "provenance", where)
    _expect(provenance in IMPL_PROVENANCES, f"{where}: bad provenance {provenance!r}")
    if provenance in ("auto-trait", "derive"):
        _expect(
            trait_name is not None,
            f"{where}: {provenance} impl must name its trait",
        )
    if provenance == "auto-trait":
        _expect(
            trait_name in AUTO_TRAITS,
            f"{where}: {trait_name!r} is not an auto trait",
        )
    return ImplData(
        is_unsafe=_bool_field(raw, "is_unsafe", where),
        is_negative=_bool_field(raw, "is_negative", where),
        implemented_trait_name=trait_name,
        implemented_trait_path=trait_path,
        methods=_id_list(raw, where, "methods"),
        provenance=provenance,
    )


def _derive_doc_hidden(attributes: tuple[AttributeNode, ...]) -> bool:
    for attribute in attributes:
        if attribute.base == "doc":
            if any(arg.base == "hidden" for arg in attribute.arguments):
                return True
    return False


def _edge_targets(item: ApiItem) -> list[tuple[str, str | None]]:
    """(referenced id, required kind or None) pairs for validation."""
    data = item.data
    if isinstance(data, ModuleData):
        refs: list[tuple[str, str | None]] = [(i, None) for i in data.items]
        refs.extend((r.target, None) for r in data.reexports if r.target is not None)
        return refs
    if isinstance(data, StructData):
        return [(f, "field") for f in data.fields] + [(i, "impl") for i in data.impls]
    if isinstance(data, EnumData):
        return [(v, "variant") for v in data.variants] + [(i, "impl") for i in data.impls]
    if isinstance(data, VariantData):
        return [(f, "field") for f in data.fields]
    if isinstance(data, TraitData):
        return [(m, "method") for m in data.methods]
    if isinstance(data, ImplData):
        return [(m, "method") for m in data.methods]
    return []


def _validate_graph(snapshot: ApiSnapshot) -> None:
    items = snapshot.items
    if snapshot.root_module not in items:
        raise DanglingEdge("<root>", snapshot.root_module)
    root = items[snapshot.root_module]
    _expect(root.kind == "module", "root_module must reference a module item")
    _expect(root.visibility == "public", "root module must be public")
    for item in items.values():
        for referenced, required_kind in _edge_targets(item):
            if referenced not in items:
                raise DanglingEdge(item.id, referenced)
            if required_kind == "variant":
                _expect(
                    items[referenced].kind in VARIANT_KINDS,
                    f"item {item.id!r}: {referenced!r} is not a variant",
                )
            elif required_kind is not None:
                _expect(
                    items[referenced].kind == required_kind,
                    f"item {item.id!r}: {referenced!r} is not a {required_kind}",
                )
        # Tuple shapes name fields by ordinal; unit structs have none.
        if isinstance(item.data, StructData):
            if item.data.struct_kind == "unit":
                _expect(not item.data.fields, f"unit struct {item.id!r} has fields")
            if item.data.struct_kind == "tuple":
                _check_ordinal_fields(snapshot, item)
        if item.kind == "variant-tuple":
            _check_ordinal_fields(snapshot, item)
        if item.kind == "variant-plain":
            assert isinstance(item.data, VariantData)
            _expect(not item.data.fields, f"plain variant {item.id!r} has fields")


def _check_ordinal_fields(snapshot: ApiSnapshot, item: ApiItem) -> None:
    assert isinstance(item.data, (StructData, VariantData))
    names = [snapshot.items[f].name for f in item.data.fields if f in snapshot.items]
    expected = [str(i) for i in range(len(names))]
    _expect(
        names == expected,
        f"tuple fields of {item.id!r} must be named by ordinal, got {names}",
    )


def load_snapshot(source: bytes | str | os.PathLike) -> ApiSnapshot:
    """Load and validate a snapshot from JSON bytes or a filesystem path."""
    if isinstance(source, (bytes, bytearray)):
        raw_bytes = bytes(source)
    else:
        with open(source, "rb") as handle:
            raw_bytes = handle.read()
    try:
        document = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise _fail(f"snapshot is not valid JSON: {exc}") from exc
    _expect(isinstance(document, dict), "snapshot must be a JSON object")

    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedFormatVersion(version)
    unknown = set(document) - _TOP_KEYS
    _expect(not unknown, f"unknown top-level keys {sorted(unknown)}")
    missing = _TOP_KEYS - set(document)
    _expect(not missing, f"missing top-level keys {sorted(missing)}")

    crate_name = document["crate_name"]
    _expect(
        isinstance(crate_name, str) and crate_name != "",
        "crate_name must be a non-empty string",
    )
    crate_version = document["crate_version"]
    _expect(isinstance(crate_version, str), "crate_version must be a string")
    root_module = document["root_module"]
    _expect(isinstance(root_module, str), "root_module must be an item id")
    items_raw = document["items"]
    _expect(isinstance(items_raw, dict), "items must be an object keyed by id")

    items: dict[str, ApiItem] = {}
    for item_id, raw in items_raw.items():
        where = f"items[{item_id!r}]"
        _expect(isinstance(raw, dict), f"{where}: must be an object")
        unknown_keys = set(raw) - _ITEM_REQUIRED - _ITEM_OPTIONAL
        _expect(not unknown_keys, f"{where}: unknown keys {sorted(unknown_keys)}")
        missing_keys = _ITEM_REQUIRED - set(raw)
        _expect(not missing_keys, f"{where}: missing keys {sorted(missing_keys)}")
        kind = _str_field(raw, "kind", where)
        _expect(kind in KINDS, f"{where}: unknown kind {kind!r}")
        visibility = _str_field(raw, "visibility", where)
        _expect(visibility in VISIBILITIES, f"{where}: bad visibility {visibility!r}")
        attributes_raw = raw["attributes"]
        _expect(isinstance(attributes_raw, list), f"{where}: attributes must be a list")
        attributes = tuple(
            _parse_attribute(a, f"{where}/attributes[{i}]")
            for i, a in enumerate(attributes_raw)
        )
        items[item_id] = ApiItem(
            id=item_id,
            kind=kind,
            name=_str_field(raw, "name", where),
            visibility=visibility,
            doc_hidden=_derive_doc_hidden(attributes),
            attributes=attributes,
            span=_parse_span(raw.get("span"), where),
            data=_parse_data(kind, raw["data"], where),
        )

    snapshot = ApiSnapshot(
        crate_name=crate_name,
        crate_version=crate_version,
        items=items,
        root_module=root_module,
    )
    _validate_graph(snapshot)
    return snapshot


def _attribute_to_dict(attribute: AttributeNode) -> dict[str, Any]:
    out: dict[str, Any] = {"raw_value": attribute.raw_value, "base": attribute.base}
    if attribute.assigned_value is not None:
        out["assigned_value"] = attribute.assigned_value
    if attribute.arguments:
        out["arguments"] = [_attribute_to_dict(a) for a in attribute.arguments]
    return out


def _data_to_dict(data: KindData) -> dict[str, Any]:
    if isinstance(data, ModuleData):
        return {
            "items": list(data.items),
            "reexports": [
                {
                    "name": r.name,
                    "target": r.target,
                    "external": r.external,
                    "public": r.public,
                }
                for r in data.reexports
            ],
        }
    if isinstance(data, StructData):
        return {
            "struct_kind": data.struct_kind,
            "fields": list(data.fields),
            "impls": list(data.impls),
        }
    if isinstance(data, EnumData):
        return {
            "repr_int": data.repr_int,
            "variants": list(data.variants),
            "impls": list(data.impls),
        }
    if isinstance(data, VariantData):
        return {"fields": list(data.fields)}
    if isinstance(data, FieldData):
        return {"type_text": data.type_text}
    if isinstance(data, FunctionData):
        return {
            "parameter_names": list(data.parameter_names),
            "is_unsafe": data.is_unsafe,
            "is_const": data.is_const,
        }
    if isinstance(data, TraitData):
        return {"is_unsafe": data.is_unsafe, "methods": list(data.methods)}
    assert isinstance(data, ImplData)
    return {
        "is_unsafe": data.is_unsafe,
        "is_negative": data.is_negative,
        "implemented_trait_name": data.implemented_trait_name,
        "implemented_trait_path": (
            None if data.implemented_trait_path is None
            else list(data.implemented_trait_path)
        ),
        "methods": list(data.methods),
        "provenance": data.provenance,
    }


def snapshot_to_dict(snapshot: ApiSnapshot) -> dict[str, Any]:
    items: dict[str, Any] = {}
    for item_id in sorted(snapshot.items):
        item = snapshot.items[item_id]
        entry: dict[str, Any] = {
            "kind": item.kind,
            "name": item.name,
            "visibility": item.visibility,
            "attributes": [_attribute_to_dict(a) for a in item.attributes],
            "data": _data_to_dict(item.data),
        }
        if item.span is not None:
            entry["span"] = {
                "filename": item.span.filename,
                "begin_line": item.span.begin_line,
            }
        items[item_id] = entry
    return {
        "format_version": snapshot.format_version,
        "crate_name": snapshot.crate_name,
        "crate_version": snapshot.crate_version,
        "root_module": snapshot.root_module,
        "items": items,
    }


def dump_snapshot(snapshot: ApiSnapshot) -> bytes:
    """Serialize deterministically; load(dump(s)) is isomorphic to s under ids."""
    text = json.dumps(snapshot_to_dict(snapshot), indent=1, sort_keys=True)
    return (text + "\n").encode("utf-8")
