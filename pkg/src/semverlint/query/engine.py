"""Lazy interpreter for checked queries.

``execute_query`` walks the selection tree depth-first over an adapter,
producing one result row (a dict of output name to value) per complete
binding of the tree.  Evaluation is demand-driven: vertices are pulled from
the adapter only as rows are consumed, except inside @fold, which must
materialize its sub-stream to produce lists and counts.

Semantics reference (also in docs/query-language.md):

* sibling selections apply conjunctively, in source order;
* a filter over a null property value passes only ``is_null``;
* a filter whose tag operand is null or was never bound (its @tag sat under
  an @optional edge that matched nothing) discards the row;
* @fold over zero neighbors yields empty lists and count 0;
* @optional over zero neighbors yields a single continuation with every
  output beneath the edge set to null and every tag beneath it unbound.
"""

from __future__ import annotations

import itertools
import re
from typing import Any, Iterator, Mapping

from ..errors import AdapterFailure, MissingArgument, TypeMismatch
from .schema import (
    BOOLEAN,
    CheckedCoercion,
    CheckedEdge,
    CheckedProperty,
    CheckedQuery,
    INT,
    TEXT,
    element_kind,
)
from .syntax import FilterDirective


class _MissingTag:
    """Sentinel bound to tags beneath an @optional edge that matched nothing."""

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "MISSING"


MISSING = _MissingTag()

_SENTINEL = object()


def execute_query(
    checked: CheckedQuery,
    adapter: Any,
    arguments: Mapping[str, Any] | None = None,
) -> Iterator[dict[str, Any]]:
    """Run ``checked`` over ``adapter`` and lazily yield result rows.

    Argument presence and kinds are validated before the first row is
    produced; a parameter the query declares but ``arguments`` omits raises
    MissingArgument, and a parameter of the wrong kind raises TypeMismatch.
    """
    bound = dict(arguments or {})
    for name in sorted(checked.declared_parameters):
        if name not in bound:
            raise MissingArgument(name)
    for name, op, wanted in checked.parameter_expectations:
        _validate_argument(name, bound[name], op, wanted)
    return _Execution(checked, adapter, bound).run()


def _validate_argument(name: str, value: Any, op: str, wanted: str | None) -> None:
    if wanted is None or _matches_kind(value, wanted):
        return
    raise TypeMismatch(
        f"query parameter ${name} used with op {op!r} must be of kind {wanted}"
    )


def _matches_kind(value: Any, wanted: str) -> bool:
    element = element_kind(wanted)
    if element is not None:
        if not isinstance(value, (list, tuple)):
            return False
        return all(_matches_kind(item, element) for item in value)
    if wanted == BOOLEAN:
        return isinstance(value, bool)
    if wanted == INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if wanted == TEXT:
        return isinstance(value, str)
    return True


def _norm(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(value)
    return value


def _eq(left: Any, right: Any) -> bool:
    return _norm(left) == _norm(right)


class _Execution:
    def __init__(self, checked: CheckedQuery, adapter: Any, arguments: dict) -> None:
        self.checked = checked
        self.adapter = adapter
        self.arguments = arguments

    def run(self) -> Iterator[dict[str, Any]]:
        loc = self.checked.root_type
        starts = self._safe_iter(
            loc,
            lambda: self.adapter.resolve_starting_vertices(
                self.checked.root_type, dict(self.arguments)
            ),
        )
        names = self.checked.output_names
        for vertex in starts:
            for _tags, outputs in self._walk(
                vertex, self.checked.root_type, self.checked.selections, 0, {}, {}, loc
            ):
                yield {name: outputs[name] for name in names}

    # -- traversal ---------------------------------------------------------

    def _walk(self, vertex, type_name, selections, index, tags, outputs, loc):
        if index == len(selections):
            yield tags, outputs
            return
        node = selections[index]
        for tags2, outputs2 in self._apply(vertex, type_name, node, tags, outputs, loc):
            yield from self._walk(
                vertex, type_name, selections, index + 1, tags2, outputs2, loc
            )

    def _apply(self, vertex, type_name, node, tags, outputs, loc):
        if isinstance(node, CheckedProperty):
            yield from self._apply_property(vertex, type_name, node, tags, outputs, loc)
        elif isinstance(node, CheckedCoercion):
            yield from self._apply_coercion(vertex, type_name, node, tags, outputs, loc)
        else:
            yield from self._apply_edge(vertex, type_name, node, tags, outputs, loc)

    def _apply_property(self, vertex, type_name, node, tags, outputs, loc):
        where = f"{loc}.{node.name}"
        try:
            value = self.adapter.resolve_property(vertex, type_name, node.name)
        except AdapterFailure:
            raise
        except Exception as exc:
            raise AdapterFailure(where, exc) from exc
        for directive in node.filters:
            if not self._passes(directive, value, tags):
                return
        if node.tag_names:
            tags = dict(tags)
            for name in node.tag_names:
                tags[name] = value
        if node.output_names:
            outputs = dict(outputs)
            for name in node.output_names:
                outputs[name] = value
        yield tags, outputs

    def _apply_coercion(self, vertex, type_name, node, tags, outputs, loc):
        where = f"{loc}[{node.target}]"
        try:
            matched = self.adapter.resolve_coercion(vertex, type_name, node.target)
        except AdapterFailure:
            raise
        except Exception as exc:
            raise AdapterFailure(where, exc) from exc
        if matched:
            yield from self._walk(vertex, node.target, node.children, 0, tags, outputs, where)

    def _apply_edge(self, vertex, type_name, node, tags, outputs, loc):
        where = f"{loc}.{node.name}"
        neighbors = self._safe_iter(
            where,
            lambda: self.adapter.resolve_neighbors(vertex, type_name, node.name),
        )
        if node.fold:
            bindings = [
                binding_outputs
                for neighbor in neighbors
                for _t, binding_outputs in self._walk(
                    neighbor, node.target, node.children, 0, tags, {}, where
                )
            ]
            count = len(bindings)
            for directive in node.count_filters:
                if not self._passes(directive, count, tags):
                    return
            if node.count_tag_names:
                tags = dict(tags)
                for name in node.count_tag_names:
                    tags[name] = count
            outputs = dict(outputs)
            for name in node.count_output_names:
                outputs[name] = count
            for name in node.subtree_output_names:
                outputs[name] = tuple(binding[name] for binding in bindings)
            yield tags, outputs
        elif node.optional:
            iterator = iter(neighbors)
            first = next(iterator, _SENTINEL)
            if first is _SENTINEL:
                outputs = dict(outputs)
                for name in node.subtree_output_names:
                    outputs[name] = None
                if node.subtree_tag_names:
                    tags = dict(tags)
                    for name in node.subtree_tag_names:
                        tags[name] = MISSING
                yield tags, outputs
            else:
                for neighbor in itertools.chain((first,), iterator):
                    yield from self._walk(
                        neighbor, node.target, node.children, 0, tags, outputs, where
                    )
        else:
            for neighbor in neighbors:
                yield from self._walk(
                    neighbor, node.target, node.children, 0, tags, outputs, where
                )

    # -- filters -----------------------------------------------------------

    def _passes(self, directive: FilterDirective, value: Any, tags: dict) -> bool:
        op = directive.op
        if op == "is_null":
            return value is None
        if op == "is_not_null":
            return value is not None
        if value is None:
            return False
        operand = directive.operands[0]
        if operand.kind == "parameter":
            other = self.arguments[operand.value]
        elif operand.kind == "tag":
            other = tags.get(operand.value, MISSING)
            if other is MISSING or other is None:
                return False
        else:
            other = operand.value
        if op == "=":
            return _eq(value, other)
        if op == "!=":
            return not _eq(value, other)
        if op == ">":
            return value > other
        if op == ">=":
            return value >= other
        if op == "<":
            return value < other
        if op == "<=":
            return value <= other
        if op == "one_of":
            return any(_eq(value, item) for item in other)
        if op == "contains":
            return any(_eq(item, other) for item in value)
        if op == "not_contains":
            return not any(_eq(item, other) for item in value)
        if op == "regex":
            try:
                return re.search(other, value) is not None
            except re.error as exc:
                raise TypeMismatch(f"invalid regex operand {other!r}: {exc}") from exc
        raise AssertionError(f"unhandled filter op {op!r}")

    # -- adapter call wrapping ----------------------------------------------

    def _safe_iter(self, loc: str, produce) -> Iterator[Any]:
        try:
            iterator = iter(produce())
        except AdapterFailure:
            raise
        except Exception as exc:
            raise AdapterFailure(loc, exc) from exc
        while True:
            try:
                item = next(iterator)
            except StopIteration:
                return
            except AdapterFailure:
                raise
            except Exception as exc:
                raise AdapterFailure(loc, exc) from exc
            yield item
