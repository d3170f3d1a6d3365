"""Lexer, parser, and AST for the graph-query language.

The surface syntax is a single brace-delimited document::

    {
      CrateDiff {
        baseline {
          item {
            ... on Enum {
              name @tag @output
            }
          }
        }
      }
    }

Selections are properties (no braces), edges (braces optional), or type
coercions (``... on TypeName { ... }``).  Directives attach to properties and
edges.  String filter operands beginning with ``$`` name query parameters and
operands beginning with ``%`` name previously declared tags; everything else
is a literal.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Iterator, Union

from ..errors import DuplicateOutputName, QuerySyntaxError, UnknownDirective

FILTER_OPS = (
    "=",
    "!=",
    ">",
    ">=",
    "<",
    "<=",
    "one_of",
    "contains",
    "not_contains",
    "is_null",
    "is_not_null",
    "regex",
)

#: Filter operators that take no operand.
NULLARY_OPS = ("is_null", "is_not_null")


@dataclasses.dataclass(frozen=True)
class Operand:
    """A filter operand: a literal, a ``$parameter``, or a ``%tag`` reference."""

    kind: str  # "literal" | "parameter" | "tag"
    value: Any

    @staticmethod
    def from_raw(raw: Any) -> "Operand":
        if isinstance(raw, str):
            if raw.startswith("$"):
                return Operand("parameter", raw[1:])
            if raw.startswith("%"):
                return Operand("tag", raw[1:])
        if isinstance(raw, list):
            return Operand("literal", tuple(raw))
        return Operand("literal", raw)


@dataclasses.dataclass(frozen=True)
class FilterDirective:
    op: str
    operands: tuple[Operand, ...]
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class TagDirective:
    name: str | None  # None = default to the property name
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class OutputDirective:
    name: str | None  # None = default to the selection name
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class FoldDirective:
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class TransformDirective:
    op: str  # only "count" is defined
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class OptionalDirective:
    line: int
    col: int


Directive = Union[
    FilterDirective,
    TagDirective,
    OutputDirective,
    FoldDirective,
    TransformDirective,
    OptionalDirective,
]


@dataclasses.dataclass(frozen=True)
class Selection:
    """One node of the selection tree.

    ``is_coercion`` distinguishes ``... on Name`` blocks, where ``name`` holds
    the target type.  ``children`` is None for a brace-less selection and a
    (possibly empty) tuple when braces were written.
    """

    name: str
    directives: tuple[Directive, ...]
    children: tuple["Selection", ...] | None
    is_coercion: bool
    line: int
    col: int


@dataclasses.dataclass(frozen=True)
class QueryDocument:
    root_type: str
    selections: tuple[Selection, ...]
    declared_parameters: frozenset[str]
    output_names: tuple[str, ...]
    line: int
    col: int


# --------------------------------------------------------------------------
# Lexer


@dataclasses.dataclass(frozen=True)
class _Token:
    kind: str
    value: Any
    line: int
    col: int


_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ":": "COLON",
    ",": "COMMA",
    "@": "AT",
}

_NAME_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_NAME_CONT = _NAME_START | set("0123456789")
_ESCAPES = {'"': '"', "\\": "\\", "/": "/", "n": "\n", "t": "\t", "r": "\r"}


def _tokenize(text: str) -> Iterator[_Token]:
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            yield _Token(_PUNCT[ch], ch, start_line, start_col)
            i += 1
            col += 1
            continue
        if text.startswith("...", i):
            yield _Token("ELLIPSIS", "...", start_line, start_col)
            i += 3
            col += 3
            continue
        if ch == '"':
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise QuerySyntaxError(start_line, start_col, "a closing quote")
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise QuerySyntaxError(line, col, "a valid string escape")
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                    col += 2
                    continue
                parts.append(c)
                i += 1
                col += 1
            yield _Token("STRING", "".join(parts), start_line, start_col)
            continue
        if ch == "-" or ch.isdigit():
            j = i + 1 if ch == "-" else i
            if j >= n or not text[j].isdigit():
                raise QuerySyntaxError(start_line, start_col, "a digit")
            while j < n and text[j].isdigit():
                j += 1
            token_text = text[i:j]
            col += j - i
            i = j
            yield _Token("INT", int(token_text), start_line, start_col)
            continue
        if ch in _NAME_START:
            j = i
            while j < n and text[j] in _NAME_CONT:
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            if word in ("true", "false"):
                yield _Token("BOOL", word == "true", start_line, start_col)
            else:
                yield _Token("NAME", word, start_line, start_col)
            continue
        raise QuerySyntaxError(start_line, start_col, "a query token")
    yield _Token("EOF", None, line, col)


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str) -> None:
        self._tokens = list(_tokenize(text))
        self._pos = 0
        self._parameters: set[str] = set()
        self._output_names: list[str] = []
        self._output_positions: dict[str, tuple[int, int]] = {}

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _next(self) -> _Token:
        token = self._tokens[self._pos]
        self._pos += 1
        return token

    def _expect(self, kind: str, expected: str) -> _Token:
        token = self._next()
        if token.kind != kind:
            raise QuerySyntaxError(token.line, token.col, expected)
        return token

    def parse(self) -> QueryDocument:
        opening = self._expect("LBRACE", "'{' opening the query document")
        root = self._expect("NAME", "the root type name")
        self._expect("LBRACE", "'{' opening the root selection block")
        selections = self._selection_block()
        self._expect("RBRACE", "'}' closing the query document")
        self._expect("EOF", "end of query")
        return QueryDocument(
            root_type=root.value,
            selections=selections,
            declared_parameters=frozenset(self._parameters),
            output_names=tuple(self._output_names),
            line=opening.line,
            col=opening.col,
        )

    def _selection_block(self) -> tuple[Selection, ...]:
        selections: list[Selection] = []
        while True:
            token = self._peek()
            if token.kind == "RBRACE":
                self._next()
                if not selections:
                    raise QuerySyntaxError(token.line, token.col, "at least one selection")
                return tuple(selections)
            if token.kind == "ELLIPSIS":
                selections.append(self._coercion())
            elif token.kind == "NAME":
                selections.append(self._field())
            else:
                raise QuerySyntaxError(token.line, token.col, "a selection or '}'")

    def _coercion(self) -> Selection:
        ellipsis = self._next()
        on = self._expect("NAME", "'on' after '...'")
        if on.value != "on":
            raise QuerySyntaxError(on.line, on.col, "'on' after '...'")
        target = self._expect("NAME", "a type name after 'on'")
        self._expect("LBRACE", "'{' opening the coercion block")
        children = self._selection_block()
        return Selection(
            name=target.value,
            directives=(),
            children=children,
            is_coercion=True,
            line=ellipsis.line,
            col=ellipsis.col,
        )

    def _field(self) -> Selection:
        name = self._next()
        directives: list[Directive] = []
        while self._peek().kind == "AT":
            directives.append(self._directive(directives))
        children: tuple[Selection, ...] | None = None
        if self._peek().kind == "LBRACE":
            self._next()
            children = self._selection_block()
        selection = Selection(
            name=name.value,
            directives=tuple(directives),
            children=children,
            is_coercion=False,
            line=name.line,
            col=name.col,
        )
        self._record_outputs(selection)
        return selection

    def _record_outputs(self, selection: Selection) -> None:
        for directive in selection.directives:
            if not isinstance(directive, OutputDirective):
                continue
            resolved = directive.name if directive.name is not None else selection.name
            if resolved in self._output_positions:
                raise DuplicateOutputName(
                    f"output name {resolved!r} at line {directive.line} is already "
                    f"used at line {self._output_positions[resolved][0]}"
                )
            self._output_positions[resolved] = (directive.line, directive.col)
            self._output_names.append(resolved)

    def _directive(self, earlier: list[Directive]) -> Directive:
        at = self._next()
        name_token = self._expect("NAME", "a directive name after '@'")
        name = name_token.value
        args = self._directive_args()
        line, col = at.line, at.col

        if name == "filter":
            op = args.pop("op", None)
            if not isinstance(op, str):
                raise QuerySyntaxError(line, col, "@filter(op: \"...\")")
            if op not in FILTER_OPS:
                raise QuerySyntaxError(
                    name_token.line, name_token.col, "a known filter operator"
                )
            raw_value = args.pop("value", [])
            if args:
                raise QuerySyntaxError(line, col, "only op/value arguments to @filter")
            if not isinstance(raw_value, list):
                raise QuerySyntaxError(line, col, "a list value for @filter")
            operands = tuple(Operand.from_raw(item) for item in raw_value)
            if op in NULLARY_OPS:
                if operands:
                    raise QuerySyntaxError(line, col, f"no operands for {op}")
            elif len(operands) != 1:
                raise QuerySyntaxError(line, col, f"exactly one operand for {op}")
            for operand in operands:
                if operand.kind == "parameter":
                    self._parameters.add(operand.value)
            return FilterDirective(op, operands, line, col)
        if name in ("tag", "output"):
            arg_name = args.pop("name", None)
            if args or (arg_name is not None and not isinstance(arg_name, str)):
                raise QuerySyntaxError(line, col, f"@{name}(name: \"...\") or no arguments")
            if name == "tag":
                return TagDirective(arg_name, line, col)
            return OutputDirective(arg_name, line, col)
        if name == "fold":
            if args:
                raise QuerySyntaxError(line, col, "no arguments to @fold")
            return FoldDirective(line, col)
        if name == "optional":
            if args:
                raise QuerySyntaxError(line, col, "no arguments to @optional")
            return OptionalDirective(line, col)
        if name == "transform":
            op = args.pop("op", None)
            if args or op != "count":
                raise QuerySyntaxError(line, col, "@transform(op: \"count\")")
            if not any(isinstance(d, FoldDirective) for d in earlier):
                raise QuerySyntaxError(line, col, "@fold before @transform")
            return TransformDirective("count", line, col)
        raise UnknownDirective(f"unknown directive @{name} at line {line}, column {col}")

    def _directive_args(self) -> dict[str, Any]:
        if self._peek().kind != "LPAREN":
            return {}
        self._next()
        args: dict[str, Any] = {}
        while True:
            key = self._expect("NAME", "an argument name")
            self._expect("COLON", "':' after the argument name")
            args[key.value] = self._value()
            token = self._next()
            if token.kind == "RPAREN":
                return args
            if token.kind != "COMMA":
                raise QuerySyntaxError(token.line, token.col, "',' or ')'")

    def _value(self) -> Any:
        token = self._next()
        if token.kind in ("STRING", "INT", "BOOL"):
            return token.value
        if token.kind == "LBRACKET":
            items: list[Any] = []
            if self._peek().kind == "RBRACKET":
                self._next()
                return items
            while True:
                items.append(self._value())
                closer = self._next()
                if closer.kind == "RBRACKET":
                    return items
                if closer.kind != "COMMA":
                    raise QuerySyntaxError(closer.line, closer.col, "',' or ']'")
        raise QuerySyntaxError(token.line, token.col, "a literal value")


def parse_query(text: str) -> QueryDocument:
    """Parse query text into a :class:`QueryDocument`.

    Raises :class:`~semverlint.errors.QuerySyntaxError` on malformed input,
    :class:`~semverlint.errors.UnknownDirective` for an unrecognized ``@``
    name, and :class:`~semverlint.errors.DuplicateOutputName` when two
    @output directives resolve to the same name.
    """
    return _Parser(text).parse()
