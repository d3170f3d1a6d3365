"""The lint catalog: loading, validation, and finding rendering.

Each lint lives in one TOML file under ``semverlint/lints/`` (the format is
documented in docs/lint-format.md).  A lint bundles an id, prose, a minimum
required version bump, a query over the snapshot-pair schema, the query's
arguments, and a per-result message template.  ``load_catalog`` parses and
fully validates every definition; the embedded catalog inside an installed
build must stay byte-identical to the repository's lint directory, which the
test suite enforces.
"""

from __future__ import annotations

import dataclasses
import re
import sys
from importlib import resources
from pathlib import Path
from typing import Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import (
    DuplicateLintId,
    LintFormatError,
    QueryError,
    QueryValidationFailed,
    TemplateUnboundPlaceholder,
)
from .query import SNAPSHOT_PAIR_SCHEMA, CheckedQuery, check_query, parse_query
from .version import VersionBump

_TEXT_FIELDS = (
    "id",
    "human_readable_name",
    "description",
    "required_update",
    "error_message",
    "per_result_error_template",
)
_ALLOWED_KEYS = set(_TEXT_FIELDS) | {"reference_link", "query", "arguments"}
_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")

#: Output names every lint must declare: path identifies the item across
#: snapshots, name makes the report readable.
REQUIRED_OUTPUTS = ("name", "path")

#: Reserved output names carrying the source location; when a result binds
#: both to non-null values, render_finding appends a location suffix.
SPAN_OUTPUTS = ("span_filename", "span_begin_line")


@dataclasses.dataclass(frozen=True)
class LintDefinition:
    id: str
    human_readable_name: str
    description: str
    required_update: VersionBump
    reference_link: str | None
    query: str
    checked_query: CheckedQuery
    arguments: dict[str, object]
    error_message: str
    per_result_error_template: str


def _parse_lint(raw: bytes, stem: str, where: str) -> LintDefinition:
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise LintFormatError(f"{where}: not valid TOML: {exc}") from exc

    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise LintFormatError(f"{where}: unknown keys {sorted(unknown)}")
    for key in _TEXT_FIELDS + ("query",):
        if not isinstance(doc.get(key), str) or not doc[key].strip():
            raise LintFormatError(f"{where}: field {key!r} must be a non-empty string")
    reference_link = doc.get("reference_link")
    if reference_link is not None and not isinstance(reference_link, str):
        raise LintFormatError(f"{where}: reference_link must be a string")
    arguments = doc.get("arguments", {})
    if not isinstance(arguments, dict):
        raise LintFormatError(f"{where}: [arguments] must be a table")
    for name, value in arguments.items():
        if not isinstance(value, (str, int, bool)) and not (
            isinstance(value, list) and all(isinstance(v, str) for v in value)
        ):
            raise LintFormatError(f"{where}: argument {name!r} must be a scalar")

    lint_id = doc["id"]
    try:
        bump = VersionBump.from_str(doc["required_update"])
    except ValueError as exc:
        raise LintFormatError(f"{where}: {exc}") from exc
    if bump is VersionBump.PATCH:
        raise LintFormatError(f"{where}: required_update cannot be 'patch'")

    try:
        checked = check_query(parse_query(doc["query"]), SNAPSHOT_PAIR_SCHEMA)
    except QueryError as exc:
        raise QueryValidationFailed(lint_id, exc) from exc

    declared = checked.declared_parameters
    provided = set(arguments)
    if declared != provided:
        missing = sorted(declared - provided)
        extra = sorted(provided - declared)
        raise QueryValidationFailed(
            lint_id,
            LintFormatError(
                f"arguments do not match query parameters "
                f"(missing {missing}, unused {extra})"
            ),
        )

    outputs = set(checked.output_names)
    for required in REQUIRED_OUTPUTS:
        if required not in outputs:
            raise QueryValidationFailed(
                lint_id,
                LintFormatError(f"query must declare an output named {required!r}"),
            )
    for placeholder in _PLACEHOLDER.findall(doc["per_result_error_template"]):
        if placeholder not in outputs:
            raise TemplateUnboundPlaceholder(lint_id, placeholder)

    return LintDefinition(
        id=lint_id,
        human_readable_name=doc["human_readable_name"],
        description=doc["description"],
        required_update=bump,
        reference_link=reference_link,
        query=doc["query"],
        checked_query=checked,
        arguments=dict(arguments),
        error_message=doc["error_message"],
        per_result_error_template=doc["per_result_error_template"],
    )


def _iter_lint_files(source) -> Iterable[tuple[str, bytes]]:
    """(stem, raw bytes) pairs in filename order."""
    if source == "embedded":
        root = resources.files("semverlint").joinpath("lints")
        entries = [e for e in root.iterdir() if e.name.endswith(".toml")]
        for entry in sorted(entries, key=lambda e: e.name):
            yield entry.name[: -len(".toml")], entry.read_bytes()
        return
    directory = Path(source)
    for path in sorted(directory.glob("*.toml")):
        yield path.stem, path.read_bytes()


def load_catalog(source="embedded") -> list[LintDefinition]:
    """Load and validate every lint definition from a source.

    ``source`` is either the string "embedded" (the catalog packaged inside
    the installed library) or a directory path containing ``*.toml`` files.
    The result is sorted by lint id.
    """
    definitions: list[LintDefinition] = []
    seen: dict[str, str] = {}
    for stem, raw in _iter_lint_files(source):
        where = f"{stem}.toml"
        definition = _parse_lint(raw, stem, where)
        if definition.id in seen:
            raise DuplicateLintId(definition.id)
        seen[definition.id] = where
        if definition.id != stem:
            raise LintFormatError(
                f"{where}: lint id {definition.id!r} does not match the filename stem"
            )
        definitions.append(definition)
    definitions.sort(key=lambda d: d.id)
    return definitions


def _render_value(value: object) -> str:
    if isinstance(value, (list, tuple)):
        return "::".join(str(part) for part in value)
    return str(value)


def render_finding(definition: LintDefinition, row: dict) -> str:
    """Substitute a result row into the lint's per-result template.

    When the row carries non-null span outputs, a ``(at filename:line)``
    suffix is appended; templates themselves never name span placeholders.
    """
    text = _PLACEHOLDER.sub(
        lambda match: _render_value(row[match.group(1)]),
        definition.per_result_error_template,
    )
    filename, begin_line = (row.get(name) for name in SPAN_OUTPUTS)
    if filename is not None and begin_line is not None:
        text += f" (at {filename}:{begin_line})"
    return text
