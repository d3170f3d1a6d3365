"""Sparse-index registry reading.

An index is a directory tree keyed by crate name (one-char names under 1/,
two-char under 2/, three-char under 3/<first char>/, longer names under
<c1c2>/<c3c4>/), with one file per crate holding one JSON record per line.
Records carry {name, vers, yanked, published_at, snapshot, manifest}: a
documented superset of the public sparse-index keys, where the last two
locate the release's API snapshot and manifest relative to the index root.
Unknown record keys are ignored so richer indexes stay readable; anything
missing or mistyped is an error, never a silent skip.

A top-level ``crates.txt`` lists crate names in download-rank order; batch
runs consume it.  Only local directory roots are supported: URL locators are
rejected rather than fetched.
"""

from __future__ import annotations

import datetime
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path, PurePosixPath

from .errors import (
    CrateNotFound,
    InvalidCrateName,
    MalformedIndexRecord,
    MalformedInput,
    RegistryError,
)
from .version import Version, parse_version

__all__ = [
    "RegistryEntry",
    "index_path_for",
    "list_releases",
    "read_rank_file",
    "resolve_locator",
]

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]*$")
_MAX_NAME_LENGTH = 64

_REQUIRED_KEYS = ("name", "vers", "yanked", "published_at", "snapshot", "manifest")


@dataclass(frozen=True)
class RegistryEntry:
    """One published release of one crate, as the index describes it."""

    name: str
    version: Version
    yanked: bool
    published_at: datetime.date
    snapshot_locator: str
    manifest_locator: str


def index_path_for(name: str) -> PurePosixPath:
    """Index-relative path of a crate's record file.

    Prefix directories are derived from the lowercased name; the final
    component is the name verbatim, which keeps the mapping injective.
    """
    if not isinstance(name, str) or len(name) > _MAX_NAME_LENGTH or not _NAME_RE.match(name or ""):
        raise InvalidCrateName(name)
    lower = name.lower()
    if len(name) == 1:
        return PurePosixPath("1") / name
    if len(name) == 2:
        return PurePosixPath("2") / name
    if len(name) == 3:
        return PurePosixPath("3") / lower[0] / name
    return PurePosixPath(lower[0:2]) / lower[2:4] / name


def _malformed(path: Path, line_no: int, reason: str) -> MalformedIndexRecord:
    return MalformedIndexRecord(str(path), line_no, reason)


def _parse_record(
    doc: object, expected_name: str, path: Path, line_no: int
) -> RegistryEntry:
    if not isinstance(doc, dict):
        raise _malformed(path, line_no, "record is not a JSON object")
    missing = [key for key in _REQUIRED_KEYS if key not in doc]
    if missing:
        raise _malformed(path, line_no, f"missing keys {missing}")
    name = doc["name"]
    if name != expected_name:
        raise _malformed(
            path, line_no, f"record names crate {name!r}, expected {expected_name!r}"
        )
    vers = doc["vers"]
    if not isinstance(vers, str):
        raise _malformed(path, line_no, "vers must be a string")
    try:
        version = parse_version(vers)
    except MalformedInput as exc:
        raise _malformed(path, line_no, str(exc)) from exc
    yanked = doc["yanked"]
    if not isinstance(yanked, bool):
        raise _malformed(path, line_no, "yanked must be a boolean")
    published_raw = doc["published_at"]
    if not isinstance(published_raw, str):
        raise _malformed(path, line_no, "published_at must be a string date")
    try:
        published_at = datetime.date.fromisoformat(published_raw)
    except ValueError as exc:
        raise _malformed(path, line_no, f"published_at: {exc}") from exc
    for key in ("snapshot", "manifest"):
        if not isinstance(doc[key], str) or not doc[key]:
            raise _malformed(path, line_no, f"{key} must be a non-empty string")
    return RegistryEntry(
        name=name,
        version=version,
        yanked=yanked,
        published_at=published_at,
        snapshot_locator=doc["snapshot"],
        manifest_locator=doc["manifest"],
    )


def list_releases(index_root: str | os.PathLike, name: str) -> list[RegistryEntry]:
    """Every release of a crate, ascending by version.

    Malformed record lines raise MalformedIndexRecord with their line number;
    nothing is dropped silently.
    """
    path = Path(index_root) / index_path_for(name)
    if not path.is_file():
        raise CrateNotFound(name)
    raw_lines = path.read_bytes().split(b"\n")
    if raw_lines and raw_lines[-1] == b"":
        raw_lines.pop()
    entries: list[RegistryEntry] = []
    seen: set[Version] = set()
    for line_no, raw_line in enumerate(raw_lines, start=1):
        try:
            line = raw_line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise _malformed(path, line_no, "line is not valid UTF-8") from exc
        if not line.strip():
            raise _malformed(path, line_no, "blank line")
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _malformed(path, line_no, f"not valid JSON: {exc.msg}") from exc
        entry = _parse_record(doc, name, path, line_no)
        if entry.version in seen:
            raise _malformed(
                path, line_no, f"duplicate record for version {entry.version}"
            )
        seen.add(entry.version)
        entries.append(entry)
    entries.sort(key=lambda e: e.version)
    return entries


def read_rank_file(index_root: str | os.PathLike) -> list[str]:
    """Crate names from the index's crates.txt, best-ranked first."""
    path = Path(index_root) / "crates.txt"
    if not path.is_file():
        raise RegistryError(f"rank file not found: {path}")
    names: list[str] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        name = line.strip()
        if not name:
            continue
        if not _NAME_RE.match(name) or len(name) > _MAX_NAME_LENGTH:
            raise InvalidCrateName(name)
        names.append(name)
    return names


def resolve_locator(index_root: str | os.PathLike, locator: str) -> Path:
    """Turn a record's snapshot/manifest locator into a local path.

    Relative locators resolve against the index root.  URL locators belong to
    an HTTP transport this build does not enable, so they are rejected.
    """
    if "://" in locator:
        raise RegistryError(
            f"URL locator {locator!r} requires an HTTP transport, which is not enabled"
        )
    candidate = Path(locator)
    if candidate.is_absolute():
        return candidate
    return Path(index_root) / candidate
