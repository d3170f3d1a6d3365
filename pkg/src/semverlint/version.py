"""Semantic version parsing, ordering, and release-bump classification.

The compatibility rule implemented here is positional: two versions promise
compatibility exactly when the leftmost non-zero component of the older one
(and everything to its left) is unchanged.  So 1.2.3 -> 1.9.0 is a compatible
minor change, while 0.3.1 -> 0.4.0 and 0.0.5 -> 0.0.6 are both major.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Union

from .errors import MalformedInput, VersionsNotIncreasing

__all__ = ["Version", "VersionBump", "parse_version", "compute_actual_bump"]

_VERSION_RE = re.compile(
    r"""^
    (?P<major>0|[1-9]\d*)
    \.(?P<minor>0|[1-9]\d*)
    \.(?P<patch>0|[1-9]\d*)
    (?:-(?P<prerelease>[0-9A-Za-z.-]+))?
    (?:\+(?P<build>[0-9A-Za-z.-]+))?
    $""",
    re.VERBOSE,
)


class VersionBump(IntEnum):
    """Release magnitude, totally ordered: PATCH < MINOR < MAJOR."""

    PATCH = 0
    MINOR = 1
    MAJOR = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def from_str(cls, text: str) -> VersionBump:
        try:
            return cls[text.upper()]
        except KeyError:
            raise MalformedInput(f"not a version bump: {text!r}") from None


_PrePart = Union[int, str]


@dataclass(frozen=True, order=False)
class Version:
    major: int
    minor: int
    patch: int
    prerelease: tuple[_PrePart, ...] = ()
    build: str | None = field(default=None, compare=False)

    def __str__(self) -> str:
        text = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            text += "-" + ".".join(str(p) for p in self.prerelease)
        if self.build is not None:
            text += "+" + self.build
        return text

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.major, self.minor, self.patch)

    def _pre_key(self) -> tuple:
        # A version without a pre-release tag sorts after every pre-release of
        # the same triple.  Within tags: numeric identifiers compare as
        # integers and sort before alphanumeric ones; shorter tags that are a
        # prefix of longer ones sort first.
        if not self.prerelease:
            return (1,)
        parts = tuple(
            (0, part, "") if isinstance(part, int) else (1, 0, part)
            for part in self.prerelease
        )
        return (0, parts)

    def _key(self) -> tuple:
        return (self.triple, self._pre_key())

    def __lt__(self, other: Version) -> bool:
        return self._key() < other._key()

    def __le__(self, other: Version) -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: Version) -> bool:
        return self._key() > other._key()

    def __ge__(self, other: Version) -> bool:
        return self._key() >= other._key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def parse_version(text: str) -> Version:
    """Parse a semver string; raises MalformedInput on anything else."""
    match = _VERSION_RE.match(text.strip())
    if match is None:
        raise MalformedInput(f"not a semantic version: {text!r}")
    prerelease: tuple[_PrePart, ...] = ()
    if match["prerelease"] is not None:
        parts: list[_PrePart] = []
        for raw in match["prerelease"].split("."):
            if raw == "":
                raise MalformedInput(f"empty pre-release identifier in {text!r}")
            if raw.isdigit():
                if len(raw) > 1 and raw[0] == "0":
                    raise MalformedInput(f"leading zero in pre-release of {text!r}")
                parts.append(int(raw))
            else:
                parts.append(raw)
        prerelease = tuple(parts)
    return Version(
        major=int(match["major"]),
        minor=int(match["minor"]),
        patch=int(match["patch"]),
        prerelease=prerelease,
        build=match["build"],
    )


def _leftmost_nonzero(version: Version) -> int:
    """Index (0=major, 1=minor, 2=patch) of the leftmost non-zero component.

    For 0.0.0 there is none; the patch slot is used so that any change from
    0.0.0 counts as major and only 0.0.0 itself is compatible with it.
    """
    for index, component in enumerate(version.triple):
        if component != 0:
            return index
    return 2


def compute_actual_bump(baseline: Version, current: Version) -> VersionBump:
    """Classify the release magnitude actually taken between two versions.

    Pre-release tags are ignored; only the numeric triples participate.
    Raises VersionsNotIncreasing when current's triple is below baseline's.
    """
    if current.triple < baseline.triple:
        raise VersionsNotIncreasing(str(baseline), str(current))
    pivot = _leftmost_nonzero(baseline)
    if baseline.triple[: pivot + 1] != current.triple[: pivot + 1]:
        return VersionBump.MAJOR
    if pivot + 1 < 3 and baseline.triple[pivot + 1] != current.triple[pivot + 1]:
        return VersionBump.MINOR
    return VersionBump.PATCH
