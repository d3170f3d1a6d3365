"""Version parsing, ordering, and bump classification.

The caret-range oracle below derives compatibility through an independent
route (half-open version ranges) so the positional rule in the implementation
is checked against something it does not share code with.
"""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from semverlint.errors import MalformedInput, VersionsNotIncreasing
from semverlint.version import Version, VersionBump, compute_actual_bump, parse_version


def next_incompatible(v: Version) -> tuple[int, int, int]:
    """Caret-range oracle: smallest triple no longer compatible with v."""
    if v.major != 0:
        return (v.major + 1, 0, 0)
    if v.minor != 0:
        return (0, v.minor + 1, 0)
    return (0, 0, v.patch + 1)


def compatible(baseline: Version, current: Version) -> bool:
    return baseline.triple <= current.triple < next_incompatible(baseline)


def test_parse_plain():
    v = parse_version("1.2.3")
    assert v.triple == (1, 2, 3)
    assert v.prerelease == ()
    assert str(v) == "1.2.3"


def test_parse_prerelease_and_build():
    v = parse_version("1.0.0-alpha.1+build.5")
    assert v.prerelease == ("alpha", 1)
    assert v.build == "build.5"
    assert str(v) == "1.0.0-alpha.1+build.5"


@pytest.mark.parametrize(
    "bad", ["", "1", "1.2", "1.2.3.4", "01.2.3", "1.2.3-", "1.2.3-01", "v1.2.3", "a.b.c"]
)
def test_parse_rejects_malformed(bad):
    with pytest.raises(MalformedInput):
        parse_version(bad)


def test_precedence_chain():
    chain = [
        "1.0.0-alpha",
        "1.0.0-alpha.1",
        "1.0.0-alpha.beta",
        "1.0.0-beta",
        "1.0.0-beta.2",
        "1.0.0-beta.11",
        "1.0.0-rc.1",
        "1.0.0",
    ]
    parsed = [parse_version(t) for t in chain]
    for lower, higher in zip(parsed, parsed[1:]):
        assert lower < higher
        assert higher > lower


def test_build_metadata_ignored_in_precedence():
    assert parse_version("1.2.3+a") == parse_version("1.2.3+b")


@pytest.mark.parametrize(
    ("baseline", "current", "expected"),
    [
        ("1.2.3", "2.0.0", VersionBump.MAJOR),
        ("0.3.1", "0.4.0", VersionBump.MAJOR),
        ("0.3.1", "0.3.2", VersionBump.MINOR),
        ("1.2.3", "1.2.4", VersionBump.PATCH),
        ("0.0.5", "0.0.6", VersionBump.MAJOR),
        ("1.2.3", "1.3.0", VersionBump.MINOR),
        ("1.2.3", "1.2.3", VersionBump.PATCH),
        ("0.0.0", "0.0.1", VersionBump.MAJOR),
        ("0.0.0", "0.0.0", VersionBump.PATCH),
        ("1.2.3-alpha.1", "1.2.4-beta", VersionBump.PATCH),
    ],
)
def test_bump_examples(baseline, current, expected):
    assert compute_actual_bump(parse_version(baseline), parse_version(current)) == expected


def test_bump_rejects_decreasing():
    with pytest.raises(VersionsNotIncreasing):
        compute_actual_bump(parse_version("1.2.3"), parse_version("1.2.2"))


def test_bump_total_order():
    assert VersionBump.PATCH < VersionBump.MINOR < VersionBump.MAJOR
    assert str(VersionBump.MAJOR) == "major"
    assert VersionBump.from_str("minor") is VersionBump.MINOR


components = st.integers(min_value=0, max_value=9)
triples = st.tuples(components, components, components)


@given(triples, triples)
def test_major_iff_incompatible(a, b):
    lo, hi = sorted([a, b])
    baseline = Version(*lo)
    current = Version(*hi)
    bump = compute_actual_bump(baseline, current)
    assert (bump == VersionBump.MAJOR) == (not compatible(baseline, current))


@given(triples, triples)
def test_patch_iff_within_patch_range(a, b):
    lo, hi = sorted([a, b])
    baseline = Version(*lo)
    current = Version(*hi)
    bump = compute_actual_bump(baseline, current)
    if bump == VersionBump.PATCH:
        assert compatible(baseline, current)
        if baseline.major != 0:
            # Only the patch slot may move.
            assert baseline.triple[:2] == current.triple[:2]
        else:
            # Below 1.0.0 every slot is promise-bearing; a patch bump means
            # nothing moved at all.
            assert baseline.triple == current.triple
    if bump == VersionBump.MINOR:
        assert compatible(baseline, current)
        assert baseline.triple != current.triple
