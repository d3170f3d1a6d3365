"""Sparse-index layout, record parsing, and baseline lookup over the index."""

from __future__ import annotations

import datetime
import json
from pathlib import Path, PurePosixPath

import pytest
from hypothesis import given
from hypothesis import strategies as st

from semverlint.checker import select_baseline
from semverlint.errors import (
    CrateNotFound,
    InvalidCrateName,
    MalformedIndexRecord,
    MalformedInput,
    RegistryError,
)
from semverlint.manifest import parse_manifest
from semverlint.registry import (
    RegistryEntry,
    index_path_for,
    list_releases,
    read_rank_file,
    resolve_locator,
)
from semverlint.snapshot import load_snapshot
from semverlint.version import Version, parse_version

REPO = Path(__file__).resolve().parent.parent
REGISTRY = REPO / "test_registry"


# --- index_path_for ----------------------------------------------------------


@pytest.mark.parametrize(
    ("name", "expected"),
    [
        ("a", "1/a"),
        ("x", "1/x"),
        ("bb", "2/bb"),
        ("io", "2/io"),
        ("ccc", "3/c/ccc"),
        ("log", "3/l/log"),
        ("four", "fo/ur/four"),
        ("gamma", "ga/mm/gamma"),
        ("epsilon", "ep/si/epsilon"),
        ("serde_json", "se/rd/serde_json"),
        ("tokio-util", "to/ki/tokio-util"),
    ],
)
def test_index_path_layout(name: str, expected: str) -> None:
    assert index_path_for(name) == PurePosixPath(expected)


def test_index_path_prefix_dirs_are_lowercase_but_name_is_verbatim() -> None:
    assert index_path_for("Inflector") == PurePosixPath("in/fl/Inflector")
    assert index_path_for("CCC") == PurePosixPath("3/c/CCC")
    assert index_path_for("AB") == PurePosixPath("2/AB")
    assert index_path_for("Q") == PurePosixPath("1/Q")


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "-leading-dash",
        "_leading_underscore",
        "has space",
        "dot.name",
        "semi;colon",
        "a/b",
        "a" * 65,
        None,
        42,
    ],
)
def test_index_path_rejects_invalid_names(bad: object) -> None:
    with pytest.raises(InvalidCrateName) as excinfo:
        index_path_for(bad)  # type: ignore[arg-type]
    assert excinfo.value.name == bad


_valid_names = st.from_regex(r"[A-Za-z0-9][A-Za-z0-9_-]{0,20}", fullmatch=True)


@given(name=_valid_names)
def test_index_path_keeps_name_verbatim_as_final_component(name: str) -> None:
    # The final path component being the name itself makes the mapping
    # injective: distinct names can never share an index file.
    path = index_path_for(name)
    assert path.parts[-1] == name
    if len(name) == 1:
        assert path.parts == ("1", name)
    elif len(name) == 2:
        assert path.parts == ("2", name)
    elif len(name) == 3:
        assert path.parts == ("3", name[0].lower(), name)
    else:
        assert path.parts == (name[0:2].lower(), name[2:4].lower(), name)


@given(a=_valid_names, b=_valid_names)
def test_index_path_is_injective(a: str, b: str) -> None:
    if a != b:
        assert index_path_for(a) != index_path_for(b)


# --- list_releases over the checked-in fixture -------------------------------


def test_list_releases_two_record_crate() -> None:
    entries = list_releases(REGISTRY, "a")
    assert [str(e.version) for e in entries] == ["0.1.0", "0.1.1"]
    first = entries[0]
    assert first == RegistryEntry(
        name="a",
        version=parse_version("0.1.0"),
        yanked=False,
        published_at=datetime.date(2016, 5, 12),
        snapshot_locator="snapshots/a-0.1.0/api-snapshot.json",
        manifest_locator="manifests/a-0.1.0/Cargo.toml",
    )
    assert entries[1].published_at == datetime.date(2017, 1, 1)


def test_list_releases_preserves_yanked_flag() -> None:
    entries = list_releases(REGISTRY, "delta")
    assert [(str(e.version), e.yanked) for e in entries] == [
        ("0.3.0", False),
        ("0.3.1", True),
        ("0.4.0", False),
    ]


def test_list_releases_orders_prereleases_before_their_release() -> None:
    entries = list_releases(REGISTRY, "gamma")
    assert [str(e.version) for e in entries] == [
        "1.0.0",
        "1.1.0",
        "2.0.0-alpha.1",
        "2.0.0",
    ]


def test_list_releases_single_record_crate() -> None:
    entries = list_releases(REGISTRY, "ccc")
    assert len(entries) == 1
    assert str(entries[0].version) == "1.0.0"


def test_list_releases_unknown_crate() -> None:
    with pytest.raises(CrateNotFound) as excinfo:
        list_releases(REGISTRY, "nosuch")
    assert excinfo.value.name == "nosuch"


def test_list_releases_validates_name_before_touching_disk() -> None:
    with pytest.raises(InvalidCrateName):
        list_releases(REGISTRY, "not a name")


def test_list_releases_corrupt_line_is_an_error_not_a_skip() -> None:
    # epsilon's first record is fine; the error must still surface, naming
    # the exact line, rather than returning the one good entry.
    with pytest.raises(MalformedIndexRecord) as excinfo:
        list_releases(REGISTRY, "epsilon")
    err = excinfo.value
    assert err.line_no == 2
    assert err.path.endswith("ep/si/epsilon")
    assert "JSON" in err.reason


# --- list_releases error taxonomy over synthetic indexes ---------------------


def _record(name: str, vers: str, **overrides: object) -> dict[str, object]:
    doc: dict[str, object] = {
        "name": name,
        "vers": vers,
        "yanked": False,
        "published_at": "2020-01-01",
        "snapshot": f"snapshots/{name}-{vers}/api-snapshot.json",
        "manifest": f"manifests/{name}-{vers}/Cargo.toml",
    }
    doc.update(overrides)
    return doc


def _write_index(root: Path, name: str, lines: list[str]) -> None:
    path = root / index_path_for(name)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@pytest.mark.parametrize(
    ("line", "reason_fragment"),
    [
        ("[1, 2]", "not a JSON object"),
        ("not json at all", "JSON"),
        (json.dumps({"name": "zed", "vers": "1.0.0"}), "missing keys"),
        (json.dumps({**_record("zed", "1.0.0"), "vers": 123}), "vers must be a string"),
        (json.dumps(_record("zed", "1.2")), "version"),
        (json.dumps(_record("zed", "1.0.0", yanked="false")), "yanked"),
        (json.dumps(_record("zed", "1.0.0", published_at="2017-13-40")), "published_at"),
        (json.dumps(_record("zed", "1.0.0", published_at=20170101)), "published_at"),
        (json.dumps(_record("other", "1.0.0")), "names crate 'other'"),
        (json.dumps(_record("zed", "1.0.0", snapshot="")), "snapshot"),
        (json.dumps(_record("zed", "1.0.0", manifest=7)), "manifest"),
    ],
)
def test_list_releases_malformed_record_variants(
    tmp_path: Path, line: str, reason_fragment: str
) -> None:
    _write_index(tmp_path, "zed", [line])
    with pytest.raises(MalformedIndexRecord) as excinfo:
        list_releases(tmp_path, "zed")
    assert excinfo.value.line_no == 1
    assert reason_fragment in excinfo.value.reason


def test_list_releases_duplicate_version_is_malformed(tmp_path: Path) -> None:
    _write_index(
        tmp_path,
        "zed",
        [json.dumps(_record("zed", "1.0.0")), json.dumps(_record("zed", "1.0.0"))],
    )
    with pytest.raises(MalformedIndexRecord) as excinfo:
        list_releases(tmp_path, "zed")
    assert excinfo.value.line_no == 2
    assert "duplicate" in excinfo.value.reason


def test_list_releases_blank_interior_line_is_malformed(tmp_path: Path) -> None:
    _write_index(
        tmp_path,
        "zed",
        [json.dumps(_record("zed", "1.0.0")), "", json.dumps(_record("zed", "1.1.0"))],
    )
    with pytest.raises(MalformedIndexRecord) as excinfo:
        list_releases(tmp_path, "zed")
    assert excinfo.value.line_no == 2


def test_list_releases_non_utf8_line(tmp_path: Path) -> None:
    path = tmp_path / index_path_for("zed")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(json.dumps(_record("zed", "1.0.0")).encode() + b"\n\xff\xfe{}\n")
    with pytest.raises(MalformedIndexRecord) as excinfo:
        list_releases(tmp_path, "zed")
    assert excinfo.value.line_no == 2
    assert "UTF-8" in excinfo.value.reason


def test_list_releases_ignores_unknown_keys(tmp_path: Path) -> None:
    # Records from richer indexes carry extra keys (deps, cksum, features);
    # they must parse as long as the documented keys are present and valid.
    rich = _record("zed", "1.0.0", deps=[], cksum="ab" * 32, features={})
    _write_index(tmp_path, "zed", [json.dumps(rich)])
    entries = list_releases(tmp_path, "zed")
    assert [str(e.version) for e in entries] == ["1.0.0"]


def test_list_releases_sorts_out_of_order_files(tmp_path: Path) -> None:
    _write_index(
        tmp_path,
        "zed",
        [
            json.dumps(_record("zed", "1.2.0")),
            json.dumps(_record("zed", "1.0.0")),
            json.dumps(_record("zed", "1.1.0-rc.1")),
            json.dumps(_record("zed", "1.1.0")),
        ],
    )
    entries = list_releases(tmp_path, "zed")
    assert [str(e.version) for e in entries] == [
        "1.0.0",
        "1.1.0-rc.1",
        "1.1.0",
        "1.2.0",
    ]


def test_list_releases_accepts_missing_trailing_newline(tmp_path: Path) -> None:
    path = tmp_path / index_path_for("zed")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_record("zed", "1.0.0")), encoding="utf-8")
    assert len(list_releases(tmp_path, "zed")) == 1


# --- rank file ----------------------------------------------------------------


def test_read_rank_file_fixture_order() -> None:
    assert read_rank_file(REGISTRY) == ["gamma", "delta", "a", "bb", "ccc", "epsilon"]


def test_read_rank_file_skips_blank_lines(tmp_path: Path) -> None:
    (tmp_path / "crates.txt").write_text("a\n\nbb\n", encoding="utf-8")
    assert read_rank_file(tmp_path) == ["a", "bb"]


def test_read_rank_file_missing(tmp_path: Path) -> None:
    with pytest.raises(RegistryError):
        read_rank_file(tmp_path)


def test_read_rank_file_rejects_invalid_names(tmp_path: Path) -> None:
    (tmp_path / "crates.txt").write_text("good\nbad name\n", encoding="utf-8")
    with pytest.raises(InvalidCrateName):
        read_rank_file(tmp_path)


# --- locator resolution --------------------------------------------------------


def test_resolve_locator_joins_relative_paths() -> None:
    entries = list_releases(REGISTRY, "gamma")
    snapshot_path = resolve_locator(REGISTRY, entries[0].snapshot_locator)
    manifest_path = resolve_locator(REGISTRY, entries[0].manifest_locator)
    assert snapshot_path.is_file()
    assert manifest_path.is_file()


def test_resolve_locator_keeps_absolute_paths(tmp_path: Path) -> None:
    absolute = tmp_path / "somewhere" / "api-snapshot.json"
    assert resolve_locator(REGISTRY, str(absolute)) == absolute


def test_resolve_locator_rejects_urls() -> None:
    with pytest.raises(RegistryError):
        resolve_locator(REGISTRY, "https://example.invalid/x/api-snapshot.json")


def test_fixture_locators_load_as_snapshot_and_manifest() -> None:
    entry = list_releases(REGISTRY, "gamma")[1]
    snapshot = load_snapshot(resolve_locator(REGISTRY, entry.snapshot_locator))
    assert snapshot.crate_name == "gamma"
    assert str(snapshot.crate_version) == "1.1.0"
    manifest = parse_manifest(resolve_locator(REGISTRY, entry.manifest_locator))
    assert manifest.name == "gamma"


def test_fixture_corrupt_snapshot_fails_to_load() -> None:
    # bb 1.0.1 ships an intentionally truncated snapshot; reading the index
    # succeeds, loading the snapshot does not.
    entries = list_releases(REGISTRY, "bb")
    assert [str(e.version) for e in entries] == ["1.0.0", "1.0.1"]
    with pytest.raises(MalformedInput):
        load_snapshot(resolve_locator(REGISTRY, entries[1].snapshot_locator))


# --- baseline selection over index entries -------------------------------------


def test_select_baseline_over_gamma_entries() -> None:
    entries = list_releases(REGISTRY, "gamma")
    assert select_baseline(entries, "1.2.0") == Version(1, 1, 0)
    assert select_baseline(entries, "2.1.0") == Version(2, 0, 0)


def test_select_baseline_skips_prerelease_unless_allowed() -> None:
    entries = list_releases(REGISTRY, "gamma")
    assert select_baseline(entries, "2.0.0") == Version(1, 1, 0)
    allowed = select_baseline(entries, "2.0.0", allow_prerelease=True)
    assert str(allowed) == "2.0.0-alpha.1"


def test_select_baseline_skips_yanked_delta_release() -> None:
    entries = list_releases(REGISTRY, "delta")
    assert select_baseline(entries, "0.4.0") == Version(0, 3, 0)
