#!/usr/bin/env python3
"""Regenerate the fixture corpora under test_crates/ and test_registry/.

Each test_crates/<name>/ directory holds a baseline and current snapshot pair
plus expected.tsv: the distinct (lint_id, importable path) findings running
the whole catalog over the pair must produce, one tab-separated line each,
sorted. Expectations are declared by hand here, next to the seeded change
they describe; nothing in this script consults the lint queries.

test_registry/ is a sparse-index fixture: five well-formed crates (twelve
releases), one crate with a corrupt record line, a crates.txt popularity
ranking, and per-release snapshot and manifest files under the locators the
index records carry.

Running the script twice produces byte-identical trees; a test regenerates
into a temporary directory and compares, so fixture edits must happen here.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from helpers.build import A, CrateBuilder  # noqa: E402

PAIRS = {}


def pair(fn):
    PAIRS[fn.__name__] = fn
    return fn


def _versions(name):
    if name == "version_prerelease":
        return "1.0.0", "2.0.0-alpha.1"
    if name == "no_change":
        return "1.0.0", "1.0.1"
    if name == "motivating_bar":
        # A minor-looking release that loses auto traits; checker tests pin
        # the rendered report for this pair, so the versions stay stable.
        return "3.1.0", "3.2.0"
    return "1.0.0", "1.1.0"


# --- one pair per lint -------------------------------------------------------

@pair
def enum_missing(b: CrateBuilder, c: CrateBuilder):
    # Color occupies src/lib.rs:4 in the baseline: tests pin that span.
    for side, with_color in ((b, True), (c, False)):
        shade = side.enum("Shade")
        side.variant(shade, "Dim")
        side.function("ping")
        if with_color:
            color = side.enum("Color")
            side.variant(color, "Red")
            side.variant(color, "Green")
    return [("enum_missing", "x::Color")]


@pair
def struct_missing(b: CrateBuilder, c: CrateBuilder):
    b.struct("Keep")
    b.struct("Gone")
    c.struct("Keep")
    return [("struct_missing", "x::Gone")]


@pair
def trait_missing(b: CrateBuilder, c: CrateBuilder):
    b.trait("Keep")
    b.trait("Legacy")
    c.trait("Keep")
    return [("trait_missing", "x::Legacy")]


@pair
def function_missing(b: CrateBuilder, c: CrateBuilder):
    # launch occupies src/lib.rs:2 in the baseline: the golden render pins it.
    b.function("keep")
    b.function("launch", params=("payload",))
    c.function("keep")
    return [("function_missing", "x::launch")]


@pair
def inherent_method_missing(b: CrateBuilder, c: CrateBuilder):
    for side, with_len in ((b, True), (c, False)):
        point = side.struct("Point")
        side.field(point, "x", type_text="i64")
        imp = side.impl(point)
        side.method(imp, "new", params=("x",))
        if with_len:
            side.method(imp, "len")
    return [("inherent_method_missing", "x::Point")]


@pair
def enum_variant_missing(b: CrateBuilder, c: CrateBuilder):
    for side, with_green in ((b, True), (c, False)):
        color = side.enum("Color")
        side.variant(color, "Red")
        if with_green:
            side.variant(color, "Green")
    return [("enum_variant_missing", "x::Color")]


@pair
def enum_variant_added(b: CrateBuilder, c: CrateBuilder):
    for side, with_blue in ((b, False), (c, True)):
        color = side.enum("Color")
        side.variant(color, "Red")
        if with_blue:
            side.variant(color, "Blue")
    return [("enum_variant_added", "x::Color")]


@pair
def struct_pub_field_missing(b: CrateBuilder, c: CrateBuilder):
    for side, with_y in ((b, True), (c, False)):
        point = side.struct("Point")
        side.field(point, "x", type_text="i64")
        if with_y:
            side.field(point, "y", type_text="i64")
    return [("struct_pub_field_missing", "x::Point")]


@pair
def enum_tuple_variant_field_missing(b: CrateBuilder, c: CrateBuilder):
    for side, arity in ((b, 2), (c, 1)):
        shade = side.enum("Shade")
        light = side.variant(shade, "Light", kind="tuple")
        side.tuple_fields(light, *["u8", "u16"][:arity])
    return [("enum_tuple_variant_field_missing", "x::Shade")]


@pair
def enum_tuple_variant_field_added(b: CrateBuilder, c: CrateBuilder):
    for side, arity in ((b, 1), (c, 2)):
        shade = side.enum("Shade")
        light = side.variant(shade, "Light", kind="tuple")
        side.tuple_fields(light, *["u8", "u16"][:arity])
    return [("enum_tuple_variant_field_added", "x::Shade")]


@pair
def enum_struct_variant_field_missing(b: CrateBuilder, c: CrateBuilder):
    for side, with_gamma in ((b, True), (c, False)):
        shade = side.enum("Shade")
        deep = side.variant(shade, "Deep", kind="struct")
        side.field(deep, "level")
        if with_gamma:
            side.field(deep, "gamma", type_text="f64")
    return [("enum_struct_variant_field_missing", "x::Shade")]


@pair
def enum_struct_variant_field_added(b: CrateBuilder, c: CrateBuilder):
    for side, with_gamma in ((b, False), (c, True)):
        shade = side.enum("Shade")
        deep = side.variant(shade, "Deep", kind="struct")
        side.field(deep, "level")
        if with_gamma:
            side.field(deep, "gamma", type_text="f64")
    return [("enum_struct_variant_field_added", "x::Shade")]


@pair
def constructible_struct_adds_field(b: CrateBuilder, c: CrateBuilder):
    for side, with_y in ((b, False), (c, True)):
        point = side.struct("Point")
        side.field(point, "x", type_text="i64")
        if with_y:
            side.field(point, "y", type_text="i64")
    return [("constructible_struct_adds_field", "x::Point")]


@pair
def constructible_struct_adds_private_field(b: CrateBuilder, c: CrateBuilder):
    for side, with_y in ((b, False), (c, True)):
        point = side.struct("Point")
        side.field(point, "x", type_text="i64")
        if with_y:
            side.field(point, "y", type_text="i64", visibility="crate")
    return [("constructible_struct_adds_private_field", "x::Point")]


@pair
def unit_struct_changed_kind(b: CrateBuilder, c: CrateBuilder):
    b.struct("Marker", kind="unit")
    marker = c.struct("Marker", kind="plain")
    c.field(marker, "inner", visibility="crate")
    return [("unit_struct_changed_kind", "x::Marker")]


@pair
def tuple_struct_to_plain_struct(b: CrateBuilder, c: CrateBuilder):
    old = b.struct("Pair", kind="tuple")
    b.tuple_fields(old, "u8", "u8")
    new = c.struct("Pair", kind="plain")
    c.field(new, "a")
    c.field(new, "b")
    return [("tuple_struct_to_plain_struct", "x::Pair")]


@pair
def auto_trait_impl_removed(b: CrateBuilder, c: CrateBuilder):
    for side, traits in ((b, ("Send", "Sync")), (c, ("Sync",))):
        widget = side.struct("Widget")
        side.field(widget, "handle", visibility="crate")
        side.auto_traits(widget, *traits)
    return [("auto_trait_impl_removed", "x::Widget")]


@pair
def derive_trait_impl_removed(b: CrateBuilder, c: CrateBuilder):
    for side, traits in ((b, ("Clone", "Debug")), (c, ("Debug",))):
        config = side.struct("Config", attrs=[A.derive(*traits)])
        side.field(config, "retries")
        for name in traits:
            side.impl(config, trait=name, trait_path=(name,), provenance="derive")
    return [("derive_trait_impl_removed", "x::Config")]


@pair
def enum_repr_int_removed(b: CrateBuilder, c: CrateBuilder):
    for side, repr_int in ((b, "u8"), (c, None)):
        attrs = [A.repr(repr_int)] if repr_int else None
        level = side.enum("Level", repr_int=repr_int, attrs=attrs)
        side.variant(level, "Low")
    return [("enum_repr_int_removed", "x::Level")]


@pair
def struct_repr_c_removed(b: CrateBuilder, c: CrateBuilder):
    for side, with_repr in ((b, True), (c, False)):
        attrs = [A.repr("C")] if with_repr else None
        packed = side.struct("Packed", attrs=attrs)
        side.field(packed, "word", type_text="u32")
    return [("struct_repr_c_removed", "x::Packed")]


@pair
def inherent_method_const_removed(b: CrateBuilder, c: CrateBuilder):
    for side, const in ((b, True), (c, False)):
        point = side.struct("Point")
        imp = side.impl(point)
        side.method(imp, "new", params=("x",), const=const)
    return [("inherent_method_const_removed", "x::Point")]


@pair
def inherent_method_unsafe_added(b: CrateBuilder, c: CrateBuilder):
    for side, unsafe in ((b, False), (c, True)):
        point = side.struct("Point")
        imp = side.impl(point)
        side.method(imp, "get", unsafe=unsafe)
    return [("inherent_method_unsafe_added", "x::Point")]


@pair
def function_unsafe_added(b: CrateBuilder, c: CrateBuilder):
    for side, unsafe in ((b, False), (c, True)):
        side.function("go", unsafe=unsafe)
    return [("function_unsafe_added", "x::go")]


@pair
def trait_unsafe_added(b: CrateBuilder, c: CrateBuilder):
    for side, unsafe in ((b, False), (c, True)):
        side.trait("Job", unsafe=unsafe)
    return [("trait_unsafe_added", "x::Job")]


@pair
def trait_unsafe_removed(b: CrateBuilder, c: CrateBuilder):
    for side, unsafe in ((b, True), (c, False)):
        side.trait("Raw", unsafe=unsafe)
    return [("trait_unsafe_removed", "x::Raw")]


@pair
def function_parameter_count_changed(b: CrateBuilder, c: CrateBuilder):
    for side, params in ((b, ("a",)), (c, ("a", "b"))):
        side.function("run", params=params)
    return [("function_parameter_count_changed", "x::run")]


@pair
def method_parameter_count_changed(b: CrateBuilder, c: CrateBuilder):
    for side, params in ((b, ("f",)), (c, ("f", "g"))):
        point = side.struct("Point")
        imp = side.impl(point)
        side.method(imp, "scale", params=params)
    return [("method_parameter_count_changed", "x::Point")]


@pair
def enum_marked_non_exhaustive(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.non_exhaustive()])):
        color = side.enum("Color", attrs=attrs)
        side.variant(color, "Red")
    return [("enum_marked_non_exhaustive", "x::Color")]


@pair
def enum_must_use_added(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.must_use()])):
        color = side.enum("Color", attrs=attrs)
        side.variant(color, "Red")
    return [("enum_must_use_added", "x::Color")]


@pair
def struct_must_use_added(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.must_use()])):
        point = side.struct("Point", attrs=attrs)
        side.field(point, "x", type_text="i64")
    return [("struct_must_use_added", "x::Point")]


@pair
def trait_must_use_added(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.must_use()])):
        side.trait("Job", attrs=attrs)
    return [("trait_must_use_added", "x::Job")]


@pair
def function_must_use_added(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.must_use()])):
        side.function("run", attrs=attrs)
    return [("function_must_use_added", "x::run")]


@pair
def inherent_method_must_use_added(b: CrateBuilder, c: CrateBuilder):
    for side, attrs in ((b, None), (c, [A.must_use()])):
        point = side.struct("Point")
        imp = side.impl(point)
        side.method(imp, "get", attrs=attrs)
    return [("inherent_method_must_use_added", "x::Point")]


# --- behavioral pairs beyond the per-lint seeds ------------------------------

def _rich(side: CrateBuilder) -> None:
    util = side.module("util")
    color = side.enum("Color")
    side.variant(color, "Red")
    side.variant(color, "Green")
    shade = side.enum("Shade", repr_int="u8",
                      attrs=[A.non_exhaustive(), A.repr("u8")])
    light = side.variant(shade, "Light", kind="tuple")
    side.field(light, "0")
    deep = side.variant(shade, "Deep", kind="struct")
    side.field(deep, "level")
    point = side.struct("Point", attrs=[A.must_use(), A.derive("Clone")])
    side.field(point, "x", type_text="i64")
    side.field(point, "y", type_text="i64")
    imp = side.impl(point)
    side.method(imp, "new", params=("x", "y"), const=True)
    side.auto_traits(point, "Send", "Sync")
    side.impl(point, trait="Clone", trait_path=("Clone",), provenance="derive")
    side.function("run", params=("job",), parent=util, unsafe=True,
                  attrs=[A.must_use()])
    job = side.trait("Job", unsafe=True, attrs=[A.must_use()])
    side.method(job, "poll", params=("cx",))
    side.struct("Marker", kind="unit")
    pair_struct = side.struct("Pair", kind="tuple")
    side.tuple_fields(pair_struct, "u8", "u8")


@pair
def no_change(b: CrateBuilder, c: CrateBuilder):
    _rich(b)
    _rich(c)
    return []


@pair
def version_prerelease(b: CrateBuilder, c: CrateBuilder):
    _rich(b)
    _rich(c)
    return []


@pair
def doc_hidden_removed(b: CrateBuilder, c: CrateBuilder):
    # The query reports the removal; the checker is what filters it out,
    # because the item was never part of the public API promise.
    b.struct("Shown")
    b.struct("Hidden", attrs=[A.doc_hidden()])
    c.struct("Shown")
    return [("struct_missing", "x::Hidden")]


@pair
def private_reexport(b: CrateBuilder, c: CrateBuilder):
    for side, exported in ((b, True), (c, False)):
        inner = side.module("inner", visibility="crate")
        tool = side.struct("Tool", parent=inner)
        if exported:
            side.reexport("Tool", tool)
    return [("struct_missing", "x::Tool")]


@pair
def reexport_renamed(b: CrateBuilder, c: CrateBuilder):
    for side, alias in ((b, "Alias"), (c, "NewAlias")):
        inner = side.module("inner", visibility="crate")
        tool = side.struct("Tool", parent=inner)
        side.reexport(alias, tool)
    return [("struct_missing", "x::Alias")]


@pair
def multi_break(b: CrateBuilder, c: CrateBuilder):
    b.function("launch", params=("payload",))
    mode = b.enum("Mode")
    b.variant(mode, "Eco")
    mode = c.enum("Mode")
    c.variant(mode, "Eco")
    c.variant(mode, "Turbo")
    return [
        ("enum_variant_added", "x::Mode"),
        ("function_missing", "x::launch"),
    ]


@pair
def method_moved_to_trait_impl(b: CrateBuilder, c: CrateBuilder):
    for side, inherent in ((b, True), (c, False)):
        metric = side.trait("Metric")
        side.method(metric, "norm")
        point = side.struct("Point")
        if inherent:
            imp = side.impl(point)
        else:
            imp = side.impl(point, trait="Metric", trait_path=("x", "Metric"))
        side.method(imp, "norm")
    return [("inherent_method_missing", "x::Point")]


@pair
def impl_methods_multiple(b: CrateBuilder, c: CrateBuilder):
    point = b.struct("Point")
    imp = b.impl(point)
    b.method(imp, "a")
    b.method(imp, "b")
    point = c.struct("Point")
    first = c.impl(point)
    c.method(first, "a")
    second = c.impl(point, trait=None)
    c.method(second, "b")
    return []


@pair
def motivating_bar(b: CrateBuilder, c: CrateBuilder):
    for side, field_type, auto in (
        (b, "String", True),
        (c, "Rc<str>", False),
    ):
        foo = side.struct("Foo", visibility="crate")
        side.field(foo, "x", type_text=field_type, visibility="crate")
        bar = side.struct("Bar")
        side.field(bar, "y", type_text="Foo", visibility="crate")
        if auto:
            side.auto_traits(foo, "Send", "Sync")
            side.auto_traits(bar, "Send", "Sync")
    return [("auto_trait_impl_removed", "x::Bar")]


# --- test_crates writer -------------------------------------------------------

def write_crates(root: Path) -> None:
    out = root / "test_crates"
    if out.exists():
        shutil.rmtree(out)
    for name, fn in sorted(PAIRS.items()):
        base_version, current_version = _versions(name)
        baseline = CrateBuilder("x", base_version)
        current = CrateBuilder("x", current_version)
        expected = fn(baseline, current)
        pair_dir = out / name
        for side_name, builder in (("baseline", baseline), ("current", current)):
            side_dir = pair_dir / side_name
            side_dir.mkdir(parents=True)
            (side_dir / "api-snapshot.json").write_bytes(builder.to_bytes())
        lines = sorted(set(expected))
        body = "".join(f"{lint}\t{path}\n" for lint, path in lines)
        (pair_dir / "expected.tsv").write_text(body, encoding="utf-8")


# --- registry fixture ---------------------------------------------------------

# Five well-formed crates, twelve releases.  Each crate exercises one batch
# behavior: gamma has the violating minor pair plus a prerelease-to-release
# pair whose only change is a doc-hidden removal; bb's current snapshot is
# corrupt (the pair fails to load); a is a clean patch pair whose current
# release sits exactly on the 2017-01-01 date cutoff; ccc has no pair at all;
# delta's middle release is yanked and the surviving adjacency is a major
# bump, so it contributes nothing.
RELEASES = {
    "a": [
        ("0.1.0", False, "2016-05-12"),
        ("0.1.1", False, "2017-01-01"),
    ],
    "bb": [
        ("1.0.0", False, "2017-02-03"),
        ("1.0.1", False, "2017-04-18"),
    ],
    "ccc": [("1.0.0", False, "2017-08-09")],
    "gamma": [
        ("1.0.0", False, "2016-07-04"),
        ("1.1.0", False, "2017-06-15"),
        ("2.0.0-alpha.1", False, "2018-01-10"),
        ("2.0.0", False, "2018-03-01"),
    ],
    "delta": [
        ("0.3.0", False, "2016-03-10"),
        ("0.3.1", True, "2016-04-01"),
        ("0.4.0", False, "2016-05-20"),
    ],
}

RANKING = ["gamma", "delta", "a", "bb", "ccc", "epsilon"]

# bb 1.0.1's snapshot on disk: truncated JSON that fails to load.
CORRUPT_SNAPSHOT = b'{"format_version": 1, "crate_name": "bb"'


def index_rel_path(name: str) -> Path:
    if len(name) == 1:
        return Path("1") / name
    if len(name) == 2:
        return Path("2") / name
    if len(name) == 3:
        return Path("3") / name[0] / name
    return Path(name[0:2]) / name[2:4] / name


def snapshot_locator(name: str, version: str) -> str:
    return f"snapshots/{name}-{version}/api-snapshot.json"


def manifest_locator(name: str, version: str) -> str:
    return f"manifests/{name}-{version}/Cargo.toml"


def _record(name: str, version: str, yanked: bool, published: str) -> str:
    doc = {
        "name": name,
        "vers": version,
        "yanked": yanked,
        "published_at": published,
        "snapshot": snapshot_locator(name, version),
        "manifest": manifest_locator(name, version),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _manifest(name: str, version: str) -> str:
    return (
        f'[package]\nname = "{name}"\nversion = "{version}"\n'
        f"\n[features]\ndefault = []\n"
    )


def gamma_snapshot(version: str) -> CrateBuilder:
    side = CrateBuilder("gamma", version)
    removed_fn = version == "1.1.0"
    renamed_enum = version.startswith("2.")
    side.function("keep")
    if not removed_fn:
        side.function("launch", params=("payload",))
    mode = side.enum("Mode2" if renamed_enum else "Mode")
    side.variant(mode, "Eco")
    if removed_fn:
        side.variant(mode, "Turbo")
    if version == "2.0.0-alpha.1":
        side.struct("Internal", attrs=[A.doc_hidden()])
    return side


def release_snapshot(name: str, version: str) -> CrateBuilder:
    if name == "gamma":
        return gamma_snapshot(version)
    side = CrateBuilder(name, version)
    if name == "a":
        side.function("ping")
    elif name == "bb":
        side.struct("B")
    elif name == "ccc":
        side.function("c")
    elif name == "delta":
        d = side.struct("D")
        if version == "0.3.0":
            side.field(d, "val")
    return side


def write_registry(root: Path) -> None:
    reg = root / "test_registry"
    if reg.exists():
        shutil.rmtree(reg)
    for name, releases in sorted(RELEASES.items()):
        index_file = reg / index_rel_path(name)
        index_file.parent.mkdir(parents=True, exist_ok=True)
        body = "".join(
            _record(name, v, yanked, published) + "\n"
            for v, yanked, published in releases
        )
        index_file.write_text(body, encoding="utf-8")
        for version, yanked, _published in releases:
            if yanked:
                # Locators of yanked releases dangle on purpose: a yanked
                # release is never selected, so its files are never read.
                continue
            snap_path = reg / snapshot_locator(name, version)
            snap_path.parent.mkdir(parents=True)
            if name == "bb" and version == "1.0.1":
                snap_path.write_bytes(CORRUPT_SNAPSHOT)
            else:
                snap_path.write_bytes(release_snapshot(name, version).to_bytes())
            man_path = reg / manifest_locator(name, version)
            man_path.parent.mkdir(parents=True)
            man_path.write_text(_manifest(name, version), encoding="utf-8")
    epsilon = reg / index_rel_path("epsilon")
    epsilon.parent.mkdir(parents=True, exist_ok=True)
    epsilon.write_text(
        _record("epsilon", "1.0.0", False, "2017-05-05")
        + "\n"
        + '{"name":"epsilon","vers":\n',
        encoding="utf-8",
    )
    (reg / "crates.txt").write_text(
        "".join(f"{n}\n" for n in RANKING), encoding="utf-8"
    )


def main() -> None:
    write_crates(ROOT)
    write_registry(ROOT)
    print(f"wrote {len(PAIRS)} crate pairs and the registry fixture")


if __name__ == "__main__":
    main()
