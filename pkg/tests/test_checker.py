"""Checker behavior: baseline selection, feature resolution, verdicts,
doc-hidden filtering, and report rendering over the fixture corpus."""

from __future__ import annotations

import dataclasses
from collections import namedtuple
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from helpers.build import CrateBuilder
from semverlint.checker import (
    CheckConfig,
    FeatureConfig,
    Verdict,
    compute_verdict,
    render_report,
    resolve_features,
    run_check,
    select_baseline,
)
from semverlint.errors import (
    MalformedInput,
    NoUsableBaseline,
    UnknownFeature,
    VersionsNotIncreasing,
)
from semverlint.manifest import parse_manifest
from semverlint.snapshot import load_snapshot
from semverlint.version import VersionBump, parse_version

REPO = Path(__file__).resolve().parent.parent
TEST_CRATES = REPO / "test_crates"
GOLDEN = Path(__file__).resolve().parent / "golden"

Release = namedtuple("Release", "version yanked")


def pair_config(name: str, **overrides) -> CheckConfig:
    pair_dir = TEST_CRATES / name
    return CheckConfig(
        baseline=pair_dir / "baseline" / "api-snapshot.json",
        current=pair_dir / "current" / "api-snapshot.json",
        **overrides,
    )


# --- select_baseline ----------------------------------------------------------

def test_select_baseline_skips_yanked_between():
    releases = [Release("1.0.0", False), Release("1.1.0", True), Release("1.2.0", False)]
    assert select_baseline(releases, "1.3.0") == parse_version("1.2.0")


def test_select_baseline_falls_back_past_yanked_latest():
    releases = [Release("1.0.0", False), Release("1.1.0", True)]
    assert select_baseline(releases, "1.2.0") == parse_version("1.0.0")


def test_select_baseline_all_yanked():
    releases = [Release("1.0.0", True), Release("1.1.0", True)]
    with pytest.raises(NoUsableBaseline):
        select_baseline(releases, "1.2.0")


def test_select_baseline_nothing_older_takes_greatest():
    releases = [Release("2.0.0", False), Release("2.1.0", False)]
    assert select_baseline(releases, "1.0.0") == parse_version("2.1.0")


def test_select_baseline_excludes_current_itself():
    releases = [Release("1.0.0", False), Release("1.2.0", False)]
    assert select_baseline(releases, "1.2.0") == parse_version("1.0.0")


def test_select_baseline_skips_prereleases_by_default():
    releases = [Release("1.0.0", False), Release("2.0.0-alpha.1", False)]
    assert select_baseline(releases, "2.0.0") == parse_version("1.0.0")
    assert select_baseline(
        releases, "2.0.0", allow_prerelease=True
    ) == parse_version("2.0.0-alpha.1")


def test_select_baseline_only_prereleases_without_permission():
    releases = [Release("1.0.0-rc.1", False)]
    with pytest.raises(NoUsableBaseline):
        select_baseline(releases, "1.0.0")


_version_texts = st.builds(
    lambda a, b, c, pre: f"{a}.{b}.{c}" + ("" if pre is None else f"-rc.{pre}"),
    st.integers(0, 3),
    st.integers(0, 3),
    st.integers(0, 3),
    st.one_of(st.none(), st.integers(1, 2)),
)
_release_lists = st.lists(
    st.builds(Release, _version_texts, st.booleans()), min_size=1, max_size=8
)


@given(releases=_release_lists, current=_version_texts, allow_pre=st.booleans())
def test_select_baseline_maximal_among_eligible(releases, current, allow_pre):
    # Independent oracle: eligibility by explicit filtering, pick by sorting.
    current_version = parse_version(current)
    eligible = sorted(
        parse_version(r.version)
        for r in releases
        if not r.yanked and (allow_pre or not parse_version(r.version).prerelease)
    )
    if not eligible:
        with pytest.raises(NoUsableBaseline):
            select_baseline(releases, current_version, allow_prerelease=allow_pre)
        return
    chosen = select_baseline(releases, current_version, allow_prerelease=allow_pre)
    older = [v for v in eligible if v < current_version]
    assert chosen == (older[-1] if older else eligible[-1])


# --- resolve_features ---------------------------------------------------------

def manifest_with(features_toml: str, extra: str = "") -> object:
    return parse_manifest(
        (
            '[package]\nname = "x"\nversion = "1.0.0"\n'
            + extra
            + "\n[features]\n"
            + features_toml
        ).encode()
    )


THREE_FEATURES = manifest_with('default = []\nserde = []\nunstable = []\n')


def test_heuristic_default_drops_unstable():
    resolved = resolve_features(THREE_FEATURES, FeatureConfig())
    assert resolved == {"default", "serde"}


def test_all_mode_keeps_everything():
    resolved = resolve_features(THREE_FEATURES, FeatureConfig(mode="all"))
    assert resolved == {"default", "serde", "unstable"}


def test_heuristic_deny_list_prefixes_and_extra_tokens():
    manifest = manifest_with(
        'default = []\n"unstable-io" = []\n_private = []\nnightly = []\nfancy = []\n'
    )
    assert resolve_features(manifest, FeatureConfig()) == {"default", "fancy"}
    assert resolve_features(
        manifest, FeatureConfig(extra_deny_tokens=("fancy",))
    ) == {"default"}


def test_none_plus_defaults_closes_over_default():
    manifest = manifest_with('default = ["std"]\nstd = []\nserde = ["std"]\n')
    resolved = resolve_features(manifest, FeatureConfig(mode="none-plus-defaults"))
    assert resolved == {"default", "std"}


def test_none_plus_defaults_without_default_feature():
    manifest = manifest_with("serde = []\n")
    assert resolve_features(manifest, FeatureConfig(mode="none-plus-defaults")) == set()


def test_explicit_includes_transitive_implications():
    # Feature graph (3 nodes): serde -> std -> (nothing); default -> std.
    # Closure of ["serde"] by hand: serde, then its token std; dep:serde
    # names a dependency, not a feature of this crate.  Result {serde, std}.
    manifest = manifest_with(
        'default = ["std"]\nstd = []\nserde = ["std", "dep:serde"]\n',
        extra='[dependencies]\nserde = { version = "1", optional = true }\n',
    )
    resolved = resolve_features(
        manifest, FeatureConfig(mode="explicit", explicit_list=("serde",))
    )
    assert resolved == {"serde", "std"}


def test_explicit_pulls_in_implicit_optional_dependency_feature():
    # A bare optional-dependency name inside a feature list names the
    # implicit feature the dependency creates, so the closure includes it.
    manifest = manifest_with(
        'full = ["extras"]\n',
        extra='[dependencies]\nextras = { version = "1", optional = true }\n',
    )
    resolved = resolve_features(
        manifest, FeatureConfig(mode="explicit", explicit_list=("full",))
    )
    assert resolved == {"full", "extras"}


def test_explicit_unknown_feature_rejected():
    with pytest.raises(UnknownFeature) as excinfo:
        resolve_features(
            THREE_FEATURES, FeatureConfig(mode="explicit", explicit_list=("nope",))
        )
    assert excinfo.value.name == "nope"


def test_feature_config_rejects_unknown_mode():
    with pytest.raises(ValueError):
        FeatureConfig(mode="some")


# --- verdict computation ------------------------------------------------------

_bumps = st.sampled_from(list(VersionBump))


@given(requirements=st.lists(_bumps, max_size=6), effective=_bumps)
def test_verdict_matches_exceedance_predicate(requirements, effective):
    verdict = compute_verdict(requirements, effective)
    should_violate = any(r > effective for r in requirements)
    assert verdict.ok == (not should_violate)
    if should_violate:
        assert verdict.required == max(requirements)


@given(requirements=st.lists(_bumps, max_size=6), extra=_bumps, effective=_bumps)
def test_adding_a_finding_never_clears_violations(requirements, extra, effective):
    before = compute_verdict(requirements, effective)
    after = compute_verdict(requirements + [extra], effective)
    if not before.ok:
        assert not after.ok


@given(requirements=st.lists(_bumps, max_size=6), effective=_bumps)
def test_raising_the_effective_bump_never_creates_violations(requirements, effective):
    if not compute_verdict(requirements, effective).ok:
        return
    for higher in VersionBump:
        if higher >= effective:
            assert compute_verdict(requirements, higher).ok


def test_verdict_shape_is_validated():
    assert str(Verdict("ok")) == "ok"
    assert str(Verdict("violations", VersionBump.MAJOR)) == "violations(major)"
    with pytest.raises(ValueError):
        Verdict("violations")
    with pytest.raises(ValueError):
        Verdict("ok", VersionBump.MINOR)


# --- run_check over fixtures --------------------------------------------------

def test_motivating_pair_reports_both_lost_auto_traits():
    report = run_check(pair_config("motivating_bar"))
    assert report.crate_name == "x"
    assert (report.baseline_version, report.current_version) == ("3.1.0", "3.2.0")
    assert report.actual_bump is VersionBump.MINOR
    assert report.verdict == Verdict("violations", VersionBump.MAJOR)
    assert [f.lint_id for f in report.findings] == ["auto_trait_impl_removed"] * 2
    assert {f.path_text for f in report.findings} == {"x::Bar"}
    # Send sorts before Sync in the deterministic finding order.
    assert [f.outputs["trait_name"] for f in report.findings] == ["Send", "Sync"]
    # Builder spans are sequential: Foo line 1, its field line 2, Bar line 3.
    assert all(
        (f.span.filename, f.span.begin_line) == ("src/lib.rs", 3)
        for f in report.findings
    )
    assert all(f.required_update is VersionBump.MAJOR for f in report.findings)


def test_identical_snapshots_are_ok():
    snapshot_path = TEST_CRATES / "motivating_bar" / "baseline" / "api-snapshot.json"
    report = run_check(CheckConfig(baseline=snapshot_path, current=snapshot_path))
    assert report.findings == ()
    assert report.verdict.ok
    assert report.actual_bump is VersionBump.PATCH


def test_doc_hidden_subject_is_filtered_not_reported():
    report = run_check(pair_config("doc_hidden_removed"))
    assert report.findings == ()
    assert report.verdict.ok
    assert [(f.lint_id, f.path_text) for f in report.filtered_findings] == [
        ("struct_missing", "x::Hidden")
    ]
    assert render_report(report) == (
        "x 1.0.0 -> 1.1.0: ok - no semver violations "
        "(33 lints checked, 1 doc-hidden finding ignored)\n"
    )


def test_findings_sorted_by_lint_then_path():
    report = run_check(pair_config("multi_break"))
    assert [(f.lint_id, f.path_text) for f in report.findings] == [
        ("enum_variant_added", "x::Mode"),
        ("function_missing", "x::launch"),
    ]
    assert report.verdict == Verdict("violations", VersionBump.MAJOR)


def test_minor_requirement_inside_minor_release_is_ok():
    report = run_check(pair_config("enum_must_use_added"))
    assert [f.required_update for f in report.findings] == [VersionBump.MINOR]
    assert report.actual_bump is VersionBump.MINOR
    assert report.verdict.ok


def test_minor_requirement_with_patch_override_violates():
    report = run_check(
        pair_config("enum_must_use_added", release_type_override=VersionBump.PATCH)
    )
    assert report.effective_bump is VersionBump.PATCH
    assert report.verdict == Verdict("violations", VersionBump.MINOR)


def test_major_override_dominates_actual_bump():
    without = run_check(pair_config("enum_variant_added"))
    assert without.verdict == Verdict("violations", VersionBump.MAJOR)
    with_override = run_check(
        pair_config("enum_variant_added", release_type_override=VersionBump.MAJOR)
    )
    assert with_override.actual_bump is VersionBump.MINOR
    assert with_override.effective_bump is VersionBump.MAJOR
    assert with_override.verdict.ok
    assert with_override.findings == without.findings


def test_prerelease_tag_is_ignored_for_classification():
    report = run_check(pair_config("version_prerelease"))
    assert report.current_version == "2.0.0-alpha.1"
    assert report.actual_bump is VersionBump.MAJOR
    assert report.findings == ()
    assert report.verdict.ok


def test_decreasing_versions_are_rejected():
    pair_dir = TEST_CRATES / "multi_break"
    swapped = CheckConfig(
        baseline=pair_dir / "current" / "api-snapshot.json",
        current=pair_dir / "baseline" / "api-snapshot.json",
    )
    with pytest.raises(VersionsNotIncreasing):
        run_check(swapped)


def test_crate_name_mismatch_is_rejected():
    ours = load_snapshot(CrateBuilder("x", "1.0.0").to_bytes())
    theirs = load_snapshot(CrateBuilder("y", "1.1.0").to_bytes())
    with pytest.raises(MalformedInput):
        run_check(CheckConfig(baseline=ours, current=theirs))


def test_feature_sets_resolved_per_side():
    manifest = manifest_with('default = []\nserde = []\nunstable = []\n')
    report = run_check(pair_config("no_change", current_manifest=manifest))
    assert report.current_feature_set == {"default", "serde"}
    assert report.baseline_feature_set is None


def test_unknown_explicit_feature_fails_the_check_before_queries():
    manifest = manifest_with("default = []\n")
    config = pair_config(
        "no_change",
        current_manifest=manifest,
        current_features=FeatureConfig(mode="explicit", explicit_list=("nope",)),
    )
    with pytest.raises(UnknownFeature):
        run_check(config)


def test_explicit_features_without_a_manifest_are_unknown():
    config = pair_config(
        "no_change",
        current_features=FeatureConfig(mode="explicit", explicit_list=("serde",)),
    )
    with pytest.raises(UnknownFeature):
        run_check(config)


# --- rendering ----------------------------------------------------------------

def test_ok_report_renders_as_a_single_summary_line():
    text = render_report(run_check(pair_config("no_change")))
    assert text == "x 1.0.0 -> 1.0.1: ok - no semver violations (33 lints checked)\n"
    assert text.count("\n") == 1


def test_motivating_report_matches_golden():
    report = run_check(pair_config("motivating_bar"))
    golden = (GOLDEN / "check_report_motivating.txt").read_text(encoding="utf-8")
    assert render_report(report) == golden


def test_verbose_report_lists_every_lint_with_marker():
    report = run_check(pair_config("motivating_bar"))
    lines = render_report(report, verbose=True).splitlines()
    markers = [l for l in lines if l.startswith(("  pass ", "  FAIL "))]
    assert len(markers) == 33
    assert markers == sorted(markers, key=lambda l: l.split()[-1])
    assert "  FAIL auto_trait_impl_removed" in markers
    assert sum(1 for l in markers if l.startswith("  FAIL ")) == 1


def test_verbose_over_ok_report_marks_everything_pass():
    report = run_check(pair_config("no_change"))
    lines = render_report(report, verbose=True).splitlines()
    markers = [l for l in lines if l.startswith(("  pass ", "  FAIL "))]
    assert len(markers) == 33
    assert all(l.startswith("  pass ") for l in markers)
    assert lines[-1] == "verdict: ok - no semver violations"


def test_override_is_visible_in_the_rendered_header():
    report = run_check(
        pair_config("enum_must_use_added", release_type_override=VersionBump.PATCH)
    )
    text = render_report(report)
    assert text.splitlines()[0] == (
        "x 1.0.0 -> 1.1.0: patch release (override; actual change: minor)"
    )


def test_rendering_is_deterministic():
    first = render_report(run_check(pair_config("motivating_bar")), verbose=True)
    second = render_report(run_check(pair_config("motivating_bar")), verbose=True)
    assert first == second
