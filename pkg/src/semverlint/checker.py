"""One release check, end to end.

Given a baseline and a current snapshot of the same crate, the checker
resolves the feature sets each side is (nominally) built with, computes the
version bump the release actually took, runs every catalog lint over the
pair, drops findings whose subject is doc-hidden, and reduces the rest to a
verdict: the release is ok, or it ships changes that demand a bigger bump
than it took.

Baseline selection from a list of registry releases and the feature-set
resolution rules also live here; reading indexes and wiring command-line
flags do not (see registry.py and cli.py).
"""

from __future__ import annotations

import dataclasses
import functools
import os
from typing import Iterable, Mapping, Sequence

from .catalog import LintDefinition, load_catalog, render_finding
from .errors import MalformedInput, NoUsableBaseline, UnknownFeature
from .manifest import CrateManifest
from .query import SnapshotPairAdapter, execute_query
from .snapshot import ApiItem, ApiSnapshot, ImportablePath, Span, is_public_api, load_snapshot
from .version import Version, VersionBump, compute_actual_bump, parse_version

__all__ = [
    "CheckConfig",
    "CheckReport",
    "ExecutedLint",
    "FeatureConfig",
    "Finding",
    "Verdict",
    "compute_verdict",
    "render_report",
    "resolve_features",
    "run_check",
    "select_baseline",
]


# --- feature resolution -------------------------------------------------------

FEATURE_MODES = ("heuristic-default", "all", "none-plus-defaults", "explicit")

#: Feature names that conventionally gate unstable surface; the heuristic
#: default mode drops them (exact matches, plus the prefix rules below).
DENIED_FEATURE_NAMES = frozenset(
    {"unstable", "nightly", "experimental", "bench", "internal"}
)


@dataclasses.dataclass(frozen=True)
class FeatureConfig:
    """How to choose the feature set one side of the check is built with."""

    mode: str = "heuristic-default"
    explicit_list: tuple[str, ...] = ()
    extra_deny_tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in FEATURE_MODES:
            raise ValueError(
                f"feature mode must be one of {FEATURE_MODES}, got {self.mode!r}"
            )
        object.__setattr__(self, "explicit_list", tuple(self.explicit_list))
        object.__setattr__(self, "extra_deny_tokens", tuple(self.extra_deny_tokens))


def _denied(name: str, extra: frozenset[str]) -> bool:
    return (
        name in DENIED_FEATURE_NAMES
        or name.startswith("unstable-")
        or name.startswith("_")
        or name in extra
    )


def _implied_closure(manifest: CrateManifest, seeds: Iterable[str]) -> set[str]:
    """Seeds plus every feature they transitively enable.

    Tokens that enable a dependency or one of its features ("dep:name",
    "name/feat", "name?/feat") do not name features of this crate and add
    nothing; a bare optional-dependency name names the implicit feature the
    dependency creates and is included.
    """
    optional = manifest.optional_dependency_names()
    resolved: set[str] = set()
    stack = list(seeds)
    while stack:
        name = stack.pop()
        if name in resolved:
            continue
        resolved.add(name)
        for token in manifest.features.get(name, ()):
            if token.startswith("dep:") or "/" in token:
                continue
            if token in manifest.features or token in optional:
                stack.append(token)
    return resolved


def resolve_features(manifest: CrateManifest, config: FeatureConfig) -> frozenset[str]:
    """The feature names one side of the check is built with.

    heuristic-default keeps every declared feature whose name does not look
    unstable (exact deny-list, "unstable-" prefix, "_" prefix, plus any
    extra_deny_tokens); all keeps everything; none-plus-defaults enables only
    the "default" feature and whatever it transitively implies; explicit
    enables exactly the listed features plus their transitive implications.
    No closure runs after the heuristic filter: it could only re-enable the
    features the filter just dropped.
    """
    declared = set(manifest.features)
    if config.mode == "all":
        return frozenset(declared)
    if config.mode == "heuristic-default":
        extra = frozenset(config.extra_deny_tokens)
        return frozenset(name for name in declared if not _denied(name, extra))
    if config.mode == "none-plus-defaults":
        if "default" not in declared:
            return frozenset()
        return frozenset(_implied_closure(manifest, ("default",)))
    for name in config.explicit_list:
        if name not in declared:
            raise UnknownFeature(name)
    return frozenset(_implied_closure(manifest, config.explicit_list))


# --- baseline selection -------------------------------------------------------

def select_baseline(
    releases: Sequence[object],
    current_version: Version | str,
    *,
    allow_prerelease: bool = False,
) -> Version:
    """Choose the version the current release is checked against.

    Every entry needs ``version`` and ``yanked`` attributes.  The pick is the
    greatest non-yanked version strictly below ``current_version``; when
    nothing is strictly below, the greatest non-yanked version overall.
    Yanked releases never win, and pre-releases only participate when
    explicitly allowed.
    """
    if isinstance(current_version, str):
        current_version = parse_version(current_version)
    usable: list[Version] = []
    for entry in releases:
        version = entry.version  # type: ignore[attr-defined]
        if isinstance(version, str):
            version = parse_version(version)
        if entry.yanked:  # type: ignore[attr-defined]
            continue
        if version.prerelease and not allow_prerelease:
            continue
        usable.append(version)
    if not usable:
        raise NoUsableBaseline(
            "every release is yanked"
            + ("" if allow_prerelease else " or a pre-release")
        )
    older = [v for v in usable if v < current_version]
    return max(older or usable)


# --- findings and reports -----------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Finding:
    """One lint result row, resolved into reportable form."""

    lint_id: str
    item_path: ImportablePath
    span: Span | None
    outputs: Mapping[str, object]
    required_update: VersionBump
    message: str

    @property
    def path_text(self) -> str:
        return "::".join(self.item_path.segments)


@dataclasses.dataclass(frozen=True)
class ExecutedLint:
    """One catalog lint's results over the pair, split by reportability."""

    definition: LintDefinition
    findings: tuple[Finding, ...]
    filtered: tuple[Finding, ...]

    @property
    def triggered(self) -> bool:
        return bool(self.findings)


@dataclasses.dataclass(frozen=True)
class Verdict:
    """ok, or violations(required): the minimum bump the findings demand."""

    value: str
    required: VersionBump | None = None

    def __post_init__(self) -> None:
        if self.value not in ("ok", "violations"):
            raise ValueError(f"verdict must be 'ok' or 'violations', got {self.value!r}")
        if (self.value == "violations") != (self.required is not None):
            raise ValueError("violations carry a required bump; ok carries none")

    @property
    def ok(self) -> bool:
        return self.value == "ok"

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"violations({self.required})"


@dataclasses.dataclass(frozen=True)
class CheckReport:
    crate_name: str
    baseline_version: str
    current_version: str
    actual_bump: VersionBump
    effective_bump: VersionBump
    release_type_override: VersionBump | None
    executed: tuple[ExecutedLint, ...]
    findings: tuple[Finding, ...]
    filtered_findings: tuple[Finding, ...]
    verdict: Verdict
    baseline_feature_set: frozenset[str] | None
    current_feature_set: frozenset[str] | None
    baseline_snapshot: ApiSnapshot | None = None
    current_snapshot: ApiSnapshot | None = None


@dataclasses.dataclass(frozen=True)
class CheckConfig:
    """Inputs of one check.

    Snapshots may be given as loaded objects or as filesystem locators;
    manifests are optional and only drive feature resolution.  The override,
    when present, replaces the computed bump in the verdict comparison.
    """

    baseline: ApiSnapshot | str | os.PathLike
    current: ApiSnapshot | str | os.PathLike
    baseline_manifest: CrateManifest | None = None
    current_manifest: CrateManifest | None = None
    baseline_features: FeatureConfig = FeatureConfig()
    current_features: FeatureConfig = FeatureConfig()
    release_type_override: VersionBump | None = None


def compute_verdict(
    required_updates: Iterable[VersionBump], effective_bump: VersionBump
) -> Verdict:
    """Reduce finding requirements against the bump the release provides.

    Strictly greater loses: a finding demanding a minor bump inside an actual
    minor release is fine.
    """
    requirements = list(required_updates)
    if any(required > effective_bump for required in requirements):
        return Verdict("violations", max(requirements))
    return Verdict("ok")


# --- doc-hidden filtering -----------------------------------------------------

def _named(items: Iterable[ApiItem], name: object) -> ApiItem | None:
    for item in items:
        if item.name == name:
            return item
    return None


def _subject_chain(snapshot: ApiSnapshot, row: Mapping[str, object]) -> list[ApiItem] | None:
    """The finding's subject located in one snapshot: owner, then as much of
    the variant/field/method chain as exists there.  None when even the owner
    path does not resolve on this side."""
    owner = snapshot.item_at_path(tuple(row["path"]))  # type: ignore[arg-type]
    if owner is None:
        return None
    chain = [owner]
    container = owner
    variant_name = row.get("variant_name")
    if variant_name is not None:
        variant = _named(snapshot.variants_of(owner), variant_name)
        if variant is None:
            return chain
        chain.append(variant)
        container = variant
    field_name = row.get("field_name")
    if field_name is not None:
        field = _named(snapshot.fields_of(container), field_name)
        if field is not None:
            chain.append(field)
    method_name = row.get("method_name")
    if method_name is not None:
        method = _named(snapshot.inherent_methods_of(owner), method_name)
        if method is not None:
            chain.append(method)
    return chain


def _side_reads_hidden(snapshot: ApiSnapshot, row: Mapping[str, object]) -> bool:
    chain = _subject_chain(snapshot, row)
    if chain is None:
        return False
    if not is_public_api(snapshot, chain[0].id):
        return True
    return any(item.doc_hidden for item in chain[1:])


def _subject_hidden(
    baseline: ApiSnapshot, current: ApiSnapshot, row: Mapping[str, object]
) -> bool:
    """Whether the finding's subject is outside the documented public API.

    Each snapshot where the subject's owner path resolves gets a vote; one
    hidden vote filters the finding.  An item hidden in the baseline was
    never promised, and an item hidden in the current release has been
    withdrawn from the promise, so neither side's changes are reportable.
    """
    return _side_reads_hidden(baseline, row) or _side_reads_hidden(current, row)


# --- running one check --------------------------------------------------------

@functools.lru_cache(maxsize=1)
def _embedded_catalog() -> tuple[LintDefinition, ...]:
    return tuple(load_catalog("embedded"))


def _as_snapshot(source: ApiSnapshot | str | os.PathLike) -> ApiSnapshot:
    if isinstance(source, ApiSnapshot):
        return source
    return load_snapshot(source)


def _canonical_text(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return "::".join(str(part) for part in value)
    return str(value)


def _finding_key(finding: Finding) -> tuple:
    extras = tuple(
        (name, _canonical_text(value))
        for name, value in sorted(finding.outputs.items())
        if name != "path"
    )
    return (finding.lint_id, finding.item_path.segments, extras)


def _finding_from_row(definition: LintDefinition, row: Mapping[str, object]) -> Finding:
    span = None
    filename = row.get("span_filename")
    begin_line = row.get("span_begin_line")
    if filename is not None and begin_line is not None:
        span = Span(filename=filename, begin_line=begin_line)  # type: ignore[arg-type]
    return Finding(
        lint_id=definition.id,
        item_path=ImportablePath(segments=tuple(row["path"]), public_api=True),  # type: ignore[arg-type]
        span=span,
        outputs=dict(row),
        required_update=definition.required_update,
        message=render_finding(definition, dict(row)),
    )


def _resolve_side_features(
    manifest: CrateManifest | None, config: FeatureConfig
) -> frozenset[str] | None:
    if manifest is None:
        if config.mode == "explicit" and config.explicit_list:
            raise UnknownFeature(config.explicit_list[0])
        return None
    return resolve_features(manifest, config)


def run_check(
    config: CheckConfig, catalog: Sequence[LintDefinition] | None = None
) -> CheckReport:
    """Run every catalog lint over the configured snapshot pair.

    Findings are filtered to the documented public API, sorted, and reduced
    to a verdict against the effective bump (the override when present, the
    computed bump otherwise).  Feature sets are resolved for any side that
    has a manifest, so an undeclared explicit feature fails the check before
    any query runs.
    """
    baseline = _as_snapshot(config.baseline)
    current = _as_snapshot(config.current)
    if baseline.crate_name != current.crate_name:
        raise MalformedInput(
            f"snapshot pair names two different crates: "
            f"{baseline.crate_name!r} and {current.crate_name!r}"
        )
    baseline_features = _resolve_side_features(
        config.baseline_manifest, config.baseline_features
    )
    current_features = _resolve_side_features(
        config.current_manifest, config.current_features
    )
    actual_bump = compute_actual_bump(
        parse_version(baseline.crate_version), parse_version(current.crate_version)
    )
    effective_bump = (
        config.release_type_override
        if config.release_type_override is not None
        else actual_bump
    )

    definitions = _embedded_catalog() if catalog is None else tuple(catalog)
    adapter = SnapshotPairAdapter(baseline, current)
    executed: list[ExecutedLint] = []
    for definition in definitions:
        kept: list[Finding] = []
        hidden: list[Finding] = []
        for row in execute_query(definition.checked_query, adapter, definition.arguments):
            target = hidden if _subject_hidden(baseline, current, row) else kept
            target.append(_finding_from_row(definition, row))
        executed.append(
            ExecutedLint(
                definition=definition,
                findings=tuple(sorted(kept, key=_finding_key)),
                filtered=tuple(sorted(hidden, key=_finding_key)),
            )
        )
    executed.sort(key=lambda e: e.definition.id)

    findings = tuple(
        sorted((f for e in executed for f in e.findings), key=_finding_key)
    )
    filtered = tuple(
        sorted((f for e in executed for f in e.filtered), key=_finding_key)
    )
    verdict = compute_verdict((f.required_update for f in findings), effective_bump)
    return CheckReport(
        crate_name=current.crate_name,
        baseline_version=baseline.crate_version,
        current_version=current.crate_version,
        actual_bump=actual_bump,
        effective_bump=effective_bump,
        release_type_override=config.release_type_override,
        executed=tuple(executed),
        findings=findings,
        filtered_findings=filtered,
        verdict=verdict,
        baseline_feature_set=baseline_features,
        current_feature_set=current_features,
        baseline_snapshot=baseline,
        current_snapshot=current,
    )


# --- rendering ----------------------------------------------------------------

def _plural(count: int, noun: str) -> str:
    return f"{count} {noun}" + ("" if count == 1 else "s")


def _bump_phrase(report: CheckReport) -> str:
    if report.release_type_override is not None:
        return (
            f"{report.effective_bump} release "
            f"(override; actual change: {report.actual_bump})"
        )
    return f"{report.effective_bump} release"


def render_report(report: CheckReport, verbose: bool = False) -> str:
    """Human-readable report text; byte-deterministic for a fixed report.

    Non-verbose output names only the triggered lints, each with its
    description, required update, optional reference link, and one line per
    finding.  Verbose output additionally marks every executed lint pass or
    FAIL.  A passing non-verbose report is a single summary line.
    """
    header = f"{report.crate_name} {report.baseline_version} -> {report.current_version}"
    ignored_note = ""
    if report.filtered_findings:
        ignored_note = (
            f", {_plural(len(report.filtered_findings), 'doc-hidden finding')} ignored"
        )

    if not verbose and report.verdict.ok:
        return (
            f"{header}: ok - no semver violations "
            f"({_plural(len(report.executed), 'lint')} checked{ignored_note})\n"
        )

    lines = [f"{header}: {_bump_phrase(report)}", ""]
    if verbose:
        lines.append("lints:")
        for entry in report.executed:
            marker = "FAIL" if entry.triggered else "pass"
            lines.append(f"  {marker} {entry.definition.id}")
        lines.append("")
    for entry in report.executed:
        if not entry.triggered:
            continue
        definition = entry.definition
        lines.append(
            f"FAIL {definition.id}: {definition.human_readable_name} "
            f"(requires {definition.required_update})"
        )
        lines.append(f"  {definition.description}")
        if definition.reference_link is not None:
            lines.append(f"  reference: {definition.reference_link}")
        for finding in entry.findings:
            lines.append(f"  * {finding.message}")
        lines.append("")
    triggered = sum(1 for e in report.executed if e.triggered)
    lines.append(
        f"checked {_plural(len(report.executed), 'lint')}: "
        f"{triggered} triggered, {_plural(len(report.findings), 'finding')}"
        f"{ignored_note}"
    )
    if report.verdict.ok:
        lines.append("verdict: ok - no semver violations")
    else:
        lines.append(
            f"verdict: violations - required update: {report.verdict.required}, "
            f"release only provides {report.effective_bump}"
        )
    return "\n".join(lines) + "\n"
