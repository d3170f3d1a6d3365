"""Witness crate pairs: minimal downstream code whose compile outcome proves
or refutes a reported break.

A witness is one Rust source file plus two manifests that differ only in the
pinned dependency version.  The source exercises the public API exactly where
the finding claims a break: if it compiles against the baseline release but
not against the current one, the break is real (confirmed); compiling against
both suggests a false positive; failing against the baseline means the
witness itself is wrong (invalid).

Each template also emits one structured comment per API fact the code relies
on (lines starting with ``//~ requires``).  The default oracle is a hermetic
stub that resolves those declared requirements against an API snapshot
instead of invoking a toolchain; a real compiler can be plugged in through a
command template and simply ignores the comments.
"""

from __future__ import annotations

import enum
import os
import re
import shlex
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

from .checker import CheckReport, Finding
from .errors import OracleUnavailable, UnsupportedLint, WitnessError
from .query import (
    SNAPSHOT_PAIR_SCHEMA,
    SnapshotPairAdapter,
    check_query,
    execute_query,
    parse_query,
)
from .snapshot import (
    ApiItem,
    ApiSnapshot,
    EnumData,
    FunctionData,
    ImplData,
    StructData,
    load_snapshot,
)

__all__ = [
    "CommandOracle",
    "CompileResult",
    "CompilerOracle",
    "OUTCOME_LOG_NAME",
    "Requirement",
    "StubOracle",
    "SUPPORTED_LINTS",
    "Witness",
    "WitnessOutcome",
    "WitnessResult",
    "classify_witness",
    "generate_witness",
    "parse_requirements",
    "run_witnesses",
    "search_generic_arity",
    "stub_witness_runner",
    "write_witness",
]

SUPPORTED_LINTS = frozenset(
    {
        "auto_trait_impl_removed",
        "constructible_struct_adds_field",
        "derive_trait_impl_removed",
        "enum_marked_non_exhaustive",
        "enum_missing",
        "enum_variant_added",
        "enum_variant_missing",
        "function_missing",
        "function_parameter_count_changed",
        "inherent_method_missing",
        "method_parameter_count_changed",
        "struct_missing",
        "trait_missing",
    }
)

# Bound paths for traits whose bare name is not in the prelude.
_BOUND_PATHS = {
    "Debug": "std::fmt::Debug",
    "Display": "std::fmt::Display",
    "Hash": "std::hash::Hash",
    "UnwindSafe": "std::panic::UnwindSafe",
    "RefUnwindSafe": "std::panic::RefUnwindSafe",
}


class WitnessOutcome(enum.Enum):
    CONFIRMED = "confirmed"
    SUSPECTED_FALSE_POSITIVE = "suspected_false_positive"
    INVALID = "invalid"


@dataclass(frozen=True)
class Witness:
    """Shared source plus the two manifests that pin each release."""

    lib_source: str
    baseline_manifest: str
    current_manifest: str
    finding: Finding


@dataclass(frozen=True)
class CompileResult:
    success: bool
    diagnostic: str = ""


class CompilerOracle(Protocol):
    def compile(
        self, manifest_text: str, lib_source: str, dependency: object = None
    ) -> CompileResult: ...


# --- requirements -------------------------------------------------------------


@dataclass(frozen=True)
class Requirement:
    """One API fact a witness source relies on, in machine-checkable form.

    kind ∈ {path, fn, method, impl, variant, match, fields}; subject is the
    importable path of the item; detail depends on the kind.
    """

    kind: str
    subject: tuple[str, ...]
    detail: tuple[str, ...] = ()

    def to_comment(self) -> str:
        text = "::".join(self.subject)
        if self.kind == "path":
            body = f"path {text}"
        elif self.kind == "fn":
            body = f"fn {text} arity {self.detail[0]}"
        elif self.kind == "method":
            body = f"method {text} {self.detail[0]} arity {self.detail[1]}"
        elif self.kind == "impl":
            body = f"impl {text} {self.detail[0]}"
        elif self.kind == "variant":
            body = f"variant {text} {self.detail[0]}"
        elif self.kind == "match":
            body = f"match {text} = {','.join(self.detail)}"
        elif self.kind == "fields":
            body = f"fields {text} {self.detail[0]} = {','.join(self.detail[1:])}"
        else:
            raise WitnessError(f"unknown requirement kind {self.kind!r}")
        return f"//~ requires {body}"


_REQUIRE_RE = re.compile(r"^//~ requires (\S+) (\S+)(?: (.*))?$")


def parse_requirements(lib_source: str) -> list[Requirement]:
    """Extract the ``//~ requires`` lines a witness source declares."""
    requirements: list[Requirement] = []
    for line in lib_source.splitlines():
        if not line.startswith("//~"):
            continue
        matched = _REQUIRE_RE.match(line.strip())
        if matched is None:
            raise WitnessError(f"malformed requirement comment: {line!r}")
        kind, subject_text, rest = matched.group(1), matched.group(2), matched.group(3)
        subject = tuple(subject_text.split("::"))
        rest = rest or ""
        if kind == "path":
            detail: tuple[str, ...] = ()
        elif kind == "fn":
            arity = rest.split()
            if len(arity) != 2 or arity[0] != "arity":
                raise WitnessError(f"malformed fn requirement: {line!r}")
            detail = (arity[1],)
        elif kind == "method":
            parts = rest.split()
            if len(parts) != 3 or parts[1] != "arity":
                raise WitnessError(f"malformed method requirement: {line!r}")
            detail = (parts[0], parts[2])
        elif kind in ("impl", "variant"):
            if not rest or len(rest.split()) != 1:
                raise WitnessError(f"malformed {kind} requirement: {line!r}")
            detail = (rest,)
        elif kind == "match":
            if not rest.startswith("= "):
                if rest != "=":
                    raise WitnessError(f"malformed match requirement: {line!r}")
                detail = ()
            else:
                names = rest[2:]
                detail = tuple(n for n in names.split(",") if n)
        elif kind == "fields":
            parts = rest.split(" = ", 1)
            if len(parts) == 2:
                struct_kind, names = parts
            else:
                # A field-less pattern renders as "<kind> = " and the line
                # strip leaves no trailing space to split on.
                tokens = rest.split()
                if len(tokens) != 2 or tokens[1] != "=":
                    raise WitnessError(f"malformed fields requirement: {line!r}")
                struct_kind, names = tokens[0], ""
            detail = (struct_kind,) + tuple(n for n in names.split(",") if n)
        else:
            raise WitnessError(f"unknown requirement kind in {line!r}")
        requirements.append(Requirement(kind=kind, subject=subject, detail=detail))
    return requirements


def _has_attribute(item: ApiItem, base: str) -> bool:
    return any(attribute.base == base for attribute in item.attributes)


def _check_requirement(req: Requirement, snapshot: ApiSnapshot) -> str | None:
    """None when the snapshot satisfies the requirement, else a diagnostic."""
    text = "::".join(req.subject)
    item = snapshot.item_at_path(req.subject)
    if item is None:
        return f"unresolved path {text}"
    if req.kind == "path":
        return None
    if req.kind == "fn":
        if not isinstance(item.data, FunctionData):
            return f"{text} is not a function"
        want = int(req.detail[0])
        if len(item.data.parameter_names) != want:
            return (
                f"{text} takes {len(item.data.parameter_names)} "
                f"parameters, call supplies {want}"
            )
        return None
    if req.kind == "method":
        name, want = req.detail[0], int(req.detail[1])
        for method in snapshot.inherent_methods_of(item):
            assert isinstance(method.data, FunctionData)
            if method.name == name:
                if len(method.data.parameter_names) == want:
                    return None
                return (
                    f"{text}::{name} takes {len(method.data.parameter_names)} "
                    f"parameters, call supplies {want}"
                )
        return f"no inherent method {name} on {text}"
    if req.kind == "impl":
        trait = req.detail[0]
        for impl in snapshot.impls_of(item):
            assert isinstance(impl.data, ImplData)
            if impl.data.implemented_trait_name == trait and not impl.data.is_negative:
                return None
        return f"{text} does not implement {trait}"
    if req.kind == "variant":
        name = req.detail[0]
        if any(v.name == name for v in snapshot.variants_of(item)):
            return None
        return f"{text} has no variant {name}"
    if req.kind == "match":
        if not isinstance(item.data, EnumData):
            return f"{text} is not an enum"
        if _has_attribute(item, "non_exhaustive"):
            return f"{text} is non_exhaustive: match needs a wildcard arm"
        have = {v.name for v in snapshot.variants_of(item)}
        listed = set(req.detail)
        if have - listed:
            missing = ", ".join(sorted(have - listed))
            return f"match on {text} does not cover {missing}"
        if listed - have:
            unknown = ", ".join(sorted(listed - have))
            return f"{text} has no variant {unknown}"
        return None
    if req.kind == "fields":
        struct_kind, listed = req.detail[0], set(req.detail[1:])
        if not isinstance(item.data, StructData):
            return f"{text} is not a struct"
        if item.data.struct_kind != struct_kind:
            return f"{text} is a {item.data.struct_kind} struct, pattern is {struct_kind}"
        have = {f.name for f in snapshot.fields_of(item)}
        if have != listed:
            return (
                f"pattern fields {sorted(listed)} do not match "
                f"{text} fields {sorted(have)}"
            )
        return None
    raise WitnessError(f"unknown requirement kind {req.kind!r}")


# --- oracles --------------------------------------------------------------------


def _manifest_dependency(manifest_text: str) -> tuple[str, str]:
    """(name, exact version) of the single pinned dependency."""
    try:
        doc = tomllib.loads(manifest_text)
        deps = doc["dependencies"]
        ((name, spec),) = deps.items()
    except (tomllib.TOMLDecodeError, KeyError, ValueError) as exc:
        raise WitnessError(f"witness manifest has no single dependency: {exc}") from exc
    if not isinstance(spec, str) or not spec.startswith("="):
        raise WitnessError(f"witness dependency {name} is not pinned: {spec!r}")
    return name, spec[1:]


@dataclass(frozen=True)
class StubOracle:
    """Hermetic oracle: resolves declared requirements against a snapshot.

    The dependency argument names the snapshot to compile against (an
    ApiSnapshot or a path to one).  When omitted, the manifest's pinned
    version is looked up in ``releases``.
    """

    releases: Mapping[str, ApiSnapshot] | None = None

    def compile(
        self, manifest_text: str, lib_source: str, dependency: object = None
    ) -> CompileResult:
        snapshot = self._snapshot_for(manifest_text, dependency)
        for requirement in parse_requirements(lib_source):
            diagnostic = _check_requirement(requirement, snapshot)
            if diagnostic is not None:
                return CompileResult(False, diagnostic)
        return CompileResult(True)

    def _snapshot_for(self, manifest_text: str, dependency: object) -> ApiSnapshot:
        if isinstance(dependency, ApiSnapshot):
            return dependency
        if isinstance(dependency, (str, os.PathLike)):
            return load_snapshot(dependency)
        if dependency is None and self.releases is not None:
            _, version = _manifest_dependency(manifest_text)
            snapshot = self.releases.get(version)
            if snapshot is not None:
                return snapshot
            raise OracleUnavailable(f"no snapshot registered for version {version}")
        raise OracleUnavailable("stub oracle needs a dependency snapshot")


@dataclass(frozen=True)
class CommandOracle:
    """Real-toolchain oracle driven by an external command template.

    ``{MANIFEST_DIR}`` in the template is replaced by a temporary directory
    holding Cargo.toml and src/lib.rs; exit status 0 means success.  When the
    dependency argument is a local package directory, the manifest gains a
    patch section pointing the pinned dependency at it.
    """

    command_template: str
    timeout: float = 300.0

    def compile(
        self, manifest_text: str, lib_source: str, dependency: object = None
    ) -> CompileResult:
        if "{MANIFEST_DIR}" not in self.command_template:
            raise OracleUnavailable(
                "oracle command template does not reference {MANIFEST_DIR}"
            )
        manifest = manifest_text
        if isinstance(dependency, (str, os.PathLike)):
            name, _ = _manifest_dependency(manifest_text)
            dep_path = str(Path(dependency).resolve()).replace("\\", "/")
            manifest += f'\n[patch.crates-io]\n{name} = {{ path = "{dep_path}" }}\n'
        with tempfile.TemporaryDirectory(prefix="witness-") as tmp:
            root = Path(tmp)
            (root / "src").mkdir()
            (root / "Cargo.toml").write_text(manifest, encoding="utf-8")
            (root / "src" / "lib.rs").write_text(lib_source, encoding="utf-8")
            command = self.command_template.replace("{MANIFEST_DIR}", str(root))
            try:
                proc = subprocess.run(
                    shlex.split(command),
                    capture_output=True,
                    text=True,
                    timeout=self.timeout,
                )
            except FileNotFoundError as exc:
                raise OracleUnavailable(f"oracle command not found: {exc}") from exc
            except subprocess.TimeoutExpired:
                return CompileResult(False, "compile timed out")
        return CompileResult(proc.returncode == 0, proc.stderr)


def classify_witness(
    witness: Witness,
    oracle: CompilerOracle,
    *,
    baseline_dependency: object = None,
    current_dependency: object = None,
) -> WitnessOutcome:
    """Compile against both releases; at most two oracle calls.

    A baseline failure means the witness is wrong and the current compile is
    skipped.
    """
    if oracle is None:
        raise OracleUnavailable("no compiler oracle configured")
    baseline = oracle.compile(
        witness.baseline_manifest, witness.lib_source, baseline_dependency
    )
    if not baseline.success:
        return WitnessOutcome.INVALID
    current = oracle.compile(
        witness.current_manifest, witness.lib_source, current_dependency
    )
    if current.success:
        return WitnessOutcome.SUSPECTED_FALSE_POSITIVE
    return WitnessOutcome.CONFIRMED


# --- generation -----------------------------------------------------------------


_VARIANTS_QUERY = """
{
    CrateDiff {
        baseline {
            item {
                ... on Enum {
                    importable_path {
                        path @filter(op: "=", value: ["$subject"])
                        public_api @filter(op: "=", value: [true])
                    }
                    variant {
                        name @output(name: "variant_name")
                    }
                }
            }
        }
    }
}
"""

_FIELDS_QUERY = """
{
    CrateDiff {
        baseline {
            item {
                ... on Struct {
                    struct_kind @output
                    importable_path {
                        path @filter(op: "=", value: ["$subject"])
                        public_api @filter(op: "=", value: [true])
                    }
                    field {
                        name @output(name: "field_name")
                    }
                }
            }
        }
    }
}
"""


def _query_rows(query_text: str, snapshot: ApiSnapshot, subject: tuple[str, ...]) -> list[dict]:
    checked = check_query(parse_query(query_text), SNAPSHOT_PAIR_SCHEMA)
    adapter = SnapshotPairAdapter(snapshot, snapshot)
    return list(execute_query(checked, adapter, {"subject": subject}))


def baseline_variant_names(snapshot: ApiSnapshot, subject: tuple[str, ...]) -> list[str]:
    """All variants of the enum at ``subject``, via the enumeration query."""
    return [row["variant_name"] for row in _query_rows(_VARIANTS_QUERY, snapshot, subject)]


def baseline_field_names(snapshot: ApiSnapshot, subject: tuple[str, ...]) -> list[str]:
    """All fields of the struct at ``subject``, via the enumeration query."""
    return [row["field_name"] for row in _query_rows(_FIELDS_QUERY, snapshot, subject)]


def _type_args(arity: int) -> str:
    return "" if arity == 0 else "<" + ", ".join(["()"] * arity) + ">"


def _todo_args(arity: int) -> str:
    return ", ".join(["todo!()"] * arity)


def _variant_pattern_suffix(kind: str) -> str:
    if kind == "variant-tuple":
        return "(..)"
    if kind == "variant-struct":
        return " { .. }"
    return ""


@dataclass(frozen=True)
class _Subject:
    segments: tuple[str, ...]

    @property
    def text(self) -> str:
        return "::".join(self.segments)

    def typed(self, arity: int) -> str:
        return self.text + _type_args(arity)

    def turbofish(self, arity: int) -> str:
        return self.text + ("" if arity == 0 else "::" + _type_args(arity))


def _source(requirements: list[Requirement], code: str) -> str:
    comments = "\n".join(r.to_comment() for r in requirements)
    return f"{comments}\n{code}\n"


def _pure_use_source(subject: _Subject) -> str:
    return _source(
        [Requirement("path", subject.segments)],
        f"pub use {subject.text};",
    )


def _value_arg_source(subject: _Subject, arity: int) -> str:
    return _source(
        [Requirement("path", subject.segments)],
        f"pub fn witness(value: {subject.typed(arity)}) {{\n"
        f"    let _ = value;\n"
        f"}}",
    )


def _trait_bound_source(subject: _Subject, arity: int) -> str:
    return _source(
        [Requirement("path", subject.segments)],
        f"pub fn witness<T: {subject.typed(arity)}>(value: T) {{\n"
        f"    let _ = value;\n"
        f"}}",
    )


def _function_call_source(subject: _Subject, arity: int, call_arity: int) -> str:
    return _source(
        [Requirement("fn", subject.segments, (str(call_arity),))],
        f"pub fn witness() {{\n"
        f"    {subject.turbofish(arity)}({_todo_args(call_arity)});\n"
        f"}}",
    )


def _method_call_source(
    subject: _Subject, arity: int, method: str, call_arity: int
) -> str:
    return _source(
        [
            Requirement("path", subject.segments),
            Requirement("method", subject.segments, (method, str(call_arity))),
        ],
        f"pub fn witness(value: {subject.typed(arity)}) {{\n"
        f"    value.{method}({_todo_args(call_arity)});\n"
        f"}}",
    )


def _forwarding_source(subject: _Subject, arity: int, trait_name: str) -> str:
    bound = _BOUND_PATHS.get(trait_name, trait_name)
    return _source(
        [
            Requirement("path", subject.segments),
            Requirement("impl", subject.segments, (trait_name,)),
        ],
        f"fn require_bound<T: {bound}>(value: T) {{\n"
        f"    let _ = value;\n"
        f"}}\n"
        f"\n"
        f"pub fn witness(value: {subject.typed(arity)}) {{\n"
        f"    require_bound(value);\n"
        f"}}",
    )


def _if_let_source(subject: _Subject, arity: int, variant: str, suffix: str) -> str:
    return _source(
        [
            Requirement("path", subject.segments),
            Requirement("variant", subject.segments, (variant,)),
        ],
        f"pub fn witness(value: {subject.typed(arity)}) {{\n"
        f"    if let {subject.text}::{variant}{suffix} = value {{}}\n"
        f"}}",
    )


def _match_source(
    subject: _Subject, arity: int, variants: list[tuple[str, str]]
) -> str:
    arms = "\n".join(
        f"        {subject.text}::{name}{_variant_pattern_suffix(kind)} => {{}}"
        for name, kind in variants
    )
    body = f"    match value {{\n{arms}\n    }}\n" if variants else "    match value {}\n"
    return _source(
        [
            Requirement("path", subject.segments),
            Requirement("match", subject.segments, tuple(name for name, _ in variants)),
        ],
        f"pub fn witness(value: {subject.typed(arity)}) {{\n{body}}}",
    )


def _struct_pattern_source(
    subject: _Subject, arity: int, struct_kind: str, fields: list[str]
) -> str:
    if struct_kind == "tuple":
        pattern = f"{subject.text}({', '.join(['_'] * len(fields))})"
    else:
        inner = ", ".join(f"{name}: _" for name in fields)
        pattern = f"{subject.text} {{ {inner} }}" if inner else f"{subject.text} {{}}"
    return _source(
        [
            Requirement("path", subject.segments),
            Requirement("fields", subject.segments, (struct_kind, *fields)),
        ],
        f"pub fn witness(value: {subject.typed(arity)}) {{\n"
        f"    let {pattern} = value;\n"
        f"}}",
    )


def _manifest_text(dep_name: str, version: str) -> str:
    return (
        "[package]\n"
        'name = "witness"\n'
        'version = "0.0.0"\n'
        'edition = "2021"\n'
        "\n"
        "[dependencies]\n"
        f'{dep_name} = "={version}"\n'
    )


def _baseline_item(snapshot: ApiSnapshot, subject: _Subject) -> ApiItem | None:
    return snapshot.item_at_path(subject.segments)


def _variant_kinds(snapshot: ApiSnapshot, item: ApiItem) -> dict[str, str]:
    return {v.name: v.kind for v in snapshot.variants_of(item)}


def generate_witness(
    finding: Finding,
    baseline_snapshot: ApiSnapshot,
    current_snapshot: ApiSnapshot,
    *,
    type_arity: int = 0,
) -> Witness:
    """Build the witness pair for one finding.

    The template is chosen by lint id; UnsupportedLint is raised for lints
    with no template (notably struct_repr_c_removed, which needs manual
    layout-compatibility judgement rather than a compile test).
    """
    lint_id = finding.lint_id
    if lint_id not in SUPPORTED_LINTS:
        if lint_id == "struct_repr_c_removed":
            raise UnsupportedLint(
                lint_id, "repr(C) layout breaks need manual verification"
            )
        raise UnsupportedLint(lint_id)
    subject = _Subject(tuple(finding.item_path.segments))

    if lint_id in ("enum_missing", "struct_missing"):
        source = _value_arg_source(subject, type_arity)
    elif lint_id == "trait_missing":
        source = _trait_bound_source(subject, type_arity)
    elif lint_id in ("function_missing", "function_parameter_count_changed"):
        item = _baseline_item(baseline_snapshot, subject)
        if item is not None and isinstance(item.data, FunctionData):
            source = _function_call_source(
                subject, type_arity, len(item.data.parameter_names)
            )
        elif lint_id == "function_missing":
            # Realistic call code needs the baseline arity; without it the
            # pure import still proves the path is gone.
            source = _pure_use_source(subject)
        else:
            raise UnsupportedLint(lint_id, f"baseline function {subject.text} not found")
    elif lint_id in ("inherent_method_missing", "method_parameter_count_changed"):
        method_name = str(finding.outputs.get("method_name") or "")
        owner = _baseline_item(baseline_snapshot, subject)
        if not method_name or owner is None:
            raise UnsupportedLint(lint_id, f"baseline method on {subject.text} not found")
        arity: int | None = None
        for method in baseline_snapshot.inherent_methods_of(owner):
            if method.name == method_name and isinstance(method.data, FunctionData):
                arity = len(method.data.parameter_names)
                break
        if arity is None:
            raise UnsupportedLint(
                lint_id, f"baseline method {subject.text}::{method_name} not found"
            )
        source = _method_call_source(subject, type_arity, method_name, arity)
    elif lint_id in ("auto_trait_impl_removed", "derive_trait_impl_removed"):
        trait_name = str(finding.outputs.get("trait_name") or "")
        if not trait_name:
            raise UnsupportedLint(lint_id, "finding names no trait")
        source = _forwarding_source(subject, type_arity, trait_name)
    elif lint_id == "enum_variant_missing":
        variant_name = str(finding.outputs.get("variant_name") or "")
        owner = _baseline_item(baseline_snapshot, subject)
        if not variant_name or owner is None:
            raise UnsupportedLint(lint_id, f"baseline variant on {subject.text} not found")
        kind = _variant_kinds(baseline_snapshot, owner).get(variant_name)
        if kind is None:
            raise UnsupportedLint(
                lint_id, f"variant {variant_name} not in baseline {subject.text}"
            )
        source = _if_let_source(
            subject, type_arity, variant_name, _variant_pattern_suffix(kind)
        )
    elif lint_id in ("enum_variant_added", "enum_marked_non_exhaustive"):
        owner = _baseline_item(baseline_snapshot, subject)
        if owner is None:
            raise UnsupportedLint(lint_id, f"baseline enum {subject.text} not found")
        names = baseline_variant_names(baseline_snapshot, subject.segments)
        kinds = _variant_kinds(baseline_snapshot, owner)
        variants = [(name, kinds.get(name, "variant-plain")) for name in names]
        source = _match_source(subject, type_arity, variants)
    elif lint_id == "constructible_struct_adds_field":
        owner = _baseline_item(baseline_snapshot, subject)
        if owner is None or not isinstance(owner.data, StructData):
            raise UnsupportedLint(lint_id, f"baseline struct {subject.text} not found")
        if owner.data.struct_kind == "unit":
            raise UnsupportedLint(lint_id, "unit structs have no field pattern")
        fields = baseline_field_names(baseline_snapshot, subject.segments)
        source = _struct_pattern_source(
            subject, type_arity, owner.data.struct_kind, fields
        )
    else:  # pragma: no cover - SUPPORTED_LINTS and the chain above stay in sync
        raise UnsupportedLint(lint_id)

    dep_name = baseline_snapshot.crate_name
    return Witness(
        lib_source=source,
        baseline_manifest=_manifest_text(dep_name, str(baseline_snapshot.crate_version)),
        current_manifest=_manifest_text(dep_name, str(current_snapshot.crate_version)),
        finding=finding,
    )


def search_generic_arity(
    finding: Finding,
    baseline_snapshot: ApiSnapshot,
    current_snapshot: ApiSnapshot,
    oracle: CompilerOracle,
    *,
    baseline_dependency: object = None,
    max_arity: int = 4,
) -> tuple[Witness, int, CompileResult]:
    """First 0..=max_arity type-argument count whose baseline compile passes.

    Returns the witness, the arity, and the successful baseline result so the
    caller need not recompile.  Exhausting the range raises UnsupportedLint:
    such items need trait bounds the search cannot synthesize.
    """
    for arity in range(max_arity + 1):
        witness = generate_witness(
            finding, baseline_snapshot, current_snapshot, type_arity=arity
        )
        result = oracle.compile(
            witness.baseline_manifest, witness.lib_source, baseline_dependency
        )
        if result.success:
            return witness, arity, result
    raise UnsupportedLint(
        finding.lint_id,
        f"no generic arity in 0..={max_arity} compiles against the baseline",
    )


# --- emission and batch runs ------------------------------------------------------


def write_witness(witness: Witness, directory: str | os.PathLike) -> Path:
    """Emit baseline/Cargo.toml, current/Cargo.toml and the shared src/lib.rs."""
    root = Path(directory)
    (root / "baseline").mkdir(parents=True, exist_ok=True)
    (root / "current").mkdir(parents=True, exist_ok=True)
    (root / "src").mkdir(parents=True, exist_ok=True)
    (root / "baseline" / "Cargo.toml").write_text(
        witness.baseline_manifest, encoding="utf-8"
    )
    (root / "current" / "Cargo.toml").write_text(
        witness.current_manifest, encoding="utf-8"
    )
    (root / "src" / "lib.rs").write_text(witness.lib_source, encoding="utf-8")
    return root


@dataclass(frozen=True)
class WitnessResult:
    """One finding's witness attempt: either a classified pair or a reason."""

    finding: Finding
    witness: Witness | None
    directory: Path | None
    outcome: WitnessOutcome | None
    arity: int | None
    unsupported_reason: str | None


OUTCOME_LOG_NAME = "outcomes.tsv"


def run_witnesses(
    report: CheckReport,
    out_root: str | os.PathLike,
    oracle: CompilerOracle | None = None,
    *,
    baseline_dependency: object = None,
    current_dependency: object = None,
    max_arity: int = 4,
) -> list[WitnessResult]:
    """Generate, emit, and classify a witness for every reported finding.

    The layout is <crate>/<baseline>_<current>/<lint_id>/<n>/ under out_root,
    and the outcome log gains one ``lint_id<TAB>path<TAB>outcome`` line per
    classified witness.
    """
    if report.baseline_snapshot is None or report.current_snapshot is None:
        raise WitnessError("report does not carry its snapshots")
    baseline_snapshot = report.baseline_snapshot
    current_snapshot = report.current_snapshot
    if oracle is None:
        oracle = StubOracle()
    if baseline_dependency is None:
        baseline_dependency = baseline_snapshot
    if current_dependency is None:
        current_dependency = current_snapshot

    root = Path(out_root)
    root.mkdir(parents=True, exist_ok=True)
    pair_dir = root / report.crate_name / (
        f"{report.baseline_version}_{report.current_version}"
    )
    results: list[WitnessResult] = []
    counters: dict[str, int] = {}
    log_lines: list[str] = []
    for finding in report.findings:
        try:
            witness, arity, _ = search_generic_arity(
                finding,
                baseline_snapshot,
                current_snapshot,
                oracle,
                baseline_dependency=baseline_dependency,
                max_arity=max_arity,
            )
        except UnsupportedLint as exc:
            results.append(
                WitnessResult(
                    finding=finding,
                    witness=None,
                    directory=None,
                    outcome=None,
                    arity=None,
                    unsupported_reason=exc.reason,
                )
            )
            continue
        current_result = oracle.compile(
            witness.current_manifest, witness.lib_source, current_dependency
        )
        outcome = (
            WitnessOutcome.SUSPECTED_FALSE_POSITIVE
            if current_result.success
            else WitnessOutcome.CONFIRMED
        )
        n = counters.get(finding.lint_id, 0)
        counters[finding.lint_id] = n + 1
        directory = write_witness(witness, pair_dir / finding.lint_id / str(n))
        relative = directory.relative_to(root).as_posix()
        log_lines.append(f"{finding.lint_id}\t{relative}\t{outcome.value}\n")
        results.append(
            WitnessResult(
                finding=finding,
                witness=witness,
                directory=directory,
                outcome=outcome,
                arity=arity,
                unsupported_reason=None,
            )
        )
    with open(root / OUTCOME_LOG_NAME, "a", encoding="utf-8") as handle:
        handle.writelines(log_lines)
    return results


def stub_witness_runner() -> Callable[[CheckReport, Finding], str]:
    """Per-finding outcome labeler for batch runs, backed by the stub oracle.

    Returns outcome values from the classification trichotomy, or
    "unsupported" for findings no template covers.  Nothing is written to
    disk; batch runs only tally outcomes.
    """
    oracle = StubOracle()

    def run(report: CheckReport, finding: Finding) -> str:
        baseline = report.baseline_snapshot
        current = report.current_snapshot
        if baseline is None or current is None:
            return "unsupported"
        try:
            witness = generate_witness(finding, baseline, current)
        except UnsupportedLint:
            return "unsupported"
        outcome = classify_witness(
            witness,
            oracle,
            baseline_dependency=baseline,
            current_dependency=current,
        )
        return outcome.value

    return run
