"""Crate manifest parsing: package identity, dependencies, feature graph.

Only the subset of the manifest format the checker needs is modeled.  Feature
lists may reference declared features, optional dependencies ("dep:name" or
the implicit feature a bare optional-dependency name creates), and dependency
features ("name/feat", "name?/feat"); anything else is rejected.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import MalformedManifest

__all__ = ["CrateManifest", "Dependency", "parse_manifest", "workspace_members"]


@dataclass(frozen=True)
class Dependency:
    name: str
    req: str
    optional: bool = False
    # Populated for target-qualified tables, e.g. [target.'cfg(windows)'.dependencies].
    target: str | None = None


@dataclass(frozen=True)
class CrateManifest:
    name: str
    version: str
    features: dict[str, tuple[str, ...]]
    dependencies: tuple[Dependency, ...]

    def dependency_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.dependencies)

    def optional_dependency_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.dependencies if d.optional)


def _fail(message: str) -> MalformedManifest:
    return MalformedManifest(message)


def _parse_dependency(name: str, spec: object, target: str | None) -> Dependency:
    if isinstance(spec, str):
        return Dependency(name=name, req=spec, target=target)
    if isinstance(spec, dict):
        req = spec.get("version", "*")
        if not isinstance(req, str):
            raise _fail(f"dependency {name!r}: version must be a string")
        optional = spec.get("optional", False)
        if not isinstance(optional, bool):
            raise _fail(f"dependency {name!r}: optional must be a boolean")
        return Dependency(name=name, req=req, optional=optional, target=target)
    raise _fail(f"dependency {name!r}: must be a version string or a table")


def _validate_feature_token(
    feature: str, token: str, manifest: CrateManifest
) -> None:
    deps = manifest.dependency_names()
    optional = manifest.optional_dependency_names()
    if token.startswith("dep:"):
        dep = token[4:]
        if dep not in optional:
            raise _fail(
                f"feature {feature!r}: {token!r} does not name an optional dependency"
            )
        return
    if "/" in token:
        dep, _, _feat = token.partition("/")
        if dep.endswith("?"):
            dep = dep[:-1]
        if dep not in deps:
            raise _fail(f"feature {feature!r}: {token!r} does not name a dependency")
        return
    if token in manifest.features or token in optional:
        return
    raise _fail(
        f"feature {feature!r}: {token!r} is neither a declared feature "
        f"nor an optional dependency"
    )


def parse_manifest(source: bytes | str | os.PathLike) -> CrateManifest:
    """Parse and validate manifest TOML from bytes or a filesystem path."""
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        with open(source, "rb") as handle:
            raw = handle.read()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise _fail(f"manifest is not valid TOML: {exc}") from exc

    package = doc.get("package")
    if not isinstance(package, dict):
        raise _fail("missing [package] table")
    name = package.get("name")
    version = package.get("version")
    if not isinstance(name, str) or name == "":
        raise _fail("package.name must be a non-empty string")
    if not isinstance(version, str):
        raise _fail("package.version must be a string")

    dependencies: list[Dependency] = []
    dep_table = doc.get("dependencies", {})
    if not isinstance(dep_table, dict):
        raise _fail("[dependencies] must be a table")
    for dep_name, spec in dep_table.items():
        dependencies.append(_parse_dependency(dep_name, spec, target=None))
    target_table = doc.get("target", {})
    if not isinstance(target_table, dict):
        raise _fail("[target] must be a table")
    for cfg, sub in target_table.items():
        if not isinstance(sub, dict):
            raise _fail(f"[target.{cfg}] must be a table")
        for dep_name, spec in sub.get("dependencies", {}).items():
            dependencies.append(_parse_dependency(dep_name, spec, target=cfg))

    features_table = doc.get("features", {})
    if not isinstance(features_table, dict):
        raise _fail("[features] must be a table")
    features: dict[str, tuple[str, ...]] = {}
    for feature_name, tokens in features_table.items():
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise _fail(f"feature {feature_name!r} must list strings")
        features[feature_name] = tuple(tokens)

    manifest = CrateManifest(
        name=name,
        version=version,
        features=features,
        dependencies=tuple(dependencies),
    )
    for feature_name, tokens in manifest.features.items():
        for token in tokens:
            _validate_feature_token(feature_name, token, manifest)
    return manifest


def workspace_members(source: bytes | str | os.PathLike) -> list[str] | None:
    """Member directories when the TOML declares a workspace, else None."""
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        with open(source, "rb") as handle:
            raw = handle.read()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise _fail(f"manifest is not valid TOML: {exc}") from exc
    workspace = doc.get("workspace")
    if workspace is None:
        return None
    if not isinstance(workspace, dict):
        raise _fail("[workspace] must be a table")
    members = workspace.get("members", [])
    if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
        raise _fail("workspace.members must be a list of paths")
    return list(members)
