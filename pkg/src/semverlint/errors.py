"""Exception taxonomy shared across the package.

Every error raised by the library derives from SemverlintError so callers can
catch broadly at tool boundaries while tests pin the precise class.
"""

from __future__ import annotations


class SemverlintError(Exception):
    """Base class for all library errors."""


# --- snapshot loading -------------------------------------------------------

class MalformedInput(SemverlintError):
    """Snapshot or manifest bytes do not match the documented shape."""


class UnsupportedFormatVersion(SemverlintError):
    def __init__(self, found: object) -> None:
        super().__init__(f"unsupported snapshot format_version: {found!r}")
        self.found = found


class DanglingEdge(SemverlintError):
    def __init__(self, item_id: str, referenced: str) -> None:
        super().__init__(f"item {item_id!r} references unknown id {referenced!r}")
        self.item_id = item_id
        self.referenced = referenced


class UnknownItem(SemverlintError):
    def __init__(self, item_id: str) -> None:
        super().__init__(f"no item with id {item_id!r}")
        self.item_id = item_id


class MalformedManifest(MalformedInput):
    """Manifest TOML parses but violates a documented invariant."""


# --- query language ---------------------------------------------------------

class QueryError(SemverlintError):
    """Base for parse/check/execution failures of the query language."""


class QuerySyntaxError(QueryError):
    def __init__(self, line: int, col: int, expected: str) -> None:
        super().__init__(f"syntax error at {line}:{col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class DuplicateOutputName(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"output name {name!r} used more than once")
        self.name = name


class UnknownDirective(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown directive @{name}")
        self.name = name


class UnknownType(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown vertex type {name!r}")
        self.name = name


class UnknownField(QueryError):
    def __init__(self, type_name: str, field: str) -> None:
        super().__init__(f"type {type_name!r} has no property or edge {field!r}")
        self.type_name = type_name
        self.field = field


class TypeMismatch(QueryError):
    pass


class TagUsedBeforeDefinition(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"tag %{name} referenced before its @tag location is visited")
        self.name = name


class DuplicateTagName(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"tag name {name!r} declared more than once")
        self.name = name


class MissingArgument(QueryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"query parameter ${name} has no supplied argument")
        self.name = name


class AdapterFailure(QueryError):
    def __init__(self, context_path: str, cause: BaseException) -> None:
        super().__init__(f"adapter failed at {context_path}: {cause!r}")
        self.context_path = context_path
        self.cause = cause


# --- lint catalog -----------------------------------------------------------

class CatalogError(SemverlintError):
    pass


class LintFormatError(CatalogError):
    """A lint definition file is malformed or violates a catalog invariant."""


class DuplicateLintId(CatalogError):
    def __init__(self, lint_id: str) -> None:
        super().__init__(f"lint id {lint_id!r} declared by more than one file")
        self.lint_id = lint_id


class QueryValidationFailed(CatalogError):
    def __init__(self, lint_id: str, cause: Exception) -> None:
        super().__init__(f"lint {lint_id!r} has an invalid query: {cause}")
        self.lint_id = lint_id
        self.cause = cause


class TemplateUnboundPlaceholder(CatalogError):
    def __init__(self, lint_id: str, name: str) -> None:
        super().__init__(
            f"lint {lint_id!r} template references {{{{{name}}}}} "
            f"which is not a declared query output"
        )
        self.lint_id = lint_id
        self.name = name


# --- checker ----------------------------------------------------------------

class VersionsNotIncreasing(SemverlintError):
    def __init__(self, baseline: str, current: str) -> None:
        super().__init__(f"current version {current} is lower than baseline {baseline}")
        self.baseline = baseline
        self.current = current


class NoUsableBaseline(SemverlintError):
    pass


class UnknownFeature(SemverlintError):
    def __init__(self, name: str) -> None:
        super().__init__(f"feature {name!r} is not declared by the manifest")
        self.name = name


# --- registry index ---------------------------------------------------------

class RegistryError(SemverlintError):
    pass


class InvalidCrateName(RegistryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"invalid crate name {name!r}")
        self.name = name


class CrateNotFound(RegistryError):
    def __init__(self, name: str) -> None:
        super().__init__(f"crate {name!r} not present in the index")
        self.name = name


class MalformedIndexRecord(RegistryError):
    def __init__(self, path: str, line_no: int, reason: str) -> None:
        super().__init__(f"{path}:{line_no}: malformed index record: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


# --- witnesses --------------------------------------------------------------

class WitnessError(SemverlintError):
    pass


class UnsupportedLint(WitnessError):
    def __init__(self, lint_id: str, reason: str = "no witness template") -> None:
        super().__init__(f"no witness can be generated for {lint_id}: {reason}")
        self.lint_id = lint_id
        self.reason = reason


class OracleUnavailable(WitnessError):
    """The compiler oracle cannot run (missing dependency data or command)."""
