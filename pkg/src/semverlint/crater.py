"""Batch checking of many crates' adjacent release pairs.

A job walks a registry index in download-rank order, pairs up consecutive
non-yanked releases, skips pairs that are major version updates or predate a
cutoff, and runs one release check per remaining pair.  Every finding becomes
one record; findings on doc-hidden items are kept but tagged so the noise is
visible rather than silently dropped, and pairs whose snapshots or manifests
cannot be loaded are recorded as failures instead of aborting the run.
Aggregation then counts each lint's reported records three ways: individual
items, distinct releases, and distinct crates.

Pairs are independent work units, so a bounded thread pool may process each
crate's pairs concurrently; record order is fixed by the job definition, not
by completion order.  Per-crate progress can be checkpointed to a JSON file
so an interrupted run resumes without re-checking finished crates.
"""

from __future__ import annotations

import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

from .catalog import LintDefinition
from .checker import CheckConfig, CheckReport, FeatureConfig, Finding, run_check
from .errors import MalformedInput, SemverlintError
from .manifest import parse_manifest
from .registry import RegistryEntry, list_releases, read_rank_file, resolve_locator
from .snapshot import load_snapshot
from .version import Version, VersionBump, compute_actual_bump, parse_version

__all__ = [
    "CraterJob",
    "CraterRecord",
    "JobConfig",
    "JobOutputs",
    "StatsRow",
    "STATUS_COMPILE_FAILED",
    "STATUS_FILTERED",
    "STATUS_REPORTED",
    "aggregate_stats",
    "build_job",
    "enumerate_pairs",
    "execute_job_config",
    "load_job_config",
    "read_records_csv",
    "run_job",
    "write_csv",
]

STATUS_REPORTED = "reported"
STATUS_FILTERED = "filtered_doc_hidden"
STATUS_COMPILE_FAILED = "compile_failed_pair"

_RECORD_COLUMNS = (
    "crate",
    "baseline",
    "current",
    "lint_id",
    "item_path",
    "filename",
    "begin_line",
    "status",
)
_STATS_COLUMNS = ("lint_id", "individual_items", "different_releases", "affected_crates")

# Crate pairs are documented with default features only, unlike the single
# release check whose default mode also keeps plausibly-stable extras.
_JOB_FEATURES = FeatureConfig(mode="none-plus-defaults")

WitnessRunner = Callable[[CheckReport, Finding], str]


@dataclass(frozen=True)
class CraterJob:
    """Which crates to walk and which release pairs qualify."""

    crates: tuple[str, ...]
    published_after: datetime.date | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "crates", tuple(self.crates))


@dataclass(frozen=True)
class CraterRecord:
    """One finding (or pair-level failure) from one release pair."""

    crate: str
    baseline: Version
    current: Version
    lint_id: str
    item_path: str
    filename: str
    begin_line: int | None
    status: str
    witness_outcome: str | None = None


@dataclass(frozen=True)
class StatsRow:
    """Per-lint counts over the reported records."""

    lint_id: str
    individual_items: int
    different_releases: int
    affected_crates: int


def enumerate_pairs(
    releases: Sequence[RegistryEntry],
    *,
    published_after: datetime.date | None = None,
) -> list[tuple[RegistryEntry, RegistryEntry]]:
    """Consecutive non-yanked release pairs worth checking.

    Yanked releases are removed before adjacency is formed, so a release
    neighbouring a yanked one is paired with the next surviving release.
    Pairs that are major updates under the leftmost-nonzero rule are skipped
    (a major release may break anything), as are pairs whose current release
    predates the cutoff.
    """
    alive = [entry for entry in releases if not entry.yanked]
    pairs: list[tuple[RegistryEntry, RegistryEntry]] = []
    for baseline, current in zip(alive, alive[1:]):
        if compute_actual_bump(baseline.version, current.version) is VersionBump.MAJOR:
            continue
        if published_after is not None and current.published_at < published_after:
            continue
        pairs.append((baseline, current))
    return pairs


def _pair_records(
    index_root: str | os.PathLike,
    crate: str,
    baseline: RegistryEntry,
    current: RegistryEntry,
    catalog: Sequence[LintDefinition] | None,
    witness_runner: WitnessRunner | None,
) -> list[CraterRecord]:
    def record(finding: Finding, status: str, outcome: str | None) -> CraterRecord:
        return CraterRecord(
            crate=crate,
            baseline=baseline.version,
            current=current.version,
            lint_id=finding.lint_id,
            item_path=finding.path_text,
            filename=finding.span.filename if finding.span else "",
            begin_line=finding.span.begin_line if finding.span else None,
            status=status,
            witness_outcome=outcome,
        )

    try:
        config = CheckConfig(
            baseline=load_snapshot(resolve_locator(index_root, baseline.snapshot_locator)),
            current=load_snapshot(resolve_locator(index_root, current.snapshot_locator)),
            baseline_manifest=parse_manifest(
                resolve_locator(index_root, baseline.manifest_locator)
            ),
            current_manifest=parse_manifest(
                resolve_locator(index_root, current.manifest_locator)
            ),
            baseline_features=_JOB_FEATURES,
            current_features=_JOB_FEATURES,
        )
        report = run_check(config, catalog)
    except (SemverlintError, OSError):
        return [
            CraterRecord(
                crate=crate,
                baseline=baseline.version,
                current=current.version,
                lint_id="",
                item_path="",
                filename="",
                begin_line=None,
                status=STATUS_COMPILE_FAILED,
                witness_outcome="" if witness_runner is not None else None,
            )
        ]
    rows: list[CraterRecord] = []
    for finding in report.findings:
        outcome = witness_runner(report, finding) if witness_runner is not None else None
        rows.append(record(finding, STATUS_REPORTED, outcome))
    for finding in report.filtered_findings:
        rows.append(record(finding, STATUS_FILTERED, "" if witness_runner else None))
    return rows


def _job_fingerprint(job: CraterJob, witness_enabled: bool) -> list[object]:
    return [
        list(job.crates),
        job.published_after.isoformat() if job.published_after else None,
        witness_enabled,
    ]


def _load_checkpoint(path: Path, fingerprint: list[object]) -> dict[str, list[dict]]:
    if not path.is_file():
        return {}
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        return {}
    if not isinstance(doc, dict) or doc.get("job") != fingerprint:
        return {}
    crates = doc.get("crates")
    return crates if isinstance(crates, dict) else {}


def _save_checkpoint(
    path: Path, fingerprint: list[object], done: dict[str, list[dict]]
) -> None:
    payload = json.dumps({"job": fingerprint, "crates": done}, sort_keys=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    tmp.replace(path)


def _record_to_json(r: CraterRecord) -> dict:
    return {
        "crate": r.crate,
        "baseline": str(r.baseline),
        "current": str(r.current),
        "lint_id": r.lint_id,
        "item_path": r.item_path,
        "filename": r.filename,
        "begin_line": r.begin_line,
        "status": r.status,
        "witness_outcome": r.witness_outcome,
    }


def _record_from_json(doc: dict) -> CraterRecord:
    return CraterRecord(
        crate=doc["crate"],
        baseline=parse_version(doc["baseline"]),
        current=parse_version(doc["current"]),
        lint_id=doc["lint_id"],
        item_path=doc["item_path"],
        filename=doc["filename"],
        begin_line=doc["begin_line"],
        status=doc["status"],
        witness_outcome=doc.get("witness_outcome"),
    )


def run_job(
    job: CraterJob,
    index_root: str | os.PathLike,
    catalog: Sequence[LintDefinition] | None = None,
    *,
    workers: int = 1,
    checkpoint_path: str | os.PathLike | None = None,
    witness_runner: WitnessRunner | None = None,
) -> list[CraterRecord]:
    """Check every qualifying pair of every crate, in job order.

    Per-pair failures become compile_failed_pair records; only a corrupt
    index aborts the run.  Output order is independent of the worker count:
    crates follow the job's crate order and each crate's pairs ascend by
    version, with each pair's reported findings before its filtered ones.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    fingerprint = _job_fingerprint(job, witness_runner is not None)
    done: dict[str, list[dict]] = {}
    if checkpoint_path is not None:
        done = _load_checkpoint(Path(checkpoint_path), fingerprint)

    records: list[CraterRecord] = []
    for crate in job.crates:
        if crate in done:
            records.extend(_record_from_json(doc) for doc in done[crate])
            continue
        releases = list_releases(index_root, crate)
        pairs = enumerate_pairs(releases, published_after=job.published_after)

        def check(pair: tuple[RegistryEntry, RegistryEntry]) -> list[CraterRecord]:
            return _pair_records(
                index_root, crate, pair[0], pair[1], catalog, witness_runner
            )

        if workers == 1 or len(pairs) <= 1:
            per_pair = [check(pair) for pair in pairs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_pair = list(pool.map(check, pairs))
        crate_records = [row for rows in per_pair for row in rows]
        records.extend(crate_records)
        if checkpoint_path is not None:
            done[crate] = [_record_to_json(r) for r in crate_records]
            _save_checkpoint(Path(checkpoint_path), fingerprint, done)
    return records


def aggregate_stats(records: Sequence[CraterRecord]) -> list[StatsRow]:
    """Three counts per lint over the reported records only."""
    by_lint: dict[str, list[CraterRecord]] = {}
    for record in records:
        if record.status == STATUS_REPORTED:
            by_lint.setdefault(record.lint_id, []).append(record)
    rows = [
        StatsRow(
            lint_id=lint_id,
            individual_items=len(group),
            different_releases=len({(r.crate, str(r.current)) for r in group}),
            affected_crates=len({r.crate for r in group}),
        )
        for lint_id, group in by_lint.items()
    ]
    rows.sort(key=lambda row: (-row.individual_items, row.lint_id))
    return rows


def write_csv(
    rows: Sequence[CraterRecord] | Sequence[StatsRow],
    destination: str | os.PathLike,
    *,
    kind: str | None = None,
) -> None:
    """Write records or stats as RFC-4180 CSV (UTF-8, LF, header row).

    ``kind`` ("records" or "stats") is inferred from the first row when
    omitted; an empty sequence needs it spelled out.
    """
    if kind is None:
        if not rows:
            raise ValueError("cannot infer CSV kind from an empty sequence")
        kind = "stats" if isinstance(rows[0], StatsRow) else "records"
    if kind not in ("records", "stats"):
        raise ValueError(f"unknown CSV kind {kind!r}")
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if kind == "stats":
            writer.writerow(_STATS_COLUMNS)
            for row in rows:
                writer.writerow(
                    (
                        row.lint_id,
                        row.individual_items,
                        row.different_releases,
                        row.affected_crates,
                    )
                )
            return
        with_witness = any(r.witness_outcome is not None for r in rows)
        header = _RECORD_COLUMNS + (("witness_outcome",) if with_witness else ())
        writer.writerow(header)
        for r in rows:
            cells = [
                r.crate,
                str(r.baseline),
                str(r.current),
                r.lint_id,
                r.item_path,
                r.filename,
                "" if r.begin_line is None else r.begin_line,
                r.status,
            ]
            if with_witness:
                cells.append(r.witness_outcome or "")
            writer.writerow(cells)


def read_records_csv(source: str | os.PathLike) -> list[CraterRecord]:
    """Parse a records CSV written by write_csv back into records."""
    with open(source, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise MalformedInput(f"{source}: empty records CSV") from None
        with_witness = header == _RECORD_COLUMNS + ("witness_outcome",)
        if not with_witness and header != _RECORD_COLUMNS:
            raise MalformedInput(f"{source}: unexpected records header {header!r}")
        records = []
        for row in reader:
            expected = len(_RECORD_COLUMNS) + (1 if with_witness else 0)
            if len(row) != expected:
                raise MalformedInput(
                    f"{source}: row has {len(row)} fields, expected {expected}"
                )
            records.append(
                CraterRecord(
                    crate=row[0],
                    baseline=parse_version(row[1]),
                    current=parse_version(row[2]),
                    lint_id=row[3],
                    item_path=row[4],
                    filename=row[5],
                    begin_line=int(row[6]) if row[6] else None,
                    status=row[7],
                    witness_outcome=row[8] if with_witness else None,
                )
            )
    return records


# --- job configuration --------------------------------------------------------


@dataclass(frozen=True)
class JobConfig:
    """Parsed job configuration file."""

    crate_list: str | None = None
    top: int | None = None
    published_after: datetime.date | None = None
    workers: int = 1
    records_csv: str = "records.csv"
    stats_csv: str = "stats.csv"
    figure: str = "stats.png"
    checkpoint: str | None = None
    witness: bool = False


_CONFIG_KEYS = frozenset(
    {
        "crate_list",
        "top",
        "published_after",
        "workers",
        "records_csv",
        "stats_csv",
        "figure",
        "checkpoint",
        "witness",
    }
)


def load_job_config(source: str | os.PathLike) -> JobConfig:
    """Read a TOML job configuration file."""
    raw = Path(source).read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise MalformedInput(f"{source}: invalid job config: {exc}") from exc
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    if unknown:
        raise MalformedInput(f"{source}: unknown job config keys {unknown}")

    def _opt_str(key: str) -> str | None:
        value = doc.get(key)
        if value is not None and not isinstance(value, str):
            raise MalformedInput(f"{source}: {key} must be a string")
        return value

    published_after = doc.get("published_after")
    if isinstance(published_after, datetime.datetime):
        published_after = published_after.date()
    elif isinstance(published_after, str):
        try:
            published_after = datetime.date.fromisoformat(published_after)
        except ValueError as exc:
            raise MalformedInput(f"{source}: published_after: {exc}") from exc
    elif published_after is not None and not isinstance(published_after, datetime.date):
        raise MalformedInput(f"{source}: published_after must be a date")

    top = doc.get("top")
    if top is not None and (not isinstance(top, int) or isinstance(top, bool) or top < 1):
        raise MalformedInput(f"{source}: top must be a positive integer")
    workers = doc.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise MalformedInput(f"{source}: workers must be a positive integer")
    witness = doc.get("witness", False)
    if not isinstance(witness, bool):
        raise MalformedInput(f"{source}: witness must be a boolean")

    return JobConfig(
        crate_list=_opt_str("crate_list"),
        top=top,
        published_after=published_after,
        workers=workers,
        records_csv=_opt_str("records_csv") or "records.csv",
        stats_csv=_opt_str("stats_csv") or "stats.csv",
        figure=_opt_str("figure") or "stats.png",
        checkpoint=_opt_str("checkpoint"),
        witness=witness,
    )


def build_job(config: JobConfig, index_root: str | os.PathLike) -> CraterJob:
    """Resolve the configured crate list against an index root."""
    if config.crate_list is None:
        names = read_rank_file(index_root)
    else:
        listed = Path(config.crate_list)
        if not listed.is_absolute():
            listed = Path(index_root) / listed
        names = [
            line.strip()
            for line in listed.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    if config.top is not None:
        names = names[: config.top]
    return CraterJob(crates=tuple(names), published_after=config.published_after)


@dataclass(frozen=True)
class JobOutputs:
    """Everything one job execution produced and where it was written."""

    records: tuple[CraterRecord, ...]
    stats: tuple[StatsRow, ...]
    records_path: Path
    stats_path: Path
    figure_path: Path


def execute_job_config(
    config: JobConfig,
    index_root: str | os.PathLike,
    out_dir: str | os.PathLike,
    catalog: Sequence[LintDefinition] | None = None,
    *,
    witness_runner: WitnessRunner | None = None,
) -> JobOutputs:
    """Run a configured job and write its CSVs and figure under out_dir."""
    from .figures import render_stats_figure

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.witness and witness_runner is None:
        from .witness import stub_witness_runner

        witness_runner = stub_witness_runner()
    job = build_job(config, index_root)
    checkpoint = out / config.checkpoint if config.checkpoint else None
    records = run_job(
        job,
        index_root,
        catalog,
        workers=config.workers,
        checkpoint_path=checkpoint,
        witness_runner=witness_runner,
    )
    stats = aggregate_stats(records)
    records_path = out / config.records_csv
    stats_path = out / config.stats_csv
    figure_path = out / config.figure
    write_csv(records, records_path, kind="records")
    write_csv(stats, stats_path, kind="stats")
    render_stats_figure(stats, figure_path)
    return JobOutputs(
        records=tuple(records),
        stats=tuple(stats),
        records_path=records_path,
        stats_path=stats_path,
        figure_path=figure_path,
    )
