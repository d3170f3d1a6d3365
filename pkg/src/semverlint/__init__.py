"""semverlint: a semantic-versioning breakage checker for Rust crate APIs.

The library compares two normalized API snapshots of a crate, runs a catalog
of declarative lints over them through a small graph-query engine, and decides
whether the version number actually chosen for the release is large enough for
the changes it ships.  Supporting subsystems read sparse registry indexes,
replay whole version histories in batch, and emit witness crate pairs whose
compile outcomes independently confirm reported breakage.
"""

from __future__ import annotations

__version__ = "0.1.0"
